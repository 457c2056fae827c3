"""Quantum strategies: ±1 observables, canonical CHSH(n) and FFL strategies, perturbations."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, LabelError, ShapeError
from .games import CHSH_OPTIMAL_BIAS, GameMatrix, bias, build_chsh_game, chsh_bob_labels
from .tensor import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BipartiteState,
    as_cmatrix,
    dagger,
    is_hermitian,
    kron_all,
)

OBSERVABLE_TOL = 1e-10


def check_observable(m, tol: float = OBSERVABLE_TOL, name: str = "observable") -> np.ndarray:
    """Validate a ±1 observable (Hermitian involution) and return it as an array."""
    arr = as_cmatrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} is not square: {arr.shape}")
    if not is_hermitian(arr, tol):
        raise ShapeError(f"{name} is not Hermitian")
    if np.max(np.abs(arr @ arr - np.eye(arr.shape[0]))) > tol:
        raise ShapeError(f"{name} does not square to the identity")
    return arr


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Strategy:
    """Observables for each player plus a shared pure state."""

    alice: Mapping
    bob: Mapping
    state: BipartiteState

    def __post_init__(self):
        alice = {lab: _frozen(check_observable(m, name=f"A[{lab}]")) for lab, m in self.alice.items()}
        bob = {lab: _frozen(check_observable(m, name=f"B[{lab}]")) for lab, m in self.bob.items()}
        for lab, m in alice.items():
            if m.shape[0] != self.state.dim_a:
                raise ShapeError(f"A[{lab}] has dimension {m.shape[0]}, state has dA={self.state.dim_a}")
        for lab, m in bob.items():
            if m.shape[0] != self.state.dim_b:
                raise ShapeError(f"B[{lab}] has dimension {m.shape[0]}, state has dB={self.state.dim_b}")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @property
    def dim_a(self) -> int:
        return self.state.dim_a

    @property
    def dim_b(self) -> int:
        return self.state.dim_b

    def alice_family(self, n: int) -> list[np.ndarray]:
        """``[A_1, ..., A_n]`` for a CHSH(n)-shaped strategy."""
        try:
            return [self.alice[i] for i in range(1, n + 1)]
        except KeyError as exc:
            raise LabelError(f"missing Alice label {exc.args[0]}") from None


@dataclass(frozen=True)
class BlockStructure:
    block_size: int
    tail_alice: tuple = ()
    tail_bob: tuple = ()

    def __post_init__(self):
        for c in (*self.tail_alice, *self.tail_bob):
            if c not in (1, -1):
                raise DomainError(f"tail scalars must be exactly ±1, got {c!r}")


def block_size(n: int) -> int:
    return 2 ** (n // 2)


def build_anticommuting_family(n: int) -> list[np.ndarray]:
    """Jordan-Wigner chain of ``n`` pairwise anticommuting observables on ``2^(n//2)``."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError("n must be ≥ 2")
    k = n // 2
    eye = np.eye(2, dtype=complex)
    family = []
    for r in range(1, k + 1):
        for p in (PAULI_X, PAULI_Y):
            family.append(kron_all(*([PAULI_Z] * (r - 1) + [p] + [eye] * (k - r))))
    if n % 2:
        family.append(kron_all(*([PAULI_Z] * k)))
    return family


def maximally_entangled(d: int) -> BipartiteState:
    if d < 1:
        raise DomainError("d must be positive")
    return BipartiteState(d, d, np.eye(d, dtype=complex).reshape(-1) / sqrt(d))


def chsh_strategy_from_family(family: Sequence[np.ndarray], state: BipartiteState) -> Strategy:
    """Alice plays the family; Bob plays ``((A_j ± A_k)/√2)^T``."""
    n = len(family)
    alice = {i + 1: a for i, a in enumerate(family)}
    bob = {}
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            aj, ak = family[j - 1], family[k - 1]
            bob[(j, k)] = ((aj + ak) / sqrt(2)).T
            bob[(k, j)] = ((aj - ak) / sqrt(2)).T
    return Strategy(alice, {lab: bob[lab] for lab in chsh_bob_labels(n)}, state)


def build_optimal_chsh_strategy(n: int) -> Strategy:
    family = build_anticommuting_family(n)
    return chsh_strategy_from_family(family, maximally_entangled(family[0].shape[0]))


def build_block_state(n: int, l: int, block_count: int = 1) -> BipartiteState:
    """Uniform superposition of ``|ii>`` over the ``l``-th block (1-based)."""
    if n < 2:
        raise DomainError("n must be ≥ 2")
    if not 1 <= l <= block_count:
        raise DomainError(f"block index {l} outside 1..{block_count}")
    size = block_size(n)
    dim = size * block_count
    amp = np.zeros((dim, dim), dtype=complex)
    idx = np.arange((l - 1) * size, l * size)
    amp[idx, idx] = 1 / sqrt(size)
    return BipartiteState(dim, dim, amp.reshape(-1))


def product_phase(n: int) -> complex:
    """Phase making ``phase * A_1 ... A_n`` an involution for anticommuting ``A_i``.

    The raw product squares to ``(-1)^(n(n-1)/2) I``.
    """
    return 1.0 if (n * (n - 1) // 2) % 2 == 0 else 1j


def normalized_product(family: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(family[0].shape[0], dtype=complex)
    for a in family:
        out = out @ a
    return product_phase(len(family)) * out


def build_reference_strategy(n: int, doubled: bool | None = None) -> Strategy:
    """The reference system used by the intertwiner.

    For odd ``n`` (default) the family is doubled to ``diag(±A_i, ∓A_i)`` so
    that the phase-normalised product is ``(-1)^n diag(I, -I)``; the state is
    maximally entangled on the doubled space.
    """
    if doubled is None:
        doubled = n % 2 == 1
    family = build_anticommuting_family(n)
    if not doubled:
        return chsh_strategy_from_family(family, maximally_entangled(family[0].shape[0]))
    d = family[0].shape[0]
    zero = np.zeros((d, d), dtype=complex)
    if n % 2 == 0:
        sign = 1.0
    else:
        # Pick the block signs so the upper block of the product is (-1)^n I.
        prod = normalized_product(family)
        sign = 1.0 if np.allclose(prod, -np.eye(d)) else -1.0
    doubled_family = [np.block([[sign * a, zero], [zero, (-sign if n % 2 else sign) * a]]) for a in family]
    return chsh_strategy_from_family(doubled_family, maximally_entangled(2 * d))


def random_unit_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (x + dagger(x)) / 2
    return h / np.linalg.norm(h, 2)


def _conjugate(m: np.ndarray, h: np.ndarray, theta: float) -> np.ndarray:
    mu, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(1j * theta * mu)) @ dagger(vecs)
    out = u @ m @ dagger(u)
    return (out + dagger(out)) / 2


def measure_epsilon(s: Strategy, game: GameMatrix, optimum: float) -> float:
    return max(0.0, 1.0 - bias(game, s) / optimum)


def perturb_strategy(
    s: Strategy,
    theta: float,
    seed: int,
    game: GameMatrix | None = None,
    optimum: float = CHSH_OPTIMAL_BIAS,
) -> tuple[Strategy, float]:
    """Conjugate every observable by ``exp(i theta H)``, one seeded ``H`` per label.

    Alice's labels are drawn first, then Bob's, each in insertion order.  The
    state is untouched.  ``game`` defaults to CHSH(n) with ``n`` Alice labels.
    """
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    rng = np.random.default_rng(seed)
    alice = {lab: _conjugate(m, random_unit_hermitian(s.dim_a, rng), theta) for lab, m in s.alice.items()}
    bob = {lab: _conjugate(m, random_unit_hermitian(s.dim_b, rng), theta) for lab, m in s.bob.items()}
    out = Strategy(alice, bob, s.state)
    if game is None:
        game = build_chsh_game(len(s.alice))
    return out, measure_epsilon(out, game, optimum)


@dataclass(frozen=True)
class FflStrategy:
    """Two views of the FFL optimum.

    ``deterministic`` embeds the classical witness as 1x1 ±1 observables on a
    product state; ``correlator`` is a Bell-state strategy whose CHSH(2)
    correlators are ``(+2/3, +2/3, +2/3, -2/3)``.
    """

    deterministic: Strategy
    correlator: Strategy
    witness: tuple = field(default=())


def _ffl_correlator_strategy() -> Strategy:
    # Bloch vectors: a1.a2 = -1/9, b1 bisects them, b2 tilts out of their plane.
    c, s = 2 / 3, sqrt(5) / 3
    a1 = c * PAULI_Z + s * PAULI_X
    a2 = c * PAULI_Z - s * PAULI_X
    b12 = PAULI_Z
    b21 = (2 / sqrt(5)) * PAULI_X + (1 / sqrt(5)) * PAULI_Y
    # On the Bell state <A (x) B^T> = tr(A B) / 2, so Bob plays transposes.
    return Strategy({1: a1, 2: a2}, {(1, 2): b12.T, (2, 1): b21.T}, maximally_entangled(2))


def build_ffl_strategy() -> FflStrategy:
    from .games import binary_game_values, build_ffl_game

    game = build_ffl_game()
    vals = binary_game_values(game)
    alice = {q: np.array([[(-1) ** a]]) for q, a in zip(game.alice_questions, vals.alice)}
    bob = {q: np.array([[(-1) ** b]]) for q, b in zip(game.bob_questions, vals.bob)}
    deterministic = Strategy(alice, bob, BipartiteState(1, 1, np.array([1.0])))
    return FflStrategy(deterministic, _ffl_correlator_strategy(), (vals.alice, vals.bob))


def assemble_block_strategy(
    blocks: Sequence[Strategy],
    weights: Sequence[float],
    structure: BlockStructure | None = None,
) -> Strategy:
    """Direct sum of block strategies with state ``sum_l sqrt(w_l) psi_l``.

    Every block must carry the same labels.  Optional ±1 tails from
    ``structure`` are appended as a final 1x1 block that the state does not
    touch.
    """
    if len(blocks) != len(weights) or not blocks:
        raise ShapeError("need one weight per block")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise DomainError("weights must be a probability vector")
    alice_labels = list(blocks[0].alice)
    bob_labels = list(blocks[0].bob)
    for b in blocks:
        if list(b.alice) != alice_labels or list(b.bob) != bob_labels:
            raise LabelError("blocks carry different labels")
    tail_a = tuple(structure.tail_alice) if structure else ()
    tail_b = tuple(structure.tail_bob) if structure else ()
    if tail_a and len(tail_a) != len(alice_labels) or tail_b and len(tail_b) != len(bob_labels):
        raise ShapeError("tail length must match the number of labels")
    da = sum(b.dim_a for b in blocks) + (1 if tail_a else 0)
    db = sum(b.dim_b for b in blocks) + (1 if tail_b else 0)

    def direct_sum(mats, tail, dim):
        out = np.zeros((dim, dim), dtype=complex)
        off = 0
        for m in mats:
            out[off : off + m.shape[0], off : off + m.shape[0]] = m
            off += m.shape[0]
        if tail is not None:
            out[off, off] = tail
        return out

    alice = {
        lab: direct_sum([b.alice[lab] for b in blocks], tail_a[i] if tail_a else None, da)
        for i, lab in enumerate(alice_labels)
    }
    bob = {
        lab: direct_sum([b.bob[lab] for b in blocks], tail_b[i] if tail_b else None, db)
        for i, lab in enumerate(bob_labels)
    }
    amp = np.zeros((da, db), dtype=complex)
    oa = ob = 0
    for wl, b in zip(w, blocks):
        amp[oa : oa + b.dim_a, ob : ob + b.dim_b] = sqrt(wl) * b.state.amplitudes.reshape(b.dim_a, b.dim_b)
        oa += b.dim_a
        ob += b.dim_b
    return Strategy(alice, bob, BipartiteState(da, db, amp.reshape(-1)))
