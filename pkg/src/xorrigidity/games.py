"""XOR game matrices, the FFL binary game, and classical brute-force oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, sqrt
from typing import TYPE_CHECKING, Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DomainError, LabelError, ShapeError
from .tensor import apply_local

if TYPE_CHECKING:
    from .strategies import Strategy

XOR = "XOR"
BINARY_PREDICATE = "BINARY_PREDICATE"

CHSH_OPTIMAL_BIAS = 1 / sqrt(2)
FFL_VALUE = Fraction(2, 3)
NORMALIZATION_TOL = 1e-12
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class GameMatrix:
    """Real game matrix ``G[s, t] = V(s, t) * pi(s, t)``.

    ``exact`` optionally carries the same entries as Fractions so that
    classical values can be reported without rounding.
    """

    alice_labels: tuple
    bob_labels: tuple
    entries: np.ndarray
    kind: str = XOR
    name: str = "custom"
    exact: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        if g.shape != (len(self.alice_labels), len(self.bob_labels)):
            raise ShapeError(
                f"entries {g.shape} do not match {len(self.alice_labels)} x {len(self.bob_labels)} labels"
            )
        if not np.all(np.isfinite(g)):
            raise ShapeError("game matrix has non-finite entries")
        if abs(np.abs(g).sum() - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"sum of |G_st| is {np.abs(g).sum()!r}, expected 1")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)
        object.__setattr__(self, "alice_labels", tuple(self.alice_labels))
        object.__setattr__(self, "bob_labels", tuple(self.bob_labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def signed_sum(self) -> float:
        return float(self.entries.sum())

    @property
    def absolute_sum(self) -> float:
        return float(np.abs(self.entries).sum())

    def predicate_signs(self) -> np.ndarray:
        """``V(s, t)`` on the support, 0 elsewhere."""
        return np.sign(self.entries)

    def distribution(self) -> np.ndarray:
        """``pi(s, t) = |G_st|``."""
        return np.abs(self.entries)


def chsh_bob_labels(n: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(1, n + 1) for k in range(1, n + 1) if j != k]


def build_chsh_game(n: int) -> GameMatrix:
    """CHSH(n): Alice gets ``i``, Bob gets an ordered pair ``(j, k)``.

    For every ``i < j`` the entries at ``(i,(i,j))``, ``(j,(i,j))`` and
    ``(i,(j,i))`` are ``+w`` and ``(j,(j,i))`` is ``-w`` with
    ``w = 1 / (4 C(n, 2))``.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError("n must be ≥ 2")
    n = int(n)
    alice = list(range(1, n + 1))
    bob = chsh_bob_labels(n)
    col = {lab: c for c, lab in enumerate(bob)}
    w = Fraction(1, 4 * comb(n, 2))
    exact = [[Fraction(0)] * len(bob) for _ in alice]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            exact[i - 1][col[(i, j)]] += w
            exact[j - 1][col[(i, j)]] += w
            exact[i - 1][col[(j, i)]] += w
            exact[j - 1][col[(j, i)]] -= w
    entries = np.array([[float(x) for x in row] for row in exact])
    return GameMatrix(
        alice, bob, entries, kind=XOR, name=f"chsh({n})",
        exact=tuple(tuple(r) for r in exact),
    )


def chsh_order(g: GameMatrix) -> int | None:
    """Return ``n`` when ``g`` has exactly the CHSH(n) entries, else None."""
    n = len(g.alice_labels)
    if n < 2 or g.shape != (n, n * (n - 1)):
        return None
    ref = build_chsh_game(n)
    if g.alice_labels != ref.alice_labels or g.bob_labels != ref.bob_labels:
        return None
    if np.max(np.abs(g.entries - ref.entries)) > NORMALIZATION_TOL:
        return None
    return n


def bias(g: GameMatrix, s: "Strategy") -> float:
    """Success bias ``sum_st G_st <psi| A_s (x) B_t |psi>``."""
    psi = s.state
    missing = [lab for lab in g.alice_labels if lab not in s.alice]
    missing += [lab for lab in g.bob_labels if lab not in s.bob]
    if missing:
        raise LabelError(f"strategy has no observable for labels {missing}")
    xs = [apply_local(psi, a=s.alice[lab]) for lab in g.alice_labels]
    ys = [apply_local(psi, b=s.bob[lab]) for lab in g.bob_labels]
    total = 0.0
    rows, cols = np.nonzero(g.entries)
    for r, c in zip(rows, cols):
        val = np.vdot(xs[r], ys[c])
        if abs(val.imag) > IMAG_TOL:
            raise ShapeError(
                f"correlator ({g.alice_labels[r]}, {g.bob_labels[c]}) has imaginary part {val.imag:.3e}"
            )
        total += g.entries[r, c] * val.real
    return float(total)


def correlator(s: "Strategy", alice_label, bob_label) -> float:
    val = np.vdot(s.state.amplitudes, apply_local(s.state, s.alice[alice_label], s.bob[bob_label]))
    return float(val.real)


def win_probability(beta: float, tol: float = 1e-9) -> float:
    if not -1.0 - tol <= beta <= 1.0 + tol:
        raise DomainError(f"bias {beta!r} outside [-1, 1]")
    return (beta + 1.0) / 2.0


class ClassicalOptimum(NamedTuple):
    value: Fraction | float
    alice: tuple[int, ...]
    bob: tuple[int, ...]


def classical_bias_bruteforce(g: GameMatrix, cap_bits: int = 26) -> ClassicalOptimum:
    """Exact classical bias ``max sum G_st a_s b_t`` over ±1 assignments.

    Only Alice's signs are enumerated: for fixed ``a`` the best ``b_t`` is
    the sign of column ``t`` of ``a^T G`` (``+1`` on ties).  Ties between
    assignments go to the first one in ``itertools.product((1, -1))`` order.
    """
    n, m = g.shape
    if n + m > cap_bits:
        raise CapacityError(f"2^{n + m} assignments exceed the 2^{cap_bits} cap")
    signs = np.array(list(itertools.product((1, -1), repeat=n)), dtype=float)
    col_sums = signs @ g.entries
    values = np.abs(col_sums).sum(axis=1)
    best = values.max()
    idx = int(np.flatnonzero(values >= best - 1e-12)[0])
    a = tuple(int(x) for x in signs[idx])
    b = tuple(1 if x >= -1e-15 else -1 for x in col_sums[idx])
    if g.exact is not None:
        value = sum(
            (g.exact[s][t] * a[s] * b[t] for s in range(n) for t in range(m)),
            Fraction(0),
        )
    else:
        value = float(np.array(a) @ g.entries @ np.array(b))
    return ClassicalOptimum(value, a, b)


Predicate = Callable[[int, int, Hashable, Hashable], bool]


def ffl_predicate(a: int, b: int, s: int, t: int) -> bool:
    return (a | s) != (b | t)


@dataclass(frozen=True)
class BinaryGame:
    """Two-player game with answer bits and an arbitrary win predicate."""

    alice_questions: tuple
    bob_questions: tuple
    distribution: dict
    predicate: Predicate
    name: str = "binary"

    def __post_init__(self):
        dist = {k: Fraction(v) for k, v in self.distribution.items()}
        if sum(dist.values()) != 1:
            raise DomainError(f"question probabilities sum to {sum(dist.values())}")
        if any(p < 0 for p in dist.values()):
            raise DomainError("question probabilities must be nonnegative")
        for s, t in dist:
            if s not in self.alice_questions or t not in self.bob_questions:
                raise LabelError(f"question pair {(s, t)} uses unknown labels")
        object.__setattr__(self, "distribution", dist)

    def predicate_table(self) -> dict:
        return {
            (s, t): [[bool(self.predicate(a, b, s, t)) for b in (0, 1)] for a in (0, 1)]
            for (s, t) in self.distribution
        }

    def deterministic_value(self, alice: Sequence[int], bob: Sequence[int]) -> Fraction:
        """Win rate of answer functions given as bit lists indexed like the question tuples."""
        ia = {q: i for i, q in enumerate(self.alice_questions)}
        ib = {q: i for i, q in enumerate(self.bob_questions)}
        return sum(
            (p for (s, t), p in self.distribution.items()
             if self.predicate(alice[ia[s]], bob[ib[t]], s, t)),
            Fraction(0),
        )


def build_ffl_game(predicate: Predicate | None = None) -> BinaryGame:
    """FFL game: uniform over (0,0), (0,1), (1,0); default rule ``a∨s ≠ b∨t``."""
    third = Fraction(1, 3)
    return BinaryGame(
        alice_questions=(0, 1),
        bob_questions=(0, 1),
        distribution={(0, 0): third, (0, 1): third, (1, 0): third},
        predicate=predicate or ffl_predicate,
        name="ffl",
    )


def build_chsh_binary_game() -> BinaryGame:
    """Plain CHSH as a binary game: win iff ``a xor b = s and t``."""
    quarter = Fraction(1, 4)
    return BinaryGame(
        alice_questions=(0, 1),
        bob_questions=(0, 1),
        distribution={(s, t): quarter for s in (0, 1) for t in (0, 1)},
        predicate=lambda a, b, s, t: (a ^ b) == (s & t),
        name="chsh-binary",
    )


class BinaryGameValues(NamedTuple):
    value: Fraction
    bias: Fraction
    alice: tuple[int, ...]
    bob: tuple[int, ...]


def binary_game_values(game: BinaryGame) -> BinaryGameValues:
    """Best deterministic win probability, its bias ``2w - 1`` and a witness."""
    na, nb = len(game.alice_questions), len(game.bob_questions)
    if na > 8 or nb > 8:
        raise CapacityError("at most 8 questions per side are enumerated")
    best = None
    for alice in itertools.product((0, 1), repeat=na):
        for bob in itertools.product((0, 1), repeat=nb):
            v = game.deterministic_value(alice, bob)
            if best is None or v > best[0]:
                best = (v, alice, bob)
    value, alice, bob = best
    return BinaryGameValues(value, 2 * value - 1, alice, bob)


def binary_win_probability(game: BinaryGame, s: "Strategy") -> float:
    """Quantum win probability when answer bit ``a`` means outcome ``(-1)^a``."""
    psi = s.state
    total = 0.0
    for (qa, qb), p in game.distribution.items():
        a_obs, b_obs = s.alice[qa], s.bob[qb]
        eye_a = np.eye(a_obs.shape[0])
        eye_b = np.eye(b_obs.shape[0])
        for a in (0, 1):
            pa = (eye_a + (-1) ** a * a_obs) / 2
            for b in (0, 1):
                if not game.predicate(a, b, qa, qb):
                    continue
                pb = (eye_b + (-1) ** b * b_obs) / 2
                prob = np.vdot(psi.amplitudes, apply_local(psi, pa, pb)).real
                total += float(p) * prob
    return total
