"""Rigidity checks: optimality residuals, the intertwiner T, and every quantitative bound.

Each check returns a :class:`BoundReport` comparing a measured residual with
the stated bound evaluated at the measured ``epsilon``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DegenerateIntertwinerError, DomainError, LabelError, ShapeError, SingularOperatorError
from .games import CHSH_OPTIMAL_BIAS
from .strategies import Strategy, build_reference_strategy, normalized_product
from .tensor import DEFAULT_ENTRY_CAP, apply_local, frobenius_norm, kron, unitary_direction

PASS_SLACK = 1e-9
IDENTITY_BOUND = 1e-9

BOUND_IDS = (
    "THM1_R1",
    "THM1_R2",
    "LEMMA3_XOR",
    "LEMMA3_FFL",
    "LEMMA4",
    "LEMMA5",
    "LEMMA7",
    "THM2_ALICE",
    "THM2_BOB",
    "FFL_ALICE",
    "FFL_BOB",
    "T_UNITNORM",
    "LEMMA6_IDENTITY",
)

LEMMA3_XOR_CONST = (1 + sqrt(2)) ** 2
LEMMA3_FFL_CONST = 2 * (7 / 3) ** 2
LEMMA3_PROOF_CONSTS = {"2(5/2)^2": 2 * (5 / 2) ** 2, "2(7/2)^2": 2 * (7 / 2) ** 2}
LEMMA4_CONST = 17.0
LEMMA5_CONST = 100 / 9
LEMMA7_CONST = 8200 * sqrt(2) / 27
LEMMA7_PROOF_CONST = 2200 / 27
THM2_CONSTS = {"XOR": (12.0, 17.0), "FFL": (9.0, 44 / 3)}


@dataclass(frozen=True)
class BoundReport:
    bound_id: str
    n: int
    epsilon: float
    residual: float
    stated_bound: float
    seed: int | None = None
    theta: float | None = None
    game: str = "chsh"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.bound_id not in BOUND_IDS:
            raise DomainError(f"unknown bound id {self.bound_id!r}")

    @property
    def passed(self) -> bool:
        return self.residual <= self.stated_bound + PASS_SLACK

    @property
    def slack(self) -> float:
        return self.stated_bound - self.residual

    def with_context(self, seed=None, theta=None, game=None) -> "BoundReport":
        return BoundReport(
            self.bound_id, self.n, self.epsilon, self.residual, self.stated_bound,
            seed=seed, theta=theta, game=game or self.game, metadata=self.metadata,
        )


def _sq(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real)


def _norm(v: np.ndarray) -> float:
    return sqrt(_sq(v))


def _family(s: Strategy, n: int) -> list[np.ndarray]:
    fam = s.alice_family(n)
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j != k and (j, k) not in s.bob:
                raise ShapeError(f"strategy is not CHSH({n})-shaped: missing B[{(j, k)}]")
    return fam


def infer_n(s: Strategy) -> int:
    return len(s.alice)


def theorem1_residuals(s: Strategy, n: int | None = None) -> tuple[float, float]:
    """``(R1, R2)``: Alice-side and Bob-side sums of squared errors."""
    n = n or infer_n(s)
    fam = _family(s, n)
    psi = s.state
    r1 = r2 = 0.0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ai, aj = fam[i - 1], fam[j - 1]
            bij, bji = s.bob[(i, j)], s.bob[(j, i)]
            r1 += _sq(apply_local(psi, a=(ai + aj) / sqrt(2)) - apply_local(psi, b=bij))
            r1 += _sq(apply_local(psi, a=(ai - aj) / sqrt(2)) - apply_local(psi, b=bji))
            r2 += _sq(apply_local(psi, a=ai) - apply_local(psi, b=(bij + bji) / sqrt(2)))
            r2 += _sq(apply_local(psi, a=aj) - apply_local(psi, b=(bij - bji) / sqrt(2)))
    return r1, r2


def theorem1_reports(s: Strategy, epsilon: float, n: int | None = None) -> list[BoundReport]:
    n = n or infer_n(s)
    r1, r2 = theorem1_residuals(s, n)
    bound = 2 * n * (n - 1) * epsilon
    return [BoundReport("THM1_R1", n, epsilon, r1, bound), BoundReport("THM1_R2", n, epsilon, r2, bound)]


def anticommutator_residual(s: Strategy, n: int | None = None) -> float:
    n = n or infer_n(s)
    fam = s.alice_family(n)
    total = 0.0
    for i, j in itertools.combinations(range(n), 2):
        anti = (fam[i] @ fam[j] + fam[j] @ fam[i]) / 2
        total += _sq(apply_local(s.state, a=anti))
    return total


def lemma3_anticommutator_residual(
    s: Strategy, variant: str, epsilon: float, n: int | None = None
) -> BoundReport:
    n = n or infer_n(s)
    res = anticommutator_residual(s, n)
    scale = n * (n - 1) * epsilon
    if variant == "XOR":
        return BoundReport("LEMMA3_XOR", n, epsilon, res, LEMMA3_XOR_CONST * scale)
    if variant == "FFL":
        meta = {f"proof_chain_{k}": c * scale for k, c in LEMMA3_PROOF_CONSTS.items()}
        return BoundReport("LEMMA3_FFL", n, epsilon, res, LEMMA3_FFL_CONST * scale, metadata=meta)
    raise DomainError(f"variant must be XOR or FFL, got {variant!r}")


def signed_bob(s: Strategy, k: int, l: int) -> np.ndarray:
    """``±B_kl + B_lk`` with ``+`` exactly when ``l > k``."""
    sign = 1.0 if l > k else -1.0
    try:
        return sign * s.bob[(k, l)] + s.bob[(l, k)]
    except KeyError as exc:
        raise LabelError(f"missing Bob label {exc.args[0]}") from None


def lemma4_check(s: Strategy, k: int, l: int, epsilon: float, n: int | None = None) -> BoundReport:
    n = n or infer_n(s)
    if k == l:
        raise DomainError("k and l must differ")
    m = signed_bob(s, k, l)
    u, dropped = unitary_direction(m)
    if dropped > m.shape[0] / 2:
        raise SingularOperatorError(
            f"|±B_{k}{l} + B_{l}{k}| is singular on {dropped} of {m.shape[0]} eigenvalues"
        )
    res = _norm(apply_local(s.state, a=s.alice[k]) - apply_local(s.state, b=u))
    return BoundReport(
        "LEMMA4", n, epsilon, res, LEMMA4_CONST * sqrt(n * epsilon),
        metadata={"k": k, "l": l, "dropped": dropped},
    )


def sign_parity(i: int, j: Sequence[int]) -> int:
    """``(-1)^(sum_{m<i} j_m)``: swaps to move ``A_i`` leftward past ``A_m^{j_m}``, m < i."""
    if not 1 <= i <= len(j):
        raise DomainError(f"index {i} outside 1..{len(j)}")
    return -1 if sum(j[: i - 1]) % 2 else 1


def right_sign_parity(i: int, j: Sequence[int]) -> int:
    """``(-1)^(sum_{m>i} j_m)``: swaps to move ``A_i`` rightward past ``A_m^{j_m}``, m > i."""
    if not 1 <= i <= len(j):
        raise DomainError(f"index {i} outside 1..{len(j)}")
    return -1 if sum(j[i:]) % 2 else 1


def flip(j: Sequence[int], i: int) -> tuple[int, ...]:
    out = list(j)
    out[i - 1] ^= 1
    return tuple(out)


def ordered_product(family: Sequence[np.ndarray], j: Sequence[int]) -> np.ndarray:
    """``A_1^{j_1} A_2^{j_2} ... A_n^{j_n}``."""
    if len(j) != len(family):
        raise ShapeError(f"bit vector of length {len(j)} for {len(family)} observables")
    out = np.eye(family[0].shape[0], dtype=complex)
    for a, bit in zip(family, j):
        if bit:
            out = out @ a
    return out


def bit_vectors(n: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n))


def lemma5_residual(s: Strategy, j: Sequence[int], i: int = 1, n: int | None = None) -> float:
    n = n or infer_n(s)
    fam = s.alice_family(n)
    lhs = fam[i - 1] @ ordered_product(fam, j)
    rhs = sign_parity(i, j) * ordered_product(fam, flip(j, i))
    return _norm(apply_local(s.state, a=lhs - rhs))


def lemma5_check(
    s: Strategy, j: Sequence[int], epsilon: float, i: int = 1, n: int | None = None
) -> BoundReport:
    """Permutation error ``||((A_i A^j - sign(i, j) A^{j ⊕ e_i}) (x) I) psi||``."""
    n = n or infer_n(s)
    res = lemma5_residual(s, j, i, n)
    return BoundReport(
        "LEMMA5", n, epsilon, res, LEMMA5_CONST * n**2 * sqrt(epsilon),
        metadata={"i": i, "j": list(j)},
    )


def lemma6_product_identity(n: int, reference: Strategy | None = None) -> BoundReport:
    """Signed block identity for the doubled odd-``n`` reference family.

    The phase-normalised product (an involution) must equal
    ``(-1)^n diag(I, -I)``, and it must act on the reference state as the
    correspondingly signed split sum of ``|jj>``.
    """
    if n % 2 == 0:
        raise DomainError("the signed block identity applies to odd n only")
    ref = reference or build_reference_strategy(n, doubled=True)
    fam = ref.alice_family(n)
    prod = normalized_product(fam)
    dim = prod.shape[0]
    half = dim // 2
    target = (-1) ** n * np.diag(np.r_[np.ones(half), -np.ones(dim - half)]).astype(complex)
    res_op = frobenius_norm(prod - target)
    psi = ref.state
    acted = apply_local(psi, a=prod)
    expected = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    expected[idx, idx] = (-1) ** n * np.where(idx < half, 1.0, -1.0) / sqrt(dim)
    res_state = _norm(acted - expected.reshape(-1))
    square = frobenius_norm(prod @ prod - np.eye(dim))
    return BoundReport(
        "LEMMA6_IDENTITY", n, 0.0, max(res_op, res_state), IDENTITY_BOUND,
        metadata={"operator_residual": res_op, "state_residual": res_state, "square_residual": square},
    )


def lemma7_residual(
    s: Strategy, j: Sequence[int], k: int, l: int, coefficient: float = CHSH_OPTIMAL_BIAS,
    n: int | None = None,
) -> float:
    n = n or infer_n(s)
    fam = s.alice_family(n)
    sigma = 1.0 if l > k else -1.0
    lhs = apply_local(s.state, a=ordered_product(fam, j), b=s.bob[(k, l)])
    rhs_op = (
        sigma * right_sign_parity(k, j) * ordered_product(fam, flip(j, k))
        + right_sign_parity(l, j) * ordered_product(fam, flip(j, l))
    )
    return _norm(lhs - coefficient * apply_local(s.state, a=rhs_op))


def lemma7_intermediate_bound(n: int, epsilon: float) -> float:
    return sqrt(2 * n * (n - 1) * epsilon) + LEMMA7_PROOF_CONST * n**2 * sqrt(epsilon)


def lemma7_check(
    s: Strategy, j: Sequence[int], k: int, l: int, epsilon: float,
    coefficient: float = CHSH_OPTIMAL_BIAS, n: int | None = None,
) -> BoundReport:
    """Moving ``B_kl`` across to Alice: compare ``(A^j (x) B_kl) psi`` with the flipped products.

    ``A^j A_m = (-1)^(sum_{p>m} j_p) A^{j ⊕ e_m}``; ``coefficient`` is the
    game's optimal bias.
    """
    n = n or infer_n(s)
    res = lemma7_residual(s, j, k, l, coefficient, n)
    return BoundReport(
        "LEMMA7", n, epsilon, res, LEMMA7_CONST * n**2 * sqrt(epsilon),
        metadata={"j": list(j), "k": k, "l": l, "coefficient": coefficient,
                  "intermediate_bound": lemma7_intermediate_bound(n, epsilon)},
    )


@dataclass(frozen=True)
class IntertwinerT:
    """``T = 2^(-n/2) sum_j (A^j (x) I)|psi><psi~|(A~^j (x) I)^dagger``.

    Rows index the strategy space ``dA*dB``; columns index the reference
    space ``dA~*dB~``.
    """

    matrix: np.ndarray
    n: int
    dims: tuple[int, int, int, int]
    normalization: float

    @property
    def frobenius(self) -> float:
        return frobenius_norm(self.matrix)


def build_intertwiner(s: Strategy, r: Strategy, n: int, cap: int = DEFAULT_ENTRY_CAP) -> IntertwinerT:
    fam = s.alice_family(n)
    ref = r.alice_family(n)
    rows, cols = s.state.dim, r.state.dim
    if rows * cols > cap:
        raise CapacityError(f"T would have {rows * cols} entries (cap {cap})")
    t = np.zeros((rows, cols), dtype=complex)
    for j in bit_vectors(n):
        w = apply_local(s.state, a=ordered_product(fam, j))
        v = apply_local(r.state, a=ordered_product(ref, j))
        t += np.outer(w, v.conj())
    norm = 1 / sqrt(2**n)
    return IntertwinerT(t * norm, n, (s.dim_a, s.dim_b, r.dim_a, r.dim_b), norm)


def operator_schmidt(t: IntertwinerT, tol: float = 1e-12) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Factors with ``T = sum_r M_r (x) N_r``; ``M_r: C^dA~ -> C^dA``, ``N_r: C^dB~ -> C^dB``."""
    da, db, ra, rb = t.dims
    realigned = t.matrix.reshape(da, db, ra, rb).transpose(0, 2, 1, 3).reshape(da * ra, db * rb)
    u, sv, vh = np.linalg.svd(realigned, full_matrices=False)
    keep = sv > tol * max(sv[0], 1.0)
    ms = [np.sqrt(x) * u[:, r].reshape(da, ra) for r, x in zip(np.flatnonzero(keep), sv[keep])]
    ns = [np.sqrt(x) * vh[r].reshape(db, rb) for r, x in zip(np.flatnonzero(keep), sv[keep])]
    return ms, ns


def _alice_commutator(t: IntertwinerT, a: np.ndarray, a_ref: np.ndarray) -> np.ndarray:
    da, db, ra, rb = t.dims
    return kron(a, np.eye(db)) @ t.matrix - t.matrix @ kron(a_ref, np.eye(rb))


def _bob_commutator(t: IntertwinerT, b: np.ndarray, b_ref: np.ndarray) -> np.ndarray:
    da, db, ra, rb = t.dims
    return kron(np.eye(da), b) @ t.matrix - t.matrix @ kron(np.eye(ra), b_ref)


def factorization_identities(t: IntertwinerT, s: Strategy, r: Strategy) -> dict:
    """Check both local factorisations of the intertwining defects.

    With ``T = sum_r M_r (x) N_r``:
    ``(A (x) I)T - T(A~ (x) I) = sum_r (A M_r - M_r A~) (x) N_r`` and
    ``(I (x) B)T - T(I (x) B~) = sum_r M_r (x) (B N_r - N_r B~)``.
    Returns the largest mismatch for each side and the operator-Schmidt rank.
    """
    ms, ns = operator_schmidt(t)
    alice_err = 0.0
    for lab, a in s.alice.items():
        a_ref = r.alice[lab]
        lhs = _alice_commutator(t, a, a_ref)
        rhs = sum(kron(a @ m - m @ a_ref, nn) for m, nn in zip(ms, ns))
        alice_err = max(alice_err, frobenius_norm(lhs - rhs))
    bob_err = 0.0
    for lab, b in s.bob.items():
        b_ref = r.bob[lab]
        lhs = _bob_commutator(t, b, b_ref)
        rhs = sum(kron(m, b @ nn - nn @ b_ref) for m, nn in zip(ms, ns))
        bob_err = max(bob_err, frobenius_norm(lhs - rhs))
    return {"alice": alice_err, "bob": bob_err, "rank": len(ms)}


def intertwining_defects(t: IntertwinerT, s: Strategy, r: Strategy) -> tuple[float, float]:
    """Largest relative Alice and Bob defects ``||X T - T X~||_F / ||T||_F``."""
    tn = t.frobenius
    if tn < 1e-12:
        raise DegenerateIntertwinerError(f"||T||_F = {tn:.3e}")
    alice = max(frobenius_norm(_alice_commutator(t, a, r.alice[lab])) for lab, a in s.alice.items())
    bob = max(frobenius_norm(_bob_commutator(t, b, r.bob[lab])) for lab, b in s.bob.items())
    return alice / tn, bob / tn


def theorem2_frobenius_check(
    s: Strategy, r: Strategy, variant: str, epsilon: float, t: IntertwinerT | None = None,
    n: int | None = None,
) -> tuple[BoundReport, BoundReport]:
    n = n or infer_n(s)
    if variant not in THM2_CONSTS:
        raise DomainError(f"variant must be XOR or FFL, got {variant!r}")
    t = t or build_intertwiner(s, r, n)
    alice, bob = intertwining_defects(t, s, r)
    ca, cb = THM2_CONSTS[variant]
    scale = n**2 * sqrt(epsilon)
    ids = ("THM2_ALICE", "THM2_BOB") if variant == "XOR" else ("FFL_ALICE", "FFL_BOB")
    return (
        BoundReport(ids[0], n, epsilon, alice, ca * scale),
        BoundReport(ids[1], n, epsilon, bob, cb * scale),
    )


def _max_report(reports: Iterable[BoundReport]) -> BoundReport:
    return max(reports, key=lambda rep: rep.residual)


def run_bound_suite(
    s: Strategy,
    r: Strategy,
    epsilon: float,
    n: int | None = None,
    bounds: Sequence[str] | None = None,
    lemma7_coefficient: float = CHSH_OPTIMAL_BIAS,
) -> list[BoundReport]:
    """Every selected bound for one strategy, each maximised over its indices."""
    n = n or infer_n(s)
    selected = set(bounds or BOUND_IDS)
    unknown = selected - set(BOUND_IDS)
    if unknown:
        raise DomainError(f"unknown bound ids {sorted(unknown)}")
    out: list[BoundReport] = []
    if selected & {"THM1_R1", "THM1_R2"}:
        out += [rep for rep in theorem1_reports(s, epsilon, n) if rep.bound_id in selected]
    for variant in ("XOR", "FFL"):
        if f"LEMMA3_{variant}" in selected:
            out.append(lemma3_anticommutator_residual(s, variant, epsilon, n))
    if "LEMMA4" in selected:
        pairs = [(k, l) for k in range(1, n + 1) for l in range(1, n + 1) if k != l]
        out.append(_max_report(lemma4_check(s, k, l, epsilon, n) for k, l in pairs))
    js = bit_vectors(n)
    if "LEMMA5" in selected:
        out.append(_max_report(
            lemma5_check(s, j, epsilon, i, n) for j in js for i in range(1, n + 1)
        ))
    if "LEMMA7" in selected:
        pairs = [(k, l) for k in range(1, n + 1) for l in range(1, n + 1) if k != l]
        out.append(_max_report(
            lemma7_check(s, j, k, l, epsilon, lemma7_coefficient, n) for j in js for k, l in pairs
        ))
    want_t = selected & {"THM2_ALICE", "THM2_BOB", "FFL_ALICE", "FFL_BOB", "T_UNITNORM"}
    if want_t:
        t = build_intertwiner(s, r, n)
        for variant in ("XOR", "FFL"):
            out += [rep for rep in theorem2_frobenius_check(s, r, variant, epsilon, t, n)
                    if rep.bound_id in selected]
        if "T_UNITNORM" in selected:
            out.append(BoundReport("T_UNITNORM", n, epsilon, abs(t.frobenius - 1.0), IDENTITY_BOUND))
    if "LEMMA6_IDENTITY" in selected and n % 2 == 1:
        out.append(lemma6_product_identity(n, r))
    order = {b: i for i, b in enumerate(BOUND_IDS)}
    return sorted(out, key=lambda rep: order[rep.bound_id])
