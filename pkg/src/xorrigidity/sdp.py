"""SDP view of XOR games: symmetrised game matrix, Gram matrix, symmetric dual, certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CertificateError, DomainError, FeasibilityError, ShapeError
from .games import GameMatrix, bias, chsh_order
from .strategies import Strategy
from .tensor import apply_local

FEASIBILITY_TOL = 1e-9
DIAG_TOL = 1e-9
BISECTION_TOL = 1e-14


def build_gsym(g: GameMatrix) -> np.ndarray:
    """``(1/2) [[0, G], [G^T, 0]]`` so that ``G_sym . Z`` is the bias."""
    n, m = g.shape
    out = np.zeros((n + m, n + m))
    out[:n, n:] = g.entries / 2
    out[n:, :n] = g.entries.T / 2
    return out


def strategy_vectors(g: GameMatrix, s: Strategy) -> np.ndarray:
    """Columns ``(A_s (x) I) psi`` for Alice's labels then ``(I (x) B_t) psi`` for Bob's."""
    try:
        cols = [apply_local(s.state, a=s.alice[lab]) for lab in g.alice_labels]
        cols += [apply_local(s.state, b=s.bob[lab]) for lab in g.bob_labels]
    except KeyError as exc:
        raise ShapeError(f"strategy has no observable for label {exc.args[0]!r}") from None
    return np.stack(cols, axis=1)


def gram_Z_from_strategy(g: GameMatrix, s: Strategy) -> np.ndarray:
    v = strategy_vectors(g, s)
    z = (v.conj().T @ v).real
    return (z + z.T) / 2


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a * b))


@dataclass(frozen=True)
class DualSolution:
    y: np.ndarray
    y_alice: float
    y_bob: float
    objective: float
    min_eig: float


def _min_eig(y: np.ndarray, gsym: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(np.diag(y) - gsym)[0])


def _smallest_feasible_yb(ya: float, n: int, m: int, gsym: np.ndarray) -> float:
    def f(yb):
        return _min_eig(np.r_[np.full(n, ya), np.full(m, yb)], gsym)

    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
    if f(lo) >= 0:
        return lo
    while hi - lo > BISECTION_TOL:
        mid = (lo + hi) / 2
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def solve_symmetric_dual(g: GameMatrix) -> DualSolution:
    """Minimise ``n y_A + m y_B`` subject to ``diag(y) - G_sym ⪰ 0``.

    The two-orbit symmetry of CHSH(n) lets ``y`` be constant on each side.
    For fixed ``y_A`` the smallest feasible ``y_B`` is found by bisection;
    the outer one-dimensional problem is convex and handed to scipy.
    """
    if chsh_order(g) is None:
        raise DomainError("the symmetric dual is only implemented for CHSH(n) game matrices")
    n, m = g.shape
    gsym = build_gsym(g)

    def objective(ya):
        return n * ya + m * _smallest_feasible_yb(ya, n, m, gsym)

    res = minimize_scalar(objective, bounds=(1e-9, 1.0), method="bounded", options={"xatol": 1e-12})
    ya = float(res.x)
    yb = _smallest_feasible_yb(ya, n, m, gsym)
    y = np.r_[np.full(n, ya), np.full(m, yb)]
    return DualSolution(y, ya, yb, float(y.sum()), _min_eig(y, gsym))


def _check_primal(z: np.ndarray):
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ShapeError(f"Z must be square, got {z.shape}")
    if np.max(np.abs(z - z.T)) > DIAG_TOL:
        raise FeasibilityError("Z is not symmetric")
    if np.max(np.abs(np.diag(z) - 1)) > DIAG_TOL:
        raise FeasibilityError("diag(Z) = 1 violated")
    if np.linalg.eigvalsh(z)[0] < -FEASIBILITY_TOL:
        raise FeasibilityError("Z is not PSD")


def _check_dual(y: np.ndarray, gsym: np.ndarray):
    if y.shape != (gsym.shape[0],):
        raise ShapeError(f"y has shape {y.shape}, expected ({gsym.shape[0]},)")
    if _min_eig(y, gsym) < -FEASIBILITY_TOL:
        raise FeasibilityError("diag(y) - G_sym is not PSD")


def duality_gap(y, z, gsym) -> float:
    """``(diag(y) - G_sym) . Z`` for a feasible primal/dual pair."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    gsym = np.asarray(gsym, dtype=float)
    if z.shape != gsym.shape:
        raise ShapeError(f"Z {z.shape} and G_sym {gsym.shape} differ")
    _check_primal(z)
    _check_dual(y, gsym)
    return frobenius_inner(np.diag(y) - gsym, z)


@dataclass(frozen=True)
class SlackEqualityResult:
    lhs: float
    rhs: float
    difference: float
    u: np.ndarray
    v: np.ndarray


def slack_vectors(y, gsym, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``diag(y) - G_sym = sum_k w_k w_k^T`` into ``u_k = w_k[:n]``, ``v_k = -w_k[n:]``.

    Rows of the returned arrays are the ``u_k`` and ``v_k``.
    """
    y = np.asarray(y, dtype=float)
    _check_dual(y, gsym)
    mu, vecs = np.linalg.eigh(np.diag(y) - gsym)
    w = vecs * np.sqrt(np.clip(mu, 0.0, None))
    return w[:n].T, -w[n:].T


def lemma2_equality_check(g: GameMatrix, s: Strategy, y) -> SlackEqualityResult:
    """Compare ``sum_k ||(u_k.A (x) I)psi - (I (x) v_k.B)psi||^2`` with ``sum y - bias``."""
    n, m = g.shape
    gsym = build_gsym(g)
    y = np.asarray(y, dtype=float)
    u, v = slack_vectors(y, gsym, n)
    mismatch = np.max(np.abs(v.T @ v - np.diag(y[n:])))
    if mismatch > 1e-6:
        raise CertificateError(f"sum v_k v_k^T misses diag(y_B) by {mismatch:.3e}")
    vecs = strategy_vectors(g, s)
    xa, yb = vecs[:, :n], vecs[:, n:]
    diffs = xa @ u.T - yb @ v.T
    lhs = float(np.sum(np.abs(diffs) ** 2))
    rhs = float(y.sum() - bias(g, s))
    return SlackEqualityResult(lhs, rhs, abs(lhs - rhs), u, v)


@dataclass(frozen=True)
class SdpCertificate:
    gsym: np.ndarray
    z: np.ndarray
    y: np.ndarray
    objective: float
    bias: float
    gap: float


def certify(g: GameMatrix, s: Strategy, dual: DualSolution | None = None) -> SdpCertificate:
    gsym = build_gsym(g)
    z = gram_Z_from_strategy(g, s)
    if dual is None:
        dual = solve_symmetric_dual(g)
    gap = duality_gap(dual.y, z, gsym)
    return SdpCertificate(gsym, z, dual.y, dual.objective, frobenius_inner(gsym, z), gap)
