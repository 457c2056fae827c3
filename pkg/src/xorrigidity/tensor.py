"""Dense complex linear algebra on bipartite spaces.

Tensor indices use row-major order: basis vector ``|i> (x) |j>`` of
``C^dA (x) C^dB`` sits at position ``i * dB + j``.  With that ordering the
vectorisation map ``L`` is a plain reshape, and

* ``L(u (x) w) = u w^T``
* ``A @ L(psi) = L((A (x) I) psi)``
* ``L(psi) @ B.T = L((I (x) B) psi)``
* ``||L(psi)||_F = ||psi||``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DegenerateInputError, ShapeError

CONSTRUCTION_TOL = 1e-12
DECOMPOSITION_TOL = 1e-9
DEFAULT_ENTRY_CAP = 2**24

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_cmatrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("matrix has non-finite entries")
    return arr


@dataclass(frozen=True)
class BipartiteState:
    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ShapeError("factor dimensions must be positive")
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.dim_a * self.dim_b:
            raise ShapeError(
                f"{amp.size} amplitudes do not fit {self.dim_a} x {self.dim_b}"
            )
        if not np.all(np.isfinite(amp)):
            raise ShapeError("state has non-finite amplitudes")
        if abs(np.linalg.norm(amp) - 1.0) > CONSTRUCTION_TOL:
            raise DegenerateInputError(
                f"state norm {np.linalg.norm(amp)!r} differs from 1"
            )
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_vector(cls, vec, dim_a: int, dim_b: int, normalize: bool = False):
        v = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            nrm = np.linalg.norm(v)
            if nrm == 0:
                raise DegenerateInputError("cannot normalise the zero vector")
            v = v / nrm
        return cls(dim_a, dim_b, v)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def vector(self) -> np.ndarray:
        return self.amplitudes


def frobenius_norm(m) -> float:
    arr = as_cmatrix(m)
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def kron(a, b, cap: int = DEFAULT_ENTRY_CAP) -> np.ndarray:
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    size = a.size * b.size
    if size > cap:
        raise CapacityError(f"kron would create {size} entries (cap {cap})")
    return np.kron(a, b)


def kron_all(*factors, cap: int = DEFAULT_ENTRY_CAP) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = kron(out, f, cap=cap)
    return out


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def is_hermitian(m, tol: float = 1e-10) -> bool:
    arr = np.asarray(m)
    return arr.shape[0] == arr.shape[1] and np.max(np.abs(arr - dagger(arr)), initial=0.0) <= tol


def vec_to_matrix(psi: BipartiteState) -> np.ndarray:
    """The bijection L: amplitude (i, j) becomes matrix entry [i, j]."""
    return psi.amplitudes.reshape(psi.dim_a, psi.dim_b).copy()


def matrix_to_vec(m) -> BipartiteState:
    """Inverse of :func:`vec_to_matrix`, normalising by the Frobenius norm."""
    arr = as_cmatrix(m)
    nrm = frobenius_norm(arr)
    if nrm == 0.0:
        raise DegenerateInputError("zero matrix has no normalised preimage")
    return BipartiteState(arr.shape[0], arr.shape[1], (arr / nrm).reshape(-1))


def apply_local(psi: BipartiteState, a=None, b=None) -> np.ndarray:
    """Return ``(a (x) b) psi`` as a raw vector, computed through L.

    ``None`` stands for the identity on that factor.  Avoids forming the
    Kronecker product.
    """
    m = vec_to_matrix(psi)
    if a is not None:
        a = np.asarray(a)
        if a.shape != (psi.dim_a, psi.dim_a):
            raise ShapeError(f"Alice operator {a.shape} does not act on dA={psi.dim_a}")
        m = a @ m
    if b is not None:
        b = np.asarray(b)
        if b.shape != (psi.dim_b, psi.dim_b):
            raise ShapeError(f"Bob operator {b.shape} does not act on dB={psi.dim_b}")
        m = m @ b.T
    return m.reshape(-1)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    block_size: int
    block_count: int
    partial: bool
    rank: int
    spread: float

    def reconstruct(self) -> np.ndarray:
        """``sum_i sqrt(lambda_i) u_i (x) v_i`` as a raw vector."""
        out = np.zeros(self.left_basis.shape[0] * self.right_basis.shape[0], dtype=complex)
        for lam, u, v in zip(self.coefficients, self.left_basis.T, self.right_basis.T):
            out += np.sqrt(lam) * np.kron(u, v)
        return out

    def block(self, index: int) -> np.ndarray:
        lo = index * self.block_size
        return self.coefficients[lo : lo + self.block_size]


def schmidt_decompose(
    psi: BipartiteState, block_size: int = 1, zero_tol: float = CONSTRUCTION_TOL
) -> SchmidtDecomposition:
    """SVD-based Schmidt decomposition with a per-block spread report.

    Coefficients are the squared singular values of ``L(psi)`` in
    non-increasing order.  Blocks are consecutive runs of ``block_size``
    coefficients among the nonzero ones (``> zero_tol``); ``spread`` is the
    largest ``max - min`` inside a complete block.  When ``block_size`` does
    not divide the rank the trailing run is reported via ``partial``.
    """
    if block_size < 1:
        raise ShapeError("block_size must be positive")
    m = vec_to_matrix(psi)
    u, s, vh = np.linalg.svd(m)
    k = s.size
    lam = s**2
    # L(psi) = U S V^H, so psi = sum_k s_k U[:, k] (x) V^H[k, :].
    left = u[:, :k]
    right = vh[:k, :].T
    rank = int(np.count_nonzero(lam > zero_tol))
    count = rank // block_size
    spread = 0.0
    for b in range(count):
        blk = lam[b * block_size : (b + 1) * block_size]
        spread = max(spread, float(blk.max() - blk.min()))
    return SchmidtDecomposition(
        coefficients=lam,
        left_basis=left,
        right_basis=right,
        block_size=block_size,
        block_count=count,
        partial=rank % block_size != 0,
        rank=rank,
        spread=spread,
    )


def _hermitian_eigh(m, herm_tol: float):
    arr = as_cmatrix(m)
    if arr.shape[0] != arr.shape[1] or not is_hermitian(arr, herm_tol):
        raise ShapeError("operator must be square and Hermitian")
    return np.linalg.eigh((arr + dagger(arr)) / 2)


def operator_abs(m, herm_tol: float = 1e-10) -> np.ndarray:
    """``|M| = sqrt(M^dagger M)`` for Hermitian ``M`` via its spectrum."""
    mu, vecs = _hermitian_eigh(m, herm_tol)
    return (vecs * np.abs(mu)) @ dagger(vecs)


def unitary_direction(
    m, singular_tol: float = DECOMPOSITION_TOL, herm_tol: float = 1e-10
) -> tuple[np.ndarray, int]:
    """Return ``(M |M|^+, dropped)``.

    Eigenvalues with ``|mu| <= singular_tol`` are excluded from the
    pseudo-inverse; ``dropped`` counts them.  On the retained subspace the
    result is ``sign(M)``.
    """
    mu, vecs = _hermitian_eigh(m, herm_tol)
    keep = np.abs(mu) > singular_tol
    signs = np.where(keep, np.sign(mu), 0.0)
    return (vecs * signs) @ dagger(vecs), int(np.count_nonzero(~keep))


def pseudo_sqrt_psd(m, tol: float = DECOMPOSITION_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a real symmetric PSD matrix with tiny negatives clipped."""
    mu, vecs = np.linalg.eigh((np.asarray(m) + np.asarray(m).T) / 2)
    if mu.size and mu.min() < -tol:
        raise ShapeError(f"matrix is not PSD (min eigenvalue {mu.min():.3e})")
    return np.clip(mu, 0.0, None), vecs
