import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xorrigidity.errors import CapacityError, DegenerateInputError, ShapeError
from xorrigidity.tensor import (
    PAULI_X,
    PAULI_Z,
    BipartiteState,
    apply_local,
    kron,
    matrix_to_vec,
    operator_abs,
    schmidt_decompose,
    unitary_direction,
    vec_to_matrix,
)

from conftest import random_matrix, random_state


def test_row_major_ordering():
    psi = BipartiteState(2, 3, np.eye(6)[1 * 3 + 2])
    m = vec_to_matrix(psi)
    assert m[1, 2] == 1 and np.count_nonzero(m) == 1


def test_product_vector_maps_to_outer_product(rng):
    u = random_matrix(rng, 3, 1)[:, 0]
    w = random_matrix(rng, 2, 1)[:, 0]
    v = np.kron(u, w)
    psi = BipartiteState.from_vector(v, 3, 2, normalize=True)
    expected = np.outer(u, w) / np.linalg.norm(v)
    assert np.allclose(vec_to_matrix(psi), expected, atol=1e-12)


def test_local_actions_match_kron(rng):
    psi = random_state(rng, 3, 4)
    a = random_matrix(rng, 3, 3)
    b = random_matrix(rng, 4, 4)
    dense = np.kron(a, b) @ psi.amplitudes
    assert np.allclose(apply_local(psi, a, b), dense, atol=1e-12)


def test_matrix_to_vec_roundtrip_and_zero(rng):
    m = random_matrix(rng, 2, 5)
    psi = matrix_to_vec(m)
    assert np.allclose(vec_to_matrix(psi), m / np.linalg.norm(m))
    with pytest.raises(DegenerateInputError):
        matrix_to_vec(np.zeros((2, 2)))


def test_state_rejects_bad_input():
    with pytest.raises(DegenerateInputError):
        BipartiteState(2, 2, np.ones(4))
    with pytest.raises(ShapeError):
        BipartiteState(2, 2, np.ones(3) / np.sqrt(3))
    with pytest.raises(ShapeError):
        BipartiteState(1, 1, np.array([np.nan]))


def test_apply_local_shape_error(rng):
    psi = random_state(rng, 2, 2)
    with pytest.raises(ShapeError):
        apply_local(psi, a=np.eye(3))


def test_kron_cap():
    with pytest.raises(CapacityError):
        kron(np.eye(64), np.eye(64), cap=1000)


def test_schmidt_of_product_state_has_rank_one(rng):
    v = np.kron([1, 2j], [3, 0, 1])
    psi = BipartiteState.from_vector(v, 2, 3, normalize=True)
    sd = schmidt_decompose(psi)
    assert sd.rank == 1
    assert sd.coefficients[0] == pytest.approx(1.0, abs=1e-12)


def test_schmidt_reconstructs_state(rng):
    psi = random_state(rng, 3, 4)
    sd = schmidt_decompose(psi)
    assert np.allclose(sd.reconstruct(), psi.amplitudes, atol=1e-12)
    assert sd.coefficients.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(sd.coefficients) <= 1e-15)


def test_schmidt_partial_block_flag():
    amp = np.zeros((3, 3))
    amp[np.arange(3), np.arange(3)] = 1 / np.sqrt(3)
    sd = schmidt_decompose(BipartiteState(3, 3, amp.reshape(-1)), block_size=2)
    assert sd.block_count == 1 and sd.partial
    assert sd.spread < 1e-12


def test_operator_abs_and_unitary_direction():
    m = np.diag([2.0, -3.0, 0.0]).astype(complex)
    assert np.allclose(operator_abs(m), np.diag([2, 3, 0]))
    u, dropped = unitary_direction(m)
    assert dropped == 1
    assert np.allclose(u, np.diag([1, -1, 0]))


def test_unitary_direction_rejects_non_hermitian():
    with pytest.raises(ShapeError):
        unitary_direction(np.array([[0, 1], [0, 0]]))


def test_unitary_direction_of_observable_is_itself():
    m = (PAULI_X + PAULI_Z) / np.sqrt(2)
    u, dropped = unitary_direction(3 * m)
    assert dropped == 0
    assert np.allclose(u, m, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_frobenius_norm_equals_state_norm(da, db, seed):
    psi = random_state(np.random.default_rng(seed), da, db)
    assert np.linalg.norm(vec_to_matrix(psi)) == pytest.approx(1.0, abs=1e-12)
