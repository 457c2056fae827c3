from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from xorrigidity.errors import CapacityError, DomainError, LabelError, ShapeError
from xorrigidity.games import (
    GameMatrix,
    bias,
    binary_game_values,
    build_chsh_binary_game,
    build_chsh_game,
    build_ffl_game,
    chsh_order,
    classical_bias_bruteforce,
    win_probability,
)
from xorrigidity.strategies import build_optimal_chsh_strategy
from xorrigidity.tensor import PAULI_Z

from conftest import constant_strategy, random_chsh_strategy


def test_chsh2_entries():
    g = build_chsh_game(2)
    assert g.bob_labels == ((1, 2), (2, 1))
    expected = np.array([[1, 1], [1, -1]]) / 4
    assert np.array_equal(g.entries, expected)
    assert g.signed_sum == 0.5
    assert g.absolute_sum == 1.0


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_chsh_normalisation(n):
    g = build_chsh_game(n)
    assert g.shape == (n, n * (n - 1))
    assert abs(g.absolute_sum - 1) < 1e-12
    assert sum(sum(row) for row in g.exact) == Fraction(1, 2)
    assert np.count_nonzero(g.entries) == 2 * n * (n - 1)


def test_chsh_rejects_small_n():
    with pytest.raises(DomainError, match="n must be ≥ 2"):
        build_chsh_game(1)


def test_game_matrix_validation():
    with pytest.raises(DomainError):
        GameMatrix([1], [1], np.array([[0.5]]))
    with pytest.raises(ShapeError):
        GameMatrix([1, 2], [1], np.array([[1.0]]))
    g = GameMatrix(["a"], ["b"], np.array([[1.0]]))
    assert g.predicate_signs()[0, 0] == 1


def test_chsh_order_detects_game():
    assert chsh_order(build_chsh_game(3)) == 3
    assert chsh_order(GameMatrix([1], [1], np.array([[1.0]]))) is None


def test_identity_strategy_bias_is_signed_sum():
    s = constant_strategy(2, np.eye(2), np.eye(2))
    assert bias(build_chsh_game(2), s) == pytest.approx(0.5, abs=1e-12)


def test_bias_missing_label():
    s = build_optimal_chsh_strategy(2)
    with pytest.raises(LabelError):
        bias(build_chsh_game(3), s)


def test_bias_bounded_for_random_strategies(rng):
    for n in (2, 3):
        g = build_chsh_game(n)
        for _ in range(20):
            assert abs(bias(g, random_chsh_strategy(rng, n, 2))) <= 1 + 1e-9


def test_win_probability():
    assert win_probability(1 / sqrt(2)) == pytest.approx((1 + 1 / sqrt(2)) / 2)
    with pytest.raises(DomainError):
        win_probability(1.5)


def test_classical_chsh2_exact():
    opt = classical_bias_bruteforce(build_chsh_game(2))
    assert opt.value == Fraction(1, 2)
    assert opt.alice == (1, 1) and opt.bob == (1, 1)


def test_classical_below_quantum():
    for n in (2, 3, 4, 5):
        assert float(classical_bias_bruteforce(build_chsh_game(n)).value) < 1 / sqrt(2)


def test_all_plus_deterministic_strategy_bias():
    # answering +1 everywhere scores the signed sum of G
    s = constant_strategy(3, np.eye(1), np.eye(1))
    assert bias(build_chsh_game(3), s) == pytest.approx(0.5)


def test_classical_cap():
    with pytest.raises(CapacityError):
        classical_bias_bruteforce(build_chsh_game(6))


def test_ffl_classical_value():
    vals = binary_game_values(build_ffl_game())
    assert vals.value == Fraction(2, 3)
    assert vals.bias == Fraction(1, 3)


def test_binary_game_oracles():
    assert binary_game_values(build_chsh_binary_game()).value == Fraction(3, 4)
    always = build_ffl_game(predicate=lambda a, b, s, t: True)
    assert binary_game_values(always).value == 1


def test_ffl_predicate_table():
    table = build_ffl_game().predicate_table()
    assert set(table) == {(0, 0), (0, 1), (1, 0)}
    # on (0, 0) the players win iff a != b
    assert table[(0, 0)] == [[False, True], [True, False]]
    # on (1, 0) Alice's side is 1 regardless, so Bob must answer 0
    assert table[(1, 0)] == [[True, False], [True, False]]
