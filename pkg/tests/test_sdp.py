from math import sqrt

import numpy as np
import pytest

from xorrigidity.errors import CertificateError, DomainError, FeasibilityError
from xorrigidity.games import GameMatrix, bias, build_chsh_game, classical_bias_bruteforce
from xorrigidity.sdp import (
    build_gsym,
    certify,
    duality_gap,
    gram_Z_from_strategy,
    lemma2_equality_check,
    solve_symmetric_dual,
)
from xorrigidity.strategies import build_optimal_chsh_strategy, perturb_strategy

from conftest import constant_strategy, random_chsh_strategy


def test_gsym_examples():
    g = GameMatrix([1], [1], np.array([[1.0]]))
    assert np.array_equal(build_gsym(g), [[0, 0.5], [0.5, 0]])
    gs = build_gsym(build_chsh_game(2))
    assert np.array_equal(gs, gs.T)
    assert set(np.abs(gs[:2, 2:]).ravel()) == {1 / 8}


def test_gram_reproduces_bias(rng):
    for n in (2, 3):
        g = build_chsh_game(n)
        for _ in range(25):
            s = random_chsh_strategy(rng, n, 2)
            z = gram_Z_from_strategy(g, s)
            assert np.sum(build_gsym(g) * z) == pytest.approx(bias(g, s), abs=1e-10)
            assert np.allclose(np.diag(z), 1, atol=1e-9)
            assert np.linalg.eigvalsh(z)[0] >= -1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_symmetric_dual_closed_form(n):
    g = build_chsh_game(n)
    dual = solve_symmetric_dual(g)
    m = n * (n - 1)
    sigma = (1 / sqrt(2)) / sqrt(n * m)
    assert dual.objective == pytest.approx(1 / sqrt(2), abs=1e-6)
    assert dual.y_alice == pytest.approx(sqrt(m / n) * sigma / 2, abs=1e-5)
    assert dual.min_eig >= -1e-9
    assert dual.objective >= float(classical_bias_bruteforce(g).value)


def test_dual_rejects_non_chsh():
    with pytest.raises(DomainError):
        solve_symmetric_dual(GameMatrix([1], [1], np.array([[1.0]])))


def test_duality_gap_identity_strategy():
    g = build_chsh_game(2)
    dual = solve_symmetric_dual(g)
    z = gram_Z_from_strategy(g, constant_strategy(2, np.eye(2), np.eye(2)))
    assert duality_gap(dual.y, z, build_gsym(g)) == pytest.approx(1 / sqrt(2) - 0.5, abs=1e-6)


def test_duality_gap_infeasible():
    g = build_chsh_game(2)
    gs = build_gsym(g)
    with pytest.raises(FeasibilityError, match="PSD"):
        duality_gap(np.zeros(4), np.eye(4), gs)
    with pytest.raises(FeasibilityError, match="diag"):
        duality_gap(np.ones(4), 2 * np.eye(4), gs)


def test_certificate_at_optimum():
    cert = certify(build_chsh_game(2), build_optimal_chsh_strategy(2))
    assert -1e-8 <= cert.gap <= 1e-6
    assert cert.bias == pytest.approx(1 / sqrt(2), abs=1e-10)


def test_lemma2_optimum_and_perturbed():
    g = build_chsh_game(2)
    y = solve_symmetric_dual(g).y
    res = lemma2_equality_check(g, build_optimal_chsh_strategy(2), y)
    assert abs(res.lhs) < 1e-7 and abs(res.rhs) < 1e-7
    s, eps = perturb_strategy(build_optimal_chsh_strategy(2), 0.05, 7)
    res = lemma2_equality_check(g, s, y)
    assert res.difference < 1e-8 and res.lhs > 0 and res.rhs > 0
    assert res.lhs <= eps / sqrt(2) + 1e-7
    assert np.allclose(res.v.T @ res.v, np.diag(y[2:]), atol=1e-8)


def test_lemma2_identity_strategy():
    g = build_chsh_game(2)
    y = solve_symmetric_dual(g).y
    res = lemma2_equality_check(g, constant_strategy(2, np.eye(2), np.eye(2)), y)
    assert res.rhs == pytest.approx(1 / sqrt(2) - 0.5, abs=1e-6)


def test_lemma2_sandwich_random(rng):
    g = build_chsh_game(3)
    y = solve_symmetric_dual(g).y
    for _ in range(10):
        s = random_chsh_strategy(rng, 3, 2)
        res = lemma2_equality_check(g, s, y)
        eps = 1 - bias(g, s) * sqrt(2)
        assert res.lhs <= eps / sqrt(2) + 1e-7


def test_lemma2_rejects_bad_dual():
    g = build_chsh_game(2)
    with pytest.raises((FeasibilityError, CertificateError)):
        lemma2_equality_check(g, build_optimal_chsh_strategy(2), np.zeros(4))
