import numpy as np
import pytest
from scipy.integrate import quad

from stefan_control.beta import (BetaGraphError, SmoothedBeta, build_graph,
                                 mollifier_constant)


def identity_graph():
    return build_graph([], [], [[(0.0, 0.0), (1.0, 1.0)]], 1.0, 1.0)


def single_jump_graph(nu=1.0):
    return build_graph([0.0], [nu],
                       [[(-50.0, -50.0), (0.0, 0.0)], [(0.0, 0.0), (50.0, 50.0)]],
                       1.0, 1.0)


# --- graph construction ------------------------------------------------

def test_identity_graph_evaluates_identity():
    g = identity_graph()
    for v in (-3.0, -0.2, 0.0, 0.5, 4.0):
        assert g.beta_eval(v) == pytest.approx(v, abs=1e-14)


def test_single_jump_interval_and_sides():
    g = single_jump_graph()
    assert g.beta_eval(-1.0) == pytest.approx(-1.0)
    assert g.beta_eval(1.0) == pytest.approx(2.0)
    lo, hi = g.beta_eval(0.0)
    assert (lo, hi) == (0.0, 1.0)


def test_zero_slope_rejected():
    with pytest.raises(BetaGraphError):
        build_graph([], [], [[(0.0, 0.0), (1.0, 0.0)]], 1.0, 1.0)


def test_slope_above_cap_rejected():
    with pytest.raises(BetaGraphError):
        build_graph([], [], [[(0.0, 0.0), (1.0, 3.0)]], 1.0, 2.0)


def test_non_ascending_temps_rejected():
    branches = [[(-1.0, -1.0), (1.0, 1.0)], [(1.0, 1.0), (0.5, 2.0)],
                [(0.5, 2.0), (3.0, 4.0)]]
    with pytest.raises(BetaGraphError):
        build_graph([1.0, 0.5], [1.0, 1.0], branches, 1.0, 2.0)


def test_non_positive_jump_rejected():
    with pytest.raises(BetaGraphError):
        build_graph([0.0], [0.0],
                    [[(-1.0, -1.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)]],
                    1.0, 1.0)


def test_discontinuous_branches_rejected():
    with pytest.raises(BetaGraphError):
        build_graph([0.0], [1.0],
                    [[(-1.0, -1.0), (0.0, 0.5)], [(0.0, 0.0), (1.0, 1.0)]],
                    1.0, 1.0)


def test_multiphase_cumulative_jumps():
    branches = [[(-2.0, -2.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)],
                [(1.0, 1.0), (3.0, 3.0)]]
    g = build_graph([0.0, 1.0], [0.5, 0.25], branches, 1.0, 1.0)
    assert g.beta_eval(0.5) == pytest.approx(1.0)          # 0.5 + nu_1
    assert g.beta_eval(2.0) == pytest.approx(2.75)         # 2 + nu_1 + nu_2
    lo, hi = g.beta_eval(1.0)
    assert lo == pytest.approx(1.5) and hi == pytest.approx(1.75)


# --- mollifier kernel --------------------------------------------------

def test_mollifier_constant_value():
    # oracle: adaptive Gauss-Kronrod of the bump, then reciprocal
    val, _ = quad(lambda u: np.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0,
                  epsabs=1e-14, epsrel=1e-13)
    assert mollifier_constant() == pytest.approx(1.0 / val, abs=1e-12)
    assert mollifier_constant() == pytest.approx(2.252283621, abs=5e-10)
    assert abs(mollifier_constant() * val - 1.0) <= 1e-12


def test_kernel_normalized_and_supported():
    sb = SmoothedBeta(identity_graph(), 4)
    total, _ = quad(lambda d: sb.kernel(d), -0.25, 0.25, limit=100)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert sb.kernel(0.25) == 0.0
    assert sb.kernel(-0.25) == 0.0
    assert sb.kernel(0.30) == 0.0


# --- smoothed evaluation ----------------------------------------------

def test_linear_window_is_exact():
    sb = SmoothedBeta(single_jump_graph(), 8)
    # windows of width 1/8 that avoid the jump at 0
    for v in (-3.0, -0.5, 0.4, 1.0, 7.3):
        assert sb.bn(v) == pytest.approx(v if v < 0 else v + 1.0, abs=1e-13)


def test_jump_halved_at_transition():
    sb = SmoothedBeta(single_jump_graph(nu=1.0), 8)
    assert sb.bn(0.0) == pytest.approx(0.5, abs=1e-13)


def test_identity_graph_smooths_to_identity():
    sb = SmoothedBeta(identity_graph(), 4)
    v = np.linspace(-5, 5, 41)
    assert np.allclose(sb.bn(v), v, atol=1e-13)
    assert np.allclose(sb.bn_deriv(v), 1.0, atol=1e-12)


def test_distance_to_graph_bounded_away_from_jumps():
    graph = build_graph([0.0], [0.7],
                        [[(-50.0, -75.0), (0.0, 0.0)], [(0.0, 0.0), (50.0, 60.0)]],
                        1.0, 1.5)
    n = 16
    sb = SmoothedBeta(graph, n)
    rng = np.random.default_rng(7)
    v = rng.uniform(-5, 5, size=400)
    v = v[np.abs(v) > 1.0 / n + 1e-9]
    exact = graph._values(v)
    assert np.all(np.abs(sb.bn(v) - exact) <= 1.5 / n + 1e-12)


def test_monotonicity_property():
    sb = SmoothedBeta(single_jump_graph(), 8)
    rng = np.random.default_rng(3)
    pairs = rng.uniform(-4, 4, size=(200, 2))
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    keep = hi - lo > 1e-9
    assert np.all(sb.bn(hi[keep]) > sb.bn(lo[keep]))


def test_derivative_floor():
    graph = build_graph([0.0], [0.4],
                        [[(-50.0, -60.0), (0.0, 0.0)], [(0.0, 0.0), (50.0, 75.0)]],
                        1.2, 1.5)
    sb = SmoothedBeta(graph, 12)
    v = np.linspace(-3, 3, 1201)
    assert np.all(sb.bn_deriv(v) >= 1.2 - 1e-9)


def test_finite_difference_consistency():
    sb = SmoothedBeta(single_jump_graph(), 8)
    rng = np.random.default_rng(11)
    delta = 1e-5
    for v in rng.uniform(-2, 2, size=40):
        fd = (sb.bn(v + delta) - sb.bn(v - delta)) / (2 * delta)
        assert fd == pytest.approx(sb.bn_deriv(v), abs=1e-4)


def test_window_exactness_property():
    graph = build_graph([1.0], [0.3],
                        [[(-50.0, -51.0), (1.0, 0.0)], [(1.0, 0.0), (50.0, 49.0)]],
                        1.0, 1.0)
    n = 10
    sb = SmoothedBeta(graph, n)
    rng = np.random.default_rng(5)
    v = rng.uniform(-4, 4, size=300)
    v = v[np.abs(v - 1.0) > 1.0 / n + 1e-12]  # window misses the only knot
    assert np.allclose(sb.bn(v), graph._values(v), atol=1e-12)


def test_kernel_tables_consistent_with_quad():
    # spot check the cached cumulative moments against adaptive quadrature
    sb = SmoothedBeta(identity_graph(), 1)
    const = sb.constant
    for s in (-0.9, -0.3, 0.1, 0.77):
        ref, _ = quad(lambda u: const * np.exp(-1.0 / (1.0 - u * u)), -1.0, s,
                      epsabs=1e-13, epsrel=1e-13)
        from stefan_control.beta import _moments
        m0, _ = _moments(np.array([s]), sb._edges, sb._m0c, sb._m1c, const)
        assert m0[0] == pytest.approx(ref, abs=1e-11)
