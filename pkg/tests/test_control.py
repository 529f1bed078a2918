import numpy as np
import pytest

from stefan_control.beta import build_graph
from stefan_control.control import (DiscreteControl, discrete_norm,
                                    fn_w21_norm, l2_distance_pl,
                                    l2_distance_pl_fn, pl_l2_norm, pl_w21_norm,
                                    pn_map, project, qn_map)
from stefan_control.grid import ProblemData, make_grid


def grid_for(n, T=1.0):
    shape = lambda x, t: np.broadcast_shapes(np.shape(x), np.shape(t))
    data = ProblemData(
        a=lambda x, t: np.ones(shape(x, t)), b=lambda x, t: np.zeros(shape(x, t)),
        c=lambda x, t: np.zeros(shape(x, t)), f=lambda x, t: np.zeros(shape(x, t)),
        phi=lambda x: np.zeros(np.shape(x)), p=lambda t: np.zeros(np.shape(t)),
        omega=lambda x: np.zeros(np.shape(x)), a0=1.0, ell=1.0, T=T, R=1.0)
    graph = build_graph([], [], [[(0.0, 0.0), (1.0, 1.0)]], 1.0, 1.0)
    return make_grid(data, graph, 2, n)


# --- discrete norm -----------------------------------------------------

def test_constant_control_norm():
    gd = DiscreteControl(g=np.full(9, 2.5), tau=1.0 / 8)
    # differences vanish; norm^2 = T * C^2 with T = 1
    assert discrete_norm(gd) == pytest.approx(2.5, abs=1e-14)


def test_two_entry_norm():
    gd = DiscreteControl(g=np.array([0.0, 1.0]), tau=1.0)
    assert discrete_norm(gd) == pytest.approx(np.sqrt(2.0), abs=1e-15)


def test_norm_matches_reference_summation():
    rng = np.random.default_rng(8)
    tau = 0.25
    g = rng.normal(size=9)
    gd = DiscreteControl(g=g, tau=tau)
    total = 0.0
    for k in range(1, 9):
        total += tau * g[k] ** 2
        total += tau * ((g[k] - g[k - 1]) / tau) ** 2
    assert discrete_norm(gd) == pytest.approx(np.sqrt(total), rel=1e-14)


def test_norm_positive_when_only_g0_nonzero():
    gd = DiscreteControl(g=np.array([2.0, 0.0, 0.0]), tau=0.5)
    assert discrete_norm(gd) > 0.0


def test_homogeneity_and_triangle():
    rng = np.random.default_rng(21)
    for _ in range(25):
        tau = rng.uniform(0.05, 0.5)
        g1 = rng.normal(size=7)
        g2 = rng.normal(size=7)
        alpha = rng.normal()
        a = DiscreteControl(g=g1, tau=tau)
        b = DiscreteControl(g=g2, tau=tau)
        s = DiscreteControl(g=g1 + g2, tau=tau)
        scaled = DiscreteControl(g=alpha * g1, tau=tau)
        assert discrete_norm(scaled) == pytest.approx(abs(alpha) * discrete_norm(a), rel=1e-12)
        assert discrete_norm(s) <= discrete_norm(a) + discrete_norm(b) + 1e-12


# --- averaging map -----------------------------------------------------

def test_qn_constant():
    gd = qn_map(lambda t: np.full(np.shape(t), 4.0), grid_for(5))
    assert np.allclose(gd.g, 4.0)


def test_qn_linear():
    gd = qn_map(lambda t: np.asarray(t, dtype=float), grid_for(2))
    assert np.allclose(gd.g, [0.0, 0.25, 0.75], atol=1e-14)


def test_qn_norm_bounded_by_continuous_norm():
    # averaging does not inflate the Sobolev norm (up to o(1))
    g_fn = lambda t: np.sin(2 * np.pi * np.asarray(t, dtype=float))
    ref = fn_w21_norm(g_fn, 1.0)
    for n in (8, 16, 32, 64):
        gd = qn_map(g_fn, grid_for(n))
        assert discrete_norm(gd) <= ref + 0.05


# --- interpolation map -------------------------------------------------

def test_pn_constant():
    gd = DiscreteControl(g=np.full(6, 1.5), tau=0.2)
    pl = pn_map(gd)
    assert pl(0.37) == pytest.approx(1.5)


def test_pn_linear_nodes():
    gd = DiscreteControl(g=np.array([0.0, 1.0]), tau=1.0)
    pl = pn_map(gd)
    ts = np.linspace(0, 1, 11)
    assert np.allclose(pl(ts), ts)
    assert pl(1.0) == pytest.approx(1.0)  # closed at t = T


def test_pn_qn_round_trip_error_first_order():
    g_fn = lambda t: np.sin(2 * np.pi * np.asarray(t, dtype=float))
    errs = []
    for n in (8, 16, 32, 64):
        grid = grid_for(n)
        pl = pn_map(qn_map(g_fn, grid))
        errs.append(l2_distance_pl_fn(pl, g_fn))
    ratios = [errs[j + 1] / errs[j] for j in range(3)]
    assert all(0.4 <= r <= 0.7 for r in ratios), ratios


# --- projection --------------------------------------------------------

def test_project_inside_is_identity():
    gd = DiscreteControl(g=np.array([0.1, 0.2, 0.1]), tau=0.5)
    assert project(gd, 10.0) is gd


def test_project_halves_at_double_radius():
    gd = DiscreteControl(g=np.array([0.0, 2.0, 4.0]), tau=0.5)
    R = discrete_norm(gd) / 2.0
    proj = project(gd, R)
    assert np.allclose(proj.g, gd.g / 2.0)
    assert discrete_norm(proj) == pytest.approx(R, abs=1e-12)


def test_projection_minimizes_inner_product_distance():
    rng = np.random.default_rng(5)
    tau = 0.2

    def dist(u, w):
        return discrete_norm(DiscreteControl(g=u.g - w.g, tau=tau))

    for _ in range(20):
        gd = DiscreteControl(g=rng.normal(scale=3.0, size=6), tau=tau)
        R = 0.5 * discrete_norm(gd)
        proj = project(gd, R)
        assert discrete_norm(proj) <= R + 1e-12
        zero = DiscreteControl(g=np.zeros(6), tau=tau)
        # among the feasible sample candidates the projection is closest
        assert dist(gd, proj) <= dist(gd, zero) + 1e-12


# --- mapping consistency (ball membership both ways) -------------------

def test_qn_lands_in_ball_for_interior_controls():
    R = 5.0
    eps = 0.5
    T = 1.0
    target = R - eps
    amp = target / np.sqrt(0.5 * T * (1 + (2 * np.pi / T) ** 2))
    g_fn = lambda t: amp * np.sin(2 * np.pi * np.asarray(t, dtype=float) / T)
    assert fn_w21_norm(g_fn, T) == pytest.approx(target, rel=1e-6)
    for n in (8, 16, 32, 64, 128):
        gd = qn_map(g_fn, grid_for(n))
        assert discrete_norm(gd) <= R


def test_pn_norm_close_to_discrete_norm():
    rng = np.random.default_rng(13)
    for n in (8, 32, 128):
        grid = grid_for(n)
        g = rng.normal(size=n + 1)
        gd = DiscreteControl(g=g, tau=grid.tau)
        R = discrete_norm(gd)
        cont = pl_w21_norm(pn_map(gd))
        # the continuous norm of the interpolant stays near the ball
        assert cont <= R * (1.0 + 0.35)


def test_pl_norm_formulas_against_quadrature():
    gd = DiscreteControl(g=np.array([0.0, 1.0, -0.5, 0.25]), tau=1.0 / 3)
    pl = pn_map(gd)
    ts = np.linspace(0, 1, 20001)
    vals = pl(ts)
    l2_ref = np.sqrt(np.trapezoid(vals ** 2, ts))
    assert pl_l2_norm(pl) == pytest.approx(l2_ref, abs=1e-6)
    der = np.diff(gd.g) / gd.tau
    w21_ref = np.sqrt(l2_ref ** 2 + (der ** 2 * gd.tau).sum())
    assert pl_w21_norm(pl) == pytest.approx(w21_ref, abs=1e-6)


def test_l2_distance_pl_exact():
    a = pn_map(DiscreteControl(g=np.array([0.0, 1.0, 0.0]), tau=0.5))
    b = pn_map(DiscreteControl(g=np.array([0.5, 0.5, 0.5, 0.5]), tau=1.0 / 3))
    ts = np.linspace(0, 1, 40001)
    ref = np.sqrt(np.trapezoid((a(ts) - b(ts)) ** 2, ts))
    assert l2_distance_pl(a, b) == pytest.approx(ref, abs=1e-7)
