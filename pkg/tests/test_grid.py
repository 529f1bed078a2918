import numpy as np
import pytest

from stefan_control.beta import build_graph
from stefan_control.grid import (DataValidationError, MeshConditionError,
                                 ProblemData, average_data, make_grid,
                                 steklov_cell, steklov_space, steklov_time,
                                 sup_norms)


def graph_with_floor(slope_lo=1.0):
    return build_graph([], [], [[(0.0, 0.0), (1.0, slope_lo)]], slope_lo, slope_lo)


def make_data(b_amp=0.0, ell=1.0, T=1.0, a0=1.0, c_amp=0.0):
    shape = lambda x, t: np.broadcast_shapes(np.shape(x), np.shape(t))
    return ProblemData(
        a=lambda x, t: np.ones(shape(x, t)),
        b=lambda x, t: np.full(shape(x, t), b_amp),
        c=lambda x, t: np.full(shape(x, t), c_amp),
        f=lambda x, t: np.zeros(shape(x, t)),
        phi=lambda x: np.zeros(np.shape(x)),
        p=lambda t: np.zeros(np.shape(t)),
        omega=lambda x: np.zeros(np.shape(x)),
        a0=a0, ell=ell, T=T, R=1.0)


def dummy_grid(m=4, n=4, ell=1.0, T=1.0):
    return make_grid(make_data(ell=ell, T=T), graph_with_floor(), m, n)


# --- mesh condition ----------------------------------------------------

def test_zero_drift_accepts_any_grid():
    data = make_data(b_amp=0.0)
    for m, n in [(1, 1), (3, 50), (40, 5)]:
        make_grid(data, graph_with_floor(), m, n)


def test_coarse_ratio_rejected():
    # h/tau = 1 < 8*||b||/slope_lo = 8
    data = make_data(b_amp=1.0)
    with pytest.raises(MeshConditionError):
        make_grid(data, graph_with_floor(), 10, 10)


def test_fine_ratio_accepted():
    # h/tau = 16 >= 8
    data = make_data(b_amp=1.0)
    make_grid(data, graph_with_floor(), 4, 64)


def test_tau_smallness_warning():
    data = make_data(b_amp=0.0, c_amp=4.0)  # bound: tau < 1/4
    with pytest.warns(UserWarning, match="uniqueness"):
        make_grid(data, graph_with_floor(), 4, 2)


def test_ellipticity_floor_enforced():
    data = make_data()
    bad = ProblemData(**{**data.__dict__, "a": lambda x, t: np.full(
        np.broadcast_shapes(np.shape(x), np.shape(t)), 0.5)})
    with pytest.raises(DataValidationError):
        make_grid(bad, graph_with_floor(), 4, 4)


def test_grid_nodes_exact():
    g = dummy_grid(m=5, n=8, ell=2.5, T=2.0)
    assert g.h * g.m == pytest.approx(2.5, abs=1e-15)
    assert g.tau * g.n == pytest.approx(2.0, abs=1e-15)
    assert np.allclose(g.xs, np.linspace(0, 2.5, 6))
    assert np.allclose(g.ts, np.linspace(0, 2.0, 9))


# --- time averages -----------------------------------------------------

def test_time_average_constant():
    g = dummy_grid(n=7)
    w = steklov_time(lambda t: np.full(np.shape(t), 5.0), g)
    assert np.allclose(w, 5.0)


def test_time_average_linear():
    g = dummy_grid(n=2)
    w = steklov_time(lambda t: np.asarray(t, dtype=float), g)
    assert np.allclose(w, [0.0, 0.25, 0.75], atol=1e-14)


def test_time_average_sine_against_antiderivative():
    g = dummy_grid(n=6, T=1.0)
    w = steklov_time(np.sin, g)
    ts = g.ts
    exact = (np.cos(ts[:-1]) - np.cos(ts[1:])) / g.tau
    assert np.allclose(w[1:], exact, atol=1e-12)
    assert w[0] == pytest.approx(0.0, abs=1e-15)


# --- space averages ----------------------------------------------------

def test_space_average_constant():
    g = dummy_grid(m=5)
    out = steklov_space(lambda x: np.full(np.shape(x), 3.25), g)
    assert np.allclose(out, 3.25)


def test_space_average_linear_with_endpoint():
    g = dummy_grid(m=2)
    out = steklov_space(lambda x: np.asarray(x, dtype=float), g)
    assert np.allclose(out, [0.25, 0.75, 1.0], atol=1e-14)


def test_space_average_quadratic_antiderivative():
    g = dummy_grid(m=4)
    out = steklov_space(lambda x: np.asarray(x, dtype=float) ** 2, g)
    xs = g.xs
    exact = (xs[1:] ** 3 - xs[:-1] ** 3) / (3.0 * g.h)
    assert np.allclose(out[:-1], exact, atol=1e-12)
    assert out[-1] == pytest.approx(1.0)


# --- cell averages -----------------------------------------------------

def test_cell_average_constant():
    g = dummy_grid(m=3, n=2)
    q = steklov_cell(lambda x, t: np.full(
        np.broadcast_shapes(np.shape(x), np.shape(t)), 3.0), g)
    assert q.shape == (2, 3)
    assert np.allclose(q, 3.0)


def test_cell_average_separable_is_product():
    g = dummy_grid(m=3, n=4)
    q = steklov_cell(lambda x, t: np.asarray(x) * np.asarray(t), g)
    qx = steklov_space(lambda x: np.asarray(x, dtype=float), g)[:-1]
    qt = steklov_time(lambda t: np.asarray(t, dtype=float), g)[1:]
    assert np.allclose(q, qt[:, None] * qx[None, :], atol=1e-13)


def test_cell_average_closed_form():
    g = dummy_grid(m=3, n=3)
    q = steklov_cell(lambda x, t: np.sin(x) * np.cos(t), g)
    xs, ts = g.xs, g.ts
    ix = (np.cos(xs[:-1]) - np.cos(xs[1:])) / g.h
    it = (np.sin(ts[1:]) - np.sin(ts[:-1])) / g.tau
    assert np.allclose(q, it[:, None] * ix[None, :], atol=1e-12)


def test_averaging_linearity():
    g = dummy_grid(m=3, n=3)
    rng = np.random.default_rng(0)
    alpha = rng.uniform(-3, 3)
    q1 = lambda x, t: np.sin(x + t)
    q2 = lambda x, t: np.asarray(x) ** 2 - np.asarray(t)
    combo = steklov_cell(lambda x, t: alpha * q1(x, t) + q2(x, t), g)
    parts = alpha * steklov_cell(q1, g) + steklov_cell(q2, g)
    assert np.allclose(combo, parts, atol=1e-12)


def test_averaging_monotone():
    g = dummy_grid(m=4, n=4)
    q = steklov_cell(lambda x, t: np.asarray(x) ** 2 * (1 + np.cos(t) ** 2), g)
    assert np.all(q >= 0.0)


def test_refinement_approaches_center_values():
    fn = lambda x, t: np.sin(2 * x) * np.exp(-t)
    errs = []
    for m in (4, 8, 16):
        g = dummy_grid(m=m, n=m)
        q = steklov_cell(fn, g)
        xc = 0.5 * (g.xs[:-1] + g.xs[1:])
        tc = 0.5 * (g.ts[:-1] + g.ts[1:])
        errs.append(np.abs(q - fn(xc[None, :], tc[:, None])).max())
    assert errs[0] > errs[1] > errs[2]


def test_average_data_bundles_shapes():
    data = make_data()
    g = make_grid(data, graph_with_floor(), 3, 5)
    avg = average_data(data, g)
    assert avg.a.shape == (5, 3)
    assert avg.phi.shape == (4,)
    assert avg.p.shape == (6,)
    a_k, b_k, c_k, f_k = avg.row(1)
    assert a_k.shape == (3,)


def test_sup_norm_estimates():
    data = make_data(b_amp=-0.7)
    g = make_grid(make_data(), graph_with_floor(), 4, 4)
    norms = sup_norms(data, g)
    assert norms["b"] == pytest.approx(0.7)
    assert norms["a_min"] == pytest.approx(1.0)
