import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_compare.models import profile
from lorentz_compare.spacetime import (
    Graph,
    Point,
    Slice,
    Spacetime,
    ccc_check,
    flat_product,
    geodesic,
    is_spacelike_at,
    jacobi_focal_time,
    jacobi_slice,
    make_tangent,
    ricci,
    ricci_fd,
    shape_operator,
    time_reverse,
    unit_normal,
    unit_timelike,
)


def cos_slab(n=2, k=0):
    return Spacetime(n, k, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), -math.pi / 2, math.pi / 2, "cos")


def exp_spacetime(n=3, k=0):
    return Spacetime(n, k, np.exp, np.exp, np.exp, label="exp")


def model(kappa, beta, n):
    return Spacetime.from_profile(profile(kappa, beta, n))


# Ricci curvature; expected values from oracles.ricci_tt (sympy)


@pytest.mark.parametrize("st_factory,n,expected", [
    (cos_slab, 2, 1.0),
    (exp_spacetime, 3, -2.0),
    (lambda n: flat_product(n), 3, 0.0),
])
def test_ricci_tt_examples(st_factory, n, expected):
    s = st_factory(n)
    p = Point(0.0, np.zeros(n - 1))
    v = make_tangent(s, p, 1.0, np.zeros(n - 1))
    assert ricci(s, p, v) == pytest.approx(expected, abs=1e-14)
    assert ricci_fd(s, p, v) == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("k", [-1, 0, 1])
@settings(max_examples=15, deadline=None)
@given(t=st.floats(-0.8, 0.8), rap=st.floats(0.0, 2.0), seed=st.integers(0, 1000))
def test_ricci_matches_finite_differences(k, t, rap, seed):
    s = cos_slab(3, k)
    rng = np.random.default_rng(seed)
    p = Point(t, rng.uniform(-0.5, 0.5, 2))
    v = unit_timelike(s, p, rap, rng.normal(size=2))
    assert ricci(s, p, v) == pytest.approx(ricci_fd(s, p, v), rel=1e-6, abs=1e-6)


def test_unit_timelike_is_unit():
    s = model(-1.0, 0.5, 3)
    p = Point(0.3, np.array([0.2, -0.1]))
    v = unit_timelike(s, p, 1.3, [1.0, 2.0])
    assert v.causal_type == "timelike" and v.norm2 == pytest.approx(-1.0)


# CCC


@pytest.mark.parametrize("kappa,beta,n", [(1.0, 0.0, 3), (0.0, -1.0, 2), (-1.0, 0.5, 3), (-1.0, -4.0, 3)])
def test_ccc_model_saturates(kappa, beta, n):
    rep = ccc_check(model(kappa, beta, n), Slice(0.0), kappa, beta, sample_budget=60, horizon=2.0)
    assert rep.holds
    assert abs(rep.ricci_margin) < 1e-9 and abs(rep.mean_curvature_margin) < 1e-12


def test_ccc_flat_exact():
    rep = ccc_check(flat_product(3), Slice(0.0), 0.0, 0.0, sample_budget=40, horizon=5.0)
    assert rep.holds and rep.ricci_margin == 0.0 and rep.mean_curvature_margin == 0.0


def test_ccc_strict_ricci_margin():
    rep = ccc_check(cos_slab(2, 0), Slice(0.0), 0.5, 0.0, sample_budget=50, horizon=1.0)
    assert rep.holds and rep.ricci_margin == pytest.approx(0.5, abs=1e-12)


def test_ccc_detects_violation():
    # beta bound violated: H = 0 on slice(0) but beta = -0.1 requested
    rep = ccc_check(flat_product(3), Slice(0.0), 0.0, -0.1, sample_budget=10, horizon=1.0)
    assert not rep.holds and rep.mean_curvature_margin == pytest.approx(-0.1)
    rep = ccc_check(cos_slab(2, 0), Slice(0.0), 2.0, 0.0, sample_budget=10, horizon=1.0)
    assert not rep.holds and rep.worst_ricci_sample is not None


# geodesics


def test_vertical_geodesic():
    s = model(1.0, 0.0, 3)
    g = geodesic(s, Point(0.1, np.array([0.2, 0.3])), make_tangent(s, Point(0.1, np.zeros(2)), 1.0, np.zeros(2)), 1.0)
    assert g.energy == -1.0
    assert np.allclose(g.t, 0.1 + g.s, atol=1e-12)
    assert np.allclose(g.point_at(0.7).x, [0.2, 0.3])


@pytest.mark.parametrize("k", [-1, 0, 1])
@settings(max_examples=10, deadline=None)
@given(rap=st.floats(0.1, 2.0), seed=st.integers(0, 100))
def test_conservation(k, rap, seed):
    s = Spacetime(3, k, np.cosh, np.sinh, np.cosh, label="cosh")
    rng = np.random.default_rng(seed)
    p = Point(0.0, rng.uniform(-0.3, 0.3, 2))
    g = geodesic(s, p, unit_timelike(s, p, rap, rng.normal(size=2)), 5.0)
    assert g.energy_drift < 1e-9 and g.angular_momentum_drift < 1e-8
    assert not g.truncated


def test_null_geodesic_in_slab_follows_null_reach():
    # f = t - 1 on (-inf, 1): along a null geodesic dt/dsigma = |f(t)|
    s = Spacetime.from_profile(profile(0.0, -1.0, 2))
    p = Point(0.0, np.zeros(1))
    v = make_tangent(s, p, 1.0, [1.0])
    assert v.causal_type == "null"
    g = geodesic(s, p, v, 50.0, n_samples=400)
    assert g.truncated
    ratio = g.dt / g.w
    assert np.allclose(ratio, np.abs(g.t - 1.0), rtol=1e-8, atol=1e-10)
    # t = 1 - exp(-sigma)
    assert np.allclose(g.t, 1.0 - np.exp(-g.sigma), atol=1e-8)


def test_geodesic_rejects_bad_input():
    s = flat_product(2)
    with pytest.raises(ValueError):
        geodesic(s, Point(0.0, np.zeros(1)), make_tangent(s, Point(0.0, np.zeros(1)), 0.0, [0.0]), 1.0)
    m = model(0.0, -1.0, 2)
    with pytest.raises(ValueError):
        geodesic(m, Point(2.0, np.zeros(1)), make_tangent(m, Point(0.0, np.zeros(1)), 1.0, [0.0]), 1.0)


def test_sphere_fiber_geodesic_wraps():
    s = flat_product(3, 1)
    p = Point(0.0, np.zeros(2))
    v = unit_timelike(s, p, 1.0, [1.0, 0.0])
    g = geodesic(s, p, v, 2.0)
    # fiber arc length grows like sinh(1) s
    assert g.sigma[-1] == pytest.approx(2.0 * math.sinh(1.0), rel=1e-10)


# focal points


@pytest.mark.parametrize("kappa,beta,n,expected", [(1.0, 0.0, 3, math.pi / 2), (0.0, -1.0, 2, 1.0),
                                                   (-1.0, -4.0, 3, None)])
def test_slice_focal_time_is_b(kappa, beta, n, expected):
    s = model(kappa, beta, n)
    b = profile(kappa, beta, n).b if expected is None else expected
    assert jacobi_focal_time(s, Slice(0.0), horizon=10.0) == pytest.approx(b, abs=1e-8)


def test_flat_has_no_focal_point():
    assert math.isinf(jacobi_focal_time(flat_product(3), Slice(0.0), horizon=20.0))


def test_jacobi_shape_operator_is_isotropic():
    s = model(-1.0, 0.5, 3)
    tr = jacobi_slice(s, 0.0, 2.0, n_samples=50)
    S = tr.shape_operators()
    prof = profile(-1.0, 0.5, 3)
    expected = prof.f_prime(tr.s) / prof.f(tr.s)
    for Si, e in zip(S, expected):
        assert np.allclose(Si, e * np.eye(2), atol=1e-9)


@pytest.mark.parametrize("a", [1.0, 0.5])
def test_graph_focal_time_center_of_curvature(a):
    # u = -a|x|^2/2 osculates a past hyperboloid of radius 1/a at the vertex
    s = flat_product(2)
    g = Graph(lambda x: -0.5 * a * float(x @ x), lambda x: -a * x)
    assert jacobi_focal_time(s, g, np.zeros(1), horizon=5.0) == pytest.approx(1.0 / a, abs=1e-6)


def test_graph_without_focusing():
    s = flat_product(2)
    g = Graph(lambda x: 0.3 * float(x @ x), lambda x: 0.6 * x)
    assert math.isinf(jacobi_focal_time(s, g, np.zeros(1), horizon=5.0))


# hypersurfaces


@pytest.mark.parametrize("kappa,beta,n", [(1.0, 0.0, 3), (-1.0, 0.5, 3), (0.0, -1.0, 2)])
def test_slice_mean_curvature_is_model_H(kappa, beta, n):
    s = model(kappa, beta, n)
    prof = profile(kappa, beta, n)
    for t0 in (0.0, 0.2):
        S, H = shape_operator(s, Slice(t0), np.zeros(n - 1))
        assert H == pytest.approx(float(prof.H(t0)), abs=1e-13)


def test_constant_graph_equals_slice():
    s = model(-1.0, 0.5, 3)
    S1, H1 = shape_operator(s, Slice(0.2), np.array([0.1, 0.1]))
    S2, H2 = shape_operator(s, Graph(lambda x: 0.2), np.array([0.1, 0.1]))
    assert H2 == pytest.approx(H1, abs=1e-8)
    assert np.allclose(S1, S2, atol=1e-8)


def test_bump_graph_mean_curvature_is_laplacian_at_peak():
    # u = eps * exp(-|x|^2), Laplacian at 0 in R^2 is -4
    s = flat_product(3)
    errs = []
    for eps in (0.02, 0.01, 0.005):
        g = Graph(lambda x, e=eps: e * math.exp(-float(x @ x)))
        _, H = shape_operator(s, g, np.zeros(2))
        errs.append(abs(H / eps - (-4.0)))
    # the normal is vertical at the peak, so H equals the Laplacian there
    assert max(errs) < 1e-6


def test_spacelike_condition_is_warped():
    # f = 1/2 on the slab: slope 0.6 is spacelike for f = 1 but not for f = 1/2
    half = Spacetime(2, 0, lambda t: 0.5 + 0 * np.asarray(t), lambda t: 0 * np.asarray(t),
                     lambda t: 0 * np.asarray(t))
    g = Graph(lambda x: 0.6 * float(x[0]), lambda x: np.array([0.6]))
    assert is_spacelike_at(flat_product(2), g, np.zeros(1))
    assert not is_spacelike_at(half, g, np.zeros(1))
    with pytest.raises(ValueError):
        unit_normal(half, g, np.zeros(1))


def test_unit_normal_of_graph_is_unit_and_orthogonal():
    s = model(-1.0, 0.5, 3)
    g = Graph(lambda x: 0.1 * x[0] + 0.05 * x[1] ** 2, lambda x: np.array([0.1, 0.1 * x[1]]))
    x = np.array([0.2, 0.4])
    nv = unit_normal(s, g, x)
    assert nv.norm2 == pytest.approx(-1.0, abs=1e-12)
    f = float(s.f(g.height(x)))
    h = s.fiber.metric(x)
    du = g.gradient(x)
    for i in range(2):
        T_dt, T_dx = du[i], np.eye(2)[i]
        inner = -nv.dt * T_dt + f * f * float(nv.dx @ h @ T_dx)
        assert abs(inner) < 1e-12


# time reversal


def test_reverse_twice_is_identity():
    s = model(-1.0, 0.5, 3)
    r = time_reverse(time_reverse(s))
    t = np.linspace(-1, 1, 7)
    assert np.allclose(r.f(t), s.f(t)) and np.allclose(r.f_prime(t), s.f_prime(t))
    assert (r.t_min, r.t_max) == (s.t_min, s.t_max)


def test_reverse_flips_slice_mean_curvature():
    s = model(-1.0, 0.5, 3)
    r = time_reverse(s)
    _, H = shape_operator(s, Slice(0.3), np.zeros(2))
    _, Hr = shape_operator(r, Slice(-0.3), np.zeros(2))
    assert Hr == pytest.approx(-H, abs=1e-14)


def test_model_k1_b0_is_reverse_symmetric():
    s = model(1.0, 0.0, 3)
    r = time_reverse(s)
    t = np.linspace(-1.5, 1.5, 9)
    assert np.allclose(r.f(t), s.f(t), atol=1e-15)
    assert (r.t_min, r.t_max) == (s.t_min, s.t_max)


def test_spacetime_validation():
    with pytest.raises(ValueError):
        Spacetime(1, 0, np.cos, np.sin, np.cos)
    with pytest.raises(ValueError):
        Spacetime(2, 0, np.cos, np.sin, np.cos, 1.0, 0.0)
