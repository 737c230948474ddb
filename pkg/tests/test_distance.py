import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_compare.models import DomainError, profile, s_kappa
from lorentz_compare.distance import (
    causally_related,
    cut_parameter,
    cut_point,
    dalembert_check,
    minus_box_tau,
    null_reach,
    orthogonality_residual,
    reverse_triangle_check,
    tau_point,
    tau_sigma,
    tau_value,
)
from lorentz_compare.spacetime import Graph, Point, Slice, Spacetime, flat_product, unit_timelike

import oracles


def model(kappa, beta, n):
    return Spacetime.from_profile(profile(kappa, beta, n))


# flat products


@settings(max_examples=80, deadline=None)
@given(T=st.floats(0.05, 5.0), frac=st.floats(0.0, 0.98))
def test_flat_closed_form(T, frac):
    d = frac * T
    value, _, diag = tau_value(flat_product(2), 0.0, T, d)
    assert value == pytest.approx(math.sqrt(T * T - d * d), rel=1e-9, abs=1e-12)
    assert diag["converged"]


@pytest.mark.parametrize("T,d", [(3.0, 1.0), (2.0, 1.3), (1.0, 0.0)])
def test_flat_matches_brute_force_oracle(T, d):
    s = flat_product(2)
    res = tau_point(s, Point(0.0, np.zeros(1)), Point(T, np.array([d])))
    assert res.value == pytest.approx(oracles.flat_tau_grid(T, d), abs=1e-9)


def test_maximizer_reaches_target():
    s = flat_product(3)
    p, q = Point(0.0, np.zeros(2)), Point(2.0, np.array([0.6, -0.8]))
    res = tau_point(s, p, q)
    end = res.maximizer.point_at(res.value)
    assert end.t == pytest.approx(2.0, abs=1e-8)
    assert np.allclose(end.x, q.x, atol=1e-8)


@pytest.mark.parametrize("q", [Point(1.0, np.array([1.5])), Point(-1.0, np.array([0.0])),
                               Point(0.0, np.array([0.3]))])
def test_not_chronological_gives_zero(q):
    s = flat_product(2)
    assert tau_point(s, Point(0.0, np.zeros(1)), q).value == 0.0


def test_same_point_is_zero():
    s = model(1.0, 0.0, 3)
    p = Point(0.2, np.array([0.1, 0.1]))
    assert tau_point(s, p, p).value == 0.0


def test_sphere_fiber_distance():
    s = flat_product(3, 1)
    p = Point(0.0, np.zeros(2))
    q = Point(4.0, np.array([1.0, 0.0]))
    d = s.fiber.distance(p.x, q.x)
    assert tau_point(s, p, q).value == pytest.approx(math.sqrt(16.0 - d * d), rel=1e-10)


def test_causal_relation():
    s = flat_product(2)
    p = Point(0.0, np.zeros(1))
    assert causally_related(s, p, Point(1.0, np.array([0.5])))
    assert causally_related(s, p, Point(1.0, np.array([1.0])))
    assert not causally_related(s, p, Point(1.0, np.array([1.01])))
    assert not causally_related(s, p, Point(-1.0, np.zeros(1)))


def test_points_outside_interval_rejected():
    s = model(0.0, -1.0, 2)
    with pytest.raises(DomainError):
        tau_point(s, Point(0.0, np.zeros(1)), Point(1.5, np.zeros(1)))
    with pytest.raises(ValueError):
        tau_point(s, Point(0.0, np.zeros(2)), Point(0.5, np.zeros(1)))


# warped spacetimes


def test_warped_vertical_is_time_difference():
    s = model(-1.0, 0.5, 3)
    assert tau_point(s, Point(0.0, np.zeros(2)), Point(1.3, np.zeros(2))).value == pytest.approx(1.3)


@pytest.mark.parametrize("kappa,beta,n", [(0.0, 0.0, 3), (1.0, 0.0, 3), (-1.0, 0.5, 3), (0.0, -1.0, 2)])
def test_reverse_triangle(kappa, beta, n):
    s = model(kappa, beta, n)
    rep = reverse_triangle_check(s, sample_budget=40, seed=1, t_lo=-0.3, t_hi=0.9)
    assert rep.holds and rep.samples == 40


def test_reverse_triangle_with_slice():
    s = model(1.0, 0.0, 3)
    rep = reverse_triangle_check(s, sample_budget=30, seed=2, t_lo=-0.5, t_hi=1.0, sigma=Slice(-0.5))
    assert rep.holds and rep.sigma_samples > 0


# hypersurfaces


def test_tau_slice():
    s = model(-1.0, 0.5, 3)
    q = Point(0.8, np.array([0.2, 0.1]))
    res = tau_sigma(s, Slice(0.1), q)
    assert res.value == pytest.approx(0.7)
    searched = tau_sigma(s, Slice(0.1), q, method="search")
    assert searched.value == pytest.approx(0.7, abs=1e-8)
    assert np.allclose(searched.foot_point.x, q.x, atol=1e-4)
    past = tau_sigma(s, Slice(0.1), Point(-0.2, np.zeros(2)))
    assert past.value == pytest.approx(-0.3) and past.diagnostics["side"] == "past"


@pytest.mark.parametrize("q", [Point(-0.5, np.array([0.0])), Point(-0.6, np.array([0.2])),
                               Point(-0.9, np.array([-0.3]))])
def test_tau_past_hyperboloid(q):
    # unit past hyperboloid t = -sqrt(1 + x^2): tau_Sigma(q) = 1 - sqrt(t^2 - x^2) inside the cone
    s = flat_product(2)
    hyp = Graph(lambda x: -math.sqrt(1.0 + float(x @ x)), lambda x: -x / math.sqrt(1.0 + float(x @ x)))
    res = tau_sigma(s, hyp, q)
    expected = 1.0 - math.sqrt(q.t ** 2 - float(q.x @ q.x))
    assert res.value == pytest.approx(expected, abs=1e-7)
    assert orthogonality_residual(s, hyp, res.foot_point, res.maximizer) < 1e-5


def test_cut_of_slice_is_focal_time():
    s = model(1.0, 0.0, 3)
    res = cut_parameter(s, Slice(0.0), np.zeros(2))
    assert res.cause == "conjugate_point"
    assert res.cut_parameter == pytest.approx(math.pi / 2, abs=1e-8)


def test_slice_in_sphere_product_is_never_cut():
    res = cut_parameter(flat_product(3, 1), Slice(0.0), np.zeros(2), horizon=10.0)
    assert math.isinf(res.cut_parameter) and res.truncated and res.cause == "horizon"


def test_cut_point_sphere_fiber():
    # tilted geodesic with rapidity 1: fiber arc sinh(1) s reaches pi at pi / sinh(1)
    s = flat_product(3, 1)
    p = Point(0.0, np.zeros(2))
    res = cut_point(s, p, unit_timelike(s, p, 1.0, [1.0, 0.0]), horizon=4.0)
    assert res.cause == "competing_geodesic"
    assert res.cut_parameter == pytest.approx(2.67323814048303015041792866157, abs=1e-5)


def test_no_cut_in_minkowski():
    s = flat_product(3)
    p = Point(0.0, np.zeros(2))
    res = cut_point(s, p, unit_timelike(s, p, 1.0, [1.0, 0.0]), horizon=4.0)
    assert math.isinf(res.cut_parameter)


# null reach; values frozen from oracles.null_arrival (mpmath ODE)


@pytest.mark.parametrize("r,expected", [(0.5, 0.3934693402873666), (1.0, 0.6321205588285577),
                                        (2.0, 0.8646647167633873), (4.0, 0.9816843611112658)])
def test_null_reach_slab(r, expected):
    s = model(0.0, -1.0, 2)
    res = null_reach(s, 0.0, r)
    assert res.arrival == pytest.approx(expected, abs=1e-10)
    assert res.arrival < 1.0 and not res.truncated


def test_null_reach_flat_and_validation():
    s = flat_product(2)
    assert null_reach(s, 0.3, 2.0).arrival == pytest.approx(2.3, abs=1e-12)
    assert null_reach(s, 0.3, 0.0).arrival == 0.3
    with pytest.raises(ValueError):
        null_reach(s, 0.0, -1.0)
    with pytest.raises(DomainError):
        null_reach(model(0.0, -1.0, 2), 2.0, 1.0)


# d'Alembertian of tau


@pytest.mark.parametrize("n", [2, 3, 4])
def test_minus_box_tau_flat(n):
    s = flat_product(n)
    p = Point(0.0, np.zeros(n - 1))
    x = np.zeros(n - 1)
    x[0] = 0.7
    q = Point(2.0, x)
    tau = math.sqrt(4.0 - 0.49)
    assert minus_box_tau(s, p, q) == pytest.approx((n - 1) / tau, rel=1e-9)


@pytest.mark.parametrize("kappa,beta,n", [(1.0, 0.0, 3), (-1.0, 0.5, 3), (0.0, -1.0, 2), (-1.0, 2.0, 3)])
def test_model_saturates_dalembert_bound(kappa, beta, n):
    s = model(kappa, beta, n)
    p = Point(0.0, np.zeros(n - 1))
    hi = min(0.9 * s.t_max, 1.2) if math.isfinite(s.t_max) else 1.2
    rep = dalembert_check(s, p, kappa, sample_budget=25, seed=3, t_hi=hi)
    assert rep.holds and rep.samples > 15
    assert rep.max_equality_error < 1e-7


def test_dalembert_bound_violated_for_larger_kappa():
    s = flat_product(3)
    rep = dalembert_check(s, Point(0.0, np.zeros(2)), 1.0, sample_budget=20, seed=0, t_hi=2.0)
    # (n-1)/tau > (n-1) cot(tau) for tau in (0, pi): the flat product satisfies kappa = 0 only
    assert not rep.holds


def test_minus_box_tau_requires_chronology():
    s = flat_product(2)
    with pytest.raises(DomainError):
        minus_box_tau(s, Point(0.0, np.zeros(1)), Point(1.0, np.array([2.0])))


def test_s_kappa_reference_in_model():
    s = model(1.0, 0.0, 3)
    p, q = Point(0.0, np.zeros(2)), Point(0.5, np.array([0.2, 0.0]))
    tau = tau_point(s, p, q).value
    assert minus_box_tau(s, p, q) == pytest.approx(2 * float(s_kappa(1.0, tau)), rel=1e-8)
