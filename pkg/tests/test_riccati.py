import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_compare.models import s_kappa
from lorentz_compare.riccati import (
    POLE_WINDOW,
    bump,
    comparison_verdict,
    integrate_matrix,
    integrate_scalar,
    random_psd,
)


def closed_form(kappa, t0, s0):
    """Exact solution of s' = -s^2 - kappa through (t0, s0), via mpmath."""
    k = mp.mpf(kappa)
    if k > 0:
        r = mp.sqrt(k)
        c = mp.acot(mp.mpf(s0) / r) - r * t0
        return lambda t: r * mp.cot(r * t + c)
    if k == 0:
        if s0 == 0:
            return lambda t: mp.mpf(0)
        c = 1 / mp.mpf(s0) - t0
        return lambda t: 1 / (t + c)
    r = mp.sqrt(-k)
    x = mp.mpf(s0) / r
    if abs(x) < 1:
        c = mp.atanh(x) - r * t0
        return lambda t: r * mp.tanh(r * t + c)
    c = mp.acoth(x) - r * t0
    return lambda t: r * mp.coth(r * t + c)


# blow-up times frozen from the mpmath closed forms above
@pytest.mark.parametrize("kappa,s0,blow,sign", [
    (1.0, 0.0, math.pi / 2, "-inf"),
    (1.0, 0.5, 2.0344439357957027, "-inf"),
    (0.0, -1.0, 1.0, "-inf"),
    (-1.0, -2.0, 0.549306144334054845697622618461, "-inf"),
])
def test_scalar_blow_up_time(kappa, s0, blow, sign):
    sol = integrate_scalar(kappa, 0.0, s0, horizon=5.0)
    assert sol.blow_up_time == pytest.approx(blow, abs=1e-8)
    assert sol.blow_up_sign == sign


@pytest.mark.parametrize("kappa,s0", [(-1.0, 0.5), (-1.0, 1.0), (-1.0, 3.0), (0.0, 0.0), (0.0, 2.0)])
def test_scalar_no_blow_up(kappa, s0):
    sol = integrate_scalar(kappa, 0.0, s0, horizon=8.0)
    assert math.isinf(sol.blow_up_time) and sol.blow_up_sign is None
    assert sol.t[-1] == pytest.approx(8.0)


def test_backward_blow_up_to_plus_infinity():
    # s = 1/t from t0 = 1 backward reaches +inf at t = 0
    sol = integrate_scalar(0.0, 1.0, 1.0, direction="backward", horizon=3.0)
    assert sol.blow_up_time == pytest.approx(0.0, abs=1e-8)
    assert sol.blow_up_sign == "+inf" and sol.direction == -1


@settings(max_examples=60, deadline=None)
@given(kappa=st.sampled_from([-2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 3.0]), s0=st.floats(-3.0, 3.0),
       t0=st.floats(-1.0, 1.0))
def test_scalar_matches_closed_form(kappa, s0, t0):
    sol = integrate_scalar(kappa, t0, s0, horizon=2.0)
    exact = closed_form(kappa, t0, s0)
    for state in sol.samples:
        if abs(state.trace) > 1e3:
            continue
        ref = float(exact(state.t))
        assert state.trace == pytest.approx(ref, rel=1e-7, abs=1e-8)
    if math.isfinite(sol.blow_up_time):
        assert abs(float(exact(sol.blow_up_time))) > 1e6


def test_matrix_dim1_equals_scalar():
    a = integrate_scalar(1.0, 0.0, 0.5, horizon=3.0)
    b = integrate_matrix(lambda t: [[1.0]], 1, t0=0.0, S0=[[0.5]], horizon=3.0)
    assert a.blow_up_time == b.blow_up_time
    assert np.array_equal(a.traces, b.traces)


@pytest.mark.parametrize("dim", [2, 3])
def test_isotropic_matrix_is_scalar_times_identity(dim):
    sc = integrate_scalar(-1.0, 0.0, -0.8, horizon=2.0)
    mat = integrate_matrix(lambda t: -np.eye(dim), dim, t0=0.0, S0=-0.8 * np.eye(dim), horizon=2.0)
    for state in mat.samples[::40]:
        ref = float(sc.dense(state.t)[0])
        assert np.allclose(state.S, ref * np.eye(dim), rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("kappa,dim", [(1.0, 2), (1.0, 3), (4.0, 2)])
def test_saturating_run_blows_up_at_cot_pole(kappa, dim):
    sol = integrate_matrix(lambda t: kappa * np.eye(dim), dim, asymptotic_kappa=kappa, horizon=5.0)
    assert sol.blow_up_time == pytest.approx(math.pi / math.sqrt(kappa), abs=1e-6)
    v = comparison_verdict(sol, kappa)
    assert v.holds and v.rigidity_confirmed and v.propagation_ok


def test_model_slice_run_blows_down_at_b():
    # R = kappa Id, S0 = beta/(n-1) Id at t0 = 0: (1, 0, 3) model slice
    sol = integrate_matrix(lambda t: np.eye(2), 2, t0=0.0, S0=np.zeros((2, 2)), horizon=4.0)
    assert sol.blow_up_time == pytest.approx(math.pi / 2, abs=1e-8)
    assert sol.blow_up_sign == "-inf"


@pytest.mark.parametrize("seed", range(5))
def test_positive_perturbation_keeps_comparison(seed):
    rng = np.random.default_rng(seed)
    P = random_psd(3, rng)
    kappa = 1.0
    sol = integrate_matrix(lambda t: kappa * np.eye(3) + bump(t, 0.5, 1.5) * P, 3,
                           asymptotic_kappa=kappa, horizon=4.0)
    v = comparison_verdict(sol, kappa)
    assert v.holds
    assert sol.blow_up_time <= math.pi + 1e-6
    # equality only before the bump switches on, and never rigid across it
    assert np.all(v.equality_times < 0.5 + 1e-9) or not v.rigidity_confirmed


def test_eps0_gap_is_strict_but_forgotten():
    # with R = kappa Id the gap s_kappa - tr S / dim decays like eps0 (t_start / t)^2
    sol = integrate_matrix(lambda t: np.eye(2), 2, asymptotic_kappa=1.0, eps0=0.1, horizon=4.0)
    v = comparison_verdict(sol, 1.0)
    assert v.holds and np.all(v.margin > 0)
    assert v.margin[0] == pytest.approx(0.2, rel=1e-6)
    assert sol.blow_up_time < math.pi


def test_weaker_curvature_violates():
    # R = 0 but compared against kappa = 1
    sol = integrate_matrix(lambda t: np.zeros((2, 2)), 2, asymptotic_kappa=0.0, horizon=2.0)
    v = comparison_verdict(sol, 1.0)
    assert not v.holds and v.first_violation is not None


def test_pole_window_excludes_tail():
    sol = integrate_matrix(lambda t: np.eye(2), 2, asymptotic_kappa=1.0, horizon=5.0)
    v = comparison_verdict(sol, 1.0)
    traces = sol.traces[: v.t.size]
    assert np.all(np.abs(traces[1:-1]) <= POLE_WINDOW) or v.t.size < len(sol.samples)


def test_margin_csv():
    sol = integrate_scalar(0.0, 1.0, 1.0, horizon=1.0, n_samples=5)
    text = sol.to_csv(kappa=0.0)
    lines = text.strip().split("\n")
    assert lines[0] == "t,trace,margin"
    t, tr, margin = map(float, lines[1].split(","))
    assert (t, tr) == (1.0, 1.0) and abs(margin) < 1e-15


def test_input_validation():
    with pytest.raises(ValueError):
        integrate_scalar(1.0, 0.0, 0.0, direction="sideways")
    with pytest.raises(ValueError):
        integrate_scalar(1.0, 0.0, 0.0, horizon=0.0)
    with pytest.raises(ValueError):
        integrate_matrix(lambda t: np.eye(2), 2, t0=0.0, S0=np.eye(3))
    with pytest.raises(ValueError):
        integrate_matrix(lambda t: np.eye(2), 2)
    with pytest.raises(ValueError):
        integrate_matrix(lambda t: np.array([[1.0, 1.0], [0.0, 1.0]]), 2, t0=0.0, S0=np.eye(2))
    with pytest.raises(ValueError):
        integrate_matrix(lambda t: np.eye(2), 2, asymptotic_kappa=1.0, eps0=-1.0)


def test_random_psd():
    a = random_psd(4, np.random.default_rng(7))
    b = random_psd(4, np.random.default_rng(7))
    assert np.array_equal(a, b)
    assert np.allclose(a, a.T)
    ev = np.linalg.eigvalsh(a)
    assert ev.min() >= -1e-12 and ev.max() <= 1.0 + 1e-12


def test_bump_support_and_peak():
    t = np.linspace(-1.0, 3.0, 401)
    b = bump(t, 0.0, 2.0)
    assert np.all(b[(t <= 0) | (t >= 2)] == 0) and np.all(b[(t > 0) & (t < 2)] > 0)
    assert float(bump(1.0, 0.0, 2.0)) == pytest.approx(1.0)


def test_s_kappa_reference_consistency():
    sol = integrate_matrix(lambda t: np.eye(3), 3, asymptotic_kappa=1.0, horizon=2.0)
    for state in sol.samples[::50]:
        assert state.trace == pytest.approx(3 * float(s_kappa(1.0, state.t)), rel=1e-7)
