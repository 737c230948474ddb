import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from lorentz_compare.schemas import (
    REQUESTS,
    TOLERANCE_FIELDS,
    CounterexampleRequest,
    RiccatiRequest,
    RunConfig,
    SpacetimeSpec,
    TauRequest,
    Term,
)
from lorentz_compare.spacetime import Graph, Slice
from lorentz_compare.specfile import SpecError, build_spacetime, expression_warp, load_spec, realize

DATA = Path(__file__).parent / "data"


def test_load_data_files():
    spec, s, sigma = realize(DATA / "flat.json")
    assert s.n == 2 and s.fiber_curvature == 0 and math.isinf(s.t_max)
    assert float(s.f(3.0)) == 1.0 and float(s.f_prime(3.0)) == 0.0
    assert isinstance(sigma, Slice) and spec.label == "flat product R x R"
    spec, s, sigma = realize(DATA / "model_k1_b0.json")
    assert s.t_max == pytest.approx(math.pi / 2) and s.t_min == pytest.approx(-math.pi / 2)
    assert s.label == "model(1.0, 0.0, 3)"


def test_unknown_keys_rejected():
    with pytest.raises(SpecError):
        load_spec({"n": 2, "warp": {"kind": "flat"}, "colour": "red"})
    with pytest.raises(SpecError):
        load_spec({"n": 2, "warp": {"kind": "model", "kappa": 1, "beta": 0, "gamma": 2}})


@pytest.mark.parametrize("data", [
    {"schema_version": 2, "n": 2, "warp": {"kind": "flat"}},
    {"n": 1, "warp": {"kind": "flat"}},
    {"n": 2, "warp": {"kind": "hyperbolic"}},
    {"n": 2, "fiber_curvature": 2, "warp": {"kind": "flat"}},
    {"n": 2, "warp": {"kind": "samples", "t": [0, 1, 2, 3], "f": [1, 1, 1]}},
    {"n": 2, "warp": {"kind": "samples", "t": [0, 2, 1, 3], "f": [1, 1, 1, 1]}},
    {"n": 2, "warp": {"kind": "expression", "terms": []}},
])
def test_invalid_specs(data):
    with pytest.raises(SpecError):
        load_spec(data)


def test_unreadable_file(tmp_path):
    with pytest.raises(SpecError):
        load_spec(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SpecError):
        load_spec(bad)


def test_model_interval_checks():
    with pytest.raises(SpecError):
        build_spacetime(load_spec({"n": 3, "warp": {"kind": "model", "kappa": 1, "beta": 0}, "t_max": 2.0}))
    s = build_spacetime(load_spec({"n": 3, "warp": {"kind": "model", "kappa": 1, "beta": 0}, "t_min": 0.0}))
    assert s.t_min == 0.0


def test_expression_needs_fiber_curvature():
    with pytest.raises(SpecError):
        build_spacetime(load_spec({"n": 2, "warp": {"kind": "expression", "terms": [{"form": "cosh"}]}}))


def test_sigma_outside_interval():
    with pytest.raises(SpecError):
        realize({"n": 2, "warp": {"kind": "model", "kappa": 0, "beta": -1}, "sigma": {"kind": "slice", "t0": 2.0}})


def test_graph_sigma():
    spec, s, sigma = realize({"n": 3, "warp": {"kind": "flat"},
                              "sigma": {"kind": "graph", "t0": 0.1, "linear": [0.2, 0.0], "quadratic": [1.0, -1.0]}})
    assert isinstance(sigma, Graph)
    x = np.array([0.5, 0.4])
    assert sigma.height(x) == pytest.approx(0.1 + 0.1 + 0.5 * (0.25 - 0.16))
    assert np.allclose(sigma.gradient(x), [0.2 + 0.5, -0.4])
    with pytest.raises(SpecError):
        realize({"n": 3, "warp": {"kind": "flat"}, "sigma": {"kind": "graph", "linear": [0.2]}})


@settings(max_examples=60, deadline=None)
@given(form=st.sampled_from(["cos", "sin", "cosh", "sinh", "exp", "affine", "cubic_plus"]),
       amp=st.floats(-2, 2), rate=st.floats(-1.5, 1.5), phase=st.floats(-1, 1), t=st.floats(-1, 1))
def test_expression_derivatives(form, amp, rate, phase, t):
    f, fp, fpp = expression_warp([Term(form=form, amplitude=amp, rate=rate, phase=phase)])
    h = 1e-5
    assert float(fp(t)) == pytest.approx((float(f(t + h)) - float(f(t - h))) / (2 * h), abs=1e-6)
    assert float(fpp(t)) == pytest.approx((float(fp(t + h)) - float(fp(t - h))) / (2 * h), abs=1e-4)


def test_cubic_plus_kink_profile():
    f, fp, fpp = expression_warp([Term(form="affine", amplitude=1.0, rate=-1.0, phase=1.0),
                                  Term(form="cubic_plus", amplitude=-2.0, phase=0.3)])
    assert float(f(0.2)) == pytest.approx(0.8) and float(fpp(0.2)) == 0.0
    assert float(f(0.5)) == pytest.approx(0.5 - 2.0 * 0.2 ** 3)


def test_sampled_warp_spline():
    t = np.linspace(-1.0, 1.0, 81)
    spec = {"n": 2, "fiber_curvature": 0, "warp": {"kind": "samples", "t": t.tolist(), "f": np.cosh(t).tolist()}}
    _, s, _ = realize(spec)
    assert (s.t_min, s.t_max) == (-1.0, 1.0)
    tt = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(s.f(tt), np.cosh(tt), atol=1e-6)
    assert np.allclose(s.f_second(tt), np.cosh(tt), atol=1e-2)


def test_spec_roundtrip_json():
    spec = load_spec(DATA / "model_k1_b0.json")
    again = SpacetimeSpec.model_validate(json.loads(spec.model_dump_json()))
    assert again == spec


# request models


def test_riccati_request_rules():
    with pytest.raises(ValidationError):
        RiccatiRequest(kappa=1.0)
    with pytest.raises(ValidationError):
        RiccatiRequest(kappa=1.0, t0=0.0, s0=0.0, support=[1.0, 0.5])
    with pytest.raises(ValidationError):
        RiccatiRequest(kappa=1.0, t0=0.0, s0=0.0, tol=0.0)
    req = RiccatiRequest(kappa=1.0, mode="matrix", dim=3)
    assert req.horizon == 10.0 and req.perturbations == 0


def test_tau_request_needs_a_source():
    spec = {"n": 2, "warp": {"kind": "flat"}}
    with pytest.raises(ValidationError):
        TauRequest(spec=spec, q=[1.0, 0.0])
    assert TauRequest(spec=spec, q=[1.0, 0.0], to_sigma=True).to_sigma


def test_counterexample_request():
    with pytest.raises(ValidationError):
        CounterexampleRequest(kappa=-1, beta=-0.5, beta_tildes=[-0.9], n=2)


def test_tolerance_table_matches_requests():
    assert set(TOLERANCE_FIELDS) == set(REQUESTS)
    for command, fields in TOLERANCE_FIELDS.items():
        for name in fields:
            assert name in REQUESTS[command].model_fields


def test_run_config():
    cfg = RunConfig.model_validate({"command": "tau", "params": {"q": [1, 0]}, "output": {"format": "csv"}})
    assert cfg.jobs == 1 and cfg.output.format == "csv"
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"command": "teleport"})
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"jobs": 0})
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"schema_version": 0})
