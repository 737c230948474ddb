"""Spacetime spec files (JSON) to Spacetime and hypersurface objects."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.interpolate import CubicSpline

from .models import profile
from .schemas import (
    ExpressionWarp,
    FlatWarp,
    ModelWarp,
    SampledWarp,
    SliceSpec,
    SpacetimeSpec,
    Term,
)
from .spacetime import Graph, Slice, Spacetime


class SpecError(ValueError):
    """A spec file that cannot be read, validated or realized."""


def load_spec(source: Union[str, Path, dict]) -> SpacetimeSpec:
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read spec {source}: {exc}") from exc
    try:
        return SpacetimeSpec.model_validate(data)
    except ValidationError as exc:
        raise SpecError(str(exc)) from exc


def _term_funcs(term: Term):
    A, w, c = term.amplitude, term.rate, term.phase
    form = term.form
    if form == "cos":
        return (lambda t: A * np.cos(w * t + c), lambda t: -A * w * np.sin(w * t + c),
                lambda t: -A * w * w * np.cos(w * t + c))
    if form == "sin":
        return (lambda t: A * np.sin(w * t + c), lambda t: A * w * np.cos(w * t + c),
                lambda t: -A * w * w * np.sin(w * t + c))
    if form == "cosh":
        return (lambda t: A * np.cosh(w * t + c), lambda t: A * w * np.sinh(w * t + c),
                lambda t: A * w * w * np.cosh(w * t + c))
    if form == "sinh":
        return (lambda t: A * np.sinh(w * t + c), lambda t: A * w * np.cosh(w * t + c),
                lambda t: A * w * w * np.sinh(w * t + c))
    if form == "exp":
        return (lambda t: A * np.exp(w * t + c), lambda t: A * w * np.exp(w * t + c),
                lambda t: A * w * w * np.exp(w * t + c))
    if form == "affine":
        return (lambda t: A * (w * np.asarray(t, dtype=float) + c),
                lambda t: A * w * np.ones_like(np.asarray(t, dtype=float)),
                lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    # cubic_plus
    return (lambda t: A * np.maximum(np.asarray(t, dtype=float) - c, 0.0) ** 3,
            lambda t: 3 * A * np.maximum(np.asarray(t, dtype=float) - c, 0.0) ** 2,
            lambda t: 6 * A * np.maximum(np.asarray(t, dtype=float) - c, 0.0))


def expression_warp(terms):
    funcs = [_term_funcs(t) for t in terms]

    def combine(i):
        return lambda t: sum(fs[i](t) for fs in funcs)

    return combine(0), combine(1), combine(2)


def build_spacetime(spec: SpacetimeSpec) -> Spacetime:
    warp = spec.warp
    t_min = -math.inf if spec.t_min is None else spec.t_min
    t_max = math.inf if spec.t_max is None else spec.t_max
    if isinstance(warp, ModelWarp):
        prof = profile(warp.kappa, warp.beta, spec.n)
        k = prof.fiber_curvature if spec.fiber_curvature is None else spec.fiber_curvature
        if spec.t_min is None:
            t_min = prof.lower_end
        if spec.t_max is None:
            t_max = prof.upper_end
        if t_min < prof.lower_end or t_max > prof.upper_end:
            raise SpecError(f"time interval must lie inside ({prof.lower_end}, {prof.upper_end})")
        f, fp, fpp = prof.f, prof.f_prime, prof.f_second
        label = spec.label or f"model({warp.kappa}, {warp.beta}, {spec.n})"
    elif isinstance(warp, FlatWarp):
        k = 0 if spec.fiber_curvature is None else spec.fiber_curvature
        f, fp, fpp = expression_warp([Term(form="affine", amplitude=1.0, rate=0.0, phase=1.0)])
        label = spec.label or "flat product"
    elif isinstance(warp, ExpressionWarp):
        if spec.fiber_curvature is None:
            raise SpecError("expression warps need fiber_curvature")
        k = spec.fiber_curvature
        f, fp, fpp = expression_warp(warp.terms)
        label = spec.label or "expression"
    elif isinstance(warp, SampledWarp):
        if spec.fiber_curvature is None:
            raise SpecError("sampled warps need fiber_curvature")
        k = spec.fiber_curvature
        spline = CubicSpline(np.asarray(warp.t), np.asarray(warp.f))
        f, fp, fpp = spline, spline.derivative(1), spline.derivative(2)
        t_min = max(t_min, warp.t[0])
        t_max = min(t_max, warp.t[-1])
        label = spec.label or "samples"
    else:  # pragma: no cover - the union is closed
        raise SpecError(f"unknown warp {warp!r}")
    try:
        return Spacetime(spec.n, int(k), f, fp, fpp, t_min, t_max, label)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def build_sigma(spec: SpacetimeSpec):
    s = spec.sigma
    if isinstance(s, SliceSpec):
        return Slice(s.t0)
    m = spec.n - 1
    a = np.zeros(m) if not s.linear else np.asarray(s.linear, dtype=float)
    q = np.zeros(m) if not s.quadratic else np.asarray(s.quadratic, dtype=float)
    if a.shape != (m,) or q.shape != (m,):
        raise SpecError(f"graph coefficients need {m} entries")
    t0 = s.t0
    return Graph(lambda x: t0 + float(a @ x) + 0.5 * float(q @ (np.asarray(x) ** 2)),
                 lambda x: a + q * np.asarray(x))


def realize(source) -> Tuple[SpacetimeSpec, Spacetime, object]:
    spec = source if isinstance(source, SpacetimeSpec) else load_spec(source)
    st = build_spacetime(spec)
    sigma = build_sigma(spec)
    h = sigma.t0 if isinstance(sigma, Slice) else sigma.height(np.zeros(st.m))
    if not st.contains(h):
        raise SpecError(f"hypersurface height {h} outside ({st.t_min}, {st.t_max})")
    return spec, st, sigma


__all__ = ["SpecError", "build_sigma", "build_spacetime", "expression_warp", "load_spec", "realize"]
