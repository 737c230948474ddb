"""Busemann functions of Sigma-rays, asymptotes and level sets.

The Busemann function of a ray ``gamma`` of length ``a`` is the limit of the
truncations ``b_r(x) = r - tau_x(gamma(r))`` as ``r -> a``.  Each truncation
is computed exactly (up to quadrature error) by the distance engine; the
limit is approached along a schedule and the last gap is reported as the
tail bound.  For ``x`` in the past of ``gamma(r)`` the reverse triangle
inequality makes ``r -> b_r(x)`` nonincreasing, which the engine asserts.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distance import (
    cut_parameter,
    fiber_distance,
    tau_point,
    tau_sigma,
    tau_value,
)
from .models import DomainError, encode_extended, s_kappa_limit
from .spacetime import (
    GeodesicTrace,
    Point,
    Slice,
    Spacetime,
    ccc_check,
    geodesic,
    make_tangent,
    normal_geodesic,
    time_reverse,
)

MONOTONE_TOL = 1e-8
ASYMPTOTE_CAUCHY_TOL = 1e-5
DEFAULT_T_MAX = 1e5
FINITE_END_GAP = 1e-3


class NotInPastError(ValueError):
    """The point is not in the timelike past of the ray along the schedule."""


@dataclass
class SigmaRay:
    """A future-directed unit-speed normal geodesic of Sigma maximizing up to length a."""

    spacetime: Spacetime = field(repr=False)
    sigma: object
    x0: np.ndarray
    a: float
    trace: Optional[GeodesicTrace] = field(default=None, repr=False)

    @property
    def origin(self) -> Point:
        return Point(self.sigma.height(self.x0), self.x0)

    def point(self, r: float) -> Point:
        if r < 0 or r > self.a:
            raise DomainError(f"ray parameter {r} outside [0, {self.a}]")
        if isinstance(self.sigma, Slice):
            # vertical unit-speed geodesic: closed form
            return Point(self.sigma.t0 + r, self.x0)
        if self.trace is None or r > self.trace.s[-1]:
            raise DomainError(f"ray traced only up to {None if self.trace is None else self.trace.s[-1]}")
        return self.trace.point_at(r)

    def verify(self, samples: int = 10, tol: float = 1e-6, method: str = "auto") -> float:
        """Largest |tau_Sigma(gamma(t)) - t| over sampled t; must stay below tol."""
        upper = self.a if math.isfinite(self.a) else 10.0
        if self.trace is not None:
            upper = min(upper, float(self.trace.s[-1]))
        worst = 0.0
        for t in np.linspace(0.0, upper * (1 - 1e-3), samples + 1)[1:]:
            q = self.point(t)
            worst = max(worst, abs(tau_sigma(self.spacetime, self.sigma, q, method=method,
                                             with_maximizer=False).value - t))
        if worst >= tol:
            raise ValueError(f"normal geodesic is not a Sigma-ray: defect {worst}")
        return worst


def sigma_ray(st: Spacetime, sigma, x0, horizon: float = DEFAULT_T_MAX) -> SigmaRay:
    """The normal geodesic of sigma at x0, with length given by its cut parameter."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    t0 = sigma.height(x0)
    if isinstance(sigma, Slice):
        cut = cut_parameter(st, sigma, x0, horizon=min(horizon, 50.0))
        a = cut.cut_parameter
        if math.isinf(a):
            a = st.t_max - t0
        return SigmaRay(st, sigma, x0, float(a))
    cut = cut_parameter(st, sigma, x0)
    a = cut.cut_parameter if math.isfinite(cut.cut_parameter) else min(st.t_max - t0, 50.0)
    trace = normal_geodesic(st, sigma, x0, a * (1 - 1e-12))
    return SigmaRay(st, sigma, x0, float(a), trace)


def default_schedule(ray: SigmaRay, r0: Optional[float] = None, t_max: float = DEFAULT_T_MAX,
                     count: int = 21) -> np.ndarray:
    """Geometric approach to a finite end, arithmetic steps up to t_max otherwise."""
    a = ray.a
    if math.isfinite(a):
        start = 0.5 * a if r0 is None else r0
        out = []
        k = 0
        while True:
            r = a - (a - start) * 2.0 ** (-k)
            if r > a - FINITE_END_GAP:
                break
            out.append(r)
            k += 1
        out.append(a - FINITE_END_GAP)
        return np.array(out)
    start = 10.0 if r0 is None else r0
    return np.linspace(start, t_max, count)


@dataclass
class BusemannValue:
    value: float
    truncations: list
    tail_bound: float
    monotone: bool
    skipped: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "truncation"])
        for r, v in self.truncations:
            w.writerow([repr(r), repr(v)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"value": self.value, "tail_bound": self.tail_bound, "monotone": self.monotone,
                "truncations": [[r, v] for r, v in self.truncations], "skipped": self.skipped}


def _tau_to_ray(st: Spacetime, x: Point, y: Point) -> float:
    if y.t <= x.t:
        return 0.0
    return tau_value(st, x.t, y.t, fiber_distance(st, x.x, y.x))[0]


def busemann(x: Point, ray: SigmaRay, schedule: Optional[Sequence[float]] = None,
             tol: float = MONOTONE_TOL) -> BusemannValue:
    """Busemann function of the ray at x from the truncations along the schedule."""
    st = ray.spacetime
    sched = default_schedule(ray) if schedule is None else np.asarray(schedule, dtype=float)
    if np.any(np.diff(sched) <= 0):
        raise ValueError("schedule must be strictly increasing")
    if math.isfinite(ray.a) and sched[-1] > ray.a - FINITE_END_GAP * (1 - 1e-12):
        raise ValueError(f"schedule must stay below a - {FINITE_END_GAP}")
    truncs = []
    skipped = 0
    for r in sched:
        tau = _tau_to_ray(st, x, ray.point(float(r)))
        if tau <= 0.0:
            # x not yet in the past of gamma(r): the truncation is not meaningful
            skipped += 1
            continue
        truncs.append((float(r), float(r) - tau))
    if not truncs:
        raise NotInPastError("x is not in the timelike past of the ray on this schedule")
    vals = np.array([v for _, v in truncs])
    monotone = bool(np.all(np.diff(vals) <= tol * np.maximum(1.0, np.abs(vals[1:]))))
    tail = float(abs(vals[-1] - vals[-2])) if len(vals) > 1 else math.inf
    return BusemannValue(float(vals[-1]), truncs, tail, monotone, skipped)


# asymptotes


@dataclass
class Asymptote:
    trace: GeodesicTrace = field(repr=False)
    velocities: np.ndarray
    converged: bool
    cauchy_gap: float
    property_error: float = math.nan

    def to_dict(self) -> dict:
        return {"converged": self.converged, "cauchy_gap": self.cauchy_gap,
                "property_error": self.property_error,
                "initial_velocity": self.velocities[-1].tolist()}


def _maximizer_velocity(st: Spacetime, p: Point, q: Point) -> np.ndarray:
    """Initial unit velocity (dt, dx) of the maximizer from p to q in chart components."""
    value, l, _ = tau_value(st, p.t, q.t, fiber_distance(st, p.x, q.x))
    if value <= 0:
        raise NotInPastError("no timelike maximizer")
    f0 = float(st.f(p.t))
    dt = math.sqrt(1.0 + (l / f0) ** 2)
    fiber = st.fiber
    E, _ = fiber.ambient_log(fiber.embed(p.x), fiber.embed(q.x))
    dx = np.zeros(st.m) if E is None or l == 0 else fiber.pull(p.x, E * (l / f0 ** 2))
    return np.concatenate([[dt], dx])


def asymptote(p: Point, ray: SigmaRay, schedule: Optional[Sequence[float]] = None,
              span: Optional[float] = None, check_samples: int = 8,
              tol: float = 2e-4) -> Asymptote:
    """Limit of the maximizers from p to gamma(r) along the schedule.

    Convergence is declared when the last three initial velocities agree to
    ASYMPTOTE_CAUCHY_TOL; otherwise the result is flagged inconclusive.  The
    property b(alpha_p(t)) = t + b(p) is evaluated on the last truncation.
    """
    st = ray.spacetime
    sched = default_schedule(ray) if schedule is None else np.asarray(schedule, dtype=float)
    vels = []
    for r in sched:
        try:
            vels.append(_maximizer_velocity(st, p, ray.point(float(r))))
        except NotInPastError:
            continue
    if not vels:
        raise NotInPastError("p is not in the timelike past of the ray on this schedule")
    V = np.array(vels)
    tail = V[-3:]
    gap = float(np.max(np.abs(tail - tail[-1]))) if len(tail) > 1 else math.inf
    converged = len(tail) == 3 and gap < ASYMPTOTE_CAUCHY_TOL
    v = make_tangent(st, p, float(V[-1, 0]), V[-1, 1:])
    r_last = float(sched[-1])
    if span is None:
        bp = busemann(p, ray, sched).value
        span = 0.5 * (r_last - bp) if math.isfinite(ray.a) else min(10.0, 0.5 * r_last)
    trace = geodesic(st, p, v, span)
    err = math.nan
    if check_samples:
        bp = busemann(p, ray, [r_last]).value
        err = 0.0
        for s in np.linspace(0.0, float(trace.s[-1]), check_samples + 1)[1:]:
            bq = busemann(trace.point_at(s), ray, [r_last]).value
            err = max(err, abs(bq - s - bp))
    return Asymptote(trace, V, bool(converged), gap, float(err))


# support hypersurfaces and co-rays


def past_sphere_mean_curvature(st: Spacetime, z: Point, p: Point) -> float:
    """Mean curvature at p of the past sphere {y : tau_y(z) = tau_p(z)}, future normal.

    In the time-reversed spacetime the past sphere is a future sphere of z,
    whose mean curvature is -box of the distance from z; reversing the normal
    flips the sign.
    """
    from .distance import minus_box_tau

    return -minus_box_tau(time_reverse(st), z.reversed(), p.reversed())


@dataclass
class SupportReport:
    samples: int
    violations: int
    worst_slack: float
    level_bound: float
    max_equality_error: float
    flagged: int = 0

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "violations": self.violations, "worst_slack": self.worst_slack,
                "level_bound": self.level_bound, "max_equality_error": self.max_equality_error,
                "flagged": self.flagged, "holds": self.holds}


def level_point(ray: SigmaRay, level: float, x, schedule=None, resolution: float = 1e-9,
                t_lo: Optional[float] = None) -> Point:
    """The point (t, x) with b(t, x) = level, by bisection along the vertical line over x."""
    st = ray.spacetime
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sched = default_schedule(ray) if schedule is None else np.asarray(schedule, dtype=float)
    lo = ray.sigma.height(x) if t_lo is None else t_lo
    hi = ray.origin.t + level + 1.0
    if math.isfinite(ray.a):
        hi = min(hi, ray.origin.t + sched[-1] - 1e-6)

    def b_at(t):
        return busemann(Point(t, x), ray, sched).value

    if b_at(lo) > level or b_at(hi) < level:
        raise DomainError(f"level {level} not bracketed over x = {x}")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if b_at(mid) < level:
            lo = mid
        else:
            hi = mid
    return Point(0.5 * (lo + hi), x)


@dataclass
class LevelSet:
    level: float
    points: list
    achronal: bool
    max_pair_tau: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        m = self.points[0].x.size if self.points else 0
        w.writerow(["t"] + [f"x{i}" for i in range(m)])
        for p in self.points:
            w.writerow([repr(p.t)] + [repr(float(c)) for c in p.x])
        return buf.getvalue()


def level_set(ray: SigmaRay, level: float, fiber_points, schedule=None, resolution: float = 1e-9,
              tol: float = 1e-6) -> LevelSet:
    """Sample the level set b = level over the given fiber points and test achronality."""
    st = ray.spacetime
    pts = [level_point(ray, level, x, schedule, resolution) for x in fiber_points]
    worst = 0.0
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            a, b = (p, q) if p.t <= q.t else (q, p)
            worst = max(worst, tau_point(st, a, b, with_maximizer=False).value)
    return LevelSet(level, pts, worst <= tol, worst)


def support_bound_check(ray: SigmaRay, t_level: float, kappa: float, sample_budget: int = 20,
                        seed: int = 0, fiber_radius: float = 0.3, s_count: int = 5,
                        schedule=None, tol: float = 1e-5) -> SupportReport:
    """Check H of past spheres S-_{alpha_p(s)}(s) >= -(n-1) s_kappa(s) at level points p.

    The sup over s in (0, a - t_level) of the right side is the level bound
    -(n-1) s_kappa(a - t_level), with the infinite-length conventions of
    ``s_kappa_limit``.
    """
    st = ray.spacetime
    rng = np.random.default_rng(seed)
    sched = default_schedule(ray) if schedule is None else np.asarray(schedule, dtype=float)
    n = st.n
    a = ray.a
    room = (a - t_level) if math.isfinite(a) else 10.0
    level_bound = -(n - 1) * s_kappa_limit(kappa, a - t_level if math.isfinite(a) else math.inf)
    violations = flagged = 0
    worst = math.inf
    eq_err = 0.0
    done = 0
    for _ in range(sample_budget):
        d = rng.normal(size=st.m)
        x = ray.x0 + fiber_radius * rng.uniform() * d / np.linalg.norm(d)
        try:
            p = level_point(ray, t_level, x, sched)
            asym = asymptote(p, ray, sched, span=room * 0.9, check_samples=0)
        except (DomainError, NotInPastError):
            flagged += 1
            continue
        done += 1
        for s in np.linspace(0.0, room * 0.9, s_count + 1)[1:]:
            z = asym.trace.point_at(s)
            try:
                H = past_sphere_mean_curvature(st, z, p)
            except DomainError:
                flagged += 1
                continue
            bound = -(n - 1) * s_kappa_limit(kappa, s)
            scale = max(1.0, abs(bound))
            slack = (H - bound) / scale
            worst = min(worst, slack)
            eq_err = max(eq_err, abs(slack))
            if slack < -tol:
                violations += 1
    return SupportReport(done, violations, float(worst), float(level_bound), float(eq_err), flagged)


@dataclass
class CoRayReport:
    precondition_ok: bool
    reason: str
    samples: int = 0
    violations: int = 0
    max_defect: float = 0.0

    @property
    def holds(self) -> bool:
        return self.precondition_ok and self.violations == 0

    def to_dict(self) -> dict:
        return {"precondition_ok": self.precondition_ok, "reason": self.reason, "samples": self.samples,
                "violations": self.violations, "max_defect": self.max_defect, "holds": self.holds}


def co_ray_check(ray: SigmaRay, kappa: float, beta: float, neighborhood_radius: float = 0.5,
                 sample_budget: int = 10, seed: int = 0, t_samples: int = 6, tol: float = 1e-5,
                 method: str = "auto") -> CoRayReport:
    """Normal geodesics from Sigma points near gamma(0) are Sigma-rays up to b - 1e-3.

    Runs only when (kappa > 0 or beta <= -(n-1) sqrt|kappa|), the CCC check
    passes and the ray has the maximal length b_{kappa, beta}.
    """
    from .models import profile

    st = ray.spacetime
    n = st.n
    if not (kappa > 0 or beta <= -(n - 1) * math.sqrt(abs(kappa))):
        return CoRayReport(False, "needs kappa > 0 or beta <= -(n-1) sqrt|kappa|")
    b = profile(kappa, beta, n).upper_end
    if not (math.isfinite(b) and abs(ray.a - b) < 1e-6):
        return CoRayReport(False, f"ray length {ray.a} is not b = {b}")
    ccc = ccc_check(st, ray.sigma, kappa, beta, sample_budget=50, seed=seed)
    if not ccc.holds:
        return CoRayReport(False, "CCC check failed")
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(sample_budget):
        d = rng.normal(size=st.m)
        x = ray.x0 + neighborhood_radius * rng.uniform() * d / np.linalg.norm(d)
        t0 = ray.sigma.height(x)
        span = (b - FINITE_END_GAP) - (t0 - ray.origin.t)
        trace = normal_geodesic(st, ray.sigma, x, span)
        for s in np.linspace(0.0, float(trace.s[-1]), t_samples + 1)[1:]:
            q = trace.point_at(s)
            defect = abs(tau_sigma(st, ray.sigma, q, method=method, seed=seed, with_maximizer=False).value - s)
            worst = max(worst, defect)
            if defect >= tol:
                violations += 1
    return CoRayReport(True, "ok", sample_budget, violations, float(worst))


__all__ = [
    "Asymptote", "BusemannValue", "CoRayReport", "LevelSet", "NotInPastError", "SigmaRay",
    "SupportReport", "asymptote", "busemann", "co_ray_check", "default_schedule", "level_point",
    "level_set", "past_sphere_mean_curvature", "sigma_ray", "support_bound_check",
]
