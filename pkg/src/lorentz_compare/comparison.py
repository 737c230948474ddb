"""Area and volume comparison for future spheres and balls of a hypersurface.

For a region ``A`` of ``Sigma`` the future sphere at distance ``t`` is the
image of ``A`` under the normal flow, with cut points removed.  For a slice
``{t0} x Fiber`` of a GRW spacetime the flow is vertical and the Jacobi
propagator is ``j(t) Id`` with

    j'' = (f''/f)(t0 + t) j,    j(0) = 1,    j'(0) = f'(t0)/f(t0),

so ``area(t) = j(t)^{n-1} area(A)``; the normal geodesics stop at the first
zero of ``j``.  ``j`` is integrated numerically, which keeps the closed
form ``f(t0 + t)/f(t0)`` available as an independent check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .models import WarpingProfile, profile as model_profile, relative_volume, volume_profile
from .spaceform import unit_sphere_area
from .spacetime import Graph, Point, Slice, Spacetime, ccc_check, normal_flow_jacobian

MONOTONE_TOL = 1e-8
CUT_BAND = 1e-4
DEFAULT_RESOLUTION = 64


class PreconditionError(ValueError):
    """A theorem hypothesis needed by the requested check does not hold."""


# regions


@dataclass(frozen=True)
class RegionSpec:
    """A fiber region over a hypersurface: a geodesic ball or a chart box.

    ``kind`` is "ball" (``center``, ``radius``) or "box" (``lo``, ``hi``).
    """

    sigma: object
    kind: str
    center: Optional[tuple] = None
    radius: float = 0.0
    lo: Optional[tuple] = None
    hi: Optional[tuple] = None
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0:
                raise ValueError("ball region needs a positive radius")
        elif self.kind == "box":
            if self.lo is None or self.hi is None or not np.all(np.asarray(self.hi) > np.asarray(self.lo)):
                raise ValueError("box region needs lo < hi componentwise")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def ball(cls, sigma, radius: float, center=None, resolution: int = DEFAULT_RESOLUTION):
        return cls(sigma, "ball", None if center is None else tuple(center), float(radius),
                   resolution=resolution)

    @classmethod
    def box(cls, sigma, lo, hi, resolution: int = DEFAULT_RESOLUTION):
        return cls(sigma, "box", lo=tuple(float(v) for v in lo), hi=tuple(float(v) for v in hi),
                   resolution=resolution)


def _box_rule(lo, hi, k):
    x, w = leggauss(k)
    axes, weights = [], []
    for a, b in zip(lo, hi):
        axes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    wts = np.prod(np.stack(np.meshgrid(*weights, indexing="ij"), axis=-1).reshape(-1, len(lo)), axis=1)
    return pts, wts


def _ball_rule(st: Spacetime, center, radius, k):
    """Normal polar coordinates about the center: radial Gauss times an angular rule."""
    m = st.m
    k_sf = st.fiber.k
    r, wr = leggauss(k)
    r = 0.5 * radius * (r + 1.0)
    wr = 0.5 * radius * wr
    sn = {1: np.sin, 0: lambda s: s, -1: np.sinh}[k_sf]
    if m == 1:
        pts = np.concatenate([-r, r])[:, None]
        wts = np.concatenate([wr, wr])
    elif m == 2:
        th = 2 * np.pi * np.arange(2 * k) / (2 * k)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        wts = (wr[:, None] * sn(r)[:, None] * np.full(2 * k, 2 * np.pi / (2 * k))[None, :]).ravel()
    else:
        # angular part: seeded random directions with equal weights, exact for integrands that are
        # constant on geodesic spheres
        rng = np.random.default_rng(12345)
        dirs = rng.normal(size=(4 * k, m))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        aw = unit_sphere_area(m - 1) / dirs.shape[0]
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, m)
        wts = (wr[:, None] * sn(r)[:, None] ** (m - 1) * aw).ravel()
    if center is not None:
        if st.fiber.k != 0 and np.any(np.asarray(center) != 0):
            raise ValueError("balls in curved fibers are centered at the chart origin")
        pts = pts + np.asarray(center)[None, :]
    return pts, wts


def fiber_measure(st: Spacetime, region: RegionSpec, resolution: Optional[int] = None) -> float:
    """h-measure of the fiber region; boxes use a tensor Gauss rule checked by doubling."""
    k = resolution or region.resolution
    if region.kind == "ball":
        return st.fiber.ball_measure(region.radius)

    def rule(kk):
        pts, wts = _box_rule(region.lo, region.hi, kk)
        dens = np.array([math.sqrt(np.linalg.det(st.fiber.metric(p))) for p in pts])
        return float(wts @ dens)

    coarse = rule(max(k // 2, 2))
    fine = rule(k)
    if abs(fine - coarse) > 1e-10 * max(1.0, abs(fine)):
        fine2 = rule(2 * k)
        if abs(fine2 - fine) > 1e-10 * max(1.0, abs(fine2)):
            raise RuntimeError("fiber quadrature did not converge")
        return fine2
    return fine


# Jacobi propagator of a slice


@dataclass
class SliceFlow:
    """Scalar Jacobi propagator j of the slice {t0}, with its first zero (cut time)."""

    spacetime: Spacetime = field(repr=False)
    t0: float
    cut: float
    dense: object = field(repr=False)
    span: float

    def j(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= 0) & (t < self.cut), self.dense(np.clip(t, 0, self.span))[0], 0.0)
        return out[()] if out.ndim == 0 else out

    def jp(self, t):
        return float(self.dense(min(max(t, 0.0), self.span))[1])

    def shape(self, t: float) -> float:
        """Principal curvature j'/j of the level set at distance t (all equal)."""
        return self.jp(t) / float(self.j(t))


def slice_flow(st: Spacetime, t0: float, horizon: float = 50.0) -> SliceFlow:
    f0, fp0, _ = st.warp(t0)
    room = st.t_max - t0
    span = min(room, horizon)
    end = span * (1 - 1e-12) if span == room else span

    def rhs(s, y):
        f, _, fpp = st.warp(t0 + s)
        return [y[1], (fpp / f) * y[0]]

    def zero(s, y):
        return y[0]

    zero.terminal = True
    zero.direction = -1
    sol = integrate.solve_ivp(rhs, (0.0, end), [1.0, fp0 / f0], method="DOP853", rtol=1e-12,
                              atol=1e-14, dense_output=True, events=zero)
    if sol.status == -1:
        # step collapse where f -> 0 at the end of the interval: the propagator has reached 0
        end = float(sol.t[-1])
        return SliceFlow(st, t0, end, sol.sol, end)
    if sol.status == 1:
        cut = float(sol.t_events[0][0])
        return SliceFlow(st, t0, cut, sol.sol, cut)
    cut = room if math.isfinite(room) and span == room else math.inf
    return SliceFlow(st, t0, cut, sol.sol, float(sol.t[-1]))


# area and volume


def _graph_area(st: Spacetime, region: RegionSpec, t: float) -> float:
    """Area of the flowed graph region: Gram determinant of the normal-flow differential."""
    sigma = region.sigma
    if region.kind == "box":
        pts, wts = _box_rule(region.lo, region.hi, region.resolution)
    else:
        pts, wts = _ball_rule(st, region.center, region.radius, region.resolution)
    total = 0.0
    for x, w in zip(pts, wts):
        try:
            mats = normal_flow_jacobian(st, sigma, x, [0.0, t])
        except ValueError:
            continue
        if np.linalg.det(mats[0]) * np.linalg.det(mats[1]) <= 0:
            # a focal point was passed: this direction has been cut
            continue
        gt = mats[1]
        pt_t = _flow_point(st, sigma, x, t)
        G = _gram(st, pt_t, gt[:, :-1])
        total += w * math.sqrt(max(np.linalg.det(G), 0.0))
    return total


def _flow_point(st, sigma, x, t):
    from .spacetime import normal_geodesic

    g = normal_geodesic(st, sigma, x, max(t, 1e-12))
    return g.point_at(t)


def _gram(st: Spacetime, p: Point, vecs: np.ndarray) -> np.ndarray:
    f2 = float(st.f(p.t)) ** 2
    h = st.fiber.metric(p.x)
    g = np.zeros((st.n, st.n))
    g[0, 0] = -1.0
    g[1:, 1:] = f2 * h
    return vecs.T @ g @ vecs


def area_sphere(st: Spacetime, region: RegionSpec, t: float, flow: Optional[SliceFlow] = None) -> float:
    """Area of the future sphere of the region at distance t (cut points removed)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    sigma = region.sigma
    if isinstance(sigma, Slice):
        flow = flow or slice_flow(st, sigma.t0)
        if t >= flow.cut - CUT_BAND and math.isfinite(flow.cut):
            return 0.0
        f0 = abs(float(st.f(sigma.t0)))
        return float(flow.j(t)) ** st.m * f0 ** st.m * fiber_measure(st, region)
    if isinstance(sigma, Graph):
        return _graph_area(st, region, t)
    raise TypeError(f"unsupported hypersurface {sigma!r}")


def vol_ball(st: Spacetime, region: RegionSpec, t: float, flow: Optional[SliceFlow] = None) -> float:
    """Volume of the future ball of the region up to distance t (coarea integral of areas)."""
    if t <= 0:
        return 0.0
    sigma = region.sigma
    if isinstance(sigma, Slice):
        flow = flow or slice_flow(st, sigma.t0)
        upper = min(t, flow.cut)
        f0 = abs(float(st.f(sigma.t0)))
        val, err = integrate.quad(lambda s: float(flow.j(s)) ** st.m, 0.0, upper, epsabs=1e-14,
                                  epsrel=1e-12, limit=200)
        return val * f0 ** st.m * fiber_measure(st, region)
    val, _ = integrate.quad(lambda s: area_sphere(st, region, s), 0.0, t, epsabs=1e-10, epsrel=1e-8, limit=50)
    return val


# monotonicity


@dataclass
class ComparisonReport:
    t: np.ndarray
    area: np.ndarray
    vol: np.ndarray
    area_ratio: np.ndarray
    vol_ratio: np.ndarray
    monotone_area: bool
    monotone_vol: bool
    rigidity_flags: np.ndarray
    isotropy_error: np.ndarray
    propagation_ok: bool
    limit_value: float
    region_area: float
    coarea_residual: float
    first_variation_residual: float
    mean_curvature_ok: bool

    @property
    def monotone(self) -> bool:
        return self.monotone_area and self.monotone_vol

    @property
    def holds(self) -> bool:
        return self.monotone and self.mean_curvature_ok

    def to_dict(self) -> dict:
        return {
            "monotone": self.monotone,
            "monotone_area": self.monotone_area,
            "monotone_vol": self.monotone_vol,
            "limit_value": self.limit_value,
            "region_area": self.region_area,
            "coarea_residual": self.coarea_residual,
            "first_variation_residual": self.first_variation_residual,
            "mean_curvature_ok": self.mean_curvature_ok,
            "propagation_ok": self.propagation_ok,
            "rigidity_count": int(np.sum(self.rigidity_flags)),
            "samples": [
                {"t": float(t), "area_ratio": float(a), "vol_ratio": float(v), "rigidity_flag": bool(r)}
                for t, a, v, r in zip(self.t, self.area_ratio, self.vol_ratio, self.rigidity_flags)
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "area_ratio", "vol_ratio", "rigidity_flag"])
        for t, a, v, r in zip(self.t, self.area_ratio, self.vol_ratio, self.rigidity_flags):
            w.writerow([repr(float(t)), repr(float(a)), repr(float(v)), int(bool(r))])
        return buf.getvalue()


def default_t_grid(prof: WarpingProfile, count: int = 128, t_end: float = 4.0) -> np.ndarray:
    """Geometric toward b when b is finite, uniform up to t_end otherwise."""
    b = prof.upper_end
    if math.isfinite(b):
        gaps = np.geomspace(1.0, 1e-3, count)
        return b * (1.0 - gaps) + gaps * 1e-3 * b
    return np.linspace(t_end / count, t_end, count)


def _nonincreasing(vals: np.ndarray, tol: float) -> bool:
    return bool(np.all(np.diff(vals) <= tol * np.maximum(1.0, np.abs(vals[:-1]))))


def monotonicity_report(st: Spacetime, region: RegionSpec, prof: WarpingProfile,
                        t_grid: Optional[Sequence[float]] = None, tol: float = MONOTONE_TOL,
                        flat_tol: float = 1e-10, iso_tol: float = 1e-6) -> ComparisonReport:
    """Area and volume ratios against the model, with rigidity flags.

    Ratios are normalized by the model's relative area (f/f(0))^{n-1} and
    relative volume v(t), so both tend to area(A) as t -> 0 and are constant
    in the model itself.  A sample is flagged rigid when the area ratio is
    flat to ``flat_tol`` (relative) on the interval to the next sample; at
    every earlier sample the level-set shape operator must then be
    (f'/f) Id of the model within ``iso_tol``.
    """
    sigma = region.sigma
    if not isinstance(sigma, Slice):
        raise TypeError("monotonicity_report needs a slice base; graphs are handled by area_sphere")
    t = np.asarray(default_t_grid(prof) if t_grid is None else t_grid, dtype=float)
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ValueError("t_grid must be positive and increasing")
    flow = slice_flow(st, sigma.t0)
    m = st.m
    f0m = float(prof.f(0.0))
    area_A = abs(float(st.f(sigma.t0))) ** m * fiber_measure(st, region)
    area = np.array([area_sphere(st, region, ti, flow) for ti in t])
    vol = np.array([vol_ball(st, region, ti, flow) for ti in t])
    model_area = np.array([(float(prof.f(ti)) / f0m) ** m for ti in t])
    model_vol = relative_volume(prof, t)
    area_ratio = area / model_area
    vol_ratio = vol / model_vol
    mono_a = _nonincreasing(area_ratio, tol)
    mono_v = _nonincreasing(vol_ratio, tol)
    # limit t -> 0 from a tiny distance; the ratio is smooth there
    t_small = 1e-6 * (t[0] if t[0] < 1 else 1.0)
    limit = area_sphere(st, region, t_small, flow) / (float(prof.f(t_small)) / f0m) ** m
    # coarea: d/dt vol = area, checked with a 4th-order central difference
    h = 1e-3 * min(t[0], 1.0)
    coarea = 0.0
    first_var = 0.0
    mc_ok = True
    iso = np.full(t.size, np.nan)
    for i, ti in enumerate(t):
        if ti - 2 * h <= 0 or ti + 2 * h >= flow.cut - CUT_BAND:
            continue
        dv = (-vol_ball(st, region, ti + 2 * h, flow) + 8 * vol_ball(st, region, ti + h, flow)
              - 8 * vol_ball(st, region, ti - h, flow) + vol_ball(st, region, ti - 2 * h, flow)) / (12 * h)
        coarea = max(coarea, abs(dv - area[i]) / max(1.0, abs(area[i])))
        la = [math.log(area_sphere(st, region, ti + k * h, flow)) for k in (-2, -1, 1, 2)]
        dla = (la[0] - 8 * la[1] + 8 * la[2] - la[3]) / (12 * h)
        H_t = m * flow.shape(ti)
        first_var = max(first_var, abs(dla - H_t) / max(1.0, abs(H_t)))
        if H_t > float(prof.H(ti)) + iso_tol * max(1.0, abs(H_t)):
            mc_ok = False
        iso[i] = abs(flow.shape(ti) - float(prof.f_prime(ti)) / float(prof.f(ti)))
    flags = np.zeros(t.size, dtype=bool)
    for i in range(t.size - 1):
        if area[i] <= 0 or area[i + 1] <= 0:
            continue
        flags[i] = abs(area_ratio[i + 1] - area_ratio[i]) <= flat_tol * max(1.0, abs(area_ratio[i]))
    propagation = True
    for i in np.nonzero(flags)[0]:
        earlier = iso[: i + 1]
        earlier = earlier[np.isfinite(earlier)]
        if earlier.size and np.max(earlier) >= iso_tol:
            propagation = False
    return ComparisonReport(t, area, vol, area_ratio, vol_ratio, mono_a, mono_v, flags, iso,
                            propagation, float(limit), float(area_A), float(coarea), float(first_var), mc_ok)


# maximal volume


@dataclass
class MaxVolumeVerdict:
    maximal: bool
    v_bar: float
    ratios: list
    deficit: float
    cut_free: Optional[bool] = None
    reconstruction: Optional["SplitReport"] = None

    def to_dict(self) -> dict:
        return {"maximal": self.maximal, "v_bar": self.v_bar, "ratios": self.ratios, "deficit": self.deficit,
                "cut_free": self.cut_free,
                "reconstruction": None if self.reconstruction is None else self.reconstruction.to_dict()}


def default_exhaustion(sigma, radii=(1.0, 2.0, 4.0, 8.0)) -> list:
    return [RegionSpec.ball(sigma, r) for r in radii]


def max_volume_check(st: Spacetime, exhaustion: Sequence[RegionSpec], prof: WarpingProfile,
                     tol: float = 1e-6, fiber_samples=None) -> MaxVolumeVerdict:
    """vol B+_K / area K against v_bar for every region of the exhaustion."""
    n = prof.n
    if not (prof.kappa > 0 or prof.beta < -(n - 1) * math.sqrt(abs(prof.kappa))):
        raise PreconditionError("v_bar is finite only for kappa > 0 or beta < -(n-1) sqrt|kappa|")
    v_bar = volume_profile(prof).v_bar
    ratios = []
    for region in exhaustion:
        sigma = region.sigma
        flow = slice_flow(st, sigma.t0) if isinstance(sigma, Slice) else None
        big = flow.cut if flow is not None and math.isfinite(flow.cut) else prof.upper_end
        vol = vol_ball(st, region, big, flow)
        area = abs(float(st.f(sigma.t0))) ** st.m * fiber_measure(st, region)
        ratios.append(vol / area)
    deficit = float(v_bar - min(ratios))
    maximal = all(abs(r - v_bar) < tol for r in ratios)
    verdict = MaxVolumeVerdict(maximal, float(v_bar), [float(r) for r in ratios], deficit)
    if maximal:
        from .distance import cut_parameter

        sigma = exhaustion[0].sigma
        b = prof.upper_end
        samples = fiber_samples if fiber_samples is not None else [np.zeros(st.m), 0.5 * np.ones(st.m)]
        cuts = [cut_parameter(st, sigma, x).cut_parameter for x in samples]
        verdict.cut_free = all(c >= b - 1e-6 for c in cuts)
        grid = np.linspace(0.0, b, 41)[1:-1]
        verdict.reconstruction = splitting_reconstruct(st, prof, grid, samples, sigma=sigma)
    return verdict


@dataclass
class LimitVerdict:
    maximal_in_limit: bool
    t: list
    deficits: list

    def to_dict(self) -> dict:
        return {"maximal_in_limit": self.maximal_in_limit, "t": self.t, "deficits": self.deficits}


def limit_criterion(st: Spacetime, exhaustion: Sequence[RegionSpec], prof: WarpingProfile,
                    t_sequence: Sequence[float], tol: float = 1e-6) -> LimitVerdict:
    """Deficits v(t_k) - vol B+_K(t_k) / area K in the regime where v_bar is infinite."""
    n = prof.n
    if not (prof.kappa <= 0 and prof.beta > -(n - 1) * math.sqrt(abs(prof.kappa))):
        raise PreconditionError("limit criterion needs kappa <= 0 and beta > -(n-1) sqrt|kappa|")
    ts = np.asarray(t_sequence, dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise ValueError("t_sequence must be increasing")
    deficits = []
    for tk in ts:
        worst = 0.0
        for region in exhaustion:
            area = abs(float(st.f(region.sigma.t0))) ** st.m * fiber_measure(st, region)
            d = float(relative_volume(prof, tk)) - vol_ball(st, region, tk) / area
            worst = d if abs(d) > abs(worst) else worst
        deficits.append(float(worst))
    last = deficits[-1]
    scale = max(1.0, float(relative_volume(prof, ts[-1])))
    return LimitVerdict(abs(last) <= tol * scale, ts.tolist(), deficits)


# splitting reconstruction


@dataclass
class SplitReport:
    passed: bool
    max_error: float
    isotropy_error: float
    precondition_ok: bool
    worst_sample: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_error": self.max_error, "isotropy_error": self.isotropy_error,
                "precondition_ok": self.precondition_ok,
                "worst_sample": None if self.worst_sample is None else list(self.worst_sample)}


def splitting_reconstruct(st: Spacetime, prof: WarpingProfile, t_grid: Sequence[float], fiber_samples,
                          sigma=None, metric: Optional[Callable] = None, tol: float = 1e-6,
                          iso_tol: float = 1e-6) -> SplitReport:
    """Integrate dh/dt = 2 (f'/f) h of the model and compare with the level-set metrics.

    ``metric(t, x)`` gives the induced metric of the level set at distance t
    in fiber chart coordinates; by default it is read off the spacetime,
    f(t0 + t)^2 h(x).  The shape operator of the level sets (from the Jacobi
    propagator, or from ``metric`` by finite differences when supplied) must
    first be (f'/f) Id of the model.
    """
    sigma = Slice(0.0) if sigma is None else sigma
    if not isinstance(sigma, Slice):
        raise TypeError("splitting reconstruction is implemented for slice bases")
    t0 = sigma.t0
    ts = np.asarray(t_grid, dtype=float)
    flow = slice_flow(st, t0) if metric is None else None

    if metric is None:
        def metric(t, x):
            return float(st.f(t0 + t)) ** 2 * st.fiber.metric(x)

    # precondition: isotropy S_t = (f'/f)(t) Id of the model
    worst_iso, worst_sample = 0.0, None
    hd = 1e-4
    for x in fiber_samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        for t in ts:
            model = float(prof.f_prime(t)) / float(prof.f(t))
            if flow is not None:
                S = flow.shape(t) * np.eye(st.m)
            else:
                dh = (metric(t - 2 * hd, x) - 8 * metric(t - hd, x) + 8 * metric(t + hd, x)
                      - metric(t + 2 * hd, x)) / (12 * hd)
                S = 0.5 * np.linalg.solve(metric(t, x), dh)
            err = float(np.linalg.norm(S - model * np.eye(st.m), 2))
            if err > worst_iso:
                worst_iso, worst_sample = err, (float(t), x.tolist(), err)
    if worst_iso >= iso_tol:
        return SplitReport(False, math.nan, worst_iso, False, worst_sample)

    worst = 0.0
    m = st.m
    for x in fiber_samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h0 = metric(0.0, x)

        def rhs(t, y):
            return 2.0 * float(prof.f_prime(t)) / float(prof.f(t)) * y

        sol = integrate.solve_ivp(rhs, (0.0, float(ts[-1])), h0.ravel(), method="DOP853", rtol=1e-12,
                                  atol=1e-14, t_eval=ts, dense_output=False)
        for k, t in enumerate(sol.t):
            H = sol.y[:, k].reshape(m, m)
            direct = metric(t, x)
            worst = max(worst, float(np.linalg.norm(H - direct) / np.linalg.norm(direct)))
    return SplitReport(worst < tol, worst, worst_iso, True, worst_sample)


# the counterexample family


@dataclass
class NonrigidReport:
    kappa: float
    beta: float
    beta_tildes: tuple
    ccc_pass: tuple
    cut_infinite: tuple
    volumes_at: float
    volumes: tuple
    relative_difference: float

    @property
    def distinguished(self) -> bool:
        return all(self.ccc_pass) and all(self.cut_infinite) and self.relative_difference > 0.01

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "beta": self.beta, "beta_tildes": list(self.beta_tildes),
                "ccc_pass": list(self.ccc_pass), "cut_infinite": list(self.cut_infinite),
                "volumes_at": self.volumes_at, "volumes": list(self.volumes),
                "relative_difference": self.relative_difference, "distinguished": self.distinguished}


def nonrigid_example(kappa: float, beta: float, beta_tildes: Sequence[float], n: int,
                     t_eval: float = 2.0, seed: int = 0) -> tuple:
    """Models M_{kappa, beta~} for beta~ in [-(n-1) sqrt|kappa|, beta] that all satisfy CCC(kappa, beta).

    Returns the spacetimes and a report showing that they are not isometric
    (different relative volume profiles) although none of them has cut points.
    """
    crit = -(n - 1) * math.sqrt(abs(kappa))
    if kappa > 0 or not beta > crit:
        raise PreconditionError("needs kappa <= 0 and beta > -(n-1) sqrt|kappa|")
    for bt in beta_tildes:
        if not crit <= bt <= beta:
            raise PreconditionError(f"beta~ = {bt} outside [{crit}, {beta}]")
    spacetimes, ccc, cuts, vols = [], [], [], []
    from .distance import cut_parameter

    for bt in beta_tildes:
        prof = model_profile(kappa, bt, n)
        st = Spacetime.from_profile(prof, label=f"model({kappa}, {bt}, {n})")
        spacetimes.append(st)
        ccc.append(ccc_check(st, Slice(0.0), kappa, beta, sample_budget=100, seed=seed, horizon=10.0).holds)
        cuts.append(math.isinf(cut_parameter(st, Slice(0.0), np.zeros(st.m), horizon=10.0).cut_parameter))
        vols.append(float(relative_volume(prof, t_eval)))
    diff = (max(vols) - min(vols)) / max(abs(min(vols)), 1e-300)
    return spacetimes, NonrigidReport(kappa, beta, tuple(beta_tildes), tuple(ccc), tuple(cuts), t_eval,
                                      tuple(vols), float(diff))
