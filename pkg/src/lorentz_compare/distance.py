"""Time separation in GRW spacetimes.

A maximizing timelike geodesic from ``p = (t0, x0)`` to ``q = (t1, x1)``
runs over the minimizing fiber geodesic between ``x0`` and ``x1`` (length
``d``) and is determined by its conserved angular momentum ``l = f^2 sigma'``.
Along it

    sigma(l) = int_{t0}^{t1} l / (|f| sqrt(f^2 + l^2)) dt,
    L(l)     = int_{t0}^{t1} |f| / sqrt(f^2 + l^2) dt,

and ``L(l*)`` with ``sigma(l*) = d`` is the time separation.  Instead of
root-finding in ``l`` we minimize the convex function

    G(l) = int_{t0}^{t1} sqrt(1 + l^2 / f^2) dt - l d,

whose derivative is ``sigma(l) - d`` and whose minimum value equals
``L(l*)``.  The minimum is located by a multistart grid followed by a
golden-section search and polished by a few Newton steps on
``sigma(l) = d``; the value is insensitive to the error in ``l*`` to second
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, optimize

from .models import DomainError, encode_extended, s_kappa
from .spacetime import (
    DEFAULT_HORIZON,
    GeodesicTrace,
    Graph,
    Point,
    Slice,
    Spacetime,
    geodesic,
    jacobi_focal_time,
    make_tangent,
    time_reverse,
    unit_normal,
)

N_STARTS = 32
GOLDEN_TOL = 1e-10
CUT_TIE_TOL = 1e-6
CUT_MARGIN = 1e-3

_GL_NODES, _GL_WEIGHTS = leggauss(20)


class _WarpQuadrature:
    """Composite Gauss-Legendre rule on [t0, t1] with |f| cached at the nodes.

    The number of panels doubles until the integrals of 1/|f| and 1/f^2 (the
    least regular integrands that occur) are stable to 1e-13.
    """

    def __init__(self, st: Spacetime, t0: float, t1: float, max_panels: int = 4096):
        self.t0, self.t1 = t0, t1
        panels = 4
        prev = None
        while True:
            nodes, weights = self._rule(t0, t1, panels)
            fv = np.abs(np.asarray(st.f(nodes), dtype=float))
            if np.any(fv == 0) or not np.all(np.isfinite(fv)):
                raise DomainError(f"warping function vanishes on [{t0}, {t1}]")
            cur = np.array([weights @ (1.0 / fv), weights @ (1.0 / fv ** 2)])
            if prev is not None and np.all(np.abs(cur - prev) <= 1e-13 * np.abs(cur)):
                break
            if panels >= max_panels:
                break
            prev = cur
            panels *= 2
        self.nodes, self.weights, self.fv = nodes, weights, fv
        self.panels = panels
        self.sigma_max = float(cur[0])

    @staticmethod
    def _rule(a, b, panels):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        return nodes, weights

    def sigma(self, l: float) -> float:
        fv = self.fv
        return float(self.weights @ (l / (fv * np.sqrt(fv * fv + l * l))))

    def length(self, l: float) -> float:
        fv = self.fv
        return float(self.weights @ (fv / np.sqrt(fv * fv + l * l)))

    def dual(self, l: float, d: float) -> float:
        fv = self.fv
        return float(self.weights @ np.sqrt(1.0 + (l / fv) ** 2)) - l * d

    def sigma_l(self, l: float) -> float:
        fv = self.fv
        return float(self.weights @ (fv / (fv * fv + l * l) ** 1.5))


@dataclass
class DistanceResult:
    value: float
    maximizer: Optional[GeodesicTrace] = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict)
    foot_point: Optional[Point] = None

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", True))

    def to_dict(self) -> dict:
        foot = None
        if self.foot_point is not None:
            foot = {"t": self.foot_point.t, "x": self.foot_point.x.tolist()}
        return {
            "value": self.value,
            "converged": self.converged,
            "foot_point": foot,
            "diagnostics": {k: encode_extended(v) if isinstance(v, float) else v
                            for k, v in self.diagnostics.items()},
        }


def fiber_distance(st: Spacetime, x0, x1) -> float:
    return st.fiber.distance(x0, x1)


def _check_point(st: Spacetime, p: Point):
    if not st.contains(p.t):
        raise DomainError(f"t = {p.t} outside ({st.t_min}, {st.t_max})")
    if p.x.shape != (st.m,):
        raise ValueError(f"fiber point must have {st.m} coordinates")


def _optimal_momentum(quad: _WarpQuadrature, d: float, n_starts: int = N_STARTS):
    """Minimize the dual function G over l >= 0; returns (l*, G(l*), bracket width)."""
    hi = 1.0
    for _ in range(200):
        if quad.sigma(hi) > d:
            break
        hi *= 2.0
    else:
        raise RuntimeError("could not bracket the angular momentum")
    grid = np.linspace(0.0, hi, n_starts)
    vals = np.array([quad.dual(l, d) for l in grid])
    i = int(np.argmin(vals))
    a, c = grid[max(i - 1, 0)], grid[min(i + 1, n_starts - 1)]
    res = optimize.minimize_scalar(lambda l: quad.dual(l, d), bounds=(a, c), method="bounded",
                                   options={"xatol": GOLDEN_TOL * max(1.0, grid[i])})
    l_star = float(res.x)
    # golden section on the refined bracket; the bounded method supplies a safe starting triple
    width = c - a
    try:
        step = max(1e-6 * max(1.0, l_star), 10 * GOLDEN_TOL)
        lo, hi2 = max(l_star - step, a), min(l_star + step, c)
        if quad.dual(lo, d) > quad.dual(l_star, d) < quad.dual(hi2, d):
            g = optimize.minimize_scalar(lambda l: quad.dual(l, d), bracket=(lo, l_star, hi2),
                                         method="golden", tol=GOLDEN_TOL)
            if g.fun <= res.fun:
                l_star = float(g.x)
            width = hi2 - lo
    except ValueError:
        pass
    l_star = _newton_polish(quad, d, l_star, a, c)
    return l_star, quad.length(l_star), width


def _newton_polish(quad: _WarpQuadrature, d: float, l: float, lo: float, hi: float) -> float:
    """A few safeguarded Newton steps on sigma(l) = d, kept inside [lo, hi]."""
    for _ in range(8):
        r = quad.sigma(l) - d
        if abs(r) <= 1e-15 * max(1.0, d):
            break
        step = r / quad.sigma_l(l)
        new = l - step
        if not lo <= new <= hi:
            break
        l = new
        if abs(step) <= 1e-16 * max(1.0, l):
            break
    return l


def tau_value(st: Spacetime, t0: float, t1: float, d: float, n_starts: int = N_STARTS):
    """Time separation between fiber points at distance d on the slices t0 and t1.

    Returns ``(value, l_star, diagnostics)``.
    """
    diag = {"multistart": n_starts, "bracket_width": 0.0, "converged": True,
            "fiber_distance": d, "angular_momentum": 0.0}
    if t1 <= t0:
        diag["reason"] = "no causal connection"
        return 0.0, 0.0, diag
    quad = _WarpQuadrature(st, t0, t1)
    diag["null_fiber_reach"] = quad.sigma_max
    if d >= quad.sigma_max:
        diag["reason"] = "no causal connection" if d > quad.sigma_max else "null related"
        return 0.0, 0.0, diag
    if d == 0.0:
        return t1 - t0, 0.0, diag
    l_star, value, width = _optimal_momentum(quad, d, n_starts)
    residual = abs(quad.sigma(l_star) - d)
    diag.update(bracket_width=width, angular_momentum=l_star, sigma_residual=residual,
                converged=bool(residual <= 1e-7 * max(1.0, d)))
    return value, l_star, diag


def tau_point(st: Spacetime, p: Point, q: Point, with_maximizer: bool = True,
              n_starts: int = N_STARTS) -> DistanceResult:
    """Time separation tau_p(q) with its maximizing geodesic."""
    _check_point(st, p)
    _check_point(st, q)
    value, l_star, diag = tau_value(st, p.t, q.t, fiber_distance(st, p.x, q.x), n_starts)
    trace = None
    if with_maximizer and value > 0:
        trace = maximizer_from_momentum(st, p, q, l_star, value)
        end = trace.point_at(trace.s[-1])
        diag["endpoint_error"] = abs(end.t - q.t) + fiber_distance(st, end.x, q.x)
    return DistanceResult(value, trace, diag)


def maximizer_from_momentum(st: Spacetime, p: Point, q: Point, l: float, length: float) -> GeodesicTrace:
    """Unit-speed geodesic from p toward q with angular momentum l, traced for ``length``."""
    f0 = float(st.f(p.t))
    dt = math.sqrt(1.0 + (l / f0) ** 2)
    fiber = st.fiber
    E, d = fiber.ambient_log(fiber.embed(p.x), fiber.embed(q.x))
    if E is None or l == 0.0:
        dx = np.zeros(st.m)
    else:
        dx = fiber.pull(p.x, E * (l / f0 ** 2))
    v = make_tangent(st, p, dt, dx)
    return geodesic(st, p, v, length)


def causally_related(st: Spacetime, p: Point, q: Point) -> bool:
    """q in J+(p), using the null radial bound: d_h(x_p, x_q) <= int dt/|f|."""
    if q.t < p.t:
        return False
    if q.t == p.t:
        return bool(np.allclose(p.x, q.x))
    return fiber_distance(st, p.x, q.x) <= _WarpQuadrature(st, p.t, q.t).sigma_max


# hypersurfaces


def _foot_candidates(st: Spacetime, center: np.ndarray, radius: float, rng: np.random.Generator,
                     count: int) -> list:
    out = [center.copy()]
    m = st.m
    for _ in range(count - 1):
        d = rng.normal(size=m)
        d /= np.linalg.norm(d)
        out.append(center + radius * rng.uniform() ** (1.0 / m) * d)
    return out


def tau_sigma(st: Spacetime, sigma, q: Point, method: str = "auto", n_starts: int = N_STARTS,
              seed: int = 0, with_maximizer: bool = True) -> DistanceResult:
    """Signed time separation to a spacelike hypersurface.

    For slices the vertical normal geodesic is maximizing and the value is
    ``t1 - t0``; ``method="search"`` runs the generic foot-point search
    instead, which is what graphs always use.
    """
    _check_point(st, q)
    h = sigma.height(q.x)
    if q.t < h:
        rst = time_reverse(st)
        res = tau_sigma(rst, _reverse_sigma(sigma), q.reversed(), method, n_starts, seed, with_maximizer)
        foot = res.foot_point.reversed() if res.foot_point is not None else None
        return DistanceResult(-res.value, res.maximizer, dict(res.diagnostics, side="past"), foot)
    if q.t == h:
        return DistanceResult(0.0, None, {"converged": True, "on_sigma": True}, Point(h, q.x))
    if isinstance(sigma, Slice) and method == "auto":
        foot = Point(sigma.t0, q.x)
        trace = None
        if with_maximizer:
            trace = geodesic(st, foot, make_tangent(st, foot, 1.0, np.zeros(st.m)), q.t - sigma.t0)
        return DistanceResult(q.t - sigma.t0, trace,
                              {"converged": True, "method": "vertical", "orthogonality": 0.0}, foot)
    return _foot_search(st, sigma, q, n_starts, seed, with_maximizer)


def _reverse_sigma(sigma):
    if isinstance(sigma, Slice):
        return sigma.reversed()
    u, g = sigma.u, sigma.grad
    return Graph(lambda x: -u(x), None if g is None else (lambda x: -np.asarray(g(x))), h_fd=sigma.h_fd)


def _foot_value(st, sigma, q, x):
    x = np.asarray(x, dtype=float)
    try:
        p = Point(sigma.height(x), x)
        if not st.contains(p.t) or p.t >= q.t:
            return 0.0
        return tau_point(st, p, q, with_maximizer=False).value
    except (DomainError, ValueError):
        return 0.0


def _foot_search(st, sigma, q, n_starts, seed, with_maximizer):
    rng = np.random.default_rng(seed)
    h = sigma.height(q.x)
    # the foot lies within the null reach of q measured from the height below q
    reach = _WarpQuadrature(st, h, q.t).sigma_max if q.t > h else 0.0
    radius = min(reach, 3.0) if st.fiber_curvature > 0 else reach
    cands = _foot_candidates(st, q.x, radius, rng, n_starts)
    vals = [_foot_value(st, sigma, q, x) for x in cands]
    best = int(np.argmax(vals))
    res = optimize.minimize(lambda x: -_foot_value(st, sigma, q, x), cands[best], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000,
                                     "initial_simplex": _simplex(cands[best], max(radius, 1e-3) * 0.05)})
    x_foot = np.asarray(res.x, dtype=float)
    value = max(-float(res.fun), vals[best])
    if vals[best] > -res.fun:
        x_foot = cands[best]
    foot = Point(sigma.height(x_foot), x_foot)
    diag = {"multistart": n_starts, "converged": bool(res.success), "method": "search",
            "bracket_width": float(np.max(np.ptp(res.final_simplex[0], axis=0)))}
    trace = None
    if value > 0:
        inner = tau_point(st, foot, q, with_maximizer=True)
        trace = inner.maximizer
        diag["orthogonality"] = orthogonality_residual(st, sigma, foot, trace)
    return DistanceResult(value, trace if with_maximizer else None, diag, foot)


def _simplex(x0, scale):
    m = x0.size
    return np.vstack([x0] + [x0 + scale * e for e in np.eye(m)])


def orthogonality_residual(st: Spacetime, sigma, foot: Point, trace: GeodesicTrace) -> float:
    """max |g(gamma'(0), w)| over an orthonormal basis w of the tangent space of sigma at the foot."""
    v = trace.tangent_at(0.0)
    f2 = float(st.f(foot.t)) ** 2
    hmat = st.fiber.metric(foot.x)

    def g(a_dt, a_dx, b_dt, b_dx):
        return -a_dt * b_dt + f2 * float(a_dx @ hmat @ b_dx)

    # tangent vectors of the graph: (du(e_i), e_i)
    du = np.zeros(st.m) if isinstance(sigma, Slice) else sigma.gradient(foot.x)
    worst = 0.0
    for e in np.eye(st.m):
        w_dt, w_dx = float(du @ e), e
        nw = math.sqrt(abs(g(w_dt, w_dx, w_dt, w_dx)))
        worst = max(worst, abs(g(v.dt, v.dx, w_dt, w_dx)) / nw)
    return worst


# checks


@dataclass
class ReverseTriangleReport:
    samples: int
    violations: int
    worst_slack: float
    sigma_samples: int = 0
    sigma_violations: int = 0

    @property
    def holds(self) -> bool:
        return self.violations == 0 and self.sigma_violations == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "violations": self.violations, "worst_slack": self.worst_slack,
                "sigma_samples": self.sigma_samples, "sigma_violations": self.sigma_violations,
                "holds": self.holds}


def sample_future_point(st: Spacetime, p: Point, rng: np.random.Generator, t_cap: float,
                        fraction: float = 0.95) -> Point:
    """A random point of I+(p) below t_cap, at fiber distance below ``fraction`` of the null reach."""
    t1 = p.t + rng.uniform(0.0, 1.0) * (t_cap - p.t)
    if t1 <= p.t:
        return Point(p.t, p.x)
    reach = _WarpQuadrature(st, p.t, t1).sigma_max
    limit = reach * fraction
    if st.fiber_curvature > 0:
        limit = min(limit, math.pi - 1e-2)
    d = rng.uniform(0.0, limit)
    fiber = st.fiber
    X = fiber.embed(p.x)
    basis = fiber.tangent_basis(X)
    dirn = rng.normal(size=st.m)
    E = dirn @ basis
    E = E / math.sqrt(fiber.inner(E, E))
    Y, _ = fiber.ambient_geodesic(X, E, d)
    return Point(t1, fiber.chart(Y))


def _sampling_window(st: Spacetime, t_lo: Optional[float], t_hi: Optional[float]):
    lo = st.t_min if t_lo is None else t_lo
    hi = st.t_max if t_hi is None else t_hi
    if not math.isfinite(lo):
        lo = -2.0
    if not math.isfinite(hi):
        hi = 2.0
    pad = 1e-2 * (hi - lo)
    return lo + pad, hi - pad


def reverse_triangle_check(st: Spacetime, sample_budget: int = 1000, seed: int = 0,
                           t_lo: Optional[float] = None, t_hi: Optional[float] = None,
                           tol: float = 1e-6, sigma=None) -> ReverseTriangleReport:
    """Random chains p <= q <= r; checks tau_p(q) + tau_q(r) <= tau_p(r) and its Sigma version."""
    rng = np.random.default_rng(seed)
    lo, hi = _sampling_window(st, t_lo, t_hi)
    violations = sigma_violations = sigma_samples = 0
    worst = math.inf
    for _ in range(sample_budget):
        p = Point(rng.uniform(lo, lo + 0.5 * (hi - lo)), _random_fiber_point(st, rng))
        q = sample_future_point(st, p, rng, hi)
        r = sample_future_point(st, q, rng, hi)
        a = tau_point(st, p, q, with_maximizer=False).value
        b = tau_point(st, q, r, with_maximizer=False).value
        c = tau_point(st, p, r, with_maximizer=False).value
        slack = c - a - b
        worst = min(worst, slack)
        if slack < -tol * max(1.0, c):
            violations += 1
        sg = sigma if sigma is not None else Slice(p.t)
        if sg.height(q.x) <= q.t and sg.height(r.x) <= r.t and isinstance(sg, Slice):
            sigma_samples += 1
            sq = tau_sigma(st, sg, q, with_maximizer=False).value
            sr = tau_sigma(st, sg, r, with_maximizer=False).value
            if sq + b - sr > tol * max(1.0, sr):
                sigma_violations += 1
    return ReverseTriangleReport(sample_budget, violations, float(worst), sigma_samples, sigma_violations)


def _random_fiber_point(st: Spacetime, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    d = rng.normal(size=st.m)
    return radius * rng.uniform() * d / np.linalg.norm(d)


# cut function


@dataclass
class CutResult:
    v: object
    cut_parameter: float
    cause: str
    truncated: bool = False

    def to_dict(self) -> dict:
        return {"cut_parameter": encode_extended(float(self.cut_parameter)), "cause": self.cause,
                "truncated": self.truncated}


def cut_parameter(st: Spacetime, sigma, x, horizon: float = DEFAULT_HORIZON, tol: float = CUT_TIE_TOL,
                  seed: int = 0) -> CutResult:
    """Cut parameter of the future normal geodesic of sigma from the point over x.

    The focal time bounds the search.  Slices in a GRW spacetime have no
    competing normal geodesics, so the cut parameter equals the focal time.
    For graphs, bisection on ``tau_sigma(gamma(s)) <= s + tol`` finds it.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nrm = unit_normal(st, sigma, x)
    t0 = sigma.height(x)
    room = st.t_max - t0
    span = min(room, horizon)
    focal = jacobi_focal_time(st, sigma, x, horizon=span)
    if isinstance(sigma, Slice):
        if math.isfinite(focal):
            return CutResult(nrm, focal, "conjugate_point")
        return CutResult(nrm, math.inf, "horizon", truncated=True)
    upper = focal if math.isfinite(focal) else span
    foot = Point(t0, x)
    trace = geodesic(st, foot, nrm, upper * (1 - 1e-9))
    s_end = float(trace.s[-1])

    def maximal(s):
        q = trace.point_at(s)
        return tau_sigma(st, sigma, q, seed=seed, with_maximizer=False).value <= s + tol

    if maximal(s_end):
        if math.isfinite(focal) and not trace.truncated:
            return CutResult(nrm, focal, "conjugate_point")
        return CutResult(nrm, math.inf, "horizon", truncated=True)
    a, b = 0.0, s_end
    while b - a > tol:
        mid = 0.5 * (a + b)
        if maximal(mid):
            a = mid
        else:
            b = mid
    return CutResult(nrm, 0.5 * (a + b), "competing_geodesic")


def cut_point(st: Spacetime, p: Point, v, horizon: float = DEFAULT_HORIZON,
              tol: float = CUT_TIE_TOL) -> CutResult:
    """Cut parameter of the unit-speed timelike geodesic from the point p.

    A second maximizer appears once the fiber arc exceeds the fiber
    diameter (pi for the sphere fiber); bisection locates the parameter where
    the traced geodesic stops realizing tau_p.
    """
    span = min(st.t_max - p.t, horizon) if math.isfinite(st.t_max) else horizon
    trace = geodesic(st, p, v, span)
    fiber = st.fiber

    def maximal(s):
        if s <= 0:
            return True
        y = trace.dense(s)
        # fiber distance in the embedding: the chart does not reach past the antipode
        d = 0.0 if trace.E is None else fiber.ambient_distance(
            trace.X0, fiber.ambient_geodesic(trace.X0, trace.E, float(y[2]))[0])
        return tau_value(st, p.t, float(y[0]), d)[0] <= s + tol

    grid = np.linspace(0.0, float(trace.s[-1]), 65)[1:]
    failing = [s for s in grid if not maximal(s)]
    if not failing:
        return CutResult(v, math.inf, "horizon", truncated=True)
    b = failing[0]
    a = grid[grid < b][-1] if np.any(grid < b) else 0.0
    while b - a > tol:
        mid = 0.5 * (a + b)
        if maximal(mid):
            a = mid
        else:
            b = mid
    return CutResult(v, 0.5 * (a + b), "competing_geodesic")


# null reachability


@dataclass
class NullReach:
    arrival: float
    truncated: bool

    def to_dict(self) -> dict:
        return {"arrival": encode_extended(self.arrival), "truncated": self.truncated}


def null_reach(st: Spacetime, t_start: float, radius: float) -> NullReach:
    """Time at which the radial null curve dc/dsigma = |f(c)| from t_start reaches fiber arc ``radius``."""
    if not st.contains(t_start):
        raise DomainError(f"t_start = {t_start} outside ({st.t_min}, {st.t_max})")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0:
        return NullReach(t_start, False)

    def rhs(s, c):
        return [abs(float(st.f(c[0])))]

    def leave(s, c):
        return (st.t_max - 1e-12) - c[0]

    leave.terminal = True
    sol = integrate.solve_ivp(rhs, (0.0, radius), [t_start], method="DOP853", rtol=1e-12, atol=1e-14,
                              events=leave if math.isfinite(st.t_max) else None)
    if sol.status == -1:
        raise RuntimeError(f"null reach integration failed: {sol.message}")
    return NullReach(float(sol.y[0, -1]), sol.status == 1)


# d'Alembertian of the distance function


def minus_box_tau(st: Spacetime, p: Point, q: Point) -> float:
    """-box tau_p at q, from the envelope representation tau = F(t, r).

    ``r`` is the fiber distance from x_p.  The derivatives of F come from the
    optimal momentum ``l*``: F_r = -l*, F_t = sqrt(1 + l*^2 / f^2) and the
    implicit derivatives of ``sigma(l*, t) = r``.  This equals the mean
    curvature of the past sphere of p through q.
    """
    res = tau_point(st, p, q, with_maximizer=False)
    if res.value <= 0:
        raise DomainError("q is not in the chronological future of p")
    quad = _WarpQuadrature(st, p.t, q.t)
    l = res.diagnostics["angular_momentum"]
    r = res.diagnostics["fiber_distance"]
    m = st.m
    f1, fp1, _ = st.warp(q.t)
    root = math.sqrt(1.0 + (l / f1) ** 2)
    s_l = quad.sigma_l(l)
    F_t = root
    F_rr = -1.0 / s_l
    l_t = -(l / (abs(f1) * math.sqrt(f1 * f1 + l * l))) / s_l
    F_tt = (l * l_t / f1 ** 2 - l * l * fp1 / f1 ** 3) / root
    k = st.fiber_curvature
    if r < 1e-6:
        radial = m * F_rr
    else:
        ct = {1: 1.0 / math.tan(r), 0: 1.0 / r, -1: 1.0 / math.tanh(r)}[k]
        radial = F_rr + (m - 1) * ct * (-l)
    return F_tt + m * (fp1 / f1) * F_t - radial / f1 ** 2


@dataclass
class DalembertReport:
    samples: int
    excluded: int
    violations: int
    worst_slack: float
    max_equality_error: float
    values: list = field(default_factory=list, repr=False)

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "excluded": self.excluded, "violations": self.violations,
                "worst_slack": self.worst_slack, "max_equality_error": self.max_equality_error,
                "holds": self.holds}


def dalembert_check(st: Spacetime, p: Point, kappa: float, sample_budget: int = 100, seed: int = 0,
                    t_hi: Optional[float] = None, tol: float = 1e-6) -> DalembertReport:
    """Sample q in I+(p) and test -box tau_p(q) <= (n-1) s_kappa(tau_p(q)).

    Points within CUT_MARGIN of the cut locus (fiber arc near pi on the sphere
    fiber, tau near a conjugate time pi/sqrt(kappa)) or of the light cone are
    excluded and counted.
    """
    rng = np.random.default_rng(seed)
    _, hi = _sampling_window(st, p.t, t_hi)
    if t_hi is not None:
        hi = t_hi
    n = st.n
    excluded = violations = 0
    worst = math.inf
    eq_err = 0.0
    values = []
    for _ in range(sample_budget):
        q = sample_future_point(st, p, rng, hi, fraction=0.9)
        res = tau_point(st, p, q, with_maximizer=False)
        tau = res.value
        r = res.diagnostics["fiber_distance"]
        near_cut = st.fiber_curvature > 0 and r > math.pi - CUT_MARGIN
        if kappa > 0 and tau > math.pi / math.sqrt(kappa) - CUT_MARGIN:
            near_cut = True
        if tau < CUT_MARGIN or near_cut:
            excluded += 1
            continue
        val = minus_box_tau(st, p, q)
        bound = (n - 1) * float(s_kappa(kappa, tau))
        slack = bound - val
        scale = max(1.0, abs(bound))
        worst = min(worst, slack / scale)
        eq_err = max(eq_err, abs(slack) / scale)
        if slack < -tol * scale:
            violations += 1
        values.append((q.t, q.x.tolist(), tau, val, bound))
    return DalembertReport(sample_budget - excluded, excluded, violations, float(worst), float(eq_err), values)
