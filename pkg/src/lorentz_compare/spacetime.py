"""Generalized Robertson-Walker spacetimes -dt^2 + f(t)^2 h_k.

Coordinates are ``(t, x)`` with ``x`` normal coordinates on the space-form
fiber.  Geodesics use the warped-product reduction: the fiber component runs
along a space-form geodesic at h-speed ``w``, and ``(t, t', sigma, w)`` obey

    t'' = -f f' w^2,    w' = -2 (f'/f) t' w,    sigma' = w,

with conserved energy ``-t'^2 + f^2 w^2`` and angular momentum ``f^2 w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .models import WarpingProfile
from .spaceform import SpaceForm

NULL_BAND = 1e-12
DEFAULT_HORIZON = 50.0


@dataclass(frozen=True)
class Spacetime:
    n: int
    fiber_curvature: int
    f: Callable = field(repr=False)
    f_prime: Callable = field(repr=False)
    f_second: Callable = field(repr=False)
    t_min: float = -math.inf
    t_max: float = math.inf
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("spacetime dimension must be >= 2")
        if not self.t_min < self.t_max:
            raise ValueError("empty time interval")
        object.__setattr__(self, "fiber", SpaceForm(self.fiber_curvature, self.n - 1))

    @property
    def m(self) -> int:
        return self.n - 1

    def contains(self, t: float) -> bool:
        return self.t_min < t < self.t_max

    def warp(self, t: float):
        return float(self.f(t)), float(self.f_prime(t)), float(self.f_second(t))

    @classmethod
    def from_profile(cls, prof: WarpingProfile, label: str = ""):
        return cls(
            n=prof.n,
            fiber_curvature=prof.fiber_curvature,
            f=prof.f,
            f_prime=prof.f_prime,
            f_second=prof.f_second,
            t_min=prof.lower_end,
            t_max=prof.upper_end,
            label=label or f"model({prof.kappa}, {prof.beta}, {prof.n})",
        )

    def horizon(self, t0: float, cap: float = DEFAULT_HORIZON) -> float:
        """Largest parameter span available above t0, capped when the end is infinite."""
        return min(self.t_max - t0, cap)


def flat_product(n: int, fiber_curvature: int = 0) -> Spacetime:
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return Spacetime(n, fiber_curvature, one, zero, zero, label="flat product")


def time_reverse(st: Spacetime) -> Spacetime:
    """The same manifold with t -> -t; future objects become past objects."""
    f, fp, fpp = st.f, st.f_prime, st.f_second
    return Spacetime(
        n=st.n,
        fiber_curvature=st.fiber_curvature,
        f=lambda t: f(-np.asarray(t)),
        f_prime=lambda t: -fp(-np.asarray(t)),
        f_second=lambda t: fpp(-np.asarray(t)),
        t_min=-st.t_max,
        t_max=-st.t_min,
        label=f"reverse({st.label})",
    )


@dataclass(frozen=True)
class Point:
    t: float
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))

    def reversed(self) -> "Point":
        return Point(-self.t, self.x)


@dataclass(frozen=True)
class Tangent:
    dt: float
    dx: np.ndarray
    causal_type: str = ""
    norm2: float = 0.0


def make_tangent(st: Spacetime, p: Point, dt: float, dx) -> Tangent:
    dx = np.atleast_1d(np.asarray(dx, dtype=float))
    q = -dt * dt + float(st.f(p.t)) ** 2 * float(dx @ st.fiber.metric(p.x) @ dx)
    if abs(q) < NULL_BAND:
        kind = "null"
    elif q < 0:
        kind = "timelike"
    else:
        kind = "spacelike"
    return Tangent(float(dt), dx, kind, q)


def unit_timelike(st: Spacetime, p: Point, rapidity: float, direction) -> Tangent:
    """Future unit timelike vector cosh(r) d_t + sinh(r) e with e a g-unit fiber direction."""
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    hn = st.fiber.norm(p.x, d)
    f = float(st.f(p.t))
    dx = np.zeros(st.m) if hn == 0 else d * (math.sinh(rapidity) / (abs(f) * hn))
    return make_tangent(st, p, math.cosh(rapidity), dx)


# curvature


def ricci(st: Spacetime, p: Point, v: Tangent) -> float:
    """Ric(v, v) from the warped-product curvature decomposition."""
    m, k = st.m, st.fiber_curvature
    f, fp, fpp = st.warp(p.t)
    w2 = f * f * float(v.dx @ st.fiber.metric(p.x) @ v.dx)
    return -m * v.dt ** 2 * fpp / f + ((m - 1) * (k + fp * fp) / (f * f) + fpp / f) * w2


def ricci_timelike(st: Spacetime, p: Point, v: Tangent) -> float:
    if make_tangent(st, p, v.dt, v.dx).causal_type != "timelike":
        raise ValueError("ricci_timelike needs a timelike vector")
    return ricci(st, p, v)


def metric(st: Spacetime, coords) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    g = np.zeros((st.n, st.n))
    g[0, 0] = -1.0
    g[1:, 1:] = float(st.f(coords[0])) ** 2 * st.fiber.metric(coords[1:])
    return g


def _d5(fn, x, i, h):
    """Fourth-order central derivative of fn along coordinate i."""
    e = np.zeros_like(x)
    e[i] = h
    return (-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * h)


def christoffel(st: Spacetime, coords, h: float = 1e-3) -> np.ndarray:
    """Gamma[a, b, c] = Gamma^a_{bc} by finite differences of the coordinate metric."""
    x = np.asarray(coords, dtype=float)
    n = st.n
    g = metric(st, x)
    ginv = np.linalg.inv(g)
    dg = np.array([_d5(lambda y: metric(st, y), x, i, h) for i in range(n)])  # dg[c, a, b] = d_c g_ab
    # first kind: G_dbc = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    first = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    return np.einsum("ad,dbc->abc", ginv, first)


def ricci_fd(st: Spacetime, p: Point, v: Tangent, h: float = 1e-3) -> float:
    """Independent Ricci evaluation from finite-difference Christoffel symbols."""
    x = np.concatenate([[p.t], p.x])
    n = st.n
    G = christoffel(st, x, h)
    dG = np.array([_d5(lambda y: christoffel(st, y, h), x, i, h) for i in range(n)])  # dG[e, a, b, c]
    ric = (
        np.einsum("aabd->bd", dG)
        - np.einsum("daba->bd", dG)
        + np.einsum("aae,ebd->bd", G, G)
        - np.einsum("ade,eba->bd", G, G)
    )
    vv = np.concatenate([[v.dt], v.dx])
    return float(vv @ ric @ vv)


# hypersurfaces


@dataclass(frozen=True)
class Slice:
    t0: float
    kind: str = "slice"

    def height(self, x) -> float:
        return self.t0

    def reversed(self) -> "Slice":
        return Slice(-self.t0)


@dataclass(frozen=True)
class Graph:
    """The hypersurface {t = u(x)} over the fiber chart."""

    u: Callable = field(repr=False)
    grad: Optional[Callable] = field(default=None, repr=False)
    kind: str = "graph"
    h_fd: float = 1e-4

    def height(self, x) -> float:
        return float(self.u(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return np.array([_d5(lambda y: np.array(self.u(y)), x, i, self.h_fd) for i in range(x.size)])


def is_spacelike_at(st: Spacetime, sigma, x) -> bool:
    if isinstance(sigma, Slice):
        return True
    du = sigma.gradient(x)
    hinv = np.linalg.inv(st.fiber.metric(x))
    return float(du @ hinv @ du) < float(st.f(sigma.height(x))) ** 2


def unit_normal(st: Spacetime, sigma, x) -> Tangent:
    """Future unit normal of sigma at the point over fiber chart point x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = sigma.height(x)
    if isinstance(sigma, Slice):
        return make_tangent(st, Point(t, x), 1.0, np.zeros(st.m))
    du = sigma.gradient(x)
    hinv = np.linalg.inv(st.fiber.metric(x))
    f2 = float(st.f(t)) ** 2
    q = float(du @ hinv @ du) / f2
    if q >= 1.0:
        raise ValueError(f"graph is not spacelike at {x}: |du|^2/f^2 = {q}")
    scale = 1.0 / math.sqrt(1.0 - q)
    return make_tangent(st, Point(t, x), scale, scale * (hinv @ du) / f2)


def shape_operator(st: Spacetime, sigma, x, h: float = 1e-3):
    """Shape operator S = nabla n (orthonormal tangent frame) and H = tr S."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = st.m
    if isinstance(sigma, Slice):
        f, fp, _ = st.warp(sigma.t0)
        S = (fp / f) * np.eye(m)
        return S, float(m * fp / f)
    if not is_spacelike_at(st, sigma, x):
        raise ValueError(f"graph is not spacelike at {x}")

    def normal_field(coords):
        nv = unit_normal(st, sigma, coords[1:])
        return np.concatenate([[nv.dt], nv.dx])

    coords = np.concatenate([[sigma.height(x)], x])
    N = normal_field(coords)
    # normal field does not depend on t (foliation by t-translates of the graph)
    dN = np.zeros((st.n, st.n))
    for i in range(1, st.n):
        dN[:, i] = _d5(normal_field, coords, i, h)
    G = christoffel(st, coords, h)
    g = metric(st, coords)
    du = sigma.gradient(x)
    frame = []
    for i in range(m):
        T = np.zeros(st.n)
        T[0] = du[i]
        T[1 + i] = 1.0
        for E in frame:
            T = T - (T @ g @ E) * E
        frame.append(T / math.sqrt(T @ g @ T))
    S = np.zeros((m, m))
    for i, Ti in enumerate(frame):
        nabla = dN @ Ti + np.einsum("abc,b,c->a", G, Ti, N)
        for j, Tj in enumerate(frame):
            S[i, j] = nabla @ g @ Tj
    S = 0.5 * (S + S.T)
    return S, float(np.trace(S))


# geodesics


@dataclass
class GeodesicTrace:
    s: np.ndarray
    t: np.ndarray
    dt: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    energy: float
    angular_momentum: float
    energy_drift: float
    angular_momentum_drift: float
    truncated: bool
    spacetime: Spacetime = field(repr=False)
    X0: Optional[np.ndarray] = field(default=None, repr=False)
    E: Optional[np.ndarray] = field(default=None, repr=False)
    x0: Optional[np.ndarray] = field(default=None, repr=False)
    dense: object = field(default=None, repr=False)

    @property
    def length(self) -> float:
        """Lorentzian arc length int sqrt|g(v, v)| ds over the traced span."""
        return math.sqrt(abs(self.energy)) * float(self.s[-1] - self.s[0])

    def fiber_point(self, sigma: float) -> np.ndarray:
        if self.E is None:
            return self.x0.copy()
        X, _ = self.spacetime.fiber.ambient_geodesic(self.X0, self.E, sigma)
        return self.spacetime.fiber.chart(X)

    def point_at(self, s: float) -> Point:
        y = self.dense(s) if self.dense is not None else None
        if y is None:
            i = int(np.argmin(abs(self.s - s)))
            return Point(self.t[i], self.fiber_point(self.sigma[i]))
        return Point(float(y[0]), self.fiber_point(float(y[2])))

    def tangent_at(self, s: float) -> Tangent:
        st = self.spacetime
        y = self.dense(s)
        if self.E is None:
            return make_tangent(st, Point(float(y[0]), self.x0), float(y[1]), np.zeros(st.m))
        X, V = st.fiber.ambient_geodesic(self.X0, self.E, float(y[2]))
        x = st.fiber.chart(X)
        return make_tangent(st, Point(float(y[0]), x), float(y[1]), float(y[3]) * st.fiber.pull(x, V))

    def points(self):
        return [Point(t, self.fiber_point(sg)) for t, sg in zip(self.t, self.sigma)]


def _reduced_rhs(st: Spacetime):
    def rhs(s, y):
        t, u, _, w = y
        f, fp, _ = st.warp(t)
        return [u, -f * fp * w * w, w, -2.0 * (fp / f) * u * w]

    return rhs


def geodesic(st: Spacetime, p: Point, v: Tangent, param_span: float,
             n_samples: int = 201, rtol: float = 1e-12, atol: float = 1e-13,
             margin: float = 1e-7) -> GeodesicTrace:
    """Integrate the geodesic with initial data (p, v) over [0, param_span].

    Stops early, with ``truncated=True``, when t leaves the time interval.
    """
    if v.dt == 0 and not np.any(v.dx):
        raise ValueError("zero initial velocity")
    if not st.contains(p.t):
        raise ValueError(f"initial point t={p.t} outside ({st.t_min}, {st.t_max})")
    fiber = st.fiber
    V = fiber.push(p.x, v.dx)
    w0 = math.sqrt(max(fiber.inner(V, V), 0.0))
    X0 = fiber.embed(p.x)
    E = V / w0 if w0 > 0 else None
    f0 = float(st.f(p.t))
    energy0 = -v.dt ** 2 + f0 * f0 * w0 * w0
    ang0 = f0 * f0 * w0

    def exit_low(s, y):
        return y[0] - (st.t_min + margin)

    def exit_high(s, y):
        return (st.t_max - margin) - y[0]

    exit_low.terminal = exit_high.terminal = True
    events = [ev for ev, lim in ((exit_low, st.t_min), (exit_high, st.t_max)) if math.isfinite(lim)]
    sol = integrate.solve_ivp(
        _reduced_rhs(st), (0.0, param_span), [p.t, v.dt, 0.0, w0],
        method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=events or None,
    )
    if sol.status == -1 and sol.t[-1] <= 0.0:
        raise RuntimeError(f"geodesic integration failed: {sol.message}")
    # a step-size collapse near f -> 0 is a domain exit, reported as truncation
    s_end = float(sol.t[-1])
    truncated = s_end < param_span
    s = np.linspace(0.0, s_end, n_samples)
    Y = sol.sol(s)
    t, u, sg, w = Y
    f = np.asarray(st.f(t), dtype=float)
    energies = -u * u + f * f * w * w
    angs = f * f * w
    scale_e = max(abs(energy0), 1e-300)
    e_drift = float(np.max(np.abs(energies - energy0)) / max(scale_e, v.dt ** 2))
    a_drift = 0.0 if ang0 == 0 else float(np.max(np.abs(angs - ang0)) / abs(ang0))
    return GeodesicTrace(
        s=s, t=t, dt=u, sigma=sg, w=w,
        energy=energy0, angular_momentum=ang0,
        energy_drift=e_drift, angular_momentum_drift=a_drift,
        truncated=truncated, spacetime=st, X0=X0, E=E, x0=np.array(p.x), dense=sol.sol,
    )


# Jacobi fields


@dataclass
class JacobiTrace:
    s: np.ndarray
    J: np.ndarray  # (len(s), m, m)
    Jp: np.ndarray
    R: np.ndarray
    focal_time: float
    truncated: bool

    def det(self) -> np.ndarray:
        return np.linalg.det(self.J)

    def shape_operators(self) -> np.ndarray:
        return np.array([jp @ np.linalg.inv(j) for j, jp in zip(self.J, self.Jp)])


def slice_curvature_operator(st: Spacetime, t: float) -> np.ndarray:
    """R(., d_t) d_t on the orthogonal complement of d_t: -(f''/f) Id."""
    f, _, fpp = st.warp(t)
    return -(fpp / f) * np.eye(st.m)


def _smallest_singular(M: np.ndarray) -> float:
    return float(np.linalg.svd(np.atleast_2d(M), compute_uv=False)[-1])


def _first_zero(fun, s_grid, vals, m, matrix_fun=None, rank_tol: float = 1e-6):
    """First zero of det(J(s)) sampled on s_grid.

    Sign changes of the determinant are refined by bisection (brentq).  Even
    multiplicities do not change the sign of det; for those the smallest
    singular value of J is minimized between grid points and a dip below
    rank_tol (relative to the largest singular value at the first sample)
    counts as a focal point.
    """
    for i in range(1, len(vals)):
        if vals[i - 1] == 0:
            return float(s_grid[i - 1])
        if np.sign(vals[i]) != np.sign(vals[i - 1]):
            return float(optimize.brentq(fun, s_grid[i - 1], s_grid[i], xtol=1e-13, rtol=1e-15))
    if matrix_fun is None:
        return math.inf
    scale = float(np.linalg.svd(np.atleast_2d(matrix_fun(s_grid[0])), compute_uv=False)[0])
    sig = np.array([_smallest_singular(matrix_fun(s)) for s in s_grid])
    for i in range(1, len(s_grid) - 1):
        if sig[i] <= sig[i - 1] and sig[i] <= sig[i + 1]:
            res = optimize.minimize_scalar(lambda s: _smallest_singular(matrix_fun(s)),
                                           bounds=(s_grid[i - 1], s_grid[i + 1]), method="bounded",
                                           options={"xatol": 1e-12})
            if res.fun < rank_tol * max(scale, 1e-300):
                return float(res.x)
    return math.inf


def jacobi_slice(st: Spacetime, t0: float, span: float, n_samples: int = 2001,
                 init: Optional[np.ndarray] = None) -> JacobiTrace:
    """Jacobi propagator along the vertical normal geodesic of slice(t0).

    Solves J'' + R J = 0 with J(0) = Id, J'(0) = S_slice (or ``init``).
    """
    m = st.m
    f0, fp0, _ = st.warp(t0)
    S0 = (fp0 / f0) * np.eye(m) if init is None else np.asarray(init, dtype=float)
    room = st.t_max - t0
    end = min(span, room)
    if end == room:
        # a focal point sitting exactly on the end of the interval (f -> 0 there)
        # is caught by running slightly past it whenever f'' / f stays finite
        ext = room * (1 + 1e-3)
        with np.errstate(all="ignore"):
            ok = np.all(np.isfinite(slice_curvature_operator(st, t0 + ext)))
        end = ext if ok else room * (1 - 1e-12)
    truncated = min(end, room) < span

    def rhs(s, y):
        J = y[: m * m].reshape(m, m)
        Jp = y[m * m:].reshape(m, m)
        R = slice_curvature_operator(st, t0 + s)
        return np.concatenate([Jp.ravel(), (-R @ J).ravel()])

    y0 = np.concatenate([np.eye(m).ravel(), S0.ravel()])
    sol = integrate.solve_ivp(rhs, (0.0, end), y0, method="DOP853", rtol=1e-12, atol=1e-14,
                              dense_output=True)
    s = np.linspace(0.0, end, n_samples)
    Y = sol.sol(s)
    J = Y[: m * m].T.reshape(-1, m, m)
    Jp = Y[m * m:].T.reshape(-1, m, m)
    R = np.array([slice_curvature_operator(st, t0 + si) for si in s])
    det_fun = lambda x: float(np.linalg.det(sol.sol(x)[: m * m].reshape(m, m)))
    mat_fun = lambda x: sol.sol(x)[: m * m].reshape(m, m)
    focal = _first_zero(det_fun, s, np.linalg.det(J), m, matrix_fun=mat_fun)
    if focal > room + 1e-9:
        focal = math.inf
    keep = s <= room
    return JacobiTrace(s=s[keep], J=J[keep], Jp=Jp[keep], R=R[keep], focal_time=focal,
                       truncated=truncated and math.isinf(focal))


def normal_geodesic(st: Spacetime, sigma, x, span: float, **kw) -> GeodesicTrace:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = Point(sigma.height(x), x)
    return geodesic(st, p, unit_normal(st, sigma, x), span, **kw)


def normal_flow_jacobian(st: Spacetime, sigma, x, s_values, h: float = 1e-5) -> np.ndarray:
    """Coordinate matrices [d Phi_s / d y_1 .. d y_m, gamma'(s)] of the normal flow.

    Phi_s(y) is the point at parameter s on the normal geodesic from the foot
    over chart point y.  Columns come from central differences in y.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    span = float(s_values.max())
    m = st.m

    def coords_along(y):
        g = normal_geodesic(st, sigma, y, span)
        if g.truncated and g.s[-1] < span:
            raise ValueError("normal geodesic leaves the time interval")
        out = []
        for s in s_values:
            pt = g.point_at(s)
            out.append(np.concatenate([[pt.t], pt.x]))
        return np.array(out), g

    base, g0 = coords_along(x)
    cols = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        plus, _ = coords_along(x + e)
        minus, _ = coords_along(x - e)
        cols.append((plus - minus) / (2 * h))
    mats = []
    for k, s in enumerate(s_values):
        tan = g0.tangent_at(s)
        vel = np.concatenate([[tan.dt], tan.dx])
        mats.append(np.column_stack([c[k] for c in cols] + [vel]))
    return np.array(mats)


def jacobi_focal_time(st: Spacetime, sigma, x=None, horizon: float = DEFAULT_HORIZON,
                      n_samples: int = 2001) -> float:
    """First focal point of sigma along the normal geodesic over x (inf if none)."""
    x = np.zeros(st.m) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(sigma, Slice):
        return jacobi_slice(st, sigma.t0, horizon, n_samples=n_samples).focal_time
    g = normal_geodesic(st, sigma, x, horizon)
    span = float(g.s[-1]) * (1 - 1e-9)
    grid = np.linspace(1e-6, span, 161)

    mat_at = lambda s: normal_flow_jacobian(st, sigma, x, [s])[0]
    mats = normal_flow_jacobian(st, sigma, x, grid)
    vals = np.linalg.det(mats)
    return _first_zero(lambda s: float(np.linalg.det(mat_at(s))), grid, vals, st.m, matrix_fun=mat_at)


# comparison condition


@dataclass
class CCCReport:
    holds: bool
    ricci_margin: float
    mean_curvature_margin: float
    asymptotic_ricci_coefficient: float
    samples: int
    worst_ricci_sample: Optional[tuple] = None
    worst_mean_curvature_sample: Optional[tuple] = None
    inconclusive: bool = False

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "ricci_margin": self.ricci_margin,
            "mean_curvature_margin": self.mean_curvature_margin,
            "asymptotic_ricci_coefficient": self.asymptotic_ricci_coefficient,
            "samples": self.samples,
            "inconclusive": self.inconclusive,
        }


def ccc_check(st: Spacetime, sigma, kappa: float, beta: float, sample_budget: int = 200,
              seed: int = 0, horizon: float = DEFAULT_HORIZON, fiber_radius: float = 1.0,
              max_rapidity: float = 4.0, tol: float = 1e-9) -> CCCReport:
    """Sample Ric(v, v) - (n-1) kappa over unit timelike v and beta - H_sigma over sigma.

    The Ricci term is quadratic in sinh(rapidity); the coefficient of the
    growing part is reported too so unbounded violations are not missed by
    finite rapidity sampling.
    """
    rng = np.random.default_rng(seed)
    m = st.m
    base_t = sigma.t0 if isinstance(sigma, Slice) else sigma.height(np.zeros(m))
    lo = max(st.t_min, base_t - 1.0) if isinstance(sigma, Graph) else base_t
    hi = min(st.t_max, base_t + horizon)
    pad = 1e-6 * max(1.0, hi - lo)
    if not math.isfinite(hi - lo):
        return CCCReport(False, math.nan, math.nan, math.nan, 0, inconclusive=True)
    worst_r, worst_rs = math.inf, None
    worst_coef = math.inf
    for _ in range(sample_budget):
        t = rng.uniform(lo + pad, hi - pad)
        x = rng.uniform(-fiber_radius, fiber_radius, size=m)
        p = Point(t, x)
        direction = rng.normal(size=m)
        rap = rng.uniform(0.0, max_rapidity)
        for r in (0.0, rap):
            v = unit_timelike(st, p, r, direction)
            val = ricci(st, p, v) - m * kappa
            if val < worst_r:
                worst_r, worst_rs = val, (t, x.tolist(), r)
        f, fp, fpp = st.warp(t)
        # Ric = m (1 + w^2) (-f''/f) + w^2 B for a g-unit fiber speed w
        coef = -m * fpp / f + (m - 1) * (st.fiber_curvature + fp * fp) / (f * f) + fpp / f
        worst_coef = min(worst_coef, coef)
    worst_h, worst_hs = math.inf, None
    n_sigma = 1 if isinstance(sigma, Slice) else max(8, sample_budget // 10)
    for _ in range(n_sigma):
        x = rng.uniform(-fiber_radius, fiber_radius, size=m)
        _, H = shape_operator(st, sigma, x)
        if beta - H < worst_h:
            worst_h, worst_hs = beta - H, (x.tolist(), H)
    scale = max(1.0, abs(kappa) * m, abs(beta))
    holds = worst_r >= -tol * scale and worst_h >= -tol * scale and worst_coef >= -tol * scale
    return CCCReport(holds, worst_r, worst_h, worst_coef, sample_budget,
                     worst_ricci_sample=worst_rs, worst_mean_curvature_sample=worst_hs)
