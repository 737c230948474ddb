"""Scalar and matrix Riccati equations s' + s^2 + kappa = 0, S' + S^2 + R = 0.

Both are integrated with the same adaptive embedded Runge-Kutta pair
(Dormand-Prince 8(5,3) from scipy) and stop when |trace| crosses the blow-up
threshold.  The crossing is bisected on the dense output and the blow-up time
is extrapolated from the linear behaviour of 1/trace near a pole.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.stats import ortho_group

from .models import s_kappa

BLOW_UP_THRESHOLD = 1e8
RTOL = 1e-10
ATOL = 1e-12
DEFAULT_T_START = 1e-4
# samples in the final approach to a pole with |tr S| above this are left out of
# verdicts: there the relative error is (pole location error) / (distance to pole)
POLE_WINDOW = 1e3


class IntegratorFailure(RuntimeError):
    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class RiccatiState:
    t: float
    S: np.ndarray

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.S))


@dataclass
class RiccatiSolution:
    samples: list
    blow_up_time: float
    blow_up_sign: Optional[str]
    direction: int = 1
    R: Optional[Callable] = field(default=None, repr=False)
    steps: Optional[np.ndarray] = field(default=None, repr=False)
    dense: object = field(default=None, repr=False)

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def traces(self) -> np.ndarray:
        return np.array([s.trace for s in self.samples])

    @property
    def dim(self) -> int:
        return self.samples[0].dim

    def S(self, t: float) -> np.ndarray:
        d = self.dim
        return self.dense(t).reshape(d, d)

    def to_csv(self, kappa: Optional[float] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "trace", "margin"])
        for st in self.samples:
            margin = ""
            if kappa is not None and st.t > 0:
                try:
                    margin = repr(st.dim * float(s_kappa(kappa, st.t)) - st.trace)
                except ValueError:
                    margin = ""
            w.writerow([repr(st.t), repr(st.trace), margin])
        return buf.getvalue()


def _symmetrize(S):
    return 0.5 * (S + S.T)


def _solve(rhs, t0, y0, t_end, dim, n_samples, threshold):
    def blow(t, y):
        return threshold - abs(float(np.trace(y.reshape(dim, dim))))

    blow.terminal = True
    sol = integrate.solve_ivp(rhs, (t0, t_end), y0, method="DOP853", rtol=RTOL, atol=ATOL,
                              dense_output=True, events=blow)
    if sol.status == -1:
        last = RiccatiState(float(sol.t[-1]), sol.y[:, -1].reshape(dim, dim))
        raise IntegratorFailure(f"Riccati integration failed: {sol.message}", last_state=last)
    blow_time, sign = math.inf, None
    t_stop = float(sol.t[-1])
    if sol.status == 1:
        t_stop = _bisect_crossing(sol.sol, t0, t_stop, dim, threshold)
        tr = float(np.trace(sol.sol(t_stop).reshape(dim, dim)))
        sign = "+inf" if tr > 0 else "-inf"
        blow_time = _extrapolate_pole(sol.sol, t_stop, dim)
    grid = np.linspace(t0, t_stop, n_samples)
    grid = np.union1d(grid, sol.t[(sol.t - t0) * (t_stop - sol.t) >= 0])
    if t_stop < t0:
        grid = grid[::-1]
    samples = [RiccatiState(float(t), _symmetrize(sol.sol(t).reshape(dim, dim))) for t in grid]
    return sol, samples, blow_time, sign


def _bisect_crossing(dense, t_lo, t_hi, dim, threshold):
    """Refine the time where |tr S| reaches the threshold to 1e-9 in t."""
    tr = lambda t: abs(float(np.trace(dense(t).reshape(dim, dim))))
    a, b = t_lo, t_hi
    # the event location is already close; start from a short bracket
    a = t_hi - math.copysign(min(abs(t_hi - t_lo), 1e-3), t_hi - t_lo)
    if tr(a) >= threshold:
        a = t_lo
    while abs(b - a) > 1e-9:
        mid = 0.5 * (a + b)
        if tr(mid) < threshold:
            a = mid
        else:
            b = mid
    return b


def _extrapolate_pole(dense, t_cross, dim):
    """Near a Riccati pole 1/tr S is linear in t; continue it to zero."""
    inv = lambda t: 1.0 / float(np.trace(dense(t).reshape(dim, dim)))
    d = 1e-10
    t1 = t_cross - d if dense.t_max > dense.t_min else t_cross + d
    y1, y2 = inv(t1), inv(t_cross)
    slope = (y2 - y1) / (t_cross - t1)
    if slope == 0:
        return t_cross
    return t_cross - y2 / slope


def integrate_scalar(kappa: float, t0: float, s0: float, direction: str = "forward",
                     horizon: float = 10.0, n_samples: int = 401,
                     threshold: float = BLOW_UP_THRESHOLD) -> RiccatiSolution:
    """Integrate s' = -s^2 - kappa from s(t0) = s0 toward t0 +/- horizon."""
    sgn = 1 if direction == "forward" else -1
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    if horizon <= 0:
        raise ValueError("horizon must be positive")

    def rhs(t, y):
        return -y * y - kappa

    sol, samples, bt, sign = _solve(rhs, t0, np.array([float(s0)]), t0 + sgn * horizon, 1,
                                    n_samples, threshold)
    return RiccatiSolution(samples, bt, sign, sgn, R=lambda t: np.array([[kappa]]),
                           steps=sol.t, dense=sol.sol)


def integrate_matrix(R: Callable, dim: int, t0: Optional[float] = None, S0=None,
                     horizon: float = 10.0, asymptotic_kappa: Optional[float] = None,
                     eps0: float = 0.0, t_start: float = DEFAULT_T_START,
                     n_samples: int = 401, threshold: float = BLOW_UP_THRESHOLD,
                     check_symmetry: bool = True) -> RiccatiSolution:
    """Integrate S' + S^2 + R(t) = 0.

    Either give ``(t0, S0)`` or ``asymptotic_kappa``: the latter starts at
    ``t_start`` with ``S = (s_kappa(t_start) - eps0) Id`` as the stand-in for
    the t -> 0 condition ``s_kappa - tr S / dim -> eps0``.
    ``horizon`` is the end time measured from the start.
    """
    if asymptotic_kappa is not None:
        if eps0 < 0:
            raise ValueError("eps0 must be non-negative")
        t0 = t_start
        S0 = (float(s_kappa(asymptotic_kappa, t_start)) - eps0) * np.eye(dim)
    if t0 is None or S0 is None:
        raise ValueError("need (t0, S0) or asymptotic_kappa")
    S0 = np.atleast_2d(np.asarray(S0, dtype=float))
    if S0.shape != (dim, dim):
        raise ValueError(f"S0 must be {dim}x{dim}")

    def Rm(t):
        M = np.atleast_2d(np.asarray(R(t), dtype=float))
        if check_symmetry and not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
            raise ValueError(f"R({t}) is not symmetric")
        return M

    if dim == 1:
        # same right-hand side arithmetic as the scalar integrator
        def rhs(t, y):
            return -y * y - Rm(t)[0, 0]
    else:
        def rhs(t, y):
            S = _symmetrize(y.reshape(dim, dim))
            return (-(S @ S) - Rm(t)).ravel()

    sol, samples, bt, sign = _solve(rhs, t0, S0.ravel().copy(), t0 + horizon, dim, n_samples, threshold)
    return RiccatiSolution(samples, bt, sign, 1, R=Rm, steps=sol.t, dense=sol.sol)


def random_psd(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Q diag(u) Q^T with Q Haar-orthogonal and u ~ U[0, 1]."""
    if dim == 1:
        return np.array([[rng.uniform()]])
    Q = ortho_group.rvs(dim, random_state=rng)
    return Q @ np.diag(rng.uniform(0.0, 1.0, size=dim)) @ Q.T


def bump(t, lo: float, hi: float):
    """Smooth nonnegative bump supported on (lo, hi)."""
    t = np.asarray(t, dtype=float)
    x = (t - lo) / (hi - lo)
    inside = (x > 0) & (x < 1)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - (2 * xi - 1) ** 2))
    return out[()] if out.ndim == 0 else out


@dataclass
class ComparisonVerdict:
    holds: bool
    t: np.ndarray
    margin: np.ndarray
    equality_times: np.ndarray
    rigidity_confirmed: bool
    first_violation: Optional[float] = None
    propagation_ok: bool = True

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margin))

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "min_margin": self.min_margin,
            "equality_count": int(self.equality_times.size),
            "rigidity_confirmed": self.rigidity_confirmed,
            "first_violation": self.first_violation,
            "propagation_ok": self.propagation_ok,
        }


def comparison_verdict(solution: RiccatiSolution, kappa: float, tol: float = 1e-6,
                       rel: bool = True) -> ComparisonVerdict:
    """Check tr S <= dim * s_kappa on the samples and the equality/rigidity branch.

    Tolerances scale with max(1, |dim s_kappa|) when ``rel`` is set, since
    s_kappa is large near t = 0.  The tail of a blow-up (|tr S| > POLE_WINDOW
    after the last moderate sample) is not judged.
    """
    if not solution.samples:
        raise ValueError("empty solution")
    dim = solution.dim
    samples = list(solution.samples)
    if math.isfinite(solution.blow_up_time):
        moderate = [i for i, st in enumerate(samples) if abs(st.trace) <= POLE_WINDOW]
        if moderate:
            samples = samples[: moderate[-1] + 1]
    ts, margins, scales, keep = [], [], [], []
    for st in samples:
        if st.t <= 0:
            continue
        try:
            ref = float(s_kappa(kappa, st.t))
        except ValueError:
            continue
        ts.append(st.t)
        margins.append(dim * ref - st.trace)
        scales.append(max(1.0, abs(dim * ref)) if rel else 1.0)
        keep.append(st)
    t = np.array(ts)
    margin = np.array(margins)
    scale = np.array(scales)
    violated = margin < -tol * scale
    first_violation = float(t[np.argmax(violated)]) if violated.any() else None
    eq = np.abs(margin) < tol * scale
    equality_times = t[eq]
    rigid = bool(eq.any())
    for st, is_eq, sc in zip(keep, eq, scale):
        if not is_eq:
            continue
        ref = float(s_kappa(kappa, st.t))
        R = np.atleast_2d(solution.R(st.t)) if solution.R is not None else None
        if np.linalg.norm(st.S - ref * np.eye(dim)) >= tol * sc:
            rigid = False
        if R is None or np.linalg.norm(R - kappa * np.eye(dim)) >= tol * max(1.0, abs(kappa)):
            rigid = False
    # equality at t0 must hold at every earlier sample as well
    propagation_ok = True
    if eq.any():
        last = int(np.max(np.nonzero(eq)[0]))
        propagation_ok = bool(eq[: last + 1].all())
    return ComparisonVerdict(
        holds=not violated.any(), t=t, margin=margin, equality_times=equality_times,
        rigidity_confirmed=rigid and propagation_ok, first_violation=first_violation,
        propagation_ok=propagation_ok,
    )
