"""Comparison warped products M_{kappa,beta}.

Each model is ``(a, b) x_f Sigma`` where ``f`` solves ``f'' + kappa f = 0``
with ``(n-1) f'(0)/f(0) = beta`` and ``Sigma`` is the simply connected space
form of curvature -1, 0 or +1.  The rows below are hard-coded closed forms;
nothing is derived symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

INF = math.inf


class DomainError(ValueError):
    """Argument outside the domain where a closed form is defined."""


class QuadratureError(RuntimeError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


@dataclass(frozen=True)
class ModelParams:
    kappa: float
    beta: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and math.isfinite(self.beta)):
            raise ValueError(f"kappa and beta must be finite, got {self.kappa}, {self.beta}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"spacetime dimension n must be an integer >= 2, got {self.n}")

    @property
    def critical_beta(self) -> float:
        """The threshold (n-1) sqrt|kappa| separating the kappa <= 0 rows."""
        return (self.n - 1) * math.sqrt(abs(self.kappa))


def _atanh(x):
    # log form keeps accuracy near |x| -> 1
    return 0.5 * math.log1p(2.0 * x / (1.0 - x))


def _acoth(x):
    return 0.5 * math.log1p(2.0 / (x - 1.0))


def classify(params: ModelParams) -> str:
    """Return the regime tag of the row of the comparison table."""
    k, beta, n = params.kappa, params.beta, params.n
    if k > 0:
        if beta > 0:
            return "kappa>0,beta>0"
        if beta < 0:
            return "kappa>0,beta<0"
        return "kappa>0,beta=0"
    if k == 0:
        if beta > 0:
            return "kappa=0,beta>0"
        if beta < 0:
            return "kappa=0,beta<0"
        return "kappa=0,beta=0"
    x = beta / ((n - 1) * math.sqrt(-k))
    # ties go to the exponential row
    if abs(x) == 1.0:
        return "kappa<0,|x|=1"
    if abs(x) < 1.0:
        return "kappa<0,|x|<1"
    if x > 1.0:
        return "kappa<0,x>1"
    return "kappa<0,x<-1"


@dataclass(frozen=True)
class WarpingProfile:
    """Closed-form data of one comparison model.

    ``f``, ``f_prime``, ``f_second`` and ``H`` accept scalars or arrays.
    ``H`` is evaluated from its own table expression, not as a quotient of
    ``f_prime`` and ``f``, so the two can be cross-checked.
    """

    params: ModelParams
    regime: str
    c: float
    fiber_curvature: int
    f: Callable = field(repr=False)
    f_prime: Callable = field(repr=False)
    f_second: Callable = field(repr=False)
    H: Callable = field(repr=False)
    lower_end: float
    upper_end: float

    @property
    def kappa(self):
        return self.params.kappa

    @property
    def beta(self):
        return self.params.beta

    @property
    def n(self):
        return self.params.n

    @property
    def b(self):
        return self.upper_end

    @property
    def a(self):
        return self.lower_end

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "beta": self.beta,
            "n": self.n,
            "c": self.c,
            "fiber_curvature": self.fiber_curvature,
            "b": encode_extended(self.upper_end),
            "a": encode_extended(self.lower_end),
            "regime_tag": self.regime,
        }


def encode_extended(x: float):
    """JSON has no infinities; they travel as the strings "inf" / "-inf"."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def decode_extended(x) -> float:
    if isinstance(x, str):
        return float(x)
    return float(x)


def build_profile(params: ModelParams) -> WarpingProfile:
    k, beta, n = params.kappa, params.beta, params.n
    m = n - 1
    regime = classify(params)

    if k > 0:
        r = math.sqrt(k)
        if regime == "kappa>0,beta=0":
            c = math.pi / 2
            f = lambda t: np.cos(r * np.asarray(t)) / r
            fp = lambda t: -np.sin(r * np.asarray(t))
            fpp = lambda t: -r * np.cos(r * np.asarray(t))
            H = lambda t: -m * r * np.tan(r * np.asarray(t))
            lo, hi = -math.pi / (2 * r), math.pi / (2 * r)
        else:
            # arccot with the branch the table uses: c in (-pi/2, pi/2)
            c = math.atan(m * r / beta)
            f = lambda t: np.sin(r * np.asarray(t) + c) / r
            fp = lambda t: np.cos(r * np.asarray(t) + c)
            fpp = lambda t: -r * np.sin(r * np.asarray(t) + c)
            H = lambda t: m * r / np.tan(r * np.asarray(t) + c)
            if beta > 0:
                lo, hi = -c / r, (math.pi - c) / r
            else:
                lo, hi = (-math.pi - c) / r, -c / r
        fiber = -1
    elif k == 0:
        if beta == 0:
            c = 0.0
            f = lambda t: np.ones_like(np.asarray(t, dtype=float))
            fp = lambda t: np.zeros_like(np.asarray(t, dtype=float))
            fpp = fp
            H = fp
            lo, hi = -INF, INF
            fiber = 0
        else:
            c = m / beta
            f = lambda t: np.asarray(t) + c
            fp = lambda t: np.ones_like(np.asarray(t, dtype=float))
            fpp = lambda t: np.zeros_like(np.asarray(t, dtype=float))
            H = lambda t: m / (np.asarray(t) + c)
            lo, hi = (-c, INF) if beta > 0 else (-INF, -c)
            fiber = -1
    else:
        r = math.sqrt(-k)
        x = beta / (m * r)
        if regime == "kappa<0,|x|<1":
            c = _atanh(x)
            f = lambda t: np.cosh(r * np.asarray(t) + c) / r
            fp = lambda t: np.sinh(r * np.asarray(t) + c)
            fpp = lambda t: r * np.cosh(r * np.asarray(t) + c)
            H = lambda t: m * r * np.tanh(r * np.asarray(t) + c)
            lo, hi = -INF, INF
            fiber = 1
        elif regime == "kappa<0,|x|=1":
            c = 0.0
            sg = 1.0 if beta > 0 else -1.0
            f = lambda t: np.exp(sg * r * np.asarray(t))
            fp = lambda t: sg * r * np.exp(sg * r * np.asarray(t))
            fpp = lambda t: r * r * np.exp(sg * r * np.asarray(t))
            H = lambda t: sg * m * r * np.ones_like(np.asarray(t, dtype=float))
            lo, hi = -INF, INF
            fiber = 0
        else:
            c = _acoth(x)
            f = lambda t: np.sinh(r * np.asarray(t) + c) / r
            fp = lambda t: np.cosh(r * np.asarray(t) + c)
            fpp = lambda t: r * np.sinh(r * np.asarray(t) + c)
            H = lambda t: m * r / np.tanh(r * np.asarray(t) + c)
            lo, hi = (-c / r, INF) if x > 1 else (-INF, -c / r)
            fiber = -1

    return WarpingProfile(
        params=params,
        regime=regime,
        c=c,
        fiber_curvature=fiber,
        f=f,
        f_prime=fp,
        f_second=fpp,
        H=H,
        lower_end=lo,
        upper_end=hi,
    )


def profile(kappa: float, beta: float, n: int) -> WarpingProfile:
    return build_profile(ModelParams(kappa, beta, n))


def s_kappa(kappa: float, t):
    """Scalar comparison function solving s' + s^2 + kappa = 0 with s ~ 1/t at 0.

    Raises DomainError for t <= 0 or, when kappa > 0, t >= pi/sqrt(kappa).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("s_kappa needs t > 0")
    if kappa > 0:
        r = math.sqrt(kappa)
        if np.any(t >= math.pi / r):
            raise DomainError(f"s_kappa pole at pi/sqrt(kappa) = {math.pi / r}")
        out = r / np.tan(r * t)
    elif kappa == 0:
        out = 1.0 / t
    else:
        r = math.sqrt(-kappa)
        out = r / np.tanh(r * t)
    return out[()] if out.ndim == 0 else out


def s_kappa_limit(kappa: float, t: float) -> float:
    """s_kappa with the conventions at t = inf used for rays of infinite length."""
    if math.isinf(t):
        if kappa > 0:
            raise DomainError("rays of infinite length need kappa <= 0")
        return math.sqrt(-kappa) if kappa < 0 else 0.0
    return float(s_kappa(kappa, t))


def fiber_curvature_of(prof: WarpingProfile, t: float = 0.0) -> float:
    """Curvature the fiber needs for the warped product to have constant curvature.

    For -dt^2 + f^2 h_k this is -kappa f^2 - f'^2, constant along the solution.
    """
    return float(-prof.kappa * prof.f(t) ** 2 - prof.f_prime(t) ** 2)


@dataclass(frozen=True)
class VolumeProfile:
    prof: WarpingProfile = field(repr=False)
    v_bar: float

    def __call__(self, t):
        return relative_volume(self.prof, t)


def _relative_volume_scalar(prof: WarpingProfile, t: float) -> float:
    if t <= 0:
        return 0.0
    b = prof.upper_end
    upper = min(t, b)
    if math.isinf(upper):
        raise DomainError("relative volume at t = inf with b = inf is unbounded")
    m = prof.n - 1
    f0 = float(prof.f(0.0))
    out = integrate.quad(
        lambda s: (float(prof.f(s)) / f0) ** m, 0.0, upper,
        epsabs=1e-13, epsrel=1e-12, limit=200, full_output=True,
    )
    if len(out) > 3:
        # quad appends a message only when it gave up
        raise QuadratureError(f"volume quadrature did not converge: {out[3]}", interval=(0.0, upper))
    return out[0]


def relative_volume(prof: WarpingProfile, t):
    """v(t) = f(0)^{-(n-1)} int_0^t f^{n-1}, frozen at v(b) past the end b."""
    arr = np.asarray(t, dtype=float)
    if arr.ndim == 0:
        return _relative_volume_scalar(prof, float(arr))
    return np.array([_relative_volume_scalar(prof, float(x)) for x in arr.ravel()]).reshape(arr.shape)


def volume_profile(prof: WarpingProfile) -> VolumeProfile:
    b = prof.upper_end
    v_bar = INF if math.isinf(b) else _relative_volume_scalar(prof, b)
    return VolumeProfile(prof=prof, v_bar=v_bar)
