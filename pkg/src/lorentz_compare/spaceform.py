"""Simply connected space forms of curvature k in {-1, 0, +1}.

Points are handled in normal (exponential) coordinates about a fixed origin
``o``; internally everything goes through the standard embedding

* k = 0:  R^m itself,
* k = +1: the unit sphere in R^{m+1},
* k = -1: the upper hyperboloid in Minkowski R^{m,1},

so distances and geodesics are closed form.
"""

from __future__ import annotations

import math

import numpy as np

SPHERE_CHART_RADIUS = math.pi - 1e-6


class ChartError(ValueError):
    pass


def sn(k: int, r):
    """Radial warping of the space form: sin r, r or sinh r."""
    if k > 0:
        return np.sin(r)
    if k < 0:
        return np.sinh(r)
    return np.asarray(r, dtype=float)


def cs(k: int, r):
    if k > 0:
        return np.cos(r)
    if k < 0:
        return np.cosh(r)
    return np.ones_like(np.asarray(r, dtype=float))


def sn_over_r(k: int, r: float) -> float:
    if r < 1e-8:
        return 1.0 - k * r * r / 6.0
    return float(sn(k, r)) / r


def unit_sphere_area(dim: int) -> float:
    """Area of the unit (dim)-sphere S^dim in R^{dim+1}; S^0 has 2 points."""
    return 2.0 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


class SpaceForm:
    def __init__(self, k: int, m: int):
        if k not in (-1, 0, 1):
            raise ValueError(f"fiber curvature must be -1, 0 or 1, got {k}")
        if m < 1:
            raise ValueError("fiber dimension must be >= 1")
        self.k = k
        self.m = m
        self.ambient_dim = m if k == 0 else m + 1
        self.origin = np.zeros(self.ambient_dim)
        if k != 0:
            self.origin[0] = 1.0

    def __repr__(self):
        return f"SpaceForm(k={self.k}, m={self.m})"

    def inner(self, X, Y) -> float:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if self.k < 0:
            return float(-X[0] * Y[0] + X[1:] @ Y[1:])
        return float(X @ Y)

    # chart <-> ambient

    def embed(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(self.m)
        if self.k == 0:
            return x.copy()
        r = float(np.linalg.norm(x))
        if self.k > 0 and r > SPHERE_CHART_RADIUS:
            raise ChartError(f"spherical chart radius {r} exceeds pi - 1e-6")
        out = np.empty(self.m + 1)
        out[0] = float(cs(self.k, r))
        out[1:] = sn_over_r(self.k, r) * x
        return out

    def chart(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.k == 0:
            return X.copy()
        v = X[1:]
        s = float(np.linalg.norm(v))
        if self.k > 0:
            r = math.atan2(s, X[0])
            if r > SPHERE_CHART_RADIUS:
                raise ChartError("point too close to the antipode of the chart origin")
        else:
            r = math.asinh(s)
        if s < 1e-300:
            return np.zeros(self.m)
        return (r / s) * v

    def push(self, x, v) -> np.ndarray:
        """Differential of the embedding at chart point x applied to v."""
        x = np.asarray(x, dtype=float).reshape(self.m)
        v = np.asarray(v, dtype=float).reshape(self.m)
        if self.k == 0:
            return v.copy()
        r = float(np.linalg.norm(x))
        out = np.zeros(self.m + 1)
        if r < 1e-12:
            out[1:] = v
            return out
        u = x / r
        radial = float(u @ v)
        # d/dr of (cs, sn u) and the tangential sn/r part
        dcs = -float(np.sin(r)) if self.k > 0 else float(np.sinh(r))
        out[0] = dcs * radial
        out[1:] = float(cs(self.k, r)) * radial * u + sn_over_r(self.k, r) * (v - radial * u)
        return out

    def jacobian(self, x) -> np.ndarray:
        return np.column_stack([self.push(x, e) for e in np.eye(self.m)])

    def pull(self, x, V) -> np.ndarray:
        """Chart components of an ambient tangent vector V at chart point x."""
        J = self.jacobian(x)
        return np.linalg.lstsq(J, np.asarray(V, dtype=float), rcond=None)[0]

    def metric(self, x) -> np.ndarray:
        """Chart metric h_ij(x) in normal coordinates."""
        x = np.asarray(x, dtype=float).reshape(self.m)
        if self.k == 0:
            return np.eye(self.m)
        r = float(np.linalg.norm(x))
        if r < 1e-12:
            return np.eye(self.m)
        u = x / r
        P = np.outer(u, u)
        return P + sn_over_r(self.k, r) ** 2 * (np.eye(self.m) - P)

    def norm(self, x, v) -> float:
        v = np.asarray(v, dtype=float)
        return math.sqrt(max(float(v @ self.metric(x) @ v), 0.0))

    # distances and geodesics

    def ambient_distance(self, X, Y) -> float:
        D = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
        q = self.inner(D, D)
        if self.k == 0:
            return math.sqrt(max(q, 0.0))
        if self.k > 0:
            return 2.0 * math.asin(min(1.0, math.sqrt(max(q, 0.0)) / 2.0))
        return 2.0 * math.asinh(math.sqrt(max(q, 0.0)) / 2.0)

    def distance(self, x, y) -> float:
        return self.ambient_distance(self.embed(x), self.embed(y))

    def ambient_log(self, X, Y):
        """Unit initial direction E at X and distance d of the minimizing geodesic to Y."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        d = self.ambient_distance(X, Y)
        if d < 1e-15:
            return None, 0.0
        if self.k == 0:
            return (Y - X) / d, d
        # project Y onto T_X and normalise; stable also for small d
        W = Y - (self.inner(X, Y) / self.inner(X, X)) * X
        nrm = math.sqrt(max(self.inner(W, W), 0.0))
        if nrm < 1e-300:
            raise ChartError("antipodal points: minimizing geodesic not unique")
        return W / nrm, d

    def ambient_geodesic(self, X, E, sigma):
        """Point and unit velocity at arc length sigma along the geodesic (X, E)."""
        X = np.asarray(X, dtype=float)
        E = np.asarray(E, dtype=float)
        if self.k == 0:
            return X + sigma * E, E.copy()
        c, s = float(cs(self.k, sigma)), float(sn(self.k, sigma))
        dc = -s if self.k > 0 else s
        return c * X + s * E, dc * X + c * E

    def tangent_basis(self, X) -> np.ndarray:
        """Orthonormal basis (rows) of T_X in ambient coordinates."""
        X = np.asarray(X, dtype=float)
        if self.k == 0:
            return np.eye(self.m)
        basis = []
        cands = list(np.eye(self.ambient_dim))
        for c in cands:
            w = c - (self.inner(c, X) / self.inner(X, X)) * X
            for b in basis:
                w = w - self.inner(w, b) * b
            nn = self.inner(w, w)
            if nn > 1e-10:
                basis.append(w / math.sqrt(nn))
            if len(basis) == self.m:
                break
        return np.array(basis)

    def ball_measure(self, radius: float) -> float:
        """h-measure of a geodesic ball of the given radius."""
        from scipy import integrate

        if self.m == 1:
            return 2.0 * radius
        area = unit_sphere_area(self.m - 1)
        val = integrate.quad(lambda r: float(sn(self.k, r)) ** (self.m - 1), 0.0, radius,
                             epsabs=1e-14, epsrel=1e-13)[0]
        return area * val
