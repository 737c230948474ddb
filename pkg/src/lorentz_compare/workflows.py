"""Command handlers shared by the HTTP service and the in-process CLI.

Each handler takes a validated request model and returns an ``Outcome``:
a JSON-ready result dict, the CSV table documented for the command, and a
``violation`` flag that is set when a verified comparison property failed.
Handlers are deterministic functions of the request (seeds are explicit).
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .busemann import asymptote, busemann, sigma_ray
from .comparison import (
    RegionSpec,
    default_t_grid,
    monotonicity_report,
    nonrigid_example,
    splitting_reconstruct,
)
from .distance import tau_point, tau_sigma
from .models import encode_extended, profile
from .riccati import (
    bump,
    comparison_verdict,
    integrate_matrix,
    integrate_scalar,
    random_psd,
)
from .schemas import (
    REQUESTS,
    BusemannRequest,
    CommandResponse,
    CompareRequest,
    CounterexampleRequest,
    GeodesicRequest,
    ModelWarp,
    RiccatiRequest,
    SplitRequest,
    TableRequest,
    TauRequest,
)
from .spacetime import Point, Slice, ccc_check, geodesic, make_tangent
from .specfile import SpecError, realize

# CSV columns per command; also shown in the CLI help
CSV_COLUMNS: Dict[str, str] = {
    "table": "kappa,beta,n,c,fiber_curvature,a,b,regime_tag",
    "riccati": "t,trace,margin (first run; margin = dim*s_kappa - trace)",
    "geodesic": "s,t,dt,x1..xm",
    "tau": "value,converged",
    "busemann": "r,truncation",
    "compare": "t,area_ratio,vol_ratio,rigidity_flag",
    "split": "max_error,isotropy_error,passed",
    "counterexample": "beta_tilde,ccc_pass,cut_infinite,relative_volume",
}


@dataclass
class Outcome:
    result: dict
    csv: str
    violation: bool = False
    failing_sample: Optional[str] = None


def _rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _point(spec_n: int, coords) -> Point:
    c = [float(v) for v in coords]
    if len(c) != spec_n:
        raise SpecError(f"a point needs {spec_n} coordinates (t, x1, ..., x{spec_n - 1}), got {len(c)}")
    return Point(c[0], np.array(c[1:]))


def _clean(obj):
    """Turn numpy scalars/arrays and infinities into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        return encode_extended(v)
    return obj


# table


def run_table(req: TableRequest, jobs: int = 1) -> Outcome:
    prof = profile(req.kappa, req.beta, req.n)
    row = prof.to_dict()
    row["H0"] = float(prof.H(0.0))
    cols = ["kappa", "beta", "n", "c", "fiber_curvature", "a", "b", "regime_tag"]
    return Outcome(_clean(row), _rows(cols, [[row[k] for k in cols]]))


# riccati


def _matrix_run(args) -> tuple:
    """One matrix run; returns picklable pieces so it can run in a worker process."""
    kappa, dim, horizon, eps0, t_start, lo, hi, seed, index, tol = args
    if index == 0:
        R = lambda t: kappa * np.eye(dim)
    else:
        P = random_psd(dim, np.random.default_rng([seed, index]))
        R = lambda t: kappa * np.eye(dim) + bump(t, lo, hi) * P
    sol = integrate_matrix(R, dim, asymptotic_kappa=kappa, eps0=eps0, t_start=t_start, horizon=horizon)
    verdict = comparison_verdict(sol, kappa, tol=tol)
    return sol.blow_up_time, verdict.to_dict(), sol.to_csv(kappa) if index == 0 else None


def run_riccati(req: RiccatiRequest, jobs: int = 1) -> Outcome:
    if req.mode == "scalar":
        sol = integrate_scalar(req.kappa, req.t0, req.s0, req.direction, req.horizon)
        result = {"mode": "scalar", "blow_up_time": sol.blow_up_time, "blow_up_sign": sol.blow_up_sign,
                  "samples": len(sol.samples), "t_end": float(sol.samples[-1].t),
                  "s_end": float(sol.samples[-1].trace)}
        return Outcome(_clean(result), sol.to_csv())
    lo, hi = req.support
    tasks = [(req.kappa, req.dim, req.horizon, req.eps0, req.t_start, lo, hi, req.seed, i, req.tol)
             for i in range(req.perturbations + 1)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_matrix_run, tasks))
    else:
        results = [_matrix_run(t) for t in tasks]
    runs = []
    for i, (blow_up_time, verdict, _) in enumerate(results):
        entry = {"run": i, "saturating": i == 0, "blow_up_time": blow_up_time}
        entry.update(verdict)
        runs.append(entry)
    failed = [r for r in runs if not r["holds"]]
    result = {"mode": "matrix", "kappa": req.kappa, "dim": req.dim, "runs": runs,
              "all_hold": not failed, "worst_margin": min(r["min_margin"] for r in runs)}
    sample = None
    if failed:
        r = failed[0]
        sample = f"run {r['run']}: tr S > dim*s_kappa at t={r['first_violation']} (min margin {r['min_margin']!r})"
    return Outcome(_clean(result), results[0][2], bool(failed), sample)


# geodesic


def run_geodesic(req: GeodesicRequest, jobs: int = 1) -> Outcome:
    _, st, _ = realize(req.spec)
    p = _point(st.n, req.p)
    if len(req.v) != st.n:
        raise SpecError(f"v needs {st.n} components (dt, dx1, ..., dx{st.m})")
    v = make_tangent(st, p, float(req.v[0]), req.v[1:])
    trace = geodesic(st, p, v, req.span, n_samples=req.samples)
    result = {"causal_type": v.causal_type, "norm2": v.norm2, "energy": trace.energy,
              "angular_momentum": trace.angular_momentum, "energy_drift": trace.energy_drift,
              "angular_momentum_drift": trace.angular_momentum_drift, "truncated": trace.truncated,
              "length": trace.length, "end": [trace.t[-1], *trace.points()[-1].x.tolist()]}
    header = ["s", "t", "dt"] + [f"x{i + 1}" for i in range(st.m)]
    rows = [[float(s), float(t), float(dt), *[float(c) for c in q.x]]
            for s, t, dt, q in zip(trace.s, trace.t, trace.dt, trace.points())]
    return Outcome(_clean(result), _rows(header, rows))


# tau


def run_tau(req: TauRequest, jobs: int = 1) -> Outcome:
    _, st, sigma = realize(req.spec)
    q = _point(st.n, req.q)
    if req.to_sigma:
        res = tau_sigma(st, sigma, q, seed=req.seed, with_maximizer=False)
    else:
        res = tau_point(st, _point(st.n, req.p), q, with_maximizer=False)
    d = res.to_dict()
    return Outcome(_clean(d), _rows(["value", "converged"], [[float(res.value), res.converged]]))


# busemann


def run_busemann(req: BusemannRequest, jobs: int = 1) -> Outcome:
    _, st, sigma = realize(req.spec)
    ray = sigma_ray(st, sigma, req.foot)
    x = _point(st.n, req.x)
    val = busemann(x, ray, req.schedule, tol=req.tol)
    result = {"ray_length": ray.a, "busemann": val.to_dict()}
    if req.asymptote:
        result["asymptote"] = asymptote(x, ray, req.schedule).to_dict()
    sample = None
    if not val.monotone:
        diffs = np.diff([v for _, v in val.truncations])
        k = int(np.argmax(diffs))
        sample = f"truncation increases between r={val.truncations[k][0]!r} and r={val.truncations[k + 1][0]!r}"
    return Outcome(_clean(result), val.to_csv(), not val.monotone, sample)


# comparison


def run_compare(req: CompareRequest, jobs: int = 1) -> Outcome:
    _, st, sigma = realize(req.spec)
    prof = profile(req.kappa, req.beta, st.n)
    ccc = ccc_check(st, sigma, req.kappa, req.beta, seed=req.seed)
    region = RegionSpec.ball(sigma, req.radius)
    rep = monotonicity_report(st, region, prof, req.t_grid, tol=req.tol, flat_tol=req.flat_tol,
                              iso_tol=req.iso_tol)
    result = {"ccc": ccc.to_dict(), "report": rep.to_dict()}
    # the comparison inequalities are only claimed under CCC(kappa, beta)
    violation = ccc.holds and not (rep.monotone and rep.propagation_ok)
    sample = None
    if violation:
        for name, ratios in (("area_ratio", rep.area_ratio), ("vol_ratio", rep.vol_ratio)):
            bad = np.nonzero(np.diff(ratios) > req.tol * np.maximum(1.0, np.abs(ratios[:-1])))[0]
            if bad.size:
                k = int(bad[0])
                sample = f"{name} increases from t={float(rep.t[k])!r} to t={float(rep.t[k + 1])!r}"
                break
        if sample is None:
            sample = "shape operator not isotropic before a rigid interval"
    return Outcome(_clean(result), rep.to_csv(), bool(violation), sample)


# splitting


def _default_fiber_samples(m: int):
    return [[0.0] * m, [0.3] + [0.0] * (m - 1), [-0.2] * m]


def run_split(req: SplitRequest, jobs: int = 1) -> Outcome:
    spec, st, sigma = realize(req.spec)
    kappa, beta = req.kappa, req.beta
    if kappa is None or beta is None:
        if not isinstance(spec.warp, ModelWarp):
            raise SpecError("split needs kappa and beta unless the spec is a model warp")
        kappa = spec.warp.kappa if kappa is None else kappa
        beta = spec.warp.beta if beta is None else beta
    if not isinstance(sigma, Slice):
        raise SpecError("split reconstructs over slice hypersurfaces only")
    prof = profile(kappa, beta, st.n)
    t_grid = default_t_grid(prof) if req.t_grid is None else np.asarray(req.t_grid, dtype=float)
    samples = _default_fiber_samples(st.m) if req.fiber_samples is None else req.fiber_samples
    rep = splitting_reconstruct(st, prof, t_grid, samples, sigma=sigma, tol=req.tol, iso_tol=req.iso_tol)
    result = rep.to_dict()
    result.update(kappa=kappa, beta=beta, samples=len(t_grid))
    sample = None
    if not rep.passed:
        sample = f"worst sample {rep.worst_sample}, max error {rep.max_error!r}"
    return Outcome(_clean(result), _rows(["max_error", "isotropy_error", "passed"],
                                             [[rep.max_error, rep.isotropy_error, rep.passed]]),
                   not rep.passed, sample)


# counterexample


def run_counterexample(req: CounterexampleRequest, jobs: int = 1) -> Outcome:
    _, rep = nonrigid_example(req.kappa, req.beta, req.beta_tildes, req.n, t_eval=req.t_eval, seed=req.seed)
    rows = [[float(bt), c, u, float(v)]
            for bt, c, u, v in zip(rep.beta_tildes, rep.ccc_pass, rep.cut_infinite, rep.volumes)]
    sample = None
    if not rep.distinguished:
        sample = (f"ccc_pass={list(rep.ccc_pass)} cut_infinite={list(rep.cut_infinite)} "
                  f"relative difference {rep.relative_difference!r}")
    return Outcome(_clean(rep.to_dict()),
                   _rows(["beta_tilde", "ccc_pass", "cut_infinite", "relative_volume"], rows),
                   not rep.distinguished, sample)


HANDLERS: Dict[str, Callable] = {
    "table": run_table,
    "riccati": run_riccati,
    "geodesic": run_geodesic,
    "tau": run_tau,
    "busemann": run_busemann,
    "compare": run_compare,
    "split": run_split,
    "counterexample": run_counterexample,
}


def parse_request(command: str, data: dict):
    """Validate ``data`` against the request model of ``command``."""
    if command not in REQUESTS:
        raise KeyError(command)
    return REQUESTS[command].model_validate(data)


def execute(command: str, request, jobs: int = 1) -> Outcome:
    return HANDLERS[command](request, jobs=jobs)


def respond(command: str, request, jobs: int = 1, dry_run: bool = False) -> CommandResponse:
    """Run (or, with ``dry_run``, only validate) a request and wrap the outcome.

    A dry run realizes the spacetime spec when the request has one, so
    interval and hypersurface errors surface without any integration.
    """
    if dry_run:
        spec = getattr(request, "spec", None)
        if spec is not None:
            realize(spec)
        return CommandResponse(command=command, dry_run=True, result={"valid": True})
    out = execute(command, request, jobs=jobs)
    return CommandResponse(command=command, violation=out.violation, result=out.result, csv=out.csv,
                           failing_sample=out.failing_sample)


__all__ = ["CSV_COLUMNS", "HANDLERS", "Outcome", "execute", "parse_request", "respond"]
