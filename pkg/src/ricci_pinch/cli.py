"""Command-line batch driver: ``ricci-pinch <subcommand> [options]``.

Every subcommand builds a report (metadata plus a list of flat or nested
records), validates all inputs before computing anything, and writes the
rendered output in one go so that a failed run leaves no partial file.

Exit codes: 0 all checks pass, 1 an assertion failed, 2 usage or
configuration error, 3 nothing failed but some results are inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .clifford import CliffordTorus, admissible_r_squared_range, mean_curvature, ricci_values, verify_equality_case
from .exterior import SymmetricEndomorphism, eigen_sums, t_matrix
from .focal import FocalSpecError, load_focal_spec, parse_focal_spec
from .pinching import (
    DEFAULT_TOL,
    PinchingParams,
    Status,
    bound_b,
    bound_identity_residual,
    classify,
    even_dimension_bound,
    final_constant,
    k_range_ok,
    lambda_value,
    odd_dimension_bound,
    theorem1_k_range_ok,
)
from .shape import (
    SamplerExhausted,
    bochner_chain,
    check_trace_eigen_bound,
    pinching_params,
    ricci_min,
    sample_pinched_operator,
    sample_stream,
    scale_of,
)
from .tube import (
    BundlePoint,
    ConditioningWarning,
    DomainError,
    SingularPointError,
    extract_focal_data,
    gauss_map,
    psi,
    psi_sigma_min,
    regularity_operator,
    round_trip_residual,
    singular_threshold,
    tube_sample,
    verify_vertical_eigenspace,
)

SCHEMA_VERSION = 1
MAX_N = 12

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

PINCH_COLUMNS = ["n", "k", "H", "b", "lambda", "residual", "special_bound", "special_residual", "theorem_range", "status"]
CLIFFORD_COLUMNS = ["n", "k", "p", "r2", "H", "ric_min", "b", "margin", "verdict", "location", "lambda", "lambda_torus"]
BOCHNER_COLUMNS = [
    "index", "strategy", "tries", "H", "ric_min", "b", "scale", "min_value", "min_exact",
    "slack_eigen", "slack_cauchy_schwarz", "slack_pinched", "final_constant", "trace_eigen_worst",
]  # fmt: skip
TUBE_COLUMNS = [
    "point", "x", "w", "status", "regular", "sigma_min", "det_p", "min_abs_eig_p", "cot_tau", "multiplicity",
    "eigen_error", "max_angle", "gap", "tol_cluster", "asymmetry", "round_trip", "oracle_error",
]  # fmt: skip


class ConfigError(ValueError):
    """Invalid command-line or config-file input (exit code 2)."""


@dataclass
class Report:
    command: str
    config: dict
    records: list[dict]
    columns: list[str]
    summary: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def payload(self, timestamp: bool = True) -> dict:
        out = {
            "schema": f"ricci-pinch/{self.command}/{SCHEMA_VERSION}",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "summary": self.summary,
            "exit_code": self.exit_code,
            "records": self.records,
        }
        if timestamp:
            out["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return out


def _plain(obj):
    """Recursively convert numpy scalars and arrays to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render(report: Report, fmt: str = "json", timestamp: bool = True) -> str:
    if fmt == "json":
        return json.dumps(_plain(report.payload(timestamp)), indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=report.columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for rec in report.records:
        row = {}
        for key in report.columns:
            val = _plain(rec.get(key))
            row[key] = json.dumps(val) if isinstance(val, list) else ("" if val is None else val)
        writer.writerow(row)
    return buf.getvalue()


def _map(fn, items, jobs: int):
    """Ordered map, in a process pool when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _check_n(n: int) -> None:
    if not 4 <= n <= MAX_N:
        raise ConfigError(f"n must satisfy 4 <= n <= {MAX_N}, got {n}")


def _check_pair(n: int, k: int) -> None:
    _check_n(n)
    if not k_range_ok(n, k):
        raise ConfigError(f"(n={n}, k={k}) outside 2 <= k <= n/2")


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be positive and finite, got {value!r}")


# -- pinch-table -------------------------------------------------------------


def cmd_pinch_table(n_values, k_values=None, h_values=(0.0,)) -> Report:
    """Bound, root and identity residual over a grid of (n, k, H).

    Rows with ``k`` outside ``2 <= k <= n/2`` are kept with status
    ``"invalid"`` and empty numeric columns.  ``special_bound`` holds the
    closed form for k = n/2 (n even) and k = (n-1)/2 (n odd) where it applies.
    """
    h_values = [float(h) for h in h_values]
    for n in n_values:
        _check_n(n)
    for h in h_values:
        if not (math.isfinite(h) and h >= 0):
            raise ConfigError(f"H must be finite and nonnegative, got {h!r}")
    records = []
    worst = 0.0
    for n in n_values:
        ks = list(k_values) if k_values is not None else list(range(2, n // 2 + 1))
        for k in ks:
            for h in h_values:
                rec = {"n": n, "k": k, "H": h}
                if not k_range_ok(n, k):
                    rec.update(status="invalid", theorem_range=False)
                    records.append(rec)
                    continue
                p = PinchingParams(n, k, h)
                b = bound_b(p)
                res = bound_identity_residual(p)
                rel = res / (1.0 + b)
                worst = max(worst, rel)
                rec.update(b=b, **{"lambda": lambda_value(p)}, residual=res, theorem_range=theorem1_k_range_ok(n, k))
                special = None
                if 2 * k == n:
                    special = even_dimension_bound(n, h)
                elif 2 * k == n - 1:
                    special = odd_dimension_bound(n, h)
                if special is not None:
                    rec["special_bound"] = special
                    rec["special_residual"] = abs(special - b) / (1.0 + abs(b))
                    worst = max(worst, rec["special_residual"])
                rec["status"] = "pass" if rel <= 1e-12 and rec.get("special_residual", 0.0) <= 1e-12 else "fail"
                records.append(rec)
    failed = sum(r["status"] == "fail" for r in records)
    invalid = sum(r["status"] == "invalid" for r in records)
    return Report(
        "pinch-table",
        {"n": list(n_values), "k": None if k_values is None else list(k_values), "H": h_values},
        records,
        PINCH_COLUMNS,
        {"rows": len(records), "failed": failed, "invalid": invalid, "worst_relative_residual": worst},
        EXIT_FAIL if failed else EXIT_OK,
    )


# -- clifford-sweep ------------------------------------------------------------


def cmd_clifford_sweep(
    n: int, k: int, count: int = 20, offset: float = 1e-3, tol: float = DEFAULT_TOL, p: int | None = None
) -> Report:
    """Classify T^n_p(r) against b(n, k, H) across a range of r^2.

    With ``p`` unset (or equal to ``k``) the sweep covers the admissible r^2
    range: interior rows are expected at Equality, exterior rows (``offset``
    beyond either endpoint) Violated, and ``lambda`` must equal
    sqrt(1 - r^2)/r.  Any other ``p`` is exploratory: ``count`` radii spread
    over (0, 1) are classified and reported, and nothing is asserted.
    """
    _check_pair(n, k)
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    _positive("offset", offset)
    _positive("tol", tol)
    p = k if p is None else p
    if not 2 <= p <= n - 2:
        raise ConfigError(f"p must satisfy 2 <= p <= n - 2, got {p}")
    if p == k:
        lo, hi = admissible_r_squared_range(n, k)
        interior = [lo] if hi - lo < 1e-15 else list(np.linspace(lo, hi, count))
        points = [(r2, "interior") for r2 in interior]
        points += [(r2, "exterior") for r2 in (lo - offset, hi + offset) if 0 < r2 < 1]
    else:
        lo = hi = None
        points = [(r2, "exploratory") for r2 in np.linspace(0.0, 1.0, count + 2)[1:-1]]
    records = []
    failed = 0
    for r2, where in points:
        t = CliffordTorus.from_r_squared(n, p, float(r2))
        h = abs(mean_curvature(t))
        params = PinchingParams(n, k, h)
        ric = min(ricci_values(t))
        if where == "exploratory":
            verdict = classify(ric, params, tol)
        else:
            verdict = verify_equality_case(t, k, tol)
        lam = lambda_value(params)
        lam_torus = t.second_radius / t.r
        if where != "exploratory":
            expected = Status.EQUALITY if where == "interior" else Status.VIOLATED
            ok = verdict.status == expected and (where == "exterior" or abs(lam - lam_torus) <= 1e-10 * (1 + lam_torus))
            failed += not ok
        records.append(
            {
                "n": n,
                "k": k,
                "p": p,
                "r2": float(r2),
                "H": h,
                "ric_min": ric,
                "b": bound_b(params),
                "margin": verdict.margin,
                "verdict": verdict.status.value,
                "location": where,
                "lambda": lam,
                "lambda_torus": lam_torus,
            }
        )
    summary = {"rows": len(records), "failed": failed, "r2_range": None if lo is None else [lo, hi]}
    if p != k:
        summary["verdicts"] = {v: sum(r["verdict"] == v for r in records) for v in sorted({r["verdict"] for r in records})}
    return Report(
        "clifford-sweep",
        {"n": n, "k": k, "p": p, "count": count, "offset": offset, "tol": tol},
        records,
        CLIFFORD_COLUMNS,
        summary,
        EXIT_FAIL if failed else EXIT_OK,
    )


# -- bochner-scan ------------------------------------------------------------


def _bochner_sample(args) -> dict:
    n, k, seed, index, forms, max_tries = args
    if index == 0:
        a, strategy, tries = SymmetricEndomorphism(np.zeros((n, n))), "zero", 0
    else:
        try:
            s = sample_pinched_operator(n, k, seed, max_tries, index=index)
        except SamplerExhausted as exc:
            return {"index": index, "exhausted": True, "tries": exc.tries}
        a, strategy, tries = s.operator, s.strategy, s.tries
    size = eigen_sums(a, k).size
    rng = sample_stream(seed, n, k, index, 1)
    coeffs = rng.standard_normal((forms, size))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    chain = bochner_chain(a, k, coeffs)
    scale = scale_of(a)
    exact = k * (n - k) + float(np.linalg.eigvalsh(t_matrix(a, k))[0])
    params = pinching_params(a, k)
    trace_ok, trace_worst = check_trace_eigen_bound(a, k)
    rec = {
        "index": index,
        "strategy": strategy,
        "tries": tries,
        "H": params.H,
        "ric_min": ricci_min(a),
        "b": bound_b(params),
        "scale": scale,
        "min_value": float(chain["value"].min()),
        "min_exact": exact,
        # each link of the chain value = eigen >= cauchy_schwarz >= pinched >= 0
        "slack_eigen": float(-np.abs(chain["value"] - chain["eigen"]).max()),
        "slack_cauchy_schwarz": float((chain["eigen"] - chain["cauchy_schwarz"]).min()),
        "slack_pinched": float((chain["cauchy_schwarz"] - chain["pinched"]).min()),
        "final_constant": final_constant(params),
        "trace_eigen_worst": trace_worst,
    }
    if not trace_ok:
        rec["operator"] = a.matrix.tolist()
    return rec


def cmd_bochner_scan(
    n: int, k: int, samples: int, seed: int, *, forms: int = 50, max_tries: int = 1000, tol: float = 1e-8, jobs: int = 1
) -> Report:
    """Bochner quadratic form on pinched shape operators and random unit k-forms.

    Sample 0 is the fixed operator A = 0; samples 1..``samples`` come from the
    seeded pinched sampler.  Checks: minimum value >= -tol * (1 + |A|^2),
    every chain link slack >= -1e-10 * scale, |final constant| <= 1e-12,
    and no sample violating ``tr(A) mu_i <= n H lambda``.
    """
    _check_pair(n, k)
    if samples < 1 or forms < 1 or max_tries < 1:
        raise ConfigError("samples, forms and max_tries must be >= 1")
    _positive("tol", tol)
    work = [(n, k, seed, i, forms, max_tries) for i in range(samples + 1)]
    records = _map(_bochner_sample, work, jobs)
    exhausted = [r for r in records if r.get("exhausted")]
    good = [r for r in records if not r.get("exhausted")]
    slack_keys = ("slack_eigen", "slack_cauchy_schwarz", "slack_pinched")
    min_scaled = min(r["min_value"] / r["scale"] for r in good)
    worst_slack = {key: min(r[key] / r["scale"] for r in good) for key in slack_keys}
    worst_final = max(abs(r["final_constant"]) for r in good)
    trace_eigen_failures = [r["index"] for r in good if "operator" in r]
    checks = {
        "minimum": min_scaled >= -tol,
        "chain": min(worst_slack.values()) >= -1e-10,
        "final_constant": worst_final <= 1e-12,
        "trace_eigen": not trace_eigen_failures,
        "sampler": not exhausted,
    }
    summary = {
        "samples": len(good),
        "global_min": min(r["min_value"] for r in good),
        "global_min_over_scale": min_scaled,
        "global_min_exact": min(r["min_exact"] for r in good),
        "worst_slack_over_scale": worst_slack,
        "final_constant_residual": worst_final,
        "trace_eigen_failures": len(trace_eigen_failures),
        "trace_eigen_failed_indices": trace_eigen_failures,
        "sampler_exhausted": len(exhausted),
        "strategies": {s: sum(r["strategy"] == s for r in good) for s in sorted({r["strategy"] for r in good})},
        "checks": checks,
    }
    return Report(
        "bochner-scan",
        {"n": n, "k": k, "samples": samples, "seed": seed, "forms": forms, "max_tries": max_tries, "tol": tol},
        records,
        BOCHNER_COLUMNS,
        summary,
        EXIT_OK if all(checks.values()) else EXIT_FAIL,
    )


# -- tube-verify -------------------------------------------------------------


@lru_cache(maxsize=4)
def _parsed(spec_json: str):
    return parse_focal_spec(json.loads(spec_json))


def _fiber_directions(ell: int, fibers: int, seed: int) -> list[np.ndarray]:
    out = [np.eye(ell + 1)[j] for j in range(min(fibers, ell + 1))]
    rng = sample_stream(seed, ell, fibers)
    while len(out) < fibers:
        w = rng.standard_normal(ell + 1)
        out.append(w / np.linalg.norm(w))
    return out


def _tube_point(args) -> dict:
    spec_json, index, x, w, step, tol = args
    g, tau = _parsed(spec_json)
    q = BundlePoint(np.array(x), np.array(w))
    rec: dict = {"point": index, "x": list(x), "w": list(w)}
    p = regularity_operator(g, tau, q)
    sigma = psi_sigma_min(g, tau, q, step)
    threshold = singular_threshold(step)
    min_p = float(np.min(np.abs(p.eigenvalues)))
    singular = sigma < threshold
    rec.update(
        det_p=float(np.prod(p.eigenvalues)),
        min_abs_eig_p=min_p,
        sigma_min=sigma,
        regular=not singular,
        regularity_agrees=singular == (min_p < threshold),
    )
    y_psi, y_eta = psi(g, tau, q), gauss_map(g, tau, q)
    rec["unit_defect"] = max(abs(y_psi @ y_psi - 1), abs(y_eta @ y_eta - 1), abs(y_psi @ y_eta))
    rec["round_trip"] = round_trip_residual(g, tau, q)
    failures = []
    if not rec["regularity_agrees"]:
        failures.append("det P and the Psi-Jacobian disagree on regularity")
    if rec["unit_defect"] > 1e-10:
        failures.append(f"unit/orthogonality defect {rec['unit_defect']:.3g}")
    if rec["round_trip"] > 1e-12:
        failures.append(f"round trip residual {rec['round_trip']:.3g}")
    if singular:
        rec["status"] = "fail" if failures else "singular"
        rec["reasons"] = failures
        return rec
    try:
        report = verify_vertical_eigenspace(g, tau, q, step, tol)
    except SingularPointError as exc:
        rec.update(status="fail", reasons=failures + [str(exc)])
        return rec
    rec.update(
        eigenvalues=report.eigenvalues,
        cot_tau=report.cot_tau,
        multiplicity=report.multiplicity,
        eigen_error=report.eigen_error,
        max_angle=report.max_angle,
        gap=report.gap,
        tol_cluster=report.tol_cluster,
        asymmetry=report.asymmetry,
    )
    if g.kind == "great_sphere" and tau.kind == "constant":
        t0 = tau(q.x)
        expected = sorted([1 / math.tan(t0)] * g.ell + [-math.tan(t0)] * g.m)
        rec["oracle_error"] = float(np.max(np.abs(np.array(report.eigenvalues) - expected)))
        if rec["oracle_error"] > 1e-6:
            failures.append(f"spectrum differs from the Clifford model by {rec['oracle_error']:.3g}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConditioningWarning)
        focal = extract_focal_data(tube_sample(g, tau, q), step=step, rank=g.m)
    rec["focal_residuals"] = focal.residuals
    rec["grad_tau_norm"] = focal.grad_tau_norm
    rec["warnings"] = [str(c.message) for c in caught]
    if max(focal.residuals.values()) > 1e-5:
        failures.append(f"focal data residuals {focal.residuals}")
    if failures or report.status == "fail":
        rec["status"] = "fail"
    else:
        rec["status"] = report.status
    rec["reasons"] = failures + report.reasons
    return rec


def cmd_tube_verify(
    spec: dict, density: int = 3, fibers: int = 2, step: float = 1e-4, tol: float = 1e-4, seed: int = 0, jobs: int = 1
) -> Report:
    """Check the tube construction at a grid of bundle points.

    Chart points form a ``density``-per-axis grid in the middle of the chart
    domain; at each one, ``fibers`` unit normals are used (the normal-frame
    basis vectors first, then seeded random ones).
    """
    try:
        g, tau = parse_focal_spec(spec)
    except FocalSpecError as exc:
        raise ConfigError(str(exc)) from exc
    _check_n(g.n)
    if density < 1 or fibers < 1:
        raise ConfigError("density and fibers must be >= 1")
    _positive("step", step)
    _positive("tol", tol)
    points = g.sample_points(density)
    for x in points:
        try:
            t = tau(x)
            grad = tau.gradient(x)
            jac = g.tangent(x)
            gnorm = float(grad @ np.linalg.solve(jac.T @ jac, grad))
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise ConfigError(f"cannot evaluate the focal data at x={x.tolist()}: {exc}") from exc
        if not 0 < t < math.pi / 2 or gnorm >= 1:
            raise ConfigError(f"radius function out of range at x={x.tolist()}: tau={t!r}, |grad tau|^2={gnorm!r}")
    spec_json = json.dumps(spec, sort_keys=True)
    work = []
    for x in points:
        for w in _fiber_directions(g.ell, fibers, seed):
            work.append((spec_json, len(work), x.tolist(), w.tolist(), step, tol))
    try:
        records = _map(_tube_point, work, jobs)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    counts = {s: sum(r["status"] == s for r in records) for s in ("pass", "fail", "inconclusive", "singular")}
    if counts["fail"]:
        code = EXIT_FAIL
    elif counts["inconclusive"]:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    return Report(
        "tube-verify",
        {"spec": spec, "density": density, "fibers": fibers, "step": step, "tol": tol, "seed": seed},
        records,
        TUBE_COLUMNS,
        {"points": len(records), **counts},
        code,
    )


# -- argument handling --------------------------------------------------------


def _common(parser: argparse.ArgumentParser, tol_default: float) -> None:
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--step", type=float, default=1e-4, help="finite-difference step")
    parser.add_argument("--tol", type=float, default=tol_default)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the generated_at field")
    parser.add_argument("--config", type=Path, help="JSON file whose keys override the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ricci-pinch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pinch-table", help="bound b(n,k,H), root lambda and identity residuals")
    p.add_argument("--n", type=int, nargs="+", default=list(range(4, 13)))
    p.add_argument("--k", type=int, nargs="+", help="default: every k with 2 <= k <= n/2")
    p.add_argument("--H", type=float, nargs="+", default=[round(0.5 * i, 10) for i in range(11)])
    _common(p, DEFAULT_TOL)

    p = sub.add_parser("clifford-sweep", help="Clifford tori against the pinching bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count", type=int, default=20, help="interior r^2 values")
    p.add_argument("--offset", type=float, default=1e-3, help="distance of the exterior rows")
    p.add_argument("--p", type=int, help="first-factor dimension (default k; other values are exploratory)")
    _common(p, DEFAULT_TOL)

    p = sub.add_parser("bochner-scan", help="Bochner quadratic form on pinched samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--forms", type=int, default=50, help="random unit k-forms per sample")
    p.add_argument("--max-tries", type=int, default=1000)
    _common(p, 1e-8)

    p = sub.add_parser("tube-verify", help="tube construction checks from a focal description")
    p.add_argument("spec", type=Path, help="JSON focal submanifold description")
    p.add_argument("--density", type=int, default=3, help="chart points per axis")
    p.add_argument("--fibers", type=int, default=2, help="unit normals per chart point")
    _common(p, 1e-4)
    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if args.config is None:
        return
    try:
        data = json.loads(args.config.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config}, line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(vars(args)) - {"command", "config"}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        if dest in ("out", "spec") and value is not None:
            value = Path(value)
        setattr(args, dest, value)


def _run(args: argparse.Namespace) -> Report:
    if args.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {args.jobs}")
    if args.command == "pinch-table":
        return cmd_pinch_table(args.n, args.k, args.H)
    if args.command == "clifford-sweep":
        return cmd_clifford_sweep(args.n, args.k, args.count, args.offset, args.tol, args.p)
    if args.command == "bochner-scan":
        return cmd_bochner_scan(
            args.n, args.k, args.samples, args.seed, forms=args.forms, max_tries=args.max_tries, tol=args.tol,
            jobs=args.jobs,
        )  # fmt: skip
    try:
        load_focal_spec(args.spec)  # reports malformed input with line and field
        spec = json.loads(Path(args.spec).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {args.spec}: {exc}") from exc
    except FocalSpecError as exc:
        raise ConfigError(f"{args.spec}: {exc}") from exc
    return cmd_tube_verify(spec, args.density, args.fibers, args.step, args.tol, args.seed, args.jobs)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with status 2 on usage errors
    try:
        _apply_config(args, parser)
        report = _run(args)
        text = render(report, args.format, timestamp=not args.no_timestamp)
    except (ConfigError, FocalSpecError) as exc:
        print(f"ricci-pinch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is None:
        sys.stdout.write(text)
    else:
        tmp = args.out.with_name(args.out.name + ".tmp")
        tmp.write_text(text)
        tmp.replace(args.out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
