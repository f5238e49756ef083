"""Command-line front end: ``hdenoise <command> --config cfg.json --out DIR``.

Exit status 0 on success, 2 when the configuration is invalid, 3 when a
numeric routine fails (nonconvergence, rank deficiency).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import config as C
from .function_models import AnalyticModel
from .geometric_measure import (
    MAX_BRUTE_FORCE_ARCS,
    BoundarySet,
    ConvergenceError,
    GaugeFunction,
    certify_theorem1_set,
    equilibrium_measure,
    hausdorff_cover,
)
from .identification import (
    FitConfig,
    ObservationSeries,
    RankDeficientError,
    consistency_experiment,
    fit_model,
    simulate_observations,
)
from .measure_equivalence import NoiseModel, kakutani_product
from .sampling_design import (
    SamplingPlan,
    blaschke_sum,
    custom_plan,
    generate_dyadic,
    generate_radial_ray,
    separation_sum,
    validate_coverage,
)

log = logging.getLogger("hdenoise")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the failing field."""


# ---------------------------------------------------------------------------
# Output helpers


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; keep them readable and round-trippable
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


DATA_FORMATS = {
    "effective_config.json": "Fully expanded run configuration (all defaults explicit). Re-running with it as --config reproduces the run.",
    "result.json": "Command result summary. Non-finite floats are written as the strings \"inf\", \"-inf\" or \"nan\".",
    "cover.csv": "start, length, cost: arcs of the optimal content cover (radians) and their gauge cost h(length).",
    "plan.csv": "index, re, im: sampling points in plan order.",
    "plan.json": "Sampling plan with scheme parameters and target set.",
    "coverage.csv": "theta, count: boundary probe angle and number of plan points whose approach region contains it.",
    "blaschke_levels.csv": "level, sum: per dyadic level m, the sum of (1 - |z_n|) over points with floor(-log2(1 - |z_n|)) = m.",
    "partial_sums.csv": "n, partial_sum: S_n = sum_{k<=n} |f(z_k) - g(z_k)|^2.",
    "factors.csv": "k, gap_re, gap_im, affinity, log_affinity: per-point mean shift f(z_k) - g(z_k) and its Hellinger affinity.",
    "products.csv": "n, log_product, product: affinity products at the ladder points.",
    "observations.csv": "n, re_z, im_z, re_x, im_x: observation index, sampling point and observed value.",
    "coefficients.csv": "j, re, im: fitted Taylor coefficients c_j.",
    "validation_curve.csv": "degree, holdout_residual: hold-out residual norm per candidate degree.",
    "summary.csv": "n, median_sup_error, median_coef_error, median_boundary_sup_error: medians over seeds per ladder point.",
    "cells.csv": "n, seed, degree, sup_error, coef_error, boundary_sup_error, error: one row per (N, seed) cell.",
    "content.csv": "mode, value: Hausdorff content under each requested solver.",
    "equilibrium.csv": "center, width, weight: capacity cells and optimal probability weights.",
}


def write_data_formats(out: Path, files) -> None:
    lines = ["# Data formats", "", "Floats are written with 17 significant digits so values round-trip exactly.", ""]
    for name in sorted(files):
        lines.append(f"- `{name}`: {DATA_FORMATS.get(name, 'see result.json')}")
    (out / "DATA_FORMATS.md").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Builders: config blocks to library objects


def _build(field: str, factory):
    try:
        return factory()
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{field}: {exc}") from exc


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)


def build_set(cfg: C.RunConfig) -> BoundarySet:
    return _build("set", lambda: BoundarySet.from_dict(cfg.set.model_dump()))


def build_gauge(cfg: C.RunConfig) -> GaugeFunction:
    return _build("gauge", lambda: GaugeFunction.from_dict(cfg.gauge.model_dump()))


def build_model(cfg: C.RunConfig, name: str = "model") -> AnalyticModel:
    spec = getattr(cfg, name)
    return _build(name, lambda: AnalyticModel.from_dict(spec.model_dump()))


def build_noise(cfg: C.RunConfig) -> NoiseModel:
    return _build("noise", lambda: NoiseModel.from_dict(cfg.noise.model_dump()))


def build_plan(cfg: C.RunConfig, E: BoundarySet) -> SamplingPlan:
    p = cfg.plan

    def make():
        if p.kind == "dyadic":
            return generate_dyadic(E, p.levels, p.density_factor)
        if p.kind == "radial_ray":
            return generate_radial_ray(p.angles, p.radii, E)
        return custom_plan([_complex(v) for v in p.points], E)

    return _build("plan", make)


def build_fit(cfg: C.RunConfig) -> FitConfig:
    f = cfg.fit
    return _build("fit", lambda: FitConfig(f.degree, f.lam, f.alpha, f.validation_fraction))


def _require_prefix(cfg: C.RunConfig, plan: SamplingPlan) -> int:
    n = len(plan) if cfg.prefix is None else cfg.prefix
    if n > len(plan):
        raise ConfigError(f"prefix: {n} exceeds the plan size {len(plan)}")
    return n


def _require_ladder(cfg: C.RunConfig, available: int) -> list:
    if cfg.ladder[-1] > available:
        raise ConfigError(f"ladder: reaches {cfg.ladder[-1]} but only {available} points are available")
    return list(cfg.ladder)


# ---------------------------------------------------------------------------
# Commands. Each returns (result dict, {filename: (header, rows)}).


def cmd_certify(cfg, ctx):
    E, h = build_set(cfg), build_gauge(cfg)
    cert = certify_theorem1_set(E, h, cfg.certify_threshold)
    cover = hausdorff_cover(E, h, "exact_dp")
    rows = [(a.start, a.length, h(a.length)) for a in cover.cover]
    return {"certificate": cert.to_dict(), "gauge": h.to_dict()}, {"cover.csv": (["start", "length", "cost"], rows)}


def cmd_design(cfg, ctx):
    E = build_set(cfg)
    plan = build_plan(cfg, E)
    cov = validate_coverage(plan, cfg.coverage.grid, threshold=cfg.coverage.threshold)
    bs = blaschke_sum(plan, divergent=cfg.trend.divergent, convergent=cfg.trend.convergent)
    plan.to_json(ctx["out"] / "plan.json")
    ctx["extra"].append("plan.json")
    result = {"points": len(plan), "coverage": cov.to_dict(), "blaschke": bs.to_dict(),
              "tail_condition": plan.tail_condition(), "scheme": plan.scheme}
    tables = {
        "plan.csv": (["index", "re", "im"], [(i, z.real, z.imag) for i, z in enumerate(plan.points)]),
        "coverage.csv": (["theta", "count"], list(zip(cov.theta, cov.counts))),
        "blaschke_levels.csv": (["level", "sum"], list(bs.per_level.items())),
    }
    return result, tables


def cmd_separation(cfg, ctx):
    E = build_set(cfg)
    plan = build_plan(cfg, E)
    f, g = build_model(cfg, "model"), build_model(cfg, "alternative")
    n = _require_prefix(cfg, plan)
    res = separation_sum(f, g, plan, n, divergent=cfg.trend.divergent, convergent=cfg.trend.convergent)
    rows = [(k + 1, s) for k, s in enumerate(res.partial_sums)]
    return {"separation": res.to_dict()}, {"partial_sums.csv": (["n", "partial_sum"], rows)}


def cmd_kakutani(cfg, ctx):
    E = build_set(cfg)
    plan = build_plan(cfg, E)
    f, g, P = build_model(cfg, "model"), build_model(cfg, "alternative"), build_noise(cfg)
    ladder = _require_ladder(cfg, len(plan))
    k = cfg.kakutani
    rep = kakutani_product(f, g, plan, P, ladder, orthogonal_log=k.orthogonal_log,
                           equivalence_tol=k.equivalence_tol, min_decline=k.min_decline)
    factors = [(i + 1, d.real, d.imag, math.exp(la), la) for i, (d, la) in enumerate(zip(rep.gaps, rep.log_affinities))]
    tables = {
        "factors.csv": (["k", "gap_re", "gap_im", "affinity", "log_affinity"], factors),
        "products.csv": (["n", "log_product", "product"], list(zip(rep.ladder, rep.log_products, rep.products))),
    }
    return {"kakutani": rep.to_dict()}, tables


def _observation_rows(obs: ObservationSeries):
    return [(i, z.real, z.imag, x.real, x.imag) for i, (z, x) in enumerate(zip(obs.points, obs.values))]


_OBS_HEADER = ["n", "re_z", "im_z", "re_x", "im_x"]


def cmd_simulate(cfg, ctx):
    E = build_set(cfg)
    plan = build_plan(cfg, E)
    S, P = build_model(cfg), build_noise(cfg)
    n = _require_prefix(cfg, plan)
    obs = simulate_observations(S, plan.prefix(n), P, cfg.seed)
    result = {"count": len(obs), "seed": cfg.seed, "noise": obs.noise}
    return result, {"observations.csv": (_OBS_HEADER, _observation_rows(obs))}


def cmd_fit(cfg, ctx):
    fc = build_fit(cfg)
    if cfg.observations is not None:
        path = Path(cfg.observations)

        def load():
            return ObservationSeries.from_csv(path, cfg.noise.model_dump(), cfg.seed)

        try:
            obs = _build("observations", load)
        except OSError as exc:
            raise ConfigError(f"observations: cannot read {path}: {exc.strerror}") from exc
    else:
        E = build_set(cfg)
        plan = build_plan(cfg, E)
        n = _require_prefix(cfg, plan)
        obs = simulate_observations(build_model(cfg), plan.prefix(n), build_noise(cfg), cfg.seed)
    fit = fit_model(obs, fc)
    c = fit.model.coefficients
    tables = {"coefficients.csv": (["j", "re", "im"], [(j, v.real, v.imag) for j, v in enumerate(c)])}
    if fit.validation_curve:
        tables["validation_curve.csv"] = (["degree", "holdout_residual"], sorted(fit.validation_curve.items()))
    return {"fit": fit.to_dict(), "observations": len(obs)}, tables


def cmd_experiment(cfg, ctx):
    E = build_set(cfg)
    plan = build_plan(cfg, E)
    S, P, fc = build_model(cfg), build_noise(cfg), build_fit(cfg)
    ladder = _require_ladder(cfg, len(plan))
    rep = consistency_experiment(S, plan, ladder, P, fc, cfg.seeds, workers=ctx["threads"])
    summary = [(r["n"], r["median_sup_error"], r["median_coef_error"], r["median_boundary_sup_error"])
               for r in rep.summary_rows()]
    cells = [(c["n"], c["seed"], c.get("degree", -1), c["sup_error"], c["coef_error"],
              c["boundary_sup_error"], c.get("error", "")) for c in rep.cells]
    tables = {
        "summary.csv": (["n", "median_sup_error", "median_coef_error", "median_boundary_sup_error"], summary),
        "cells.csv": (["n", "seed", "degree", "sup_error", "coef_error", "boundary_sup_error", "error"], cells),
    }
    result = rep.to_dict()
    result.pop("cells")
    return {"experiment": result}, tables


def cmd_measure(cfg, ctx):
    E, h = build_set(cfg), build_gauge(cfg)
    m = cfg.measure
    contents = {}
    for mode in m.content_modes:
        if mode == "brute_force" and len(E.arcs()) > MAX_BRUTE_FORCE_ARCS:
            log.warning("skipping brute_force: %d arcs exceed %d", len(E.arcs()), MAX_BRUTE_FORCE_ARCS)
            continue
        contents[mode] = hausdorff_cover(E, h, mode).value
    eq = _build("measure", lambda: equilibrium_measure(
        E, m.alpha, m.grid_points, m.kernel_mode, m.lattice, tol=m.tol, max_iter=m.max_iter))
    result = {
        "measure": E.measure,
        "arcs": len(E.arcs()),
        "content": contents,
        "capacity": {"alpha": m.alpha, "kernel_mode": m.kernel_mode, "capacity": eq.capacity,
                     "energy": eq.energy, "gap": eq.gap, "iterations": eq.iterations},
    }
    tables = {
        "content.csv": (["mode", "value"], list(contents.items())),
        "equilibrium.csv": (["center", "width", "weight"], list(zip(eq.centers, eq.widths, eq.weights))),
    }
    return result, tables


COMMAND_TABLE = {
    "certify": cmd_certify,
    "design": cmd_design,
    "separation": cmd_separation,
    "kakutani": cmd_kakutani,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "experiment": cmd_experiment,
    "measure": cmd_measure,
}


# ---------------------------------------------------------------------------
# Driver


def load_config(path: str | None, command: str, seed: int | None) -> C.RunConfig:
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    if data.get("command") not in (None, command):
        raise ConfigError(f"command: config is for {data['command']!r}, not {command!r}")
    data = {**data, "command": command}
    if seed is not None:
        data["seed"] = seed
        if command == "experiment":
            data["seeds"] = [seed + i for i in range(len(data.get("seeds", range(20))))]
    return C.parse_config(data)


def run_command(command: str, cfg: C.RunConfig, out: Path, threads: int | None = None) -> dict:
    """Execute ``command`` and write its artifacts to ``out``; returns the result dict."""
    out.mkdir(parents=True, exist_ok=True)
    ctx = {"out": out, "threads": max(1, threads or os.cpu_count() or 1), "extra": []}
    write_json(out / "effective_config.json", cfg.effective())
    result, tables = COMMAND_TABLE[command](cfg, ctx)
    for name, (header, rows) in tables.items():
        write_csv(out / name, header, rows)
    write_json(out / "result.json", {"command": command, **result})
    write_data_formats(out, ["effective_config.json", "result.json", *tables, *ctx["extra"]])
    return result


def _setup_logging():
    level = os.environ.get("HD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(prog="hdenoise", description="Recovery of bounded analytic functions from noisy disk samples.")
    parser.add_argument("command", choices=sorted(COMMAND_TABLE))
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--out", metavar="DIR", default="hdenoise_out", help="output directory")
    parser.add_argument("--seed", type=int, metavar="N", help="override the configured seed")
    parser.add_argument("--threads", type=int, metavar="N", help="worker cap (default: CPU count)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_config(args.config, args.command, args.seed)
        run_command(args.command, cfg, Path(args.out), args.threads)
    except ValidationError as exc:
        for line in C.describe_errors(exc):
            print(f"error: {line}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, RankDeficientError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # keep the exit-code contract for anything unexpected
        log.debug("unhandled failure", exc_info=True)
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{args.command}: wrote results to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
