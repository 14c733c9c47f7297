"""Experiment orchestration: JSON configs, deterministic parallel runs,
CSV + JSON result bundles.

Usage:
    alab <experiment-kind> --config cfg.json [--set key=value]...
         [--seed N] [--workers N] [--out dir]

Configs have three blocks: model (d, L, distribution, lambda), method
(experiment-specific) and run (n, master_seed, workers, out_dir).
Unknown keys are rejected by name; defaults are resolved and the fully
resolved config is written next to the results.  Data files are
byte-identical for the same resolved config and master seed regardless
of worker count; summary.json is deterministic except for the
``runtime_seconds`` field.

Exit codes: 0 success, 2 config error, 3 numeric failure (the summary
names the failing audit).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fmm, greens, rankone, spectral
from .disorder import (
    BernoulliAtoms,
    Distribution,
    PiecewiseConstantDensity,
    SeedSpec,
    UniformDensity,
    sample_field,
)
from .dynamics import (
    default_time_grid,
    dynloc_profile,
    position_moment,
    rage_average,
)
from .errors import AndersonLabError, ConfigError
from .lattice import Box
from .numerics import ComplexEnergy
from .operator import assemble

REQUIRED = object()

DIST_DEFAULT = {"variant": "uniform", "a": 0.0, "b": 1.0}

# kinds whose machinery integrates against the single-site density
DENSITY_KINDS = {"fmm-decay", "decoupling-scan", "second-moment"}

_MODEL_SCHEMA = {
    "d": (int, 1),
    "L": (int, 1),
    "distribution": (dict, DIST_DEFAULT),
    "lambda": (float, 1.0),
}

_RUN_SCHEMA = {
    "n": (int, 100),
    "master_seed": (int, 1),
    "workers": (int, 1),
    "out_dir": (str, "alab_out"),
}

_METHOD_SCHEMAS = {
    "spectrum-scan": {"L_list": (list, None)},
    "fmm-decay": {
        "s": (float, 1.0 / 3.0),
        "E": (float, 0.0),
        "eps": (float, 1e-3),
        "distances": (list, None),
    },
    "decoupling-scan": {
        "s": (float, 0.5),
        "grid_radius": (float, 10.0),
        "grid_points_per_axis": (int, 9),
    },
    "second-moment": {
        "s": (float, 0.5),
        "E": (float, 0.5),
        "eps_list": (list, [1e-1, 1e-2, 1e-3]),
    },
    "dynloc": {
        "interval": (object, "all"),
        "distances": (list, None),
        "t_min": (float, 0.1),
        "t_max": (float, 1e3),
        "n_times": (int, 512),
    },
    "position-moment": {
        "interval": (object, "all"),
        "p": (float, 1.0),
        "t_max": (float, 1e3),
        "n_times": (int, 512),
        "time_spacing": (str, "log"),
    },
    "rage": {
        "interval": (object, "all"),
        "R_list": (list, None),
        "T": (float, 1e3),
        "n_times": (int, 256),
    },
    "lifshitz": {"beta": (float, 2.0 / 3.0), "L_list": (list, [8, 16, 32, 64])},
    "ids": {"E_min": (float, -3.0), "E_max": (float, 3.0), "points": (int, 121)},
    "level-stats": {
        "window": (object, None),
        "central_fraction": (float, 0.2),
        "significance": (float, 0.01),
    },
    "rankone-verify": {
        "dim": (int, 6),
        "n_instances": (int, 100),
        "identity_dim": (int, 4),
        "identity_instances": (int, 20),
        "s": (float, 0.5),
        "v_values": (list, [-3.0, 0.0, 3.0]),
    },
    "krein-verify": {"n_instances": (int, 100), "E": (float, 0.3), "eps": (float, 0.2)},
    "geometric-identity": {
        "n_instances": (int, 100),
        "inner_L": (int, 2),
        "E": (float, 0.3),
        "eps": (float, 0.1),
    },
}

EXPERIMENT_KINDS = tuple(sorted(_METHOD_SCHEMAS))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    model: dict
    method: dict
    run: dict

    def resolved(self) -> dict:
        return {
            "kind": self.kind,
            "model": self.model,
            "method": self.method,
            "run": self.run,
        }


@dataclass(frozen=True)
class ResultBundle:
    out_dir: Path
    summary: dict
    csv_files: tuple


def build_distribution(cfg: dict) -> Distribution:
    known = {
        "uniform": ({"a", "b"}, lambda c: UniformDensity(float(c["a"]), float(c["b"]))),
        "piecewise": (
            {"breakpoints", "values"},
            lambda c: PiecewiseConstantDensity(
                tuple(float(x) for x in c["breakpoints"]),
                tuple(float(x) for x in c["values"]),
            ),
        ),
        "bernoulli": (
            {"a", "b", "p"},
            lambda c: BernoulliAtoms(float(c["a"]), float(c["b"]), float(c["p"])),
        ),
    }
    if "variant" not in cfg:
        raise ConfigError("distribution: missing required key 'variant'")
    variant = cfg["variant"]
    if variant not in known:
        raise ConfigError(
            f"distribution: unknown variant {variant!r} (expected one of {sorted(known)})"
        )
    keys, builder = known[variant]
    extra = set(cfg) - keys - {"variant"}
    if extra:
        raise ConfigError(f"distribution: unknown key(s) {sorted(extra)}")
    missing = keys - set(cfg)
    if missing:
        raise ConfigError(f"distribution: missing required key(s) {sorted(missing)}")
    try:
        return builder(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"distribution: {exc}") from None


def _check_block(name: str, schema: dict, data: dict) -> dict:
    unknown = set(data) - set(schema)
    if unknown:
        raise ConfigError(f"{name}: unknown key(s) {sorted(unknown)}")
    out = {}
    for key, (typ, default) in schema.items():
        if key in data:
            val = data[key]
        elif default is REQUIRED:
            raise ConfigError(f"{name}: missing required key '{key}'")
        else:
            val = default
        if val is not None and typ is not object:
            if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
                val = float(val)
            elif typ is int and isinstance(val, bool):
                raise ConfigError(f"{name}.{key}: expected {typ.__name__}, got bool")
            elif not isinstance(val, typ):
                raise ConfigError(
                    f"{name}.{key}: expected {typ.__name__}, got {type(val).__name__}"
                )
        out[key] = val
    return out


def parse_config_data(kind: str, data: dict) -> ExperimentConfig:
    """Validate a config mapping and resolve all defaults."""
    if kind not in _METHOD_SCHEMAS:
        raise ConfigError(
            f"unknown experiment kind {kind!r} (expected one of {EXPERIMENT_KINDS})"
        )
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - {"model", "method", "run"}
    if unknown:
        raise ConfigError(f"config: unknown top-level key(s) {sorted(unknown)}")
    model = _check_block("model", _MODEL_SCHEMA, data.get("model", {}))
    method = _check_block("method", _METHOD_SCHEMAS[kind], data.get("method", {}))
    run = _check_block("run", _RUN_SCHEMA, data.get("run", {}))
    dist = build_distribution(model["distribution"])  # validates the sub-block
    if kind in DENSITY_KINDS and not dist.has_density:
        raise ConfigError(
            f"{kind} integrates against the single-site density; "
            f"distribution variant {model['distribution']['variant']!r} has none"
        )
    if model["lambda"] < 0:
        raise ConfigError("model.lambda: must be >= 0")
    if run["n"] < 1:
        raise ConfigError("run.n: must be >= 1")
    if run["workers"] < 1:
        raise ConfigError("run.workers: must be >= 1")
    if "interval" in method:
        _interval(method["interval"])  # raises ConfigError when malformed
    if kind == "level-stats" and method["window"] is not None:
        w = method["window"]
        if not (isinstance(w, (list, tuple)) and len(w) == 2):
            raise ConfigError("method.window: expected null or [lo, hi]")
    if kind == "lifshitz" and not 0.0 < method["beta"] < 1.0:
        raise ConfigError("method.beta: must lie in (0, 1)")
    for key in ("distances", "L_list", "R_list", "eps_list"):
        if method.get(key) is not None and len(method[key]) == 0:
            raise ConfigError(f"method.{key}: must not be empty")
    return ExperimentConfig(kind=kind, model=model, method=method, run=run)


def parse_config(kind: str, path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config_data(kind, data)


def apply_override(data: dict, dotted: str, raw: str) -> None:
    """--set model.lambda=15 style override; value parsed as JSON with a
    plain-string fallback."""
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {dotted}: {k} is not an object")
    node[keys[-1]] = value


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _interval(spec) -> tuple[float, float]:
    if spec in (None, "all"):
        return (-np.inf, np.inf)
    if isinstance(spec, (list, tuple)) and len(spec) == 2:
        try:
            return (float(spec[0]), float(spec[1]))
        except (TypeError, ValueError):
            pass
    raise ConfigError(f"interval must be 'all' or [lo, hi], got {spec!r}")


def _origin(d: int):
    return (0,) * d


def _fit_summary(fit) -> dict:
    return {
        "rate": fit.rate,
        "log_prefactor": fit.log_prefactor,
        "r_squared": fit.r_squared,
        "slope_stderr": fit.slope_stderr,
        "significance": fit.significance,
        "n_points": fit.n_points,
    }


# --------------------------------------------------------------------------
# experiment runners: cfg -> (summary dict, [(csv name, header, rows)...],
#                             [failed audit names])


def _run_spectrum_scan(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    L_list = meth["L_list"] or [m["L"]]
    scan = spectral.spectrum_support_scan(
        m["d"], dist, m["lambda"], L_list, run["n"], run["master_seed"],
        workers=run["workers"],
    )
    rows = [(r.L, r.realization, r.min_eig, r.max_eig) for r in scan.rows]
    per_L = {
        str(L): {"min": scan.extremes(L)[0], "max": scan.extremes(L)[1]} for L in L_list
    }
    inside = scan.all_inside()
    summary = {
        "predicted_interval": list(scan.predicted),
        "extremes": per_L,
        "spectrum_inclusion": inside,
    }
    failed = [] if inside else ["spectrum_inclusion"]
    return summary, [("extremes.csv", ["L", "realization", "min_eig", "max_eig"], rows)], failed


def _run_fmm_decay(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    distances = meth["distances"] or list(range(1, max(2, m["L"] - 1)))
    prof = fmm.decay_profile(
        box, dist, m["lambda"], meth["s"], ComplexEnergy(meth["E"], meth["eps"]),
        _origin(m["d"]), distances, run["n"], run["master_seed"],
        workers=run["workers"],
    )
    rows = [
        (r, e.mean, e.stderr, e.n) for r, e in zip(prof.distances, prof.estimates)
    ]
    summary = {"fit": _fit_summary(prof.fit), "retries": prof.estimates[0].retries}
    return summary, [("decay.csv", ["distance", "mean", "stderr", "n"], rows)], []


def _run_decoupling_scan(cfg: ExperimentConfig):
    m, meth, _ = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    grid = fmm.default_decoupling_grid(meth["grid_radius"], meth["grid_points_per_axis"])
    scan = fmm.decoupling_scan(dist, meth["s"], grid)
    rows = [
        (e.real, e.imag, b.real, b.imag, r) for (e, b), r in zip(scan.grid, scan.ratios)
    ]
    summary = {
        "max_ratio": scan.max_ratio,
        "ratio_at_origin": fmm.decoupling_ratio(dist, meth["s"], 0.0, 0.0),
        "grid_points": len(scan.grid),
        # orientation values implied by the measured bound; never asserted
        "implied_lambda0": float((2.0 * m["d"] * scan.max_ratio) ** (1.0 / meth["s"])),
    }
    header = ["eta_re", "eta_im", "beta_re", "beta_im", "ratio"]
    return summary, [("ratios.csv", header, rows)], []


def _run_second_moment(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    z_list = [ComplexEnergy(meth["E"], float(e)) for e in meth["eps_list"]]
    pts = fmm.second_moment_audit(
        box, dist, m["lambda"], meth["s"], z_list, _origin(m["d"]), _origin(m["d"]),
        run["n"], run["master_seed"], workers=run["workers"],
    )
    rows = [
        (p.z.real, p.z.imag, p.ratio, p.ratio_stderr, p.mean_square, p.mean_fractional)
        for p in pts
    ]
    ratios = [p.ratio for p in pts]
    summary = {
        "ratios": ratios,
        "max_over_min": max(ratios) / min(ratios),
    }
    header = ["E", "eps", "ratio", "ratio_stderr", "mean_square", "mean_fractional"]
    return summary, [("second_moment.csv", header, rows)], []


def _run_dynloc(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    distances = meth["distances"] or list(range(2, m["L"] // 2, 2))
    grid = default_time_grid(meth["t_min"], meth["t_max"], meth["n_times"])
    prof = dynloc_profile(
        box, dist, m["lambda"], _interval(meth["interval"]), _origin(m["d"]),
        distances, grid, run["n"], run["master_seed"], workers=run["workers"],
    )
    rows = list(zip(prof.distances, prof.means, prof.stderrs))
    summary = {
        "fit": _fit_summary(prof.fit),
        "grid_refinement_growth": prof.grid_refinement_growth,
    }
    return summary, [("dynloc.csv", ["distance", "mean_sup", "stderr"], rows)], []


def _time_grid_from(meth) -> np.ndarray:
    if meth.get("time_spacing", "log") == "linear":
        return np.linspace(0.0, meth["t_max"], meth["n_times"])
    return default_time_grid(0.1, meth["t_max"], meth["n_times"])


def _run_position_moment(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    grid = _time_grid_from(meth)
    interval = _interval(meth["interval"])
    psi0 = np.zeros(box.n_sites)
    psi0[box.index_of(_origin(m["d"]))] = 1.0
    acc = np.zeros(grid.size)
    for i in range(run["n"]):
        H = assemble(box, sample_field(box, dist, SeedSpec(run["master_seed"], i)), m["lambda"])
        acc += position_moment(H, interval, psi0, meth["p"], grid).values
    acc /= run["n"]
    half = grid <= grid[-1] / 2.0
    summary = {
        "p": meth["p"],
        "max_first_half": float(acc[half].max()),
        "max_second_half": float(acc[~half].max()) if np.any(~half) else None,
    }
    rows = list(zip(grid, acc))
    return summary, [("moment.csv", ["t", "value"], rows)], []


def _run_rage(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    R_list = meth["R_list"] or [box.L // 4, box.L // 2]
    interval = _interval(meth["interval"])
    psi0 = np.zeros(box.n_sites)
    psi0[box.index_of(_origin(m["d"]))] = 1.0
    acc = {int(R): 0.0 for R in R_list}
    for i in range(run["n"]):
        H = assemble(box, sample_field(box, dist, SeedSpec(run["master_seed"], i)), m["lambda"])
        masses = rage_average(H, interval, psi0, R_list, meth["T"], meth["n_times"])
        for R, v in masses.items():
            acc[R] += v
    rows = [(R, acc[R] / run["n"]) for R in sorted(acc)]
    summary = {"escape_mass": {str(R): v for R, v in rows}}
    return summary, [("rage.csv", ["R", "escape_mass"], rows)], []


def _run_lifshitz(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    probes = spectral.lifshitz_tail(
        m["d"], dist, m["lambda"], meth["beta"], meth["L_list"], run["n"],
        run["master_seed"], workers=run["workers"],
    )
    rows = [
        (p.L, p.probability, p.stderr, p.successes, p.n, p.threshold) for p in probes
    ]
    summary = {
        "probabilities": [p.probability for p in probes],
        "strictly_decreasing": all(
            a.probability > b.probability for a, b in zip(probes, probes[1:])
        ),
    }
    try:
        slope, r2 = spectral.lifshitz_fit(probes)
        summary["fit"] = {"slope": slope, "r_squared": r2}
    except ValueError as exc:
        summary["fit"] = {"error": str(exc)}
    header = ["L", "tail_probability", "stderr", "successes", "n", "threshold"]
    return summary, [("tail.csv", header, rows)], []


def _run_ids(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    grid = np.linspace(meth["E_min"], meth["E_max"], meth["points"])
    curve = spectral.ids_estimate(
        m["d"], dist, m["lambda"], m["L"], run["n"], grid, run["master_seed"],
        workers=run["workers"],
    )
    rows = list(zip(curve.energies, curve.values))
    summary = {"monotone": bool(np.all(np.diff(curve.values) >= 0))}
    if m["lambda"] == 0 and m["d"] == 1:
        inside = np.abs(curve.energies) <= 1.9
        dev = np.abs(
            curve.values[inside] - spectral.free_ids_1d(curve.energies[inside])
        )
        summary["max_dev_from_free_curve"] = float(dev.max())
    return summary, [("ids.csv", ["E", "N"], rows)], []


def _run_level_stats(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    window = meth["window"]
    if window is not None:
        window = (float(window[0]), float(window[1]))
    stats = spectral.level_statistics(
        m["d"], dist, m["lambda"], m["L"], run["n"], run["master_seed"],
        window=window, central_fraction=meth["central_fraction"],
        significance=meth["significance"], workers=run["workers"],
    )
    rows = [(s,) for s in stats.spacings]
    summary = {
        "ks_distance": stats.ks_distance,
        "p_value": stats.p_value,
        "reject_exponential": stats.reject,
        "significance": stats.significance,
        "window": list(stats.window),
        "n_levels": stats.n_levels,
    }
    return summary, [("spacings.csv", ["spacing"], rows)], []


def _random_rankone(rng, dim):
    h0 = rng.standard_normal((dim, dim))
    h0 = 0.5 * (h0 + h0.T)
    phi = rng.standard_normal(dim)
    chi = rng.standard_normal(dim)
    return rankone.make_instance(h0, phi, chi)


def _run_rankone_verify(cfg: ExperimentConfig):
    meth, run = cfg.method, cfg.run
    rng = np.random.default_rng(run["master_seed"])
    worst_slack, intertwine_ok = np.inf, True
    worst_deriv = 0.0
    for _ in range(meth["n_instances"]):
        inst = _random_rankone(rng, meth["dim"])
        for v in meth["v_values"]:
            rep = rankone.intertwine_check(inst, float(v))
            intertwine_ok &= rep.passed
            worst_slack = min(worst_slack, rep.slack)
            k = int(rng.integers(0, meth["dim"]))
            deriv, overlap = rankone.derivative_check(inst, float(v), k)
            worst_deriv = max(worst_deriv, abs(deriv - overlap))
    worst_gap = 0.0
    for _ in range(meth["identity_instances"]):
        inst = _random_rankone(rng, meth["identity_dim"])
        w0 = np.sort(np.linalg.eigvalsh(inst.h0))
        mid = np.argmax(np.diff(w0))
        pad = 0.15 * (w0[mid + 1] - w0[mid])
        interval = (float(w0[mid] + pad), float(w0[mid + 1] - pad))
        rep = rankone.correlator_identity_check(inst, interval, meth["s"])
        worst_gap = max(worst_gap, rep.relative_gap)
    inst = _random_rankone(np.random.default_rng(run["master_seed"] + 1), meth["dim"])
    v_grid = np.linspace(-6, 6, 121)
    flow = rankone.eigenflow(inst, v_grid)
    rows = [(v, *flow.curves[i, :]) for i, v in enumerate(flow.v_grid)]
    header = ["v"] + [f"E_{k + 1}" for k in range(meth["dim"])]
    summary = {
        "intertwine_passed": bool(intertwine_ok),
        "min_interlacing_slack": float(worst_slack),
        "max_derivative_gap": float(worst_deriv),
        "max_identity_relative_gap": float(worst_gap),
        "checks": {
            "intertwine": bool(intertwine_ok),
            "derivative": bool(worst_deriv <= 1e-6),
            "identity": bool(worst_gap <= 1e-6),
        },
    }
    failed = [k for k, ok in summary["checks"].items() if not ok]
    return summary, [("eigenflow.csv", header, rows)], failed


def _run_krein_verify(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    rng = np.random.default_rng(run["master_seed"])
    rows, worst = [], 0.0
    z = ComplexEnergy(meth["E"], meth["eps"])
    for i in range(meth["n_instances"]):
        H = assemble(box, sample_field(box, dist, SeedSpec(run["master_seed"], i)), m["lambda"])
        sites = box.sites()
        ix, iy = rng.choice(box.n_sites, size=2, replace=False)
        blk = greens.krein_block(H, tuple(sites[ix]), tuple(sites[iy]), z)
        rows.append((i, blk.max_difference))
        worst = max(worst, blk.max_difference)
    summary = {"max_residual": worst, "passed": bool(worst <= 1e-9)}
    failed = [] if summary["passed"] else ["krein_identity"]
    return summary, [("krein.csv", ["instance", "residual"], rows)], failed


def _run_geometric_identity(cfg: ExperimentConfig):
    m, meth, run = cfg.model, cfg.method, cfg.run
    dist = build_distribution(m["distribution"])
    box = Box(m["d"], m["L"])
    if meth["inner_L"] + 1 >= box.L:
        raise ConfigError("method.inner_L: need inner_L + 1 < model.L")
    rows, worst = [], 0.0
    z = ComplexEnergy(meth["E"], meth["eps"])
    for i in range(meth["n_instances"]):
        H = assemble(box, sample_field(box, dist, SeedSpec(run["master_seed"], i)), m["lambda"])
        res = greens.geometric_identity_residual(H, meth["inner_L"], z)
        rows.append((i, res))
        worst = max(worst, res)
    summary = {"max_residual": worst, "passed": bool(worst <= 1e-9)}
    failed = [] if summary["passed"] else ["geometric_identity"]
    return summary, [("geometric.csv", ["instance", "residual"], rows)], failed


_RUNNERS = {
    "spectrum-scan": _run_spectrum_scan,
    "fmm-decay": _run_fmm_decay,
    "decoupling-scan": _run_decoupling_scan,
    "second-moment": _run_second_moment,
    "dynloc": _run_dynloc,
    "position-moment": _run_position_moment,
    "rage": _run_rage,
    "lifshitz": _run_lifshitz,
    "ids": _run_ids,
    "level-stats": _run_level_stats,
    "rankone-verify": _run_rankone_verify,
    "krein-verify": _run_krein_verify,
    "geometric-identity": _run_geometric_identity,
}


def config_hash(resolved: dict) -> str:
    """Content hash of the resolved config, git blob style."""
    payload = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    blob = b"blob %d\0" % len(payload) + payload
    return hashlib.sha1(blob).hexdigest()


def run_experiment(cfg: ExperimentConfig) -> ResultBundle:
    out = Path(cfg.run["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    resolved = cfg.resolved()
    (out / "resolved_config.json").write_text(
        json.dumps(resolved, sort_keys=True, indent=2) + "\n"
    )
    t0 = time.monotonic()
    summary, csvs, failed = _RUNNERS[cfg.kind](cfg)
    runtime = time.monotonic() - t0
    names = []
    for name, header, rows in csvs:
        _write_csv(out / name, header, rows)
        names.append(name)
    full_summary = {
        "kind": cfg.kind,
        "config_hash": config_hash(resolved),
        "results": summary,
        "failed_audits": failed,
        "csv_files": names,
        "runtime_seconds": runtime,
    }
    (out / "summary.json").write_text(
        json.dumps(full_summary, sort_keys=True, indent=2, default=float) + "\n"
    )
    return ResultBundle(out_dir=out, summary=full_summary, csv_files=tuple(names))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="alab",
        description="Anderson-model numerical laboratory",
    )
    parser.add_argument("kind", choices=EXPERIMENT_KINDS, metavar="experiment-kind",
                        help=f"one of: {', '.join(EXPERIMENT_KINDS)}")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (dotted path)")
    parser.add_argument("--seed", type=int, help="override run.master_seed")
    parser.add_argument("--workers", type=int, help="override run.workers")
    parser.add_argument("--out", help="override run.out_dir")
    args = parser.parse_args(argv)
    try:
        if args.config is not None:
            p = Path(args.config)
            if not p.exists():
                raise ConfigError(f"config file not found: {p}")
            data = json.loads(p.read_text())
        else:
            data = {}
        for ov in args.overrides:
            if "=" not in ov:
                raise ConfigError(f"--set expects KEY=VALUE, got {ov!r}")
            key, _, val = ov.partition("=")
            apply_override(data, key, val)
        if args.seed is not None:
            data.setdefault("run", {})["master_seed"] = args.seed
        if args.workers is not None:
            data.setdefault("run", {})["workers"] = args.workers
        if args.out is not None:
            data.setdefault("run", {})["out_dir"] = args.out
        cfg = parse_config_data(args.kind, data)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        bundle = run_experiment(cfg)
    except (AndersonLabError, ValueError) as exc:
        print(f"numeric failure in {args.kind}: {exc}", file=sys.stderr)
        return 3
    if bundle.summary["failed_audits"]:
        print(
            "numeric failure: audit(s) failed: "
            + ", ".join(bundle.summary["failed_audits"]),
            file=sys.stderr,
        )
        return 3
    print(json.dumps(bundle.summary, sort_keys=True, indent=2, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
