"""Executes experiment configurations and writes CSV, JSON and SVG artifacts."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analytic import (
    critical_decoherence,
    log_resistivity_random_finite,
    resistivity_homogeneous,
    resistivity_random,
    xi_inverse,
)
from .config import ExperimentConfig, dump_config
from .decoherence import DecoherenceModel
from .ensemble import EnsembleSpec, estimate_resistivity
from .lattice import DisorderSpec
from .svgplot import Plot, Series, render

LN10 = math.log(10.0)
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# -- phase diagram ----------------------------------------------------------------


def phase_diagram(sigmas: Sequence[float]) -> list[tuple[float, float, float]]:
    """``(sigma, xi^-1, p*)`` rows in input order."""
    return [(float(s), xi_inverse(s), critical_decoherence(s)) for s in sigmas]


def phase_csv(sigmas: Sequence[float]) -> str:
    return to_csv(("sigma", "xi_inv", "p_star"), phase_diagram(sigmas))


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = [float(v) for v in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ValueError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = parts
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(max(n, 0))]


# -- experiment execution -----------------------------------------------------------


@dataclass
class SweepResult:
    name: str
    header: list[str]
    rows: list[list[Any]]

    def csv(self) -> str:
        return to_csv(self.header, self.rows)


@dataclass
class RunResult:
    exit_code: int
    sweeps: list[SweepResult] = field(default_factory=list)
    files: list[str] = field(default_factory=list)
    divergences: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _model(cfg: ExperimentConfig, placement: str, value: float) -> DecoherenceModel:
    d = cfg.decoherence
    kw = {MODEL_KW[d.model]: value}
    if d.model == "cutoff":
        kw["j_max"] = d.j_max
    return DecoherenceModel(d.model, placement=placement, **kw)


MODEL_KW = {"bernoulli": "p", "cutoff": "p", "homogeneous": "ell_phi", "power_law": "gamma"}


def _disorder_path(cfg: ExperimentConfig, M: int, placement: str) -> str:
    e = cfg.engine
    if e.disorder_path != "auto":
        return e.disorder_path
    analytic_ok = (
        M == 1
        and placement == "bond_replacing"
        and e.energy == 0
        and complex(e.contact_gamma) == -1j
        and complex(cfg.decoherence.probe_gamma) == -1j
    )
    return "analytic" if analytic_ok else "sampled"


def ensemble_spec(cfg: ExperimentConfig, point: dict[str, Any], seed: int) -> EnsembleSpec:
    pname = cfg.decoherence.param_name
    return EnsembleSpec(
        length=int(point["N"]),
        width=int(point["M"]),
        disorder=DisorderSpec(float(point["sigma"]), cfg.disorder.shape),
        model=_model(cfg, point["placement"], float(point[pname])),
        samples=cfg.engine.samples,
        seed=seed,
        averaging=point["averaging"],
        disorder_path=_disorder_path(cfg, int(point["M"]), point["placement"]),
        energy=cfg.engine.energy,
        contact_gamma=complex(cfg.engine.contact_gamma),
        probe_gamma=complex(cfg.decoherence.probe_gamma),
    )


def _log10(x: float) -> float:
    return x / LN10


def run_ensemble(cfg: ExperimentConfig, threads: int, result: RunResult, progress=None) -> SweepResult:
    axes = [a for a, _ in cfg.sweep_axes()]
    header = axes + ["observable", "mean_log10", "stderr_log10", "samples"]
    rows = []
    points = cfg.points()
    # averaging modes at one point share their configurations
    streams: dict[tuple, int] = {}
    for k, point in enumerate(points):
        key = tuple((a, point[a]) for a in axes if a != "averaging")
        stream = streams.setdefault(key, len(streams))
        spec = ensemble_spec(cfg, point, cfg.engine.seed)
        est = estimate_resistivity(spec, stream=stream, threads=threads)
        if progress:
            progress(f"[{k + 1}/{len(points)}] " + " ".join(f"{a}={point[a]}" for a in axes))
        if est.note and est.note not in result.notes:
            result.notes.append(est.note)
        if est.diverged:
            result.divergences.append({"point": point, "reason": "conductance mean is zero"})
        rows.append([point[a] for a in axes] + [est.observable, _log10(est.log_mean), _log10(est.log_stderr), est.samples_used])
    return SweepResult(cfg.name, header, rows)


def _analytic_value(obs: str, N: int, sigma: float, p: float, result: RunResult, point) -> float:
    """Natural log of the requested closed-form resistivity."""
    if obs == "rho_random":
        res = resistivity_random(p, sigma)
        if not res.ohmic:
            result.divergences.append({"point": point, "reason": "localized", "growth_rate": res.growth_rate})
            return math.inf
        return math.log(res.value)
    if obs == "rho_hom":
        if p == 0:
            result.divergences.append({"point": point, "reason": "no decoherence: ell_phi is infinite"})
            return math.inf
        return math.log(resistivity_homogeneous(1.0 / p, sigma))
    return log_resistivity_random_finite(N, p, sigma)


def run_analytic(cfg: ExperimentConfig, result: RunResult, observables: Sequence[str] | None = None) -> SweepResult:
    """Closed-form curves; with ``observables`` given, an overlay for an ensemble sweep."""
    if observables is None:
        axes_def = cfg.sweep_axes()
        name = cfg.name
    else:
        axes_def = [
            ("N", cfg.lattice.N),
            ("sigma", cfg.disorder.sigma),
            ("p", cfg.decoherence.values),
            ("observable", list(observables)),
        ]
        name = cfg.name + "_analytic"
    axes = [a for a, _ in axes_def]
    header = axes[:-1] + ["observable", "mean_log10", "stderr_log10", "samples"]
    rows = []
    for combo in product(*(v for _, v in axes_def)):
        point = dict(zip(axes, combo))
        lv = _analytic_value(point["observable"], int(point["N"]), float(point["sigma"]), float(point["p"]), result, point)
        rows.append(list(combo[:-1]) + [point["observable"], _log10(lv), -math.inf, 0])
    return SweepResult(name, header, rows)


def _plot(cfg: ExperimentConfig, sweeps: list[SweepResult]) -> str:
    x_axis = cfg.output.x_axis
    plot = Plot(title=cfg.name, xlabel=x_axis, ylabel="resistivity (h/e^2 per site)", log_y=cfg.output.log_y)
    for sw_i, sw in enumerate(sweeps):
        idx = {h: i for i, h in enumerate(sw.header)}
        if x_axis not in idx:
            continue
        group_cols = [h for h in sw.header[: idx["mean_log10"]] if h != x_axis]
        groups: dict[tuple, list[tuple[float, float]]] = {}
        for row in sw.rows:
            key = tuple(row[idx[g]] for g in group_cols)
            y = row[idx["mean_log10"]]
            groups.setdefault(key, []).append((float(row[idx[x_axis]]), 10.0**y if y < 308 else math.inf))
        varying = [g for g in group_cols if len({row[idx[g]] for row in sw.rows}) > 1]
        for key, pts in groups.items():
            pts.sort()
            label = ", ".join(f"{g}={fmt(v)}" for g, v in zip(group_cols, key) if g in varying) or sw.name
            obs = dict(zip(group_cols, key)).get("observable", "")
            analytic = sw_i > 0 or cfg.kind == "analytic"
            style = "dashed" if obs == "rho_hom" else "solid"
            plot.series.append(Series(label, [p[0] for p in pts], [p[1] for p in pts], style, markers=not analytic))
    if cfg.kind == "analytic" and x_axis == "p" and "rho_random" in cfg.analytic.observables:
        for s in cfg.disorder.sigma:
            plot.vlines.append((critical_decoherence(s), f"p*({fmt(s)})"))
    return render(plot)


def plan(cfg: ExperimentConfig) -> str:
    lines = [dump_config(cfg).rstrip(), ""]
    n = len(cfg.points())
    lines.append(f"# {n} sweep point(s), kind={cfg.kind}")
    for f in cfg.output.formats:
        lines.append(f"# would write {Path(cfg.output.directory) / (cfg.name + '.' + f)}")
    return "\n".join(lines) + "\n"


def run_experiment(
    cfg: ExperimentConfig,
    threads: int = 1,
    dry_run: bool = False,
    progress=None,
    stdout=None,
) -> RunResult:
    stdout = stdout or sys.stdout
    if dry_run:
        stdout.write(plan(cfg))
        return RunResult(EXIT_OK)
    t0 = time.perf_counter()
    result = RunResult(EXIT_OK)
    if cfg.kind == "phase":
        rows = [list(r) for r in phase_diagram(cfg.disorder.sigma)]
        result.sweeps.append(SweepResult(cfg.name, ["sigma", "xi_inv", "p_star"], rows))
    elif cfg.kind == "analytic":
        result.sweeps.append(run_analytic(cfg, result))
    else:
        result.sweeps.append(run_ensemble(cfg, threads, result, progress))
        if cfg.output.overlay:
            if cfg.decoherence.model != "bernoulli":
                result.notes.append("analytic overlays need the bernoulli model; skipped")
            else:
                result.sweeps.append(run_analytic(cfg, result, cfg.output.overlay))
    wall = time.perf_counter() - t0

    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.output.formats:
        for sw in result.sweeps:
            path = out / f"{sw.name}.csv"
            path.write_text(sw.csv(), encoding="utf-8")
            result.files.append(str(path))
    if "svg" in cfg.output.formats and cfg.kind != "phase":
        path = out / f"{cfg.name}.svg"
        path.write_text(_plot(cfg, result.sweeps), encoding="utf-8")
        result.files.append(str(path))
    if result.divergences and not cfg.engine.localized_ok:
        result.exit_code = EXIT_DIVERGED
    if "json" in cfg.output.formats:
        path = out / f"{cfg.name}.json"
        result.files.append(str(path))
        meta = {
            "name": cfg.name,
            "config": cfg.to_dict(),
            "config_toml": dump_config(cfg),
            "seed": cfg.engine.seed,
            "threads": threads,
            "tool": "decotrans",
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "wall_time_s": wall,
            "files": result.files,
            "divergences": result.divergences,
            "notes": result.notes,
            "exit_code": result.exit_code,
        }
        path.write_text(json.dumps(meta, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return result


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    return str(o)
