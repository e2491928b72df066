"""Experiment configuration files (TOML).

Every sweepable key accepts a scalar or a list; the resolved configuration
always stores lists, so ``dump(parse(text))`` parses back to the same object.
"""

from __future__ import annotations

import re
import sys
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path
from typing import Any

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib as tomli
else:
    import tomli

KINDS = ("ensemble", "analytic", "phase")
MODEL_PARAM = {"bernoulli": "p", "cutoff": "p", "homogeneous": "ell_phi", "power_law": "gamma"}
ANALYTIC_OBSERVABLES = ("rho_random", "rho_hom", "rho_finite")
FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    """Invalid configuration, with an optional source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


def _list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class LatticeBlock:
    N: list[int] = field(default_factory=lambda: [100])
    M: list[int] = field(default_factory=lambda: [1])


@dataclass
class DisorderBlock:
    sigma: list[float] = field(default_factory=lambda: [1.0])
    shape: str = "gaussian"


@dataclass
class DecoherenceBlock:
    model: str = "bernoulli"
    values: list[float] = field(default_factory=lambda: [0.5])
    j_max: int = 10
    placement: list[str] = field(default_factory=lambda: ["bond_replacing"])
    probe_gamma: str = "-1j"

    @property
    def param_name(self) -> str:
        return MODEL_PARAM[self.model]


@dataclass
class EngineBlock:
    samples: int = 1000
    seed: int = 0
    averaging: list[str] = field(default_factory=lambda: ["resistance_avg"])
    disorder_path: str = "auto"
    energy: float = 0.0
    contact_gamma: str = "-1j"
    localized_ok: bool = False


@dataclass
class AnalyticBlock:
    observables: list[str] = field(default_factory=lambda: ["rho_random", "rho_hom"])


@dataclass
class OutputBlock:
    directory: str = "results"
    formats: list[str] = field(default_factory=lambda: ["csv", "json", "svg"])
    x_axis: str = "N"
    log_y: bool = True
    overlay: list[str] = field(default_factory=list)


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    kind: str = "ensemble"
    lattice: LatticeBlock = field(default_factory=LatticeBlock)
    disorder: DisorderBlock = field(default_factory=DisorderBlock)
    decoherence: DecoherenceBlock = field(default_factory=DecoherenceBlock)
    engine: EngineBlock = field(default_factory=EngineBlock)
    analytic: AnalyticBlock = field(default_factory=AnalyticBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    # -- sweep layout ---------------------------------------------------------

    def sweep_axes(self) -> list[tuple[str, list]]:
        """Ordered ``(column, values)`` pairs spanning the sweep."""
        if self.kind == "phase":
            return [("sigma", self.disorder.sigma)]
        if self.kind == "analytic":
            return [
                ("N", self.lattice.N),
                ("sigma", self.disorder.sigma),
                (self.decoherence.param_name, self.decoherence.values),
                ("observable", self.analytic.observables),
            ]
        return [
            ("N", self.lattice.N),
            ("M", self.lattice.M),
            ("sigma", self.disorder.sigma),
            ("placement", self.decoherence.placement),
            (self.decoherence.param_name, self.decoherence.values),
            ("averaging", self.engine.averaging),
        ]

    def points(self) -> list[dict[str, Any]]:
        axes = self.sweep_axes()
        names = [a for a, _ in axes]
        return [dict(zip(names, combo)) for combo in product(*(v for _, v in axes))]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        dec = d["decoherence"]
        dec[self.decoherence.param_name] = dec.pop("values")
        return d


_BLOCKS = {
    "lattice": LatticeBlock,
    "disorder": DisorderBlock,
    "decoherence": DecoherenceBlock,
    "engine": EngineBlock,
    "analytic": AnalyticBlock,
    "output": OutputBlock,
}
_LIST_KEYS = {
    ("lattice", "N"),
    ("lattice", "M"),
    ("disorder", "sigma"),
    ("decoherence", "values"),
    ("decoherence", "placement"),
    ("engine", "averaging"),
    ("analytic", "observables"),
    ("output", "formats"),
    ("output", "overlay"),
}


def _locate(text: str, section: str | None, key: str) -> tuple[int | None, int | None]:
    """Best-effort source position of ``key`` inside ``[section]``."""
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        head = re.match(r"\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
            if section is None and current == key:
                return lineno, line.index("[") + 1
            continue
        m = re.match(r"(\s*)([A-Za-z0-9_]+)\s*=", line)
        if m and m.group(2) == key and current == section:
            return lineno, len(m.group(1)) + 1
    return None, None


def _fail(text: str, section: str | None, key: str, message: str):
    line, col = _locate(text, section, key)
    raise ConfigError(message, line, col)


def _coerce(text, section, key, value, kind):
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        _fail(text, section, key, f"{section}.{key}: expected {kind.__name__}, got {value!r}")
    raise AssertionError(kind)


_ELEM_TYPES = {
    ("lattice", "N"): int,
    ("lattice", "M"): int,
    ("disorder", "sigma"): float,
    ("decoherence", "values"): float,
    ("decoherence", "placement"): str,
    ("engine", "averaging"): str,
    ("analytic", "observables"): str,
    ("output", "formats"): str,
    ("output", "overlay"): str,
}


def _build_block(text: str, section: str, raw: dict) -> Any:
    cls = _BLOCKS[section]
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if section == "decoherence" and key in ("p", "ell_phi", "gamma"):
            key_name = "values"
        else:
            key_name = key
        if key_name not in known:
            _fail(text, section, key, f"unknown key {section}.{key}")
        if (section, key_name) in _LIST_KEYS:
            elems = _list(value)
            if not elems and (section, key_name) != ("output", "overlay"):
                _fail(text, section, key, f"{section}.{key} must not be empty")
            kwargs[key_name] = [_coerce(text, section, key, v, _ELEM_TYPES[(section, key_name)]) for v in elems]
        else:
            default = getattr(cls(), key_name)
            kwargs[key_name] = _coerce(text, section, key, value, type(default))
    block = cls(**kwargs)
    if section == "decoherence" and raw:
        given = [k for k in raw if k in ("p", "ell_phi", "gamma", "values")]
        model = kwargs.get("model", block.model)
        if model not in MODEL_PARAM:
            _fail(text, section, "model", f"unknown decoherence model {model!r}")
        want = MODEL_PARAM[model]
        for k in given:
            if k not in ("values", want):
                _fail(text, section, k, f"model {model!r} takes '{want}', not '{k}'")
    return block


def _validate(cfg: ExperimentConfig, text: str) -> None:
    def bad(section, key, msg):
        _fail(text, section, key, msg)

    if cfg.kind not in KINDS:
        bad(None, "kind", f"kind must be one of {KINDS}")
    if any(n < 1 for n in cfg.lattice.N):
        bad("lattice", "N", "lattice.N must be >= 1")
    if any(m < 1 for m in cfg.lattice.M):
        bad("lattice", "M", "lattice.M must be >= 1")
    if any(s < 0 for s in cfg.disorder.sigma):
        bad("disorder", "sigma", "disorder.sigma must be >= 0")
    if cfg.disorder.shape not in ("gaussian", "uniform"):
        bad("disorder", "shape", "disorder.shape must be 'gaussian' or 'uniform'")
    d = cfg.decoherence
    if d.model not in MODEL_PARAM:
        bad("decoherence", "model", f"unknown decoherence model {d.model!r}")
    name = d.param_name
    for v in d.values:
        ok = {"p": 0 <= v <= 1, "ell_phi": v >= 1, "gamma": v > 0}[name]
        if not ok:
            bad("decoherence", name, f"decoherence.{name} value {v!r} out of range")
    if d.j_max < 1:
        bad("decoherence", "j_max", "decoherence.j_max must be >= 1")
    for pl in d.placement:
        if pl not in ("bond_replacing", "site_attached"):
            bad("decoherence", "placement", f"unknown placement {pl!r}")
    for key in ("probe_gamma",):
        try:
            complex(getattr(d, key))
        except ValueError:
            bad("decoherence", key, f"decoherence.{key} is not a complex number")
    e = cfg.engine
    try:
        complex(e.contact_gamma)
    except ValueError:
        bad("engine", "contact_gamma", "engine.contact_gamma is not a complex number")
    if e.samples < 1:
        bad("engine", "samples", "engine.samples must be >= 1")
    for a in e.averaging:
        if a not in ("resistance_avg", "conductance_avg"):
            bad("engine", "averaging", f"unknown averaging {a!r}")
    if e.disorder_path not in ("auto", "analytic", "sampled"):
        bad("engine", "disorder_path", "engine.disorder_path must be auto, analytic or sampled")
    for o in cfg.analytic.observables:
        if o not in ANALYTIC_OBSERVABLES:
            bad("analytic", "observables", f"unknown analytic observable {o!r}")
    if cfg.kind == "analytic" and d.model != "bernoulli":
        bad("decoherence", "model", "analytic curves are parametrised by the bernoulli p")
    for f in cfg.output.formats:
        if f not in FORMATS:
            bad("output", "formats", f"unknown output format {f!r}")
    for o in cfg.output.overlay:
        if o not in ANALYTIC_OBSERVABLES:
            bad("output", "overlay", f"unknown overlay {o!r}")
    if cfg.output.x_axis not in ("N", "p", "sigma"):
        bad("output", "x_axis", "output.x_axis must be N, p or sigma")


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        raise ConfigError(f"TOML syntax error: {msg}", *(map(int, m.groups()) if m else (None, None))) from exc
    top = {}
    for key, value in raw.items():
        if key in _BLOCKS:
            if not isinstance(value, dict):
                _fail(text, None, key, f"{key} must be a table")
            continue
        if key not in ("name", "kind"):
            _fail(text, None, key, f"unknown top-level key {key!r}")
        if not isinstance(value, str):
            _fail(text, None, key, f"{key} must be a string")
        top[key] = value
    blocks = {sec: _build_block(text, sec, raw.get(sec, {})) for sec in _BLOCKS}
    cfg = ExperimentConfig(**top, **blocks)
    _validate(cfg, text)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
