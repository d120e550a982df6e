"""Deterministic parameter-sweep engine and run-config / CSV file I/O.

Run configs are JSON (nested objects or flat dotted keys); CSVs carry a
'#'-prefixed provenance header, a column header row, then data rows with
17-significant-digit numbers (round-trip exact for doubles). Failed grid
points keep their row with empty value cells and a flag token; identical
configs produce bitwise-identical files regardless of thread count.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import (
    STATUS_NEGATIVE,
    STATUS_SINGULAR,
    STATUS_UNSTABLE,
    backend_name,
)
from ._version import __version__
from .eigensystem import secular_report
from .errors import (
    BothCurrentsZero,
    ConfigParseError,
    DegenerateDenominator,
    InvalidSpec,
    PointFailure,
    Q3HeatError,
)
from .functions import amplification, rectification
from .model import BATH_LABELS, BathSpec, Config, DeviceParams, Spectrum, validate_params
from .steady import BatchEvaluator

OUTPUT_TOKENS = ("Q_L", "Q_M", "Q_R", "alpha_L", "alpha_R", "R", "populations", "secular_ratio")
SWEEPABLE = (
    "device.omega_L", "device.omega_M", "device.omega_R", "device.g",
    "bath.L.temperature", "bath.M.temperature", "bath.R.temperature",
    "bath.L.gamma", "bath.M.gamma", "bath.R.gamma",
    "delta_T",
)
#: Default base damping rate, in units of omega_R.
DEFAULT_GAMMA = 1e-4
#: A sweep aborts when more than this fraction of its points fail hard.
FAILURE_FRACTION = 0.5


@dataclass(frozen=True)
class SweepAxis:
    """One scanned parameter: an inclusive [start, stop] grid of count points."""

    param: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise InvalidSpec(f"unknown sweep parameter {self.param!r}; know {SWEEPABLE}")
        if self.count < 2:
            raise InvalidSpec(f"sweep axis {self.param}: count must be >= 2, got {self.count}")
        if not self.start < self.stop:
            raise InvalidSpec(f"sweep axis {self.param}: need start < stop, got {self.start} >= {self.stop}")
        if self.spacing not in ("linear", "log"):
            raise InvalidSpec(f"sweep axis {self.param}: spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and self.start <= 0.0:
            raise InvalidSpec(f"sweep axis {self.param}: log spacing requires start > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RectifySettings:
    T_A: float
    mode: str = "two-terminal"


@dataclass(frozen=True)
class RunConfig:
    """A validated device + baths plus the optional sweep/output request."""

    config: Config
    axes: tuple[SweepAxis, ...]
    outputs: tuple[str, ...]
    rectify: RectifySettings | None
    echo: str


@dataclass(frozen=True)
class SweepResult:
    axis_names: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray          # (N, len(axis_names) + len(columns))
    flags: tuple[str, ...]
    provenance: dict[str, str]


# -- run-config parsing ------------------------------------------------------

_REQUIRED = object()


def _normalize(raw: dict) -> dict:
    """Expand flat dotted keys into nested objects; nested input passes through."""
    out: dict = {}
    for key, value in raw.items():
        parts = key.split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigParseError(f"field {key}: path collides with a scalar")
        if isinstance(value, dict):
            sub = _normalize(value)
            existing = node.setdefault(parts[-1], {})
            if isinstance(existing, dict):
                existing.update(sub)
            else:
                raise ConfigParseError(f"field {key}: path collides with a scalar")
        else:
            node[parts[-1]] = value
    return out


def _walk(d: dict, dotted: str):
    node = d
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return _REQUIRED
        node = node[part]
    return node


def _num(d: dict, dotted: str, default=_REQUIRED) -> float:
    v = _walk(d, dotted)
    if v is _REQUIRED:
        if default is _REQUIRED:
            raise ConfigParseError(f"missing required field {dotted}")
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigParseError(f"field {dotted}: expected a number, got {v!r}")
    return float(v)


def _str(d: dict, dotted: str, default=_REQUIRED) -> str:
    v = _walk(d, dotted)
    if v is _REQUIRED:
        if default is _REQUIRED:
            raise ConfigParseError(f"missing required field {dotted}")
        return default
    if not isinstance(v, str):
        raise ConfigParseError(f"field {dotted}: expected a string, got {v!r}")
    return v


def _axis_from(d: dict, block: str) -> SweepAxis:
    return SweepAxis(
        param=_str(d, f"{block}.param"),
        start=_num(d, f"{block}.start"),
        stop=_num(d, f"{block}.stop"),
        count=int(_num(d, f"{block}.count")),
        spacing=_str(d, f"{block}.spacing", "linear"),
    )


def config_from_dict(raw: dict) -> RunConfig:
    """Build and validate a RunConfig from a parsed JSON object."""
    if not isinstance(raw, dict):
        raise ConfigParseError(f"run config must be a JSON object, got {type(raw).__name__}")
    d = _normalize(raw)
    omega_r = _num(d, "device.omega_R", 1.0)
    g = _num(d, "device.g")
    omega_l = _num(d, "device.omega_L")
    omega_m = _num(d, "device.omega_M", None)
    if omega_m is None:
        params = DeviceParams.resonant(omega_l, g, omega_r)
    else:
        params = DeviceParams(omega_l, omega_m, omega_r, g)
    baths = []
    for lab in BATH_LABELS:
        spectrum = _str(d, f"bath.{lab}.spectrum", "flat")
        try:
            spectrum = Spectrum(spectrum)
        except ValueError:
            raise ConfigParseError(
                f"field bath.{lab}.spectrum: expected flat or ohmic, got {spectrum!r}"
            ) from None
        baths.append(
            BathSpec(
                label=lab,
                temperature=_num(d, f"bath.{lab}.temperature"),
                gamma=_num(d, f"bath.{lab}.gamma", DEFAULT_GAMMA * omega_r),
                spectrum=spectrum,
            )
        )
    config = validate_params(params, baths)

    rectify = None
    if _walk(d, "rectify") is not _REQUIRED:
        mode = _str(d, "rectify.mode", "two-terminal")
        if mode not in ("two-terminal", "three-terminal"):
            raise ConfigParseError(f"field rectify.mode: expected two-terminal or three-terminal, got {mode!r}")
        rectify = RectifySettings(T_A=_num(d, "rectify.T_A"), mode=mode)
        if mode == "two-terminal":
            config = Config(
                config.params,
                tuple(
                    BathSpec(b.label, b.temperature, 0.0, b.spectrum) if b.label == "L" else b
                    for b in config.baths
                ),
            )

    axes: list[SweepAxis] = []
    if _walk(d, "sweep") is not _REQUIRED:
        axes.append(_axis_from(d, "sweep"))
    if _walk(d, "sweep2") is not _REQUIRED:
        if not axes:
            raise ConfigParseError("sweep2 given without sweep")
        axes.append(_axis_from(d, "sweep2"))

    outputs = _walk(d, "outputs")
    if outputs is _REQUIRED:
        outputs = ["Q_L", "Q_M", "Q_R"]
    if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
        raise ConfigParseError("field outputs: expected a list of output names")
    for o in outputs:
        if o not in OUTPUT_TOKENS:
            raise ConfigParseError(f"field outputs: unknown output {o!r}; know {OUTPUT_TOKENS}")
    needs_delta = "R" in outputs or any(ax.param == "delta_T" for ax in axes)
    if needs_delta and rectify is None:
        raise ConfigParseError("delta_T sweeps and R outputs require a rectify block with T_A")

    echo = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return RunConfig(config=config, axes=tuple(axes), outputs=tuple(outputs), rectify=rectify, echo=echo)


def read_config(path, overrides: list[str] | None = None) -> RunConfig:
    """Parse a JSON run config file, apply --set style overrides, validate."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON: {exc}") from None
    if overrides:
        raw = apply_overrides(raw, overrides)
    return config_from_dict(raw)


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply repeatable key=value overrides (dotted keys, JSON scalar values)."""
    d = _normalize(raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigParseError(f"override {item!r}: expected key=value")
        key, _, text = item.partition("=")
        key = key.strip()
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text.strip()
        node = d
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigParseError(f"override {key!r}: path collides with a scalar")
        node[parts[-1]] = value
    return d


# -- point evaluation --------------------------------------------------------

def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def _apply_param(config: Config, rectify: RectifySettings | None, name: str, value: float) -> Config:
    p = config.params
    if name == "device.g":
        return Config(DeviceParams.resonant(p.omega_L, value, p.omega_R), config.baths)
    if name == "device.omega_L":
        return Config(DeviceParams.resonant(value, p.g, p.omega_R), config.baths)
    if name == "device.omega_R":
        return Config(DeviceParams.resonant(p.omega_L, p.g, value), config.baths)
    if name == "device.omega_M":
        return Config(DeviceParams.resonant(p.omega_R - value, p.g, p.omega_R), config.baths)
    if name.startswith("bath."):
        _, lab, field = name.split(".")
        baths = []
        for b in config.baths:
            if b.label != lab:
                baths.append(b)
            elif field == "temperature":
                baths.append(BathSpec(lab, value, b.gamma, b.spectrum))
            else:
                baths.append(BathSpec(lab, b.temperature, value, b.spectrum))
        return Config(p, tuple(baths))
    if name == "delta_T":
        if rectify is None:
            raise InvalidSpec("delta_T sweep requires a rectify block with T_A")
        t_m = rectify.T_A - value / 2.0
        t_r = rectify.T_A + value / 2.0
        cfg = config.replace_temperature("M", t_m)
        return cfg.replace_temperature("R", t_r)
    raise InvalidSpec(f"unknown sweep parameter {name!r}")


def expand_columns(outputs) -> tuple[str, ...]:
    cols: list[str] = []
    for token in outputs:
        if token == "populations":
            cols.extend(f"p{k}" for k in range(1, 9))
        else:
            cols.append(token)
    return tuple(cols)


class _PointEvaluator:
    """Evaluates the requested outputs at one grid point; collects flags."""

    HARD_FLAGS = frozenset({
        "singular_steady_state", "negative_populations", "resonance_violation",
        "ordering_violation", "degenerate_qubits", "invalid_spec",
    })

    def __init__(self, run: RunConfig):
        self.run = run
        self.columns = expand_columns(run.outputs)
        self._cache: dict[tuple, BatchEvaluator] = {}

    def _evaluator(self, params: DeviceParams) -> BatchEvaluator:
        key = (params.omega_L, params.omega_M, params.omega_R, params.g)
        ev = self._cache.get(key)
        if ev is None:
            ev = BatchEvaluator(params)
            self._cache[key] = ev
        return ev

    def evaluate(self, assignments: dict[str, float]) -> tuple[np.ndarray, list[str], bool]:
        row = np.full(len(self.columns), np.nan)
        flags: list[str] = []
        cfg = self.run.config
        try:
            for name, value in assignments.items():
                cfg = _apply_param(cfg, self.run.rectify, name, float(value))
        except Q3HeatError as exc:
            return row, [_snake(type(exc).__name__)], True

        try:
            ev = self._evaluator(cfg.params)
        except Q3HeatError as exc:
            return row, [_snake(type(exc).__name__)], True

        col_of = {c: i for i, c in enumerate(self.columns)}
        hard = False

        solver_cols = [c for c in self.columns if c in ("Q_L", "Q_M", "Q_R") or c.startswith("p")]
        if solver_cols:
            temps = np.array([[b.temperature for b in cfg.baths]])
            pops, currents, status = ev.solve_temperatures(cfg, temps)
            st = int(status[0])
            if st == STATUS_SINGULAR:
                flags.append("singular_steady_state")
                hard = True
            elif st == STATUS_NEGATIVE:
                flags.append("negative_populations")
                hard = True
            else:
                if st == STATUS_UNSTABLE:
                    flags.append("ill_conditioned")
                for lab, qv in zip(BATH_LABELS, currents[0]):
                    if f"Q_{lab}" in col_of:
                        row[col_of[f"Q_{lab}"]] = qv
                for k in range(8):
                    if f"p{k + 1}" in col_of:
                        row[col_of[f"p{k + 1}"]] = pops[0, k]

        if "alpha_L" in col_of or "alpha_R" in col_of:
            try:
                amp = amplification(cfg, evaluator=ev)
                if amp.flagged:
                    flags.append("richardson_mismatch")
                if "alpha_L" in col_of:
                    row[col_of["alpha_L"]] = amp.alpha_L
                if "alpha_R" in col_of:
                    row[col_of["alpha_R"]] = amp.alpha_R
            except DegenerateDenominator:
                flags.append("degenerate_denominator")
            except Q3HeatError as exc:
                flags.append(_snake(type(exc).__name__))
                hard = True

        if "R" in col_of:
            delta = assignments.get("delta_T")
            try:
                if delta is None:
                    raise InvalidSpec("R output requires a delta_T sweep axis")
                rect = rectification(cfg, delta, self.run.rectify.T_A, self.run.rectify.mode, evaluator=ev)
                row[col_of["R"]] = rect.R
            except BothCurrentsZero:
                flags.append("both_currents_zero")
            except Q3HeatError as exc:
                flags.append(_snake(type(exc).__name__))
                hard = True

        if "secular_ratio" in col_of:
            report = secular_report(cfg, ev.channels)
            row[col_of["secular_ratio"]] = report.ratio
            if not report.valid:
                flags.append("secular_warning")

        return row, flags, hard


def _grid_hash(axes: tuple[SweepAxis, ...]) -> str:
    h = hashlib.sha256()
    for ax in axes:
        h.update(ax.param.encode())
        h.update(ax.values().tobytes())
    return h.hexdigest()[:16]


def run_sweep(run: RunConfig, threads: int = 1) -> SweepResult:
    """Evaluate every grid point (axis1 outer, axis2 inner), in grid order.

    Points may be evaluated concurrently; assembly is index-addressed so
    the result is identical for any thread count. Soft failures flag the
    row and leave empty cells; the sweep aborts only when more than half
    the points fail hard.
    """
    if not run.axes:
        raise InvalidSpec("run config has no sweep block")
    evaluator = _PointEvaluator(run)
    axis_names = tuple(ax.param for ax in run.axes)
    grids = [ax.values() for ax in run.axes]
    mesh = list(itertools.product(*grids))
    n = len(mesh)
    ncols = len(evaluator.columns)
    values = np.full((n, len(axis_names) + ncols), np.nan)
    flags: list[str] = [""] * n
    hard_count = 0

    def work(i: int) -> tuple[int, np.ndarray, list[str], bool]:
        assignments = dict(zip(axis_names, mesh[i]))
        row, fl, hard = evaluator.evaluate(assignments)
        return i, row, fl, hard

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as exe:
            results = list(exe.map(work, range(n)))
    else:
        results = [work(i) for i in range(n)]

    for i, row, fl, hard in results:
        values[i, : len(axis_names)] = mesh[i]
        values[i, len(axis_names):] = row
        flags[i] = ";".join(fl)
        if hard:
            hard_count += 1

    if n and hard_count > FAILURE_FRACTION * n:
        raise PointFailure(f"{hard_count} of {n} sweep points failed; aborting")

    provenance = {
        "config": run.echo,
        "version": __version__,
        "backend": backend_name(),
        "grid": _grid_hash(run.axes),
    }
    return SweepResult(
        axis_names=axis_names,
        columns=evaluator.columns,
        values=values,
        flags=tuple(flags),
        provenance=provenance,
    )


def point_result(run: RunConfig) -> SweepResult:
    """Single-point evaluation of the requested outputs (no axes)."""
    evaluator = _PointEvaluator(run)
    row, fl, _hard = evaluator.evaluate({})
    provenance = {"config": run.echo, "version": __version__, "backend": backend_name(), "grid": "-"}
    return SweepResult(
        axis_names=(),
        columns=evaluator.columns,
        values=row[None, :],
        flags=(";".join(fl),),
        provenance=provenance,
    )


def table_result(run: RunConfig, axis_name: str, axis_values: np.ndarray,
                 columns: tuple[str, ...], data: np.ndarray) -> SweepResult:
    """Wrap an externally computed scan (e.g. a valve grid) as a SweepResult."""
    values = np.column_stack([np.asarray(axis_values, dtype=float), np.asarray(data, dtype=float)])
    provenance = {"config": run.echo, "version": __version__, "backend": backend_name(), "grid": "-"}
    return SweepResult(
        axis_names=(axis_name,),
        columns=tuple(columns),
        values=values,
        flags=tuple([""] * values.shape[0]),
        provenance=provenance,
    )


# -- CSV ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    if np.isnan(x):
        return ""
    return "%.17g" % x


def write_csv(result: SweepResult, path) -> None:
    """Provenance header ('#'), column header, then rows; UTF-8, LF, comma."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# q3heat {result.provenance['version']}\n")
            fh.write(f"# backend: {result.provenance['backend']}\n")
            fh.write(f"# grid: {result.provenance['grid']}\n")
            fh.write(f"# config: {result.provenance['config']}\n")
            fh.write(",".join((*result.axis_names, *result.columns, "flags")) + "\n")
            for row, flag in zip(result.values, result.flags):
                fh.write(",".join(_fmt(x) for x in row) + f",{flag}\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


@dataclass(frozen=True)
class ParsedCsv:
    header: tuple[str, ...]
    values: np.ndarray
    flags: tuple[str, ...]
    provenance: tuple[str, ...]


def read_csv(path) -> ParsedCsv:
    """Parse a CSV written by write_csv; empty cells become NaN."""
    provenance: list[str] = []
    header: tuple[str, ...] | None = None
    rows: list[list[float]] = []
    flags: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                provenance.append(line)
                continue
            if header is None:
                header = tuple(line.split(","))
                continue
            parts = line.split(",")
            flags.append(parts[-1])
            rows.append([float(p) if p else np.nan for p in parts[:-1]])
    if header is None:
        raise ConfigParseError(f"{path}: no header row")
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(header) - 1))
    return ParsedCsv(header=header, values=values, flags=tuple(flags), provenance=tuple(provenance))
