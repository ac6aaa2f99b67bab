"""Parameter sweeps: grid evaluation, figure presets, CSV/JSON emission.

A sweep walks a 1- or 2-axis grid in row-major order, evaluates one or
more metrics per point, and writes a table whose rows carry the axis
values, each metric with its error estimate, and an error flag column.
Failed points never abort a sweep and never emit NaN: the value fields are
left empty and the flag names the exception.

Identical inputs produce byte-identical output files regardless of the
worker count: workers only evaluate points, and results are gathered in
grid order before formatting.
"""

from __future__ import annotations

import concurrent.futures
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cfi import cfi_cm, cfi_mm, cfi_pdm_with_kinetic, cfi_pdm_without_kinetic
from .exceptions import NumericsError
from .metrics import fidelity, qfi_with_kinetic, qfi_without_kinetic
from .params import GaussianPacket, PhysicalParams
from .quadrature import build_measurement_grid

AXIS_FIELDS = {
    "delta": "detuning",
    "k0": "wavevector",
    "t": "time",
    "sigma": "sigma",
    "omega": "rabi",
}

METRICS = (
    "fidelity",
    "qfi_with",
    "qfi_without",
    "cfi_pdm_with",
    "cfi_pdm_without",
    "cfi_mm",
    "cfi_cm",
)

#: Fraction of a grid metric's value used as its error estimate is measured
#: by re-evaluating at half the node count.
_HALF_GRID_MIN = 4096


@dataclass(frozen=True)
class Axis:
    """One sweep axis: a named parameter and its ordered grid values."""

    name: str
    values: tuple[float, ...]
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.name not in AXIS_FIELDS:
            raise ValueError(f"unknown axis {self.name!r}; choose from {sorted(AXIS_FIELDS)}")
        if len(self.values) < 2:
            raise ValueError("axis needs at least 2 points")
        if self.scale not in ("linear", "log", "explicit"):
            raise ValueError(f"unknown scale {self.scale!r}")

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, count: int) -> "Axis":
        if not lo < hi:
            raise ValueError("axis min must be < max")
        return cls(name, tuple(float(v) for v in np.linspace(lo, hi, count)), "linear")

    @classmethod
    def logspace(cls, name: str, lo: float, hi: float, count: int) -> "Axis":
        if not 0.0 < lo < hi:
            raise ValueError("log axis requires 0 < min < max")
        values = np.logspace(math.log10(lo), math.log10(hi), count)
        return cls(name, tuple(float(v) for v in values), "log")

    @classmethod
    def explicit(cls, name: str, values) -> "Axis":
        return cls(name, tuple(float(v) for v in values), "explicit")

    def describe(self) -> str:
        if self.scale == "explicit":
            return f"{self.name}:explicit:" + ",".join(_fmt(v) for v in self.values)
        return (f"{self.name}:{self.scale}:{_fmt(self.values[0])}:"
                f"{_fmt(self.values[-1])}:{len(self.values)}")


@dataclass(frozen=True)
class SweepSpec:
    """What to evaluate: metrics, axes, fixed overrides, tolerances."""

    metrics: tuple[str, ...]
    axes: tuple[Axis, ...]
    fixed: tuple[tuple[str, float], ...] = ()
    hbar_override: float | None = None
    tol: float = 1e-10
    grid_n: int = 32768
    preset: str = ""

    def __post_init__(self) -> None:
        if not self.metrics:
            raise ValueError("at least one metric required")
        for m in self.metrics:
            if m not in METRICS:
                raise ValueError(f"unknown metric {m!r}; choose from {METRICS}")
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("sweeps take 1 or 2 axes")
        fixed_names = [k for k, _ in self.fixed]
        if len(set(fixed_names)) != len(fixed_names):
            raise ValueError("duplicate fixed parameter")

    def base_params(self) -> PhysicalParams:
        params = PhysicalParams()
        for key, value in self.fixed:
            params = params.replace(**{_param_field(key): value})
        if self.hbar_override is not None:
            params = params.replace(hbar=self.hbar_override)
        return params

    def point_params(self, axis_values) -> PhysicalParams:
        params = self.base_params()
        fields = {AXIS_FIELDS[ax.name]: float(v) for ax, v in zip(self.axes, axis_values)}
        return params.replace(**fields)


def _param_field(key: str) -> str:
    aliases = {"delta": "detuning", "k0": "wavevector", "time": "time",
               "t": "time", "omega": "rabi"}
    if key in aliases:
        return aliases[key]
    if key in ("hbar", "mass", "rabi", "sigma", "detuning", "wavevector"):
        return key
    raise ValueError(f"unknown parameter {key!r}")


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[tuple]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _evaluate_metric(name: str, params: PhysicalParams, tol: float, grid_n: int):
    packet = GaussianPacket.from_params(params)
    if name == "fidelity":
        r = fidelity(params, packet, tol=tol)
        return r.value, r.estimated_error
    if name == "qfi_with":
        r = qfi_with_kinetic(params, packet, tol=tol)
        return r.value, r.estimated_error
    if name == "qfi_without":
        r = qfi_without_kinetic(params)
        return r.value, r.estimated_error
    if name == "cfi_pdm_with":
        return cfi_pdm_with_kinetic(params, packet, tol=min(tol, 1e-12)), 0.0
    if name == "cfi_pdm_without":
        return cfi_pdm_without_kinetic(params), 0.0
    if name in ("cfi_mm", "cfi_cm"):
        fn = cfi_mm if name == "cfi_mm" else cfi_cm
        grid = build_measurement_grid(params, grid_n)
        value = fn(params, packet, grid)
        half = fn(params, packet, build_measurement_grid(params, max(grid_n // 2, _HALF_GRID_MIN)))
        return value, abs(value - half)
    raise ValueError(f"unknown metric {name!r}")


def _evaluate_point(job):
    spec, axis_values = job
    params = spec.point_params(axis_values)
    values: list[float | None] = []
    errors: list[float | None] = []
    flags: list[str] = []
    for name in spec.metrics:
        try:
            value, err = _evaluate_metric(name, params, spec.tol, spec.grid_n)
        except NumericsError as exc:
            values.append(None)
            errors.append(None)
            flags.append(f"{name}:{type(exc).__name__}")
        else:
            values.append(value)
            errors.append(err)
    return values, errors, ";".join(flags)


def run_sweep(spec: SweepSpec, out: str | None = None, fmt: str = "csv",
              jobs: int = 1, seed: int = 0) -> SweepResult:
    """Evaluate the sweep grid and optionally write the table to ``out``.

    Rows are emitted in row-major order over the axes.  Per-point numerical
    failures are recorded in the flag column and never abort the sweep.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    points = list(itertools.product(*(ax.values for ax in spec.axes)))
    jobs_list = [(spec, pt) for pt in points]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate_point, jobs_list,
                                     chunksize=max(1, len(jobs_list) // (4 * jobs))))
    else:
        outcomes = [_evaluate_point(job) for job in jobs_list]

    columns: list[str] = [ax.name for ax in spec.axes]
    for name in spec.metrics:
        columns.extend([name, f"{name}_err"])
    columns.append("flag")

    rows = []
    for pt, (values, errors, flag) in zip(points, outcomes):
        row: list = list(pt)
        for v, e in zip(values, errors):
            row.extend([v, e])
        row.append(flag)
        rows.append(tuple(row))

    base = spec.base_params()
    meta = {
        "tool": "rabi-metrology",
        "version": __version__,
        "seed": seed,
        "preset": spec.preset,
        "metrics": list(spec.metrics),
        "axes": [ax.describe() for ax in spec.axes],
        "tol": spec.tol,
        "grid_n": spec.grid_n,
        "params": {
            "hbar": base.hbar, "mass": base.mass, "rabi": base.rabi,
            "delta": base.detuning, "k0": base.wavevector,
            "time": base.time, "sigma": base.sigma,
        },
    }
    result = SweepResult(columns=tuple(columns), rows=rows, meta=meta)
    if out is not None:
        text = render_csv(result) if fmt == "csv" else render_json(result)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return result


def _fmt(value: float) -> str:
    # 17 significant digits: parsing the text reproduces the double exactly
    return format(value, ".16e")


def render_csv(result: SweepResult) -> str:
    """Render with '#'-prefixed provenance header lines, then RFC-4180 rows."""
    buf = io.StringIO()
    meta = result.meta
    buf.write(f"# tool = {meta['tool']} {meta['version']}\n")
    buf.write(f"# seed = {meta['seed']}\n")
    if meta.get("preset"):
        buf.write(f"# preset = {meta['preset']}\n")
    for key, value in meta["params"].items():
        buf.write(f"# {key} = {value!r}\n")
    for ax in meta["axes"]:
        buf.write(f"# axis = {ax}\n")
    buf.write(f"# tol = {meta['tol']!r}\n")
    buf.write(f"# grid_n = {meta['grid_n']}\n")
    buf.write(",".join(_csv_quote(c) for c in result.columns) + "\n")
    for row in result.rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, str):
                cells.append(_csv_quote(cell))
            else:
                cells.append(_fmt(cell))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def read_csv(path: str) -> SweepResult:
    """Read a sweep CSV back; values parse to bit-identical floats."""
    meta: dict = {"params": {}, "axes": []}
    rows = []
    columns: tuple[str, ...] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if " = " in body:
                    key, _, value = body.partition(" = ")
                    if key == "axis":
                        meta["axes"].append(value)
                    else:
                        meta[key] = value
                continue
            if columns is None:
                columns = tuple(line.split(","))
                continue
            cells = line.split(",")
            row: list = []
            for name, cell in zip(columns, cells):
                if name == "flag":
                    row.append(cell)
                elif cell == "":
                    row.append(None)
                else:
                    row.append(float(cell))
            rows.append(tuple(row))
    if columns is None:
        raise ValueError(f"no header row in {path}")
    return SweepResult(columns=columns, rows=rows, meta=meta)


def render_json(result: SweepResult) -> str:
    payload = {"meta": result.meta, "columns": list(result.columns),
               "rows": [list(r) for r in result.rows]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Figure presets.  All presets pin hbar = 1e-34 (the desk-scale convention
# this package reproduces); --hbar overrides it.

PAPER_HBAR = 1e-34

#: The third wavevector slot of preset fig2a; overridable because the
#: natural third member of the family is not fixed by the preset contract.
DEFAULT_THIRD_K0 = 3e6


def _preset_fig1() -> SweepSpec:
    return SweepSpec(
        metrics=("fidelity",),
        axes=(Axis.linspace("delta", -2000.0, 2000.0, 41),
              Axis.linspace("k0", 0.0, 4e6, 41)),
        hbar_override=PAPER_HBAR,
        preset="fig1",
    )


def _preset_fig2a(third_k0: float = DEFAULT_THIRD_K0) -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_with", "qfi_without"),
        axes=(Axis.explicit("k0", (1e6, 2e6, third_k0)),
              Axis.linspace("t", 0.0, 1.0, 101)),
        fixed=(("delta", 1000.0),),
        hbar_override=PAPER_HBAR,
        preset="fig2a",
    )


def _preset_fig2b() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_with", "qfi_without"),
        axes=(Axis.explicit("delta", (100.0, 500.0, 1000.0)),
              Axis.linspace("t", 0.0, 1.0, 101)),
        fixed=(("k0", 1e6),),
        hbar_override=PAPER_HBAR,
        preset="fig2b",
    )


def _preset_fig3() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_with", "qfi_without"),
        axes=(Axis.linspace("delta", -2000.0, 2000.0, 401),),
        fixed=(("k0", 1e6), ("time", 1.0)),
        hbar_override=PAPER_HBAR,
        preset="fig3",
    )


def _preset_fig4() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_with",),
        axes=(Axis.logspace("sigma", 1e-6, 1e-3, 200),),
        fixed=(("k0", 1e6), ("time", 1.0), ("delta", 1000.0)),
        hbar_override=PAPER_HBAR,
        preset="fig4",
    )


def _preset_fig5() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_without", "cfi_pdm_without"),
        axes=(Axis.linspace("t", 0.0, 1.0, 201),),
        fixed=(("k0", 1e6), ("delta", 1000.0)),
        hbar_override=PAPER_HBAR,
        preset="fig5",
    )


def _preset_fig6() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_without", "cfi_pdm_without"),
        axes=(Axis.explicit("delta", (100.0, 500.0)),
              Axis.linspace("t", 0.0, 1.0, 201)),
        fixed=(("k0", 1e6),),
        hbar_override=PAPER_HBAR,
        preset="fig6",
    )


def _preset_fig7() -> SweepSpec:
    return SweepSpec(
        metrics=("qfi_with", "cfi_pdm_with", "cfi_cm"),
        axes=(Axis.linspace("t", 0.0, 1.0, 201),),
        fixed=(("k0", 1e6), ("delta", 1000.0)),
        hbar_override=PAPER_HBAR,
        preset="fig7",
    )


PRESETS = {
    "fig1": _preset_fig1,
    "fig2a": _preset_fig2a,
    "fig2b": _preset_fig2b,
    "fig3": _preset_fig3,
    "fig4": _preset_fig4,
    "fig5": _preset_fig5,
    "fig6": _preset_fig6,
    "fig7": _preset_fig7,
}


def build_preset(name: str, third_k0: float | None = None) -> SweepSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if name == "fig2a":
        return _preset_fig2a(DEFAULT_THIRD_K0 if third_k0 is None else third_k0)
    if third_k0 is not None:
        raise ValueError("--third-k0 only applies to preset fig2a")
    return PRESETS[name]()
