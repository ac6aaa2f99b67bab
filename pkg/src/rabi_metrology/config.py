"""Flat ``key = value`` config files for the CLI.

UTF-8 text, one assignment per line, ``#`` comments, SI units throughout.
Keys use the CLI flag spellings (hbar, mass, rabi, delta, k0, time, sigma
for the physics; metric, axis1, axis2, out, format, seed, jobs for sweeps).
Unknown keys are hard errors -- nothing is silently ignored -- and parse
errors carry the line number.  CLI flags take precedence over the file.
"""

from __future__ import annotations

from .params import PhysicalParams
from .sweeps import Axis, SweepSpec

PARAM_KEYS = ("hbar", "mass", "rabi", "delta", "k0", "time", "sigma")
SWEEP_KEYS = ("metric", "axis1", "axis2", "out", "format", "seed", "jobs")

_FIELD_BY_KEY = {
    "hbar": "hbar", "mass": "mass", "rabi": "rabi", "delta": "detuning",
    "k0": "wavevector", "time": "time", "sigma": "sigma",
}


class ConfigError(ValueError):
    """Malformed or unknown config content; message carries the location."""


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into a {key: string-value} dict, strictly."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in PARAM_KEYS and key not in SWEEP_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        entries[key] = value
    return entries


def load_config(path: str) -> dict:
    """Read and parse a config file; see parse_config_text."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, source=path)


def params_from_entries(entries: dict, base: PhysicalParams | None = None) -> PhysicalParams:
    """Apply the physics keys of a parsed config on top of ``base``."""
    params = base if base is not None else PhysicalParams()
    updates = {}
    for key in PARAM_KEYS:
        if key in entries:
            try:
                updates[_FIELD_BY_KEY[key]] = float(entries[key])
            except ValueError as exc:
                raise ConfigError(f"key {key!r}: not a number: {entries[key]!r}") from exc
    return params.replace(**updates) if updates else params


def parse_axis_spec(text: str) -> Axis:
    """Parse ``name:min:max:count[:scale]`` or ``name:explicit:v1,v2,...``."""
    parts = text.split(":")
    if len(parts) >= 3 and parts[1] == "explicit":
        values = [float(v) for v in ":".join(parts[2:]).split(",")]
        return Axis.explicit(parts[0], values)
    if len(parts) not in (4, 5):
        raise ConfigError(
            f"axis spec {text!r}: expected name:min:max:count[:scale]")
    name = parts[0]
    try:
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"axis spec {text!r}: bad number") from exc
    scale = parts[4] if len(parts) == 5 else "linear"
    if scale == "linear":
        return Axis.linspace(name, lo, hi, count)
    if scale == "log":
        return Axis.logspace(name, lo, hi, count)
    raise ConfigError(f"axis spec {text!r}: unknown scale {scale!r}")


def sweep_from_entries(entries: dict, params: PhysicalParams) -> SweepSpec:
    """Build a SweepSpec from config entries plus resolved base params."""
    if "metric" not in entries:
        raise ConfigError("config has no 'metric' key")
    metrics = tuple(m.strip() for m in entries["metric"].split(","))
    axes = []
    for key in ("axis1", "axis2"):
        if key in entries:
            axes.append(parse_axis_spec(entries[key]))
    if not axes:
        raise ConfigError("config has no axis1")
    fixed = (
        ("mass", params.mass), ("rabi", params.rabi), ("delta", params.detuning),
        ("k0", params.wavevector), ("time", params.time), ("sigma", params.sigma),
    )
    return SweepSpec(metrics=metrics, axes=tuple(axes), fixed=fixed,
                     hbar_override=params.hbar)


def emit_params_config(params: PhysicalParams) -> str:
    """Resolved physics parameters as reloadable config text."""
    lines = ["# resolved physical parameters (SI units)"]
    values = {
        "hbar": params.hbar, "mass": params.mass, "rabi": params.rabi,
        "delta": params.detuning, "k0": params.wavevector,
        "time": params.time, "sigma": params.sigma,
    }
    for key in PARAM_KEYS:
        lines.append(f"{key} = {values[key]!r}")
    return "\n".join(lines) + "\n"
