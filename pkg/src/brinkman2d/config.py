"""Run configuration: flat ``key = value`` text with dotted keys.

Lines starting with ``#`` (or anything after an inline ``#``) are
comments.  Exactly one of ``anna`` / the five ``scales.*`` keys must be
given, and exactly one field source (``field.pattern`` with its
parameters, or ``field.path``).  Da sweeps accept an explicit comma
list or ``logspace:start_exp,end_exp,count``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import atomic_write_text
from .media import PATTERNS
from .scaling import ReferenceScales, dimensionless_groups


class ConfigError(ValueError):
    """Bad configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


_SCALE_KEYS = ("scales.l_ref", "scales.u_ref", "scales.mu", "scales.mu_eff", "scales.k_max")
_KNOWN_KEYS = {
    "grid.nx", "grid.ny",
    "anna", *_SCALE_KEYS,
    "field.pattern", "field.contrast_x", "field.contrast_y", "field.seed", "field.path",
    "bc.gx", "bc.gy",
    "solver.tol", "solver.maxit", "solver.restart",
    "solver.preconditioner", "solver.pin_pressure",
    "sweep.da",
    "output.dir", "output.timings",
}


@dataclass
class RunConfig:
    nx: int
    ny: int
    anna: float | None = None
    scales: ReferenceScales | None = None
    field_pattern: str | None = None
    contrast_x: float = 1.0
    contrast_y: float = 1.0
    seed: int = 0
    field_path: str | None = None
    gx: float = 1.0
    gy: float = 0.0
    tol: float = 1e-6
    maxit: int | None = None
    restart: int | None = None
    preconditioner: str = "none"
    pin_pressure: bool = False
    da_values: tuple[float, ...] | None = None
    out_dir: str = "out"
    timings: bool = True

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("grid.nx", f"grid must be at least 1x1, got {self.nx}x{self.ny}")
        if (self.anna is None) == (self.scales is None):
            raise ConfigError("anna", "exactly one of 'anna' or the 'scales.*' block is required")
        if self.anna is not None and self.anna <= 0.0:
            raise ConfigError("anna", f"must be positive, got {self.anna}")
        if (self.field_pattern is None) == (self.field_path is None):
            raise ConfigError(
                "field.pattern", "exactly one field source is required ('field.pattern' or 'field.path')"
            )
        if self.field_pattern is not None and self.field_pattern not in PATTERNS:
            raise ConfigError("field.pattern", f"must be one of {PATTERNS}, got {self.field_pattern!r}")
        if self.contrast_x < 1.0 or self.contrast_y < 1.0:
            raise ConfigError("field.contrast_x", "contrasts must be >= 1")
        if not self.tol > 0.0:
            raise ConfigError("solver.tol", f"must be positive, got {self.tol}")
        if self.maxit is not None and self.maxit < 1:
            raise ConfigError("solver.maxit", f"must be >= 1, got {self.maxit}")
        if self.restart is not None and self.restart < 1:
            raise ConfigError("solver.restart", f"must be >= 1, got {self.restart}")
        if self.preconditioner not in ("none", "jacobi"):
            raise ConfigError("solver.preconditioner", f"unknown value {self.preconditioner!r}")
        if self.da_values is not None:
            da = tuple(float(v) for v in self.da_values)
            if not da:
                raise ConfigError("sweep.da", "sweep list must be nonempty")
            if any(v <= 0.0 for v in da):
                raise ConfigError("sweep.da", "sweep values must be positive")
            if any(b <= a for a, b in zip(da, da[1:])):
                raise ConfigError("sweep.da", "sweep values must be strictly ascending")
            self.da_values = da

    def effective_anna(self) -> float:
        if self.anna is not None:
            return self.anna
        return dimensionless_groups(self.scales).anna

    def viscosity_ratio(self) -> float:
        """mu'/mu from the scales block; 1 when anna is given directly."""
        if self.scales is not None:
            return self.scales.mu_eff / self.scales.mu
        return 1.0


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"{source}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(key, f"{source}:{lineno}: unknown key")
        if key in kv:
            raise ConfigError(key, f"{source}:{lineno}: duplicate key")
        if not value:
            raise ConfigError(key, f"{source}:{lineno}: empty value")
        kv[key] = value

    def take_float(key: str):
        if key not in kv:
            return None
        value = kv.pop(key)
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(key, f"not a number: {value!r}") from exc

    def take_int(key: str):
        if key not in kv:
            return None
        value = kv.pop(key)
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(key, f"not an integer: {value!r}") from exc

    def take_bool(key: str):
        if key not in kv:
            return None
        value = kv.pop(key).lower()
        if value in ("true", "yes", "1", "on"):
            return True
        if value in ("false", "no", "0", "off"):
            return False
        raise ConfigError(key, f"not a boolean: {value!r}")

    nx = take_int("grid.nx")
    ny = take_int("grid.ny")
    if nx is None or ny is None:
        raise ConfigError("grid.nx", "grid.nx and grid.ny are required")

    scales = None
    scale_vals = {k: take_float(k) for k in _SCALE_KEYS}
    given = [k for k, v in scale_vals.items() if v is not None]
    if given:
        missing = [k for k, v in scale_vals.items() if v is None]
        if missing:
            raise ConfigError(missing[0], "all five scales.* keys are required together")
        try:
            scales = ReferenceScales(*(scale_vals[k] for k in _SCALE_KEYS))
        except ValueError as exc:
            raise ConfigError(given[0], str(exc)) from exc

    da_values = None
    if "sweep.da" in kv:
        da_values = _parse_da(kv.pop("sweep.da"))

    defaults = RunConfig.__dataclass_fields__
    cfg = RunConfig(
        nx=nx,
        ny=ny,
        anna=take_float("anna"),
        scales=scales,
        field_pattern=kv.pop("field.pattern", None),
        contrast_x=_or_default(take_float("field.contrast_x"), 1.0),
        contrast_y=_or_default(take_float("field.contrast_y"), 1.0),
        seed=_or_default(take_int("field.seed"), 0),
        field_path=kv.pop("field.path", None),
        gx=_or_default(take_float("bc.gx"), defaults["gx"].default),
        gy=_or_default(take_float("bc.gy"), defaults["gy"].default),
        tol=_or_default(take_float("solver.tol"), defaults["tol"].default),
        maxit=take_int("solver.maxit"),
        restart=take_int("solver.restart"),
        preconditioner=kv.pop("solver.preconditioner", defaults["preconditioner"].default),
        pin_pressure=_or_default(take_bool("solver.pin_pressure"), False),
        da_values=da_values,
        out_dir=kv.pop("output.dir", defaults["out_dir"].default),
        timings=_or_default(take_bool("output.timings"), True),
    )
    return cfg


def _or_default(value, default):
    return default if value is None else value


def _parse_da(spec: str) -> tuple[float, ...]:
    spec = spec.strip()
    if spec.startswith("logspace:"):
        parts = spec[len("logspace:"):].split(",")
        if len(parts) != 3:
            raise ConfigError("sweep.da", f"logspace needs start_exp,end_exp,count, got {spec!r}")
        try:
            start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError("sweep.da", f"bad logspace spec {spec!r}") from exc
        return tuple(float(v) for v in np.logspace(start, end, count))
    try:
        return tuple(float(v) for v in spec.split(","))
    except ValueError as exc:
        raise ConfigError("sweep.da", f"expected comma-separated numbers, got {spec!r}") from exc


def parse_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def write_config(config: RunConfig, path) -> None:
    """Emit a config file that re-parses to an identical RunConfig."""
    lines = [
        f"grid.nx = {config.nx}",
        f"grid.ny = {config.ny}",
    ]
    if config.anna is not None:
        lines.append(f"anna = {config.anna!r}")
    if config.scales is not None:
        s = config.scales
        lines += [
            f"scales.l_ref = {s.l_ref!r}",
            f"scales.u_ref = {s.u_ref!r}",
            f"scales.mu = {s.mu!r}",
            f"scales.mu_eff = {s.mu_eff!r}",
            f"scales.k_max = {s.k_max!r}",
        ]
    if config.field_pattern is not None:
        lines += [
            f"field.pattern = {config.field_pattern}",
            f"field.contrast_x = {config.contrast_x!r}",
            f"field.contrast_y = {config.contrast_y!r}",
            f"field.seed = {config.seed}",
        ]
    else:
        lines.append(f"field.path = {config.field_path}")
    lines += [
        f"bc.gx = {config.gx!r}",
        f"bc.gy = {config.gy!r}",
        f"solver.tol = {config.tol!r}",
    ]
    if config.maxit is not None:
        lines.append(f"solver.maxit = {config.maxit}")
    if config.restart is not None:
        lines.append(f"solver.restart = {config.restart}")
    lines += [
        f"solver.preconditioner = {config.preconditioner}",
        f"solver.pin_pressure = {str(config.pin_pressure).lower()}",
    ]
    if config.da_values is not None:
        lines.append("sweep.da = " + ",".join(repr(v) for v in config.da_values))
    lines += [
        f"output.dir = {config.out_dir}",
        f"output.timings = {str(config.timings).lower()}",
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")
