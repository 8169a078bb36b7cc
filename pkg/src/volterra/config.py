"""Run configuration: a sectioned key-value format with strict validation.

The format is INI-like: `[section]` headers, `key = value` entries, `#`
comments.  Values are parsed as JSON where possible (numbers, lists,
booleans) and fall back to bare strings.  Validation is collected, not
short-circuited: a bad file reports every problem at once, each with its
line number.  Unknown keys and sections are rejected in strict mode and
ignored (with a note) in permissive mode.

Sections: [run], [kernel], [nonlinearity], [forcing], [diagnostics],
[suite], [sweep].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import ConvexWeightSpec
from .forcing import ForcingSpec
from .seqcore import KernelSpec, NonlinearitySpec, ScalerSpec, SpecError

__all__ = ["ConfigError", "RunConfig", "parse_config_text", "KNOWN_KEYS"]

KNOWN_KEYS: dict[str, tuple[str, ...]] = {
    "run": ("horizon", "xi", "seed", "solver", "out", "tail_fraction", "overflow_limit"),
    "kernel": ("variant", "coeffs", "c", "rho", "beta", "trunc_tol"),
    "nonlinearity": ("variant", "alpha", "bound", "table_x", "table_y"),
    "forcing": ("variant", "mu", "a", "pi", "sigma", "alpha", "amplitude", "mu_plus", "mu_minus", "seed", "file"),
    "diagnostics": ("scaler", "scaler_p", "scaler_a", "weight", "weight_p", "weight_a", "eta", "guard"),
    "suite": ("scenarios", "horizon_cap", "tolerance_override"),
    "sweep": ("scenario", "parameter", "values"),
}


class ConfigError(ValueError):
    """Carries every validation problem found in a config file."""

    def __init__(self, errors: list[str]):
        super().__init__("invalid configuration:\n" + "\n".join(errors))
        self.errors = errors


@dataclass
class RunConfig:
    """Validated run inputs; sections absent from the file stay None."""

    kernel: Optional[KernelSpec] = None
    nonlinearity: Optional[NonlinearitySpec] = None
    forcing: Optional[ForcingSpec] = None
    forcing_file: Optional[str] = None
    horizon: Optional[int] = None
    xi: float = 0.0
    seed: Optional[int] = None
    solver: str = "auto"
    out: Optional[str] = None
    tail_fraction: float = 0.9
    overflow_limit: float = 1e300
    scaler: Optional[ScalerSpec] = None
    weight: Optional[ConvexWeightSpec] = None
    suite_scenarios: Optional[list[str]] = None
    suite_horizon_cap: Optional[int] = None
    suite_tolerance_override: Optional[float] = None
    sweep_scenario: Optional[str] = None
    sweep_parameter: Optional[str] = None
    sweep_values: Optional[list] = None
    notes: list[str] = field(default_factory=list)


@dataclass
class _Entry:
    value: object
    line: int


class _Collector:
    def __init__(self) -> None:
        self.errors: list[str] = []

    def add(self, line: int, section: str, message: str) -> None:
        self.errors.append(f"line {line}: [{section}] {message}")


class _Section:
    """Typed accessor over one section's entries, accumulating errors."""

    def __init__(self, name: str, entries: dict[str, _Entry], errs: _Collector, header_line: int):
        self.name = name
        self.entries = entries
        self.errs = errs
        self.header_line = header_line

    def has(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str, kind: str, default=None, required: bool = False):
        if key not in self.entries:
            if required:
                self.errs.add(self.header_line, self.name, f"missing required key {key!r}")
            return default
        entry = self.entries[key]
        val = entry.value
        ok, coerced = _coerce(val, kind)
        if not ok:
            self.errs.add(entry.line, self.name, f"{key}: expected {kind}, got {val!r}")
            return default
        return coerced


def _coerce(val, kind: str):
    if kind == "float":
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            return False, None
        return True, float(val)
    if kind == "int":
        if isinstance(val, bool) or not isinstance(val, int):
            return False, None
        return True, int(val)
    if kind == "str":
        return isinstance(val, str), val if isinstance(val, str) else None
    if kind == "list":
        return isinstance(val, list), val if isinstance(val, list) else None
    if kind == "float-list":
        if not isinstance(val, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
        ):
            return False, None
        return True, [float(v) for v in val]
    raise AssertionError(kind)


def _parse_sections(text: str, strict: bool, errs: _Collector, notes: list[str]) -> dict[str, _Section]:
    sections: dict[str, dict[str, _Entry]] = {}
    headers: dict[str, int] = {}
    current: Optional[str] = None
    skipping = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            skipping = False
            if name not in KNOWN_KEYS:
                if strict:
                    errs.errors.append(f"line {lineno}: unknown section [{name}]")
                else:
                    notes.append(f"line {lineno}: ignoring unknown section [{name}]")
                skipping = True
                current = None
                continue
            if name in sections:
                errs.errors.append(f"line {lineno}: duplicate section [{name}]")
            current = name
            sections.setdefault(name, {})
            headers.setdefault(name, lineno)
            continue
        if skipping:
            continue
        if current is None:
            errs.errors.append(f"line {lineno}: entry outside any section: {line!r}")
            continue
        key, sep, val_text = line.partition("=")
        if not sep:
            errs.errors.append(f"line {lineno}: [{current}] expected 'key = value', got {line!r}")
            continue
        key = key.strip()
        if key not in KNOWN_KEYS[current]:
            if strict:
                errs.add(lineno, current, f"unknown key {key!r}")
                continue
            notes.append(f"line {lineno}: ignoring unknown key [{current}] {key!r}")
            continue
        if key in sections[current]:
            errs.add(lineno, current, f"duplicate key {key!r}")
            continue
        raw_val = val_text.strip()
        try:
            value = json.loads(raw_val)
        except (json.JSONDecodeError, ValueError):
            value = raw_val
        sections[current][key] = _Entry(value=value, line=lineno)
    return {
        name: _Section(name, entries, errs, headers.get(name, 0)) for name, entries in sections.items()
    }


def _build_kernel(sect: _Section, errs: _Collector) -> Optional[KernelSpec]:
    variant = sect.get("variant", "str", required=True)
    if variant is None:
        return None
    try:
        if variant == "finite":
            coeffs = sect.get("coeffs", "float-list", default=[])
            return KernelSpec.finite(coeffs, trunc_tol=sect.get("trunc_tol", "float", 1e-12))
        if variant == "geometric":
            return KernelSpec.geometric(
                sect.get("c", "float", required=True) or 0.0,
                sect.get("rho", "float", required=True) or 0.0,
                trunc_tol=sect.get("trunc_tol", "float", 1e-12),
            )
        if variant == "polynomial":
            return KernelSpec.polynomial(
                sect.get("c", "float", required=True) or 0.0,
                sect.get("beta", "float", required=True) or 2.0,
                trunc_tol=sect.get("trunc_tol", "float", 1e-12),
            )
        sect.errs.add(sect.header_line, "kernel", f"unknown variant {variant!r}")
    except SpecError as exc:
        sect.errs.add(sect.header_line, "kernel", str(exc))
    return None


def _build_nonlinearity(sect: _Section, errs: _Collector) -> Optional[NonlinearitySpec]:
    variant = sect.get("variant", "str", required=True)
    if variant is None:
        return None
    try:
        if variant == "signed-power":
            return NonlinearitySpec.signed_power(sect.get("alpha", "float", required=True) or 0.5)
        if variant == "bounded":
            return NonlinearitySpec.bounded(sect.get("bound", "float", required=True) or 0.0)
        if variant == "table":
            return NonlinearitySpec.table(
                sect.get("table_x", "float-list", required=True) or [],
                sect.get("table_y", "float-list", required=True) or [],
            )
        sect.errs.add(sect.header_line, "nonlinearity", f"unknown variant {variant!r}")
    except SpecError as exc:
        sect.errs.add(sect.header_line, "nonlinearity", str(exc))
    return None


def _build_forcing(sect: _Section, errs: _Collector, kernel: Optional[KernelSpec]):
    variant = sect.get("variant", "str", required=True)
    if variant is None:
        return None, None
    if variant == "file":
        return None, sect.get("file", "str", required=True)
    try:
        if variant == "monotone-power":
            return ForcingSpec.monotone_power(sect.get("mu", "float", required=True) or 1.0), None
        if variant == "periodic-exponential":
            return (
                ForcingSpec.periodic_exponential(
                    sect.get("a", "float", required=True) or 0.1,
                    sect.get("pi", "float-list", required=True) or [1.0, 2.0],
                ),
                None,
            )
        if variant == "gaussian-iid":
            return (
                ForcingSpec.gaussian(
                    sect.get("sigma", "float", required=True) or 1.0,
                    sect.get("seed", "int", required=True) or 0,
                ),
                None,
            )
        if variant == "heavytail-iid":
            return (
                ForcingSpec.heavytail(
                    sect.get("alpha", "float", required=True) or 2.0,
                    sect.get("seed", "int", required=True) or 0,
                ),
                None,
            )
        if variant == "bounded-oscillation":
            return ForcingSpec.bounded_oscillation(sect.get("amplitude", "float", required=True) or 1.0), None
        if variant == "constructed-alternating":
            if kernel is None:
                sect.errs.add(sect.header_line, "forcing", "constructed-alternating needs a [kernel] section")
                return None, None
            return (
                ForcingSpec.constructed_alternating(
                    sect.get("mu_plus", "float", required=True) or 1.0,
                    sect.get("mu_minus", "float", required=True) or 0.0,
                    sect.get("alpha", "float", required=True) or 0.5,
                    kernel,
                ),
                None,
            )
        sect.errs.add(sect.header_line, "forcing", f"unknown variant {variant!r}")
    except SpecError as exc:
        sect.errs.add(sect.header_line, "forcing", str(exc))
    return None, None


def _build_scaler(sect: _Section) -> Optional[ScalerSpec]:
    name = sect.get("scaler", "str")
    if name is None:
        return None
    try:
        if name == "sqrt-log":
            return ScalerSpec.sqrt_log()
        if name == "power":
            return ScalerSpec.power(sect.get("scaler_p", "float", required=True) or 1.0)
        if name == "exponential":
            return ScalerSpec.exponential(sect.get("scaler_a", "float", required=True) or 0.1)
        sect.errs.add(sect.header_line, "diagnostics", f"unknown scaler {name!r}")
    except SpecError as exc:
        sect.errs.add(sect.header_line, "diagnostics", str(exc))
    return None


def _build_weight(sect: _Section) -> Optional[ConvexWeightSpec]:
    name = sect.get("weight", "str")
    if name is None:
        return None
    eta = sect.get("eta", "float", 0.0)
    try:
        if name == "power":
            return ConvexWeightSpec.power(sect.get("weight_p", "float", required=True) or 1.0, eta=eta)
        if name == "gaussian-exp":
            return ConvexWeightSpec.gaussian_exp(sect.get("weight_a", "float", required=True) or 0.1, eta=eta)
        sect.errs.add(sect.header_line, "diagnostics", f"unknown weight {name!r}")
    except SpecError as exc:
        sect.errs.add(sect.header_line, "diagnostics", str(exc))
    return None


def parse_config_text(text: str, strict: bool = True) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem found."""
    errs = _Collector()
    cfg = RunConfig()
    sections = _parse_sections(text, strict, errs, cfg.notes)

    if "kernel" in sections:
        cfg.kernel = _build_kernel(sections["kernel"], errs)
    if "nonlinearity" in sections:
        cfg.nonlinearity = _build_nonlinearity(sections["nonlinearity"], errs)
    if "forcing" in sections:
        cfg.forcing, cfg.forcing_file = _build_forcing(sections["forcing"], errs, cfg.kernel)
    if "run" in sections:
        run = sections["run"]
        cfg.horizon = run.get("horizon", "int")
        if cfg.horizon is not None and cfg.horizon < 1:
            errs.add(run.entries["horizon"].line, "run", "horizon must be at least 1")
            cfg.horizon = None
        cfg.xi = run.get("xi", "float", 0.0)
        cfg.seed = run.get("seed", "int")
        if cfg.seed is not None and not (0 <= cfg.seed < 2**64):
            errs.add(run.entries["seed"].line, "run", "seed must be an unsigned 64-bit integer")
            cfg.seed = None
        cfg.solver = run.get("solver", "str", "auto")
        if cfg.solver not in ("auto", "reference"):
            errs.add(run.entries["solver"].line, "run", f"solver must be auto or reference, got {cfg.solver!r}")
        cfg.out = run.get("out", "str")
        cfg.tail_fraction = run.get("tail_fraction", "float", 0.9)
        if not (0.0 < cfg.tail_fraction < 1.0):
            errs.add(run.entries["tail_fraction"].line, "run", "tail_fraction must lie in (0, 1)")
        cfg.overflow_limit = run.get("overflow_limit", "float", 1e300)
    if "diagnostics" in sections:
        cfg.scaler = _build_scaler(sections["diagnostics"])
        cfg.weight = _build_weight(sections["diagnostics"])
    if "suite" in sections:
        suite = sections["suite"]
        raw = suite.get("scenarios", "list") if isinstance(
            suite.entries.get("scenarios", _Entry(None, 0)).value, list
        ) else suite.get("scenarios", "str")
        if raw is not None:
            if isinstance(raw, str):
                cfg.suite_scenarios = [raw]
            elif all(isinstance(v, str) for v in raw):
                cfg.suite_scenarios = list(raw)
            else:
                errs.add(suite.header_line, "suite", "scenarios must be a string or a list of strings")
        cfg.suite_horizon_cap = suite.get("horizon_cap", "int")
        cfg.suite_tolerance_override = suite.get("tolerance_override", "float")
    if "sweep" in sections:
        sweep = sections["sweep"]
        cfg.sweep_scenario = sweep.get("scenario", "str", required=True)
        cfg.sweep_parameter = sweep.get("parameter", "str", required=True)
        cfg.sweep_values = sweep.get("values", "list", required=True)

    if errs.errors:
        raise ConfigError(errs.errors)
    return cfg
