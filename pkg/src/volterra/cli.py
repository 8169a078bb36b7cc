"""Command-line entry point: simulate, diagnose, verify, sweep.

All outputs are deterministic for a fixed (config, seed): files carry the
config fingerprint and tool version but no timestamps, and repeated runs
are byte-identical.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, diagnostics, textio, theorems
from .config import ConfigError, RunConfig, parse_config_text
from .engine import SimConfig, SimulationOverflow, fingerprint_payload, simulate
from .forcing import ForcingSequence, generate
from .seqcore import SpecError

_OUT_ENVVAR = "VOLTERRA_OUT"


def _load_config(config_path: str, strict: bool) -> RunConfig:
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read config: {exc}")
    try:
        cfg = parse_config_text(text, strict=strict)
    except ConfigError as exc:
        raise click.ClickException("\n".join(exc.errors))
    for note in cfg.notes:
        click.echo(f"note: {note}", err=True)
    return cfg


def _resolve_out(out: str | None, cfg: RunConfig | None) -> Path:
    if out:
        return Path(out)
    if cfg is not None and cfg.out:
        return Path(cfg.out)
    return Path("volterra-out")


def _apply_overrides(cfg: RunConfig, seed, horizon, tail_fraction) -> None:
    if seed is not None:
        if cfg.forcing is not None and cfg.forcing.is_stochastic:
            cfg.forcing = cfg.forcing.with_seed(seed)
        cfg.seed = seed
    if horizon is not None:
        cfg.horizon = horizon
    if tail_fraction is not None:
        cfg.tail_fraction = tail_fraction


def _realized_forcing(cfg: RunConfig, horizon: int) -> ForcingSequence:
    if cfg.forcing_file is not None:
        seq, _meta = textio.read_sequence(Path(cfg.forcing_file), "H")
        return ForcingSequence.from_values(seq, label=cfg.forcing_file)
    if cfg.forcing is None:
        raise click.ClickException("config needs a [forcing] section (or a forcing file)")
    return generate(cfg.forcing, horizon)


def _sim_config(cfg: RunConfig) -> SimConfig:
    missing = [
        name
        for name, val in (
            ("[kernel]", cfg.kernel),
            ("[nonlinearity]", cfg.nonlinearity),
            ("[run] horizon", cfg.horizon),
        )
        if val is None
    ]
    if missing:
        raise click.ClickException("config is missing " + ", ".join(missing))
    forcing = _realized_forcing(cfg, cfg.horizon)
    return SimConfig(
        kernel=cfg.kernel,
        f=cfg.nonlinearity,
        forcing=forcing,
        horizon=cfg.horizon,
        xi=cfg.xi,
        solver=cfg.solver,
        overflow_limit=cfg.overflow_limit,
    )


@click.group()
@click.version_option(version=__version__, prog_name="volterra")
def main() -> None:
    """Simulate and diagnose forced sublinear Volterra recursions."""


_common = [
    click.option("--config", "config_path", required=True, type=click.Path(), help="Config file."),
    click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Seed override."),
    click.option("--horizon", type=click.IntRange(1), default=None, help="Horizon override."),
    click.option("--out", type=click.Path(), default=None, envvar=_OUT_ENVVAR, help="Output directory."),
    click.option("--strict/--permissive", "strict", default=True, help="Unknown config keys: reject or ignore."),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@main.command()
@_with_common
def simulate_cmd(config_path, seed, horizon, out, strict):
    """Run one path and write it as a columnar text file."""
    cfg = _load_config(config_path, strict)
    _apply_overrides(cfg, seed, horizon, None)
    sim = _sim_config(cfg)
    try:
        path = simulate(sim)
    except SimulationOverflow as exc:
        raise click.ClickException(str(exc))
    out_dir = _resolve_out(out, cfg)
    target = out_dir / "path.txt"
    textio.write_path_file(
        target,
        path.x,
        path.s,
        sim.forcing.values,
        {"config": path.fingerprint, "solver": path.solver, "trunc-tail": f"{path.trunc_tail:.3g}"},
    )
    click.echo(f"wrote {target}")


main.add_command(simulate_cmd, name="simulate")


@main.command()
@_with_common
@click.option("--tail-fraction", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True), default=None)
def diagnose(config_path, seed, horizon, out, strict, tail_fraction):
    """Simulate, then write diagnostic tracks and a summary."""
    cfg = _load_config(config_path, strict)
    _apply_overrides(cfg, seed, horizon, tail_fraction)
    sim = _sim_config(cfg)
    try:
        path = simulate(sim)
    except SimulationOverflow as exc:
        raise click.ClickException(str(exc))
    out_dir = _resolve_out(out, cfg)
    meta = {"config": path.fingerprint, "solver": path.solver}
    H = sim.forcing.values.prefix(sim.horizon)
    textio.write_path_file(out_dir / "path.txt", path.x, path.s, H, meta)

    summary: dict = {"config": path.fingerprint, "horizon": sim.horizon, "tool_version": __version__}
    hstar = diagnostics.running_max_abs(H)
    xstar = diagnostics.running_max_abs(path.x)
    tracks = {
        "hstar": hstar,
        "xstar": xstar,
        "hplus": diagnostics.running_signed_max(H, "+"),
        "hminus": diagnostics.running_signed_max(H, "-"),
        "xplus": diagnostics.running_signed_max(path.x, "+"),
        "xminus": diagnostics.running_signed_max(path.x, "-"),
    }
    for name, track in tracks.items():
        textio.write_columns(
            out_dir / f"{name}.txt",
            track.values.indices(),
            {name: track.values.values.copy(), "argmax": track.argmax.astype(float)},
            meta,
        )
    summary["xstar_final"] = xstar.final
    summary["hstar_final"] = hstar.final
    summary["max_ratio_final"] = xstar.final / hstar.final if hstar.final > 0 else None

    try:
        lam = diagnostics.estimate_lambda(H)
        textio.write_columns(out_dir / "lambda.txt", H.indices(), {"lambda": lam.track.values}, meta)
        summary["lambda"] = {"value": _json_float(lam.value), "regime": lam.regime, "onset": lam.onset}
    except diagnostics.DegenerateSequenceError as exc:
        summary["lambda"] = {"error": str(exc)}
    try:
        lam2 = diagnostics.estimate_lambda2(H, sim.f)
        textio.write_columns(out_dir / "lambda2.txt", H.indices(), {"lambda2": lam2.track.values}, meta)
        summary["lambda2"] = {"value": _json_float(lam2.value), "regime": lam2.regime}
    except diagnostics.DegenerateSequenceError as exc:
        summary["lambda2"] = {"error": str(exc)}

    if cfg.scaler is not None:
        tf = cfg.tail_fraction
        summary["tail_sup_ratio"] = {
            "x_abs": diagnostics.tail_sup_ratio(path.x, cfg.scaler, tf),
            "x_pos": diagnostics.tail_sup_ratio(path.x, cfg.scaler, tf, mode="pos"),
            "x_neg": diagnostics.tail_sup_ratio(path.x, cfg.scaler, tf, mode="neg"),
            "H_abs": diagnostics.tail_sup_ratio(H, cfg.scaler, tf),
            "tail_fraction": tf,
        }
    if cfg.weight is not None:
        try:
            avg_x = diagnostics.phi_time_average(path.x, cfg.weight)
            avg_h = diagnostics.phi_time_average(H, cfg.weight)
            textio.write_columns(out_dir / "phi_average.txt", avg_x.indices(), {"A_x": avg_x.values.copy()}, meta)
            summary["phi_average"] = {"x_final": float(avg_x.values[-1]), "H_final": float(avg_h.values[-1])}
        except diagnostics.PhiOverflowError as exc:
            summary["phi_average"] = {"overflow_index": exc.index, "divergent": True}

    bounds = diagnostics.verify_path_bounds(path.x, path.s, H, sim.kernel, sim.f)
    summary["pathwise_bounds"] = {"violations": len(bounds)}

    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {out_dir}/summary.json and tracks")


def _json_float(v: float):
    return v if math.isfinite(v) else repr(v)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Optional suite config.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Suite seed base override.")
@click.option("--horizon", type=click.IntRange(1), default=None, help="Cap on scenario horizons.")
@click.option("--out", type=click.Path(), default=None, envvar=_OUT_ENVVAR, help="Output directory.")
@click.option("--strict/--permissive", "strict", default=True)
def verify(config_path, seed, horizon, out, strict):
    """Run the theorem-check suite; exit 1 if any scenario fails."""
    cfg = None
    scenario_ids = None
    tolerance_override = None
    if config_path is not None:
        cfg = _load_config(config_path, strict)
        scenario_ids = cfg.suite_scenarios
        tolerance_override = cfg.suite_tolerance_override
        if horizon is None:
            horizon = cfg.suite_horizon_cap
    if scenario_ids is None or scenario_ids == ["default"]:
        scenarios = theorems.default_suite()
    else:
        try:
            scenarios = [theorems.scenario_by_id(sid) for sid in scenario_ids]
        except SpecError as exc:
            raise click.ClickException(str(exc))
    report = theorems.run_suite(
        scenarios, seed_base=seed, horizon_cap=horizon, tolerance_override=tolerance_override
    )
    out_dir = _resolve_out(out, cfg)
    records = report.records()
    suite_meta = {
        "suite": fingerprint_payload([r["fingerprint"] for r in records]),
        "seed_base": seed if seed is not None else theorems.SUITE_SEED_BASE,
    }
    textio.write_report_jsonl(out_dir / "report.jsonl", records, suite_meta)
    table = textio.report_table(records)
    (out_dir / "report.txt").write_text(table + "\n", encoding="utf-8")
    click.echo(table)
    if not report.passed:
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Config with a [sweep] section.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None)
@click.option("--horizon", type=click.IntRange(1), default=None)
@click.option("--out", type=click.Path(), default=None, envvar=_OUT_ENVVAR)
@click.option("--strict/--permissive", "strict", default=True)
def sweep(config_path, seed, horizon, out, strict):
    """Run one scenario across a parameter grid, one report per grid point."""
    cfg = _load_config(config_path, strict)
    if cfg.sweep_scenario is None or cfg.sweep_parameter is None or not cfg.sweep_values:
        raise click.ClickException("config needs a [sweep] section with scenario, parameter, and values")
    try:
        base = theorems.scenario_by_id(cfg.sweep_scenario)
    except SpecError as exc:
        raise click.ClickException(str(exc))
    out_dir = _resolve_out(out, cfg)
    any_fail = False
    for value in cfg.sweep_values:
        try:
            sc = theorems.scenario_with_override(base, cfg.sweep_parameter, value)
        except (SpecError, TypeError) as exc:
            raise click.ClickException(f"bad sweep point {value!r}: {exc}")
        report = theorems.run_suite([sc], seed_base=seed, horizon_cap=horizon)
        point = f"{cfg.sweep_parameter.replace('.', '-')}={value}"
        records = report.records()
        textio.write_report_jsonl(
            out_dir / "sweep" / point / "report.jsonl",
            records,
            {"sweep_point": point, "seed_base": seed if seed is not None else theorems.SUITE_SEED_BASE},
        )
        status = "pass" if report.passed else "FAIL"
        click.echo(f"{point}: {status}")
        any_fail = any_fail or not report.passed
    if any_fail:
        sys.exit(1)


if __name__ == "__main__":
    main()
