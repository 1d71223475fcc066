"""``anc-sim``: sweeps, self-validation and canned figure reproductions."""

from __future__ import annotations

import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .sim import SimConfig, emit_results, error_floor, locate_waterfall, records_to_csv, run_sweep


def snr_grid(start: float, stop: float, step: float) -> tuple:
    if step <= 0:
        raise click.BadParameter("--snr-step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise click.BadParameter("--snr-stop is below --snr-start")
    return tuple(float(v) for v in np.round(start + step * np.arange(n), 9))


def read_config_file(path) -> dict:
    """Flat ``key = value`` (or ``key value``) lines; keys match the long flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key = key.strip().lstrip("-").replace("-", "_")
        value = value.strip()
        if not key or not value:
            raise click.BadParameter(f"{path}:{lineno}: expected 'key = value'")
        out[key] = value
    return out


def _apply_config(ctx: click.Context, params: dict) -> dict:
    path = params.pop("config")
    if not path:
        return params
    values = read_config_file(path)
    known = {p.name: p for p in ctx.command.params}
    for key, raw in values.items():
        if key not in known or key == "config":
            raise click.BadParameter(f"unknown key {key!r} in {path}")
        if ctx.get_parameter_source(key) != click.core.ParameterSource.COMMANDLINE:
            params[key] = known[key].type_cast_value(ctx, raw)
    return params


def _print_record(r) -> None:
    click.echo(
        f"  Eb/N0 {r.snr_db:6.2f} dB  frames {r.frames:6d}  BER {r.ber:.3e}  FER {r.fer:.3e}"
        + ("  (capped)" if r.capped else ""),
        err=True,
    )


@click.group()
@click.version_option(__version__)
def main():
    """Analog network coded two-way relay simulator with noncoherent M-FSK."""


@main.command()
@click.option("--m", "m", type=click.Choice(["2", "4", "8"]), default="2", show_default=True, help="modulation order")
@click.option("--nt", type=click.IntRange(0), default=50, show_default=True, help="series truncation N_t")
@click.option("--mode", type=click.Choice(["uncoded", "bicm", "bicm-id"]), default="uncoded", show_default=True)
@click.option("--code", default="none", show_default=True, help="none | dvbs2-short-r12 | ira-2160-r12 | alist:PATH")
@click.option("--k", "k", type=click.IntRange(1), default=2048, show_default=True, help="uncoded frame size in bits")
@click.option("--snr-start", type=float, default=0.0, show_default=True, help="first Eb/N0 in dB")
@click.option("--snr-stop", type=float, default=30.0, show_default=True)
@click.option("--snr-step", type=float, default=5.0, show_default=True)
@click.option("--frames-max", type=click.IntRange(1), default=1000, show_default=True)
@click.option("--errors-min", type=click.IntRange(0), default=100, show_default=True, help="bit errors per point")
@click.option("--frame-errors-min", type=click.IntRange(0), default=0, show_default=True)
@click.option("--iters", type=click.IntRange(1), default=100, show_default=True, help="total decoder iterations")
@click.option("--early-stop/--no-early-stop", default=True, show_default=True, help="stop decoding on a zero syndrome")
@click.option("--labeling", type=click.Choice(["natural", "gray"]), default="natural", show_default=True)
@click.option("--seed", type=click.IntRange(0), default=1, show_default=True)
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="key = value file; flags override")
@click.pass_context
def sweep(ctx, **params):
    """Run an Eb/N0 sweep and write one record per point."""
    p = _apply_config(ctx, params)
    try:
        cfg = SimConfig(
            M=int(p["m"]),
            n_terms=p["nt"],
            mode=p["mode"],
            code=p["code"],
            K=p["k"],
            snr_db=snr_grid(p["snr_start"], p["snr_stop"], p["snr_step"]),
            frames_max=p["frames_max"],
            errors_min=p["errors_min"],
            frame_errors_min=p["frame_errors_min"],
            iterations=p["iters"],
            early_stop=p["early_stop"],
            seed=p["seed"],
            workers=p["workers"],
            labeling=p["labeling"],
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    records = run_sweep(cfg, progress=_print_record)
    if p["out"]:
        emit_results(records, p["fmt"], p["out"], cfg)
    elif p["fmt"] == "csv":
        click.echo(records_to_csv(records), nl=False)
    else:
        from .sim import records_to_json

        click.echo(records_to_json(records, cfg))


@main.command()
@click.option("--draws", type=click.IntRange(1), default=100, show_default=True, help="random vectors per oracle check")
def validate(draws):
    """Special-function and quadrature-oracle checks; exit status 0 when all pass."""
    from .validation import run_all

    results = run_all(draws)
    for r in results:
        click.echo(r.line())
    bad = sum(not r.passed for r in results)
    click.echo(f"{len(results) - bad}/{len(results)} checks passed")
    sys.exit(1 if bad else 0)


def _figure_runs(figure: int, full: bool):
    """(label, config, kind) triples; kind is 'floor' or a (lo, hi) waterfall search window."""
    runs = []
    if figure == 2:
        grid = snr_grid(0, 80, 2.5 if full else 5.0)
        for M in (2, 4):
            for nt in (5, 15, 25, 50):
                cfg = SimConfig(M=M, n_terms=nt, snr_db=grid, frames_max=4883 if full else 200, errors_min=100)
                runs.append((f"uncoded M={M} N_t={nt}", cfg, "floor"))
        return runs
    stop = dict(frames_max=2000, errors_min=100, frame_errors_min=50) if full else dict(frames_max=40, errors_min=100, frame_errors_min=10)
    window = {4: (14.0, 21.0), 8: (12.0, 19.0)}
    if figure == 3:
        for M in (4, 8):
            for nt in (5, 10, 15, 25, 50):
                cfg = SimConfig(M=M, n_terms=nt, mode="bicm", code="dvbs2-short-r12", early_stop=not full, **stop)
                runs.append((f"BICM M={M} N_t={nt}", cfg, window[M]))
    elif figure == 4:
        for M in (4, 8):
            for mode in ("bicm", "bicm-id"):
                cfg = SimConfig(M=M, n_terms=50, mode=mode, code="dvbs2-short-r12", early_stop=not full, **stop)
                runs.append((f"{mode.upper()} M={M} N_t=50", cfg, window[M]))
    return runs


@main.command()
@click.option("--figure", type=click.Choice(["2", "3", "4"]), required=True)
@click.option("--full", is_flag=True, help="paper-scale frame counts (hours)")
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True)
@click.option("--seed", type=click.IntRange(0), default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="results", show_default=True)
def reproduce(figure, full, workers, seed, out_dir):
    """Canned experiment sets; one CSV per curve plus a summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for label, cfg, kind in _figure_runs(int(figure), full):
        cfg = cfg.replace(workers=workers, seed=seed)
        click.echo(f"{label}", err=True)
        if kind == "floor":
            records = run_sweep(cfg, progress=_print_record)
            summary.append(f"{label}: lowest BER {error_floor([r.ber for r in records]):.3e}")
        else:
            snr, records = locate_waterfall(cfg, *kind, progress=_print_record)
            summary.append(f"{label}: FER=0.1 at {snr:.2f} dB Eb/N0")
        name = label.replace(" ", "_").replace("=", "").replace("-", "").lower()
        emit_results(records, "csv", out / f"fig{figure}_{name}.csv", cfg)
    text = "\n".join(summary) + "\n"
    (out / f"fig{figure}_summary.txt").write_text(text)
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
