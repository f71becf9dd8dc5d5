"""Command-line harness: synth, dataset, train, bench, sweep.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 more than
half of the input lines failed to parse.
"""

import csv
import sys

import click

from . import checkpoint
from .evaluation import aggregate, format_report_table, run_prequential, write_report_csv
from .features import read_dataset_csv, write_dataset_csv
from .ingest import (Episode, SynthProfile, default_profile, make_pattern,
                     write_synthetic_log)
from .pipeline import (CLASSIFIERS, bench_runs, build_dataset, make_model,
                       sweep_grid)

EXIT_IO = 3
EXIT_PARSE = 4

_PROFILE_KEYS = ("start_ms", "duration_s", "base_rate", "diurnal_amplitude",
                 "poisson")


def read_config(path) -> dict[str, list[str]]:
    """Parse a line-oriented key = value file; repeated keys accumulate."""
    values: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{n}: expected key = value")
            key, val = line.split("=", 1)
            values.setdefault(key.strip(), []).append(val.strip())
    return values


def _coerce_scalar(value: str):
    for kind in (int, float):
        try:
            return kind(value)
        except ValueError:
            continue
    return value


def apply_config(ctx: click.Context, config_path):
    """Fill parameters the user left at their defaults from a config file."""
    if config_path is None:
        return
    values = read_config(config_path)
    for key, vals in values.items():
        name = key.replace("-", "_")
        if name not in ctx.params:
            raise click.UsageError(f"unknown config key: {key}")
        if ctx.get_parameter_source(name) != click.core.ParameterSource.DEFAULT:
            continue
        current = ctx.params[name]
        if isinstance(current, tuple):
            if current:
                ctx.params[name] = tuple(type(current[0])(v) for v in vals)
            else:
                ctx.params[name] = tuple(_coerce_scalar(v) for v in vals)
        elif isinstance(current, bool):
            ctx.params[name] = vals[-1].lower() in ("1", "true", "yes", "on")
        elif current is None:
            ctx.params[name] = vals[-1]
        else:
            ctx.params[name] = type(current)(vals[-1])


def load_profile(path) -> SynthProfile:
    """Build a generator profile from a key = value file."""
    values = read_config(path)
    profile = default_profile()
    if "episode" in values or any(k in values for k in _PROFILE_KEYS):
        profile = SynthProfile()
    try:
        for key, vals in values.items():
            if key == "episode":
                for val in vals:
                    parts = val.split()
                    if len(parts) not in (3, 4):
                        raise ValueError(
                            f"episode needs 'start_s duration_s multiplier "
                            f"[severity]', got {val!r}")
                    profile.episodes.append(Episode(
                        int(parts[0]), int(parts[1]), float(parts[2]),
                        parts[3] if len(parts) == 4 else ""))
            elif key == "poisson":
                profile.poisson = vals[-1].lower() in ("1", "true", "yes", "on")
            elif key == "start_ms":
                profile.start_ms = int(vals[-1])
            elif key == "duration_s":
                profile.duration_s = int(vals[-1])
            elif key == "base_rate":
                profile.base_rate = float(vals[-1])
            elif key == "diurnal_amplitude":
                profile.diurnal_amplitude = float(vals[-1])
            else:
                raise ValueError(f"unknown profile key: {key}")
        profile.validate()
    except ValueError as exc:
        raise click.UsageError(f"invalid profile: {exc}") from exc
    return profile


def _read_lines(log):
    if log == "-":
        return sys.stdin
    try:
        return open(log, encoding="utf-8", errors="replace")
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _check_parse_threshold(stats):
    if stats.lines and stats.parse_errors * 2 > stats.lines:
        click.echo(f"parse threshold exceeded: {stats.parse_errors} of "
                   f"{stats.lines} lines unparseable", err=True)
        sys.exit(EXIT_PARSE)


def _build_dataset_cmd(log, window_minutes, label_mode, pattern_name, year,
                       bin_seconds, sub_minutes, lateness_seconds, warmup):
    try:
        pattern = make_pattern(pattern_name, year=year)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    fh = _read_lines(log)
    try:
        X, y, stats = build_dataset(
            (line.rstrip("\n") for line in fh), window_minutes,
            label_mode=label_mode, pattern=pattern, bin_seconds=bin_seconds,
            sub_minutes=sub_minutes, lateness_seconds=lateness_seconds,
            warmup=warmup)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    finally:
        if fh is not sys.stdin:
            fh.close()
    _check_parse_threshold(stats)
    return X, y, stats


@click.group()
@click.version_option(package_name="granlog")
def main():
    """Evolving granular classification of log activity anomalies."""


@main.command()
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Log file to write.")
@click.option("--truth", type=click.Path(dir_okay=False), default=None,
              help="Ground-truth CSV path (default: OUT.truth.csv).")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--profile", "profile_path", type=click.Path(exists=True),
              default=None, help="Generator profile (key = value file).")
def synth(out, truth, seed, profile_path):
    """Write a seeded synthetic log and its anomaly ground truth."""
    profile = load_profile(profile_path) if profile_path else default_profile()
    truth = truth or out + ".truth.csv"
    try:
        n = write_synthetic_log(profile, seed, out, truth)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {n} lines to {out}, ground truth to {truth}")


@main.command()
@click.option("--log", required=True, help="Log file to read ('-' for stdin).")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Dataset CSV to write.")
@click.option("--window-minutes", type=int, default=60, show_default=True)
@click.option("--label-mode", type=click.Choice(["batch", "online"]),
              default="batch", show_default=True)
@click.option("--pattern", "pattern_name", default="iso8601", show_default=True,
              help="Timestamp preset name or raw template.")
@click.option("--year", type=int, default=None,
              help="Year for patterns without a year token (syslog).")
@click.option("--bin-seconds", type=int, default=1, show_default=True)
@click.option("--sub-minutes", type=int, default=1, show_default=True)
@click.option("--lateness-seconds", type=int, default=2, show_default=True)
@click.option("--warmup", type=int, default=30, show_default=True,
              help="Online-label warm-up instances.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="key = value defaults, overridden by flags.")
@click.pass_context
def dataset(ctx, log, out, window_minutes, label_mode, pattern_name, year,
            bin_seconds, sub_minutes, lateness_seconds, warmup, config_path):
    """Build a labeled feature dataset from a log file."""
    apply_config(ctx, config_path)
    p = ctx.params
    X, y, stats = _build_dataset_cmd(
        p["log"], p["window_minutes"], p["label_mode"], p["pattern_name"],
        p["year"], p["bin_seconds"], p["sub_minutes"], p["lateness_seconds"],
        p["warmup"])
    try:
        write_dataset_csv(p["out"], X, y)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"{stats.instances} instances -> {p['out']} "
               f"(parsed {stats.parsed}, parse errors {stats.parse_errors}, "
               f"late drops {stats.dropped_late})")


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True),
              help="Labeled dataset CSV.")
@click.option("--classifier", type=click.Choice(CLASSIFIERS), required=True)
@click.option("--rho0", type=float, default=0.5, show_default=True)
@click.option("--h-r", type=int, default=100, show_default=True)
@click.option("--eta", type=float, default=3.0, show_default=True)
@click.option("--aggregation", type=click.Choice(["min", "product"]),
              default="min", show_default=True)
@click.option("--checkpoint", "checkpoint_path", type=click.Path(dir_okay=False),
              default=None, help="Model checkpoint to write after the pass.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.pass_context
def train(ctx, data, classifier, rho0, h_r, eta, aggregation, checkpoint_path,
          config_path):
    """Single prequential pass over a dataset, in file order."""
    apply_config(ctx, config_path)
    p = ctx.params
    try:
        X, y = read_dataset_csv(p["data"])
    except (OSError, ValueError) as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    model = make_model(p["classifier"], rho0=p["rho0"], h_r=p["h_r"],
                       eta=p["eta"], aggregation=p["aggregation"])
    state = run_prequential(model, X, y)
    if p["checkpoint_path"]:
        try:
            checkpoint.save_model(model, p["checkpoint_path"])
        except OSError as exc:
            click.echo(f"io error: {exc}", err=True)
            sys.exit(EXIT_IO)
    click.echo(f"instances={state.step}")
    click.echo(f"accuracy={100.0 * state.accuracy:.4f}")
    click.echo(f"avg_rules={state.avg_rules:.4f}")
    click.echo(f"final_rules={model.rule_count}")
    click.echo(f"time_s={state.elapsed:.6f}", err=True)


def _bench_rows(p):
    windows = p["window_minutes"] or (5, 15, 30, 60)
    if p["data"]:
        try:
            X, y = read_dataset_csv(p["data"])
        except (OSError, ValueError) as exc:
            click.echo(f"io error: {exc}", err=True)
            sys.exit(EXIT_IO)
        label = windows[0] if len(windows) == 1 else 0
        return [(label, X, y)]
    rows = []
    for w in windows:
        if p["log"]:
            X, y, stats = _build_dataset_cmd(
                p["log"], w, p["label_mode"], p["pattern_name"], p["year"],
                1, 1, 2, 30)
        else:
            from .ingest import synth_lines
            profile = (load_profile(p["profile_path"]) if p["profile_path"]
                       else default_profile())
            X, y, stats = build_dataset(
                synth_lines(profile, p["synth_seed"]), w,
                label_mode=p["label_mode"])
        if len(y) == 0:
            raise click.UsageError(f"no instances at window {w} min")
        rows.append((w, X, y))
    return rows


@main.command()
@click.option("--data", type=click.Path(exists=True), default=None,
              help="Prebuilt dataset CSV (one report row).")
@click.option("--log", default=None, help="Log file to window and label.")
@click.option("--synth-seed", type=int, default=None,
              help="Generate the benchmark stream with this seed.")
@click.option("--profile", "profile_path", type=click.Path(exists=True),
              default=None)
@click.option("--window-minutes", type=int, multiple=True,
              help="Window lengths (repeatable; default 5 15 30 60).")
@click.option("--classifier", type=click.Choice(CLASSIFIERS), required=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--rho0", type=float, default=0.5, show_default=True)
@click.option("--h-r", type=int, default=100, show_default=True)
@click.option("--eta", type=float, default=3.0, show_default=True)
@click.option("--aggregation", type=click.Choice(["min", "product"]),
              default="min", show_default=True)
@click.option("--label-mode", type=click.Choice(["batch", "online"]),
              default="batch", show_default=True)
@click.option("--confidence", type=float, default=0.99, show_default=True)
@click.option("--pattern", "pattern_name", default="iso8601", show_default=True)
@click.option("--year", type=int, default=None)
@click.option("--out", required=True,
              help="Report prefix; writes OUT.csv and OUT.txt.")
@click.option("--timing/--no-timing", default=True, show_default=True,
              help="Report wall-clock columns (disable for byte-stable output).")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.pass_context
def bench(ctx, **kwargs):
    """Shuffled prequential benchmark with confidence intervals."""
    apply_config(ctx, kwargs.get("config_path"))
    p = ctx.params
    if not p["data"] and not p["log"] and p["synth_seed"] is None:
        raise click.UsageError("need one of --data, --log, or --synth-seed")
    report_rows = []
    for window_min, X, y in _bench_rows(p):
        states = bench_runs(X, y, p["classifier"], runs=p["runs"],
                            seed=p["seed"], rho0=p["rho0"], h_r=p["h_r"],
                            eta=p["eta"], aggregation=p["aggregation"])
        report_rows.append((window_min,
                            aggregate(states, confidence=p["confidence"])))
    title = (f"classifier={p['classifier']} runs={p['runs']} seed={p['seed']} "
             f"rho0={p['rho0']} h_r={p['h_r']} eta={p['eta']}")
    table = format_report_table(report_rows, title=title, timing=p["timing"])
    try:
        write_report_csv(p["out"] + ".csv", report_rows, timing=p["timing"])
        with open(p["out"] + ".txt", "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(table, nl=False)


@main.command()
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--log", default=None)
@click.option("--synth-seed", type=int, default=None)
@click.option("--profile", "profile_path", type=click.Path(exists=True),
              default=None)
@click.option("--window-minutes", type=int, multiple=True, default=(5,),
              show_default=True, help="Single window length for the sweep.")
@click.option("--classifier", type=click.Choice(CLASSIFIERS), required=True)
@click.option("--rho0", type=float, multiple=True,
              default=(0.1, 0.3, 0.5, 0.7), show_default=True)
@click.option("--h-r", type=int, multiple=True, default=(75, 100, 125),
              show_default=True)
@click.option("--eta", type=float, default=3.0, show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--aggregation", type=click.Choice(["min", "product"]),
              default="min", show_default=True)
@click.option("--label-mode", type=click.Choice(["batch", "online"]),
              default="batch", show_default=True)
@click.option("--pattern", "pattern_name", default="iso8601", show_default=True)
@click.option("--year", type=int, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Scatter CSV to write.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.pass_context
def sweep(ctx, **kwargs):
    """Accuracy versus rule count over a rho0 x h_r grid."""
    apply_config(ctx, kwargs.get("config_path"))
    p = ctx.params
    if not p["data"] and not p["log"] and p["synth_seed"] is None:
        raise click.UsageError("need one of --data, --log, or --synth-seed")
    if p["data"]:
        win = p["window_minutes"][0] if p["window_minutes"] else 0
        try:
            rows_in = [(win, *read_dataset_csv(p["data"]))]
        except (OSError, ValueError) as exc:
            click.echo(f"io error: {exc}", err=True)
            sys.exit(EXIT_IO)
    else:
        q = dict(p)
        q["window_minutes"] = tuple(p["window_minutes"])[:1] or (5,)
        rows_in = _bench_rows(q)
    try:
        with open(p["out"], "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["classifier", "window_min", "rho0", "h_r",
                             "rules_mean", "acc_mean"])
            for window_min, X, y in rows_in:
                grid = sweep_grid(X, y, p["classifier"], p["rho0"], p["h_r"],
                                  runs=p["runs"], seed=p["seed"], eta=p["eta"],
                                  aggregation=p["aggregation"])
                for rho0, h_r, rules, acc in grid:
                    writer.writerow([p["classifier"], window_min,
                                     f"{rho0:g}", h_r, f"{rules:.4f}",
                                     f"{100.0 * acc:.4f}"])
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    cells = len(p["rho0"]) * len(p["h_r"]) * len(rows_in)
    click.echo(f"wrote {cells} scatter rows to {p['out']}")


if __name__ == "__main__":
    main()
