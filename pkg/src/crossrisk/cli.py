"""Command-line entry point.

Commands: validate-config, ingest-replay, backtest, monitor, report,
generate-market. Exit codes: 0 success, 2 usage or config error,
3 partial scenario failure, 4 data error, 130 interrupted.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path

import click

from .backtest import SUMMARY_HEADER, load_scenarios, run_backtest
from .config import EngineConfig, load_config, resolved_dump
from .engine import TickEngine, prepare
from .errors import ConfigError, CrossRiskError, InvalidSpec
from .ingest import event_to_json, load_sources, replay
from .model import parse_timestamp
from .synthesis import alert_to_json
from .synthetic import generate_synthetic_market, spec_from_dict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARTIAL = 3
EXIT_DATA = 4
EXIT_INTERRUPT = 130


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config_or_exit(path: str) -> EngineConfig:
    try:
        return load_config(path)
    except ConfigError as exc:
        for violation in exc.violations:
            click.echo(f"config error: {violation}", err=True)
        sys.exit(EXIT_USAGE)
    except CrossRiskError as exc:
        _fail(EXIT_DATA, str(exc))


def _load_store_or_exit(config: EngineConfig):
    try:
        result = load_sources(
            config.sources, bar_paths=config.bar_paths, news_paths=config.news_paths
        )
    except CrossRiskError as exc:
        _fail(EXIT_DATA, str(exc))
    for inst in config.instruments.values():
        result.store.register_instrument(inst)
    for reject in result.rejects:
        click.echo(
            f"reject: {reject.file}:{reject.line_number}: {reject.reason}", err=True
        )
    return result.store


def _parse_ts_or_exit(label: str, raw: str):
    try:
        return parse_timestamp(raw)
    except ValueError as exc:
        _fail(EXIT_USAGE, f"{label}: {exc}")


@click.group()
def main():
    """Cross-asset risk engine: fuse sources, score risk, gate alerts, backtest."""


@main.command("validate-config")
@click.option("--config", "config_path", required=True, type=click.Path())
def cmd_validate_config(config_path):
    """Parse and validate a config file; print the fully-resolved dump."""
    config = _load_config_or_exit(config_path)
    click.echo(resolved_dump(config), nl=False)


@main.command("ingest-replay")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--from", "from_ts", required=True, help="interval start (RFC 3339)")
@click.option("--to", "to_ts", required=True, help="interval end (RFC 3339, exclusive)")
def cmd_ingest_replay(config_path, from_ts, to_ts):
    """Load configured files and replay them as an ordered event stream."""
    config = _load_config_or_exit(config_path)
    start = _parse_ts_or_exit("--from", from_ts)
    end = _parse_ts_or_exit("--to", to_ts)
    if start > end:
        _fail(EXIT_USAGE, "--from must not exceed --to")
    store = _load_store_or_exit(config)
    count = replay(store, start, end, lambda event: click.echo(event_to_json(event)))
    click.echo(f"delivered {count} events", err=True)


@main.command("backtest")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--scenarios", "scenarios_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_backtest(config_path, scenarios_path, out_dir):
    """Run every scenario; write per-scenario reports and a summary CSV."""
    config = _load_config_or_exit(config_path)
    try:
        scenarios = load_scenarios(scenarios_path)
    except (InvalidSpec, ValueError, OSError) as exc:
        _fail(EXIT_USAGE, f"bad scenario file: {exc}")
    if not scenarios:
        _fail(EXIT_USAGE, "scenario file lists no scenarios")
    needs_store = any(s.market is None for s in scenarios)
    store = _load_store_or_exit(config) if needs_store else None

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []
    rows: list[list[str]] = []
    for scenario in scenarios:
        try:
            report = run_backtest(
                store,
                scenario,
                base_params=config.params,
                sources=config.source_kinds(),
                provider=config.provider,
            )
        except CrossRiskError as exc:
            failures.append(scenario.name)
            click.echo(f"scenario {scenario.name} failed: {exc}", err=True)
            continue
        (out / f"{scenario.name}.report.json").write_text(report.to_json())
        (out / f"{scenario.name}.alerts.jsonl").write_text(report.alerts_jsonl())
        (out / f"{scenario.name}.weights.csv").write_text(report.weights_csv())
        rows.append(report.summary_row())
        click.echo(
            f"scenario {scenario.name}: accuracy={report.accuracy:.4f} "
            f"recall={report.recall:.4f} f1={report.f1:.4f} alerts={len(report.alerts)}"
        )
    summary = SUMMARY_HEADER + "\n" + "".join(",".join(row) + "\n" for row in rows)
    (out / "summary.csv").write_text(summary)
    if failures:
        click.echo(f"{len(failures)} scenario(s) failed: {', '.join(failures)}", err=True)
        sys.exit(EXIT_PARTIAL)


@main.command("monitor")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--from", "from_ts", required=True)
@click.option("--to", "to_ts", required=True)
@click.option("--speed", default=0.0, show_default=True,
              help="scale inter-tick delays; 0 replays as fast as possible")
def cmd_monitor(config_path, from_ts, to_ts, speed):
    """Replay an interval through the live engine, streaming alert JSON lines."""
    config = _load_config_or_exit(config_path)
    start = _parse_ts_or_exit("--from", from_ts)
    end = _parse_ts_or_exit("--to", to_ts)
    store = _load_store_or_exit(config)
    universe = sorted(config.instruments) or store.instrument_ids
    try:
        data = prepare(store, universe, start, end)
        engine = TickEngine(
            store,
            data,
            sources=config.source_kinds(),
            params=config.params,
            provider=config.provider,
        )
        previous = None
        for result in engine.run():
            if speed > 0 and previous is not None:
                time.sleep(speed * (result.timestamp - previous).total_seconds())
            previous = result.timestamp
            if result.alert is not None:
                click.echo(alert_to_json(result.alert))
                sys.stdout.flush()
    except KeyboardInterrupt:
        sys.stdout.flush()
        sys.exit(EXIT_INTERRUPT)
    except CrossRiskError as exc:
        _fail(EXIT_DATA, str(exc))


@main.command("report")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="backtest output directory to summarize")
def cmd_report(out_dir):
    """Print the summary table for a finished backtest output directory."""
    out = Path(out_dir)
    summary = out / "summary.csv"
    if not summary.is_file():
        _fail(EXIT_DATA, f"no summary.csv under {out}")
    with open(summary) as fh:
        for row in csv.reader(fh):
            click.echo("  ".join(f"{cell:>16}" if i else f"{cell:<24}"
                                 for i, cell in enumerate(row)))
    reports = sorted(out.glob("*.report.json"))
    total_alerts = 0
    for path in reports:
        payload = json.loads(path.read_text())
        total_alerts += len(payload.get("alerts", []))
    click.echo(f"{len(reports)} scenario report(s), {total_alerts} alert(s) total", err=True)


@main.command("generate-market")
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="JSON synthetic-market spec")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=None, type=int, help="override the spec's seed")
def cmd_generate_market(spec_path, out_dir, seed):
    """Materialize a synthetic market spec as bar/observation/news files."""
    try:
        payload = json.loads(Path(spec_path).read_text())
        if seed is not None:
            payload["seed"] = seed
        spec = spec_from_dict(payload)
    except (OSError, ValueError, InvalidSpec) as exc:
        _fail(EXIT_USAGE, f"bad market spec: {exc}")
    paths = generate_synthetic_market(spec, out_dir)
    for name in sorted(paths):
        click.echo(f"{name}: {paths[name]}")


if __name__ == "__main__":
    main()
