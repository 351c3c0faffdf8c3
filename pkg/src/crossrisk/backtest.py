"""Deterministic rolling-window backtesting over replayable data.

A scenario names a universe, an interval, parameter overrides and either
a synthetic market spec (self-contained, seeded) or the store loaded
from configured files. The run drives the shared tick engine, scores
directional views against realized next-period return signs, scores
alerts against drawdown event labels (next-day return at or below two
rolling standard deviations by default), and produces a report whose
serialized form is byte-identical across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import kernels
from .engine import EngineParams, TickEngine, prepare
from .errors import (
    EmptyEvaluation,
    InsufficientWarmup,
    InvalidSpec,
    LengthMismatch,
)
from .model import SeriesStore, SourceKind, check_token, format_timestamp, parse_timestamp
from .synthesis import Alert, Direction, alert_to_json
from .synthetic import SyntheticMarketSpec, build_store, spec_from_dict
from .textinsight import ProviderSpec

OVERRIDE_KEYS = {"beta1", "beta2", "kappa", "alpha", "threshold", "window"}
SCENARIO_KEYS = {"name", "instruments", "from", "to", "seed", "overrides", "market"}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    start: datetime
    end: datetime
    instruments: tuple[str, ...] = ()
    seed: int = 0
    overrides: Mapping[str, float] = field(default_factory=dict)
    market: Optional[SyntheticMarketSpec] = None

    def __post_init__(self):
        check_token(self.name, "scenario name")
        if self.start >= self.end:
            raise InvalidSpec(f"{self.name}: interval must be non-empty")
        unknown = set(self.overrides) - OVERRIDE_KEYS
        if unknown:
            raise InvalidSpec(f"{self.name}: unknown overrides {sorted(unknown)}")
        apply_overrides(EngineParams(), self.overrides)  # range check

    @classmethod
    def from_dict(cls, payload: Mapping, default_params: Optional[EngineParams] = None) -> "ScenarioConfig":
        unknown = set(payload) - SCENARIO_KEYS
        if unknown:
            raise InvalidSpec(f"unknown scenario keys: {sorted(unknown)}")
        try:
            name = payload["name"]
            start = parse_timestamp(payload["from"])
            end = parse_timestamp(payload["to"])
        except KeyError as exc:
            raise InvalidSpec(f"scenario missing required key: {exc}") from None
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from None
        seed = int(payload.get("seed", 0))
        market = None
        if "market" in payload and payload["market"] is not None:
            market = spec_from_dict(payload["market"], default_seed=seed)
        return cls(
            name=name,
            start=start,
            end=end,
            instruments=tuple(payload.get("instruments", ())),
            seed=seed,
            overrides=dict(payload.get("overrides", {})),
            market=market,
        )


def apply_overrides(params: EngineParams, overrides: Mapping[str, float]) -> EngineParams:
    unknown = set(overrides) - OVERRIDE_KEYS
    if unknown:
        raise InvalidSpec(f"unknown overrides: {sorted(unknown)}")
    if not overrides:
        return params
    coerced = {
        key: (int(value) if key == "window" else float(value))
        for key, value in overrides.items()
    }
    try:
        return replace(params, **coerced)
    except ValueError as exc:
        raise InvalidSpec(f"override out of range: {exc}") from exc


def load_scenarios(path) -> list[ScenarioConfig]:
    """Parse a scenario file: a JSON array of scenario objects."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise InvalidSpec("scenario file must hold a JSON array")
    scenarios = [ScenarioConfig.from_dict(item) for item in raw]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise InvalidSpec("scenario names must be unique")
    return scenarios


# --- ground truth and metrics -------------------------------------------------

def risk_event_labels(
    closes: Sequence[float], window: int, sigmas: float = 2.0
) -> dict[int, bool]:
    """Per-day drawdown labels, computable from bars alone.

    Index i maps to True when the return into day i+1 is at or below
    -sigmas times the rolling sample std of the `window` returns ending
    at day i. Days without a full window or a next-day return are absent.
    """
    n = len(closes)
    rets = [math.log(closes[x + 1] / closes[x]) for x in range(n - 1)]
    labels: dict[int, bool] = {}
    for i in range(window, n - 1):
        vol = kernels.sample_std(rets[i - window : i])
        labels[i] = rets[i] <= -sigmas * vol
    return labels


@dataclass(frozen=True)
class MetricSet:
    predictions: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int


def evaluate_metrics(
    direction_pairs: Sequence[tuple[Direction, float, float]],
    event_pairs: Sequence[tuple[bool, bool]],
) -> MetricSet:
    """Score direction calls and alert/event pairs.

    direction_pairs holds (predicted, realized_return, flat_tolerance):
    up/down are correct on the matching realized sign, flat is correct
    when |realized| <= flat_tolerance. event_pairs holds (alert?, event?)
    per tick and yields the confusion counts behind precision/recall/F1.
    """
    if not direction_pairs or not event_pairs:
        raise EmptyEvaluation("need at least one evaluated tick")
    if len(direction_pairs) != len(event_pairs):
        raise LengthMismatch(
            f"{len(direction_pairs)} direction pairs vs {len(event_pairs)} event pairs"
        )
    correct = 0
    for predicted, realized, tolerance in direction_pairs:
        if predicted is Direction.UP:
            correct += realized > 0
        elif predicted is Direction.DOWN:
            correct += realized < 0
        else:
            correct += abs(realized) <= tolerance
    tp = sum(1 for alerted, event in event_pairs if alerted and event)
    fp = sum(1 for alerted, event in event_pairs if alerted and not event)
    fn = sum(1 for alerted, event in event_pairs if not alerted and event)
    tn = len(event_pairs) - tp - fp - fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricSet(
        predictions=len(direction_pairs),
        accuracy=correct / len(direction_pairs),
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


# --- report --------------------------------------------------------------------

@dataclass
class BacktestReport:
    scenario: str
    predictions: int
    evaluated_ticks: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    mean_reliability: float
    confusion: dict[str, int]
    risk_trigger: float
    final_weights: dict[str, float]
    alerts: list[Alert]
    weight_trajectory: list[tuple[datetime, str, float]]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "predictions": self.predictions,
            "evaluated_ticks": self.evaluated_ticks,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mean_reliability": self.mean_reliability,
            "confusion": dict(sorted(self.confusion.items())),
            "risk_trigger": self.risk_trigger,
            "final_weights": dict(sorted(self.final_weights.items())),
            "alerts": [json.loads(alert_to_json(a)) for a in self.alerts],
            "weight_trajectory": [
                {"tick": format_timestamp(ts), "source_id": sid, "weight": wt}
                for ts, sid, wt in self.weight_trajectory
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def alerts_jsonl(self) -> str:
        return "".join(alert_to_json(a) + "\n" for a in self.alerts)

    def weights_csv(self) -> str:
        lines = ["tick,source_id,weight"]
        lines += [
            f"{format_timestamp(ts)},{sid},{wt!r}" for ts, sid, wt in self.weight_trajectory
        ]
        return "\n".join(lines) + "\n"

    def summary_row(self) -> list[str]:
        return [
            self.scenario,
            str(self.predictions),
            f"{self.accuracy:.6f}",
            f"{self.recall:.6f}",
            f"{self.f1:.6f}",
            f"{self.mean_reliability:.6f}",
        ]


SUMMARY_HEADER = "scenario,predictions,accuracy,recall,f1,mean_reliability"


def run_backtest(
    store: Optional[SeriesStore],
    scenario: ScenarioConfig,
    base_params: Optional[EngineParams] = None,
    sources: Optional[Mapping[str, SourceKind]] = None,
    provider: Optional[ProviderSpec] = None,
) -> BacktestReport:
    """Run one scenario end to end; deterministic given (store, scenario)."""
    params = apply_overrides(base_params or EngineParams(), scenario.overrides)
    if scenario.market is not None:
        store, sources = build_store(scenario.market)
    if store is None:
        raise ValueError(f"{scenario.name}: scenario has no market spec and no store was given")
    universe = list(scenario.instruments) if scenario.instruments else store.instrument_ids
    data = prepare(store, universe, scenario.start, scenario.end)
    w = params.window
    if len(data.ticks) < 2 * w + 2:
        raise InsufficientWarmup(
            f"{scenario.name}: need at least {2 * w + 2} aligned bars "
            f"(window + calibration + one scored tick), got {len(data.ticks)}"
        )
    engine = TickEngine(
        store,
        data,
        sources=sources,
        params=params,
        provider=provider or ProviderSpec(),
    )
    sig_weights = engine.signal_weights.weights
    labels = {
        inst: risk_event_labels(data.closes[inst], w, params.event_threshold_sigmas)
        for inst in data.universe
    }

    n = len(data.ticks)
    direction_pairs: list[tuple[Direction, float, float]] = []
    event_pairs: list[tuple[bool, bool]] = []
    trajectory: list[tuple[datetime, str, float]] = []
    alerts: list[Alert] = []
    reliabilities: list[float] = []
    trigger = 0.0
    final_weights: dict[str, float] = {}

    for res in engine.run():
        trajectory.extend((res.timestamp, sid, wt) for sid, wt in sorted(res.weights.items()))
        final_weights = dict(res.weights)
        if res.risk_trigger is not None:
            trigger = res.risk_trigger
        if res.phase != "scored":
            continue
        reliabilities.append(res.view.reliability)
        if res.alert is not None:
            alerts.append(res.alert)
        i = res.index
        if i >= n - 1:
            continue  # final tick has no realized next-period return
        realized = sum(sig_weights[inst] * data.rets[inst][i] for inst in data.universe)
        direction_pairs.append((res.view.direction, realized, params.flat_band * res.norm_scale))
        event = any(labels[inst].get(i, False) for inst in data.universe)
        event_pairs.append((res.alert is not None, event))

    metrics = evaluate_metrics(direction_pairs, event_pairs)
    mean_reliability = sum(reliabilities) / len(reliabilities) if reliabilities else 0.0
    return BacktestReport(
        scenario=scenario.name,
        predictions=metrics.predictions,
        evaluated_ticks=len(event_pairs),
        accuracy=metrics.accuracy,
        precision=metrics.precision,
        recall=metrics.recall,
        f1=metrics.f1,
        mean_reliability=mean_reliability,
        confusion={"tp": metrics.tp, "fp": metrics.fp, "tn": metrics.tn, "fn": metrics.fn},
        risk_trigger=trigger,
        final_weights=final_weights,
        alerts=alerts,
        weight_trajectory=trajectory,
    )
