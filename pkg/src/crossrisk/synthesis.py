"""Market-view synthesis, reliability scoring and the alert gate.

Quantitative risk and text context add up into a total; the aggregate
signal and sentiment blend into a directional view; a reliability score
in [0, 1] expresses how much the view deserves trust. Alerts fire only
when reliability clears the threshold (inclusive, default 0.75) AND the
total risk clears the risk trigger, so low-confidence or low-risk ticks
stay quiet.

The reliability construction is deliberately isolated in one function so
it can be swapped: signal strength z/(1+z) from the volatility-scaled
aggregate signal, damped by half when sentiment and signal disagree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Optional

from .errors import NonPositiveVolatility
from .model import format_timestamp
from .analytics import RiskValue
from .textinsight import TextInsight

DEFAULT_FLAT_BAND = 0.05
DEFAULT_ALPHA = 0.6
DEFAULT_RELIABILITY_THRESHOLD = 0.75


class Direction(Enum):
    UP = "up"
    DOWN = "down"
    FLAT = "flat"


@dataclass(frozen=True)
class TotalRisk:
    r: float
    context: float
    r_total: float
    timestamp: Optional[datetime] = None

    def __post_init__(self):
        if self.context < 0.0:
            raise ValueError(f"context must be >= 0, got {self.context!r}")


@dataclass(frozen=True)
class MarketView:
    timestamp: datetime
    direction: Direction
    score: float
    m_t: float
    sentiment: float
    reliability: float

    def __post_init__(self):
        if not (-1.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [-1, 1], got {self.score!r}")
        if not (0.0 <= self.reliability <= 1.0):
            raise ValueError(f"reliability must lie in [0, 1], got {self.reliability!r}")


@dataclass(frozen=True)
class Alert:
    timestamp: datetime
    scope: tuple[str, ...]
    r_total: float
    reliability: float
    direction: Direction
    narrative: str


def total_risk(risk: RiskValue, context: float, timestamp: Optional[datetime] = None) -> TotalRisk:
    """r_total = r + context; context must already be non-negative."""
    if not math.isfinite(context):
        raise ValueError(f"context must be finite, got {context!r}")
    return TotalRisk(
        r=risk.r,
        context=context,
        r_total=risk.r + context,
        timestamp=timestamp if timestamp is not None else risk.timestamp,
    )


def direction_for_score(score: float, flat_band: float = DEFAULT_FLAT_BAND) -> Direction:
    if score > flat_band:
        return Direction.UP
    if score < -flat_band:
        return Direction.DOWN
    return Direction.FLAT


def synthesize_view(
    m_t: float,
    insight: TextInsight,
    norm_scale: float,
    alpha: float = DEFAULT_ALPHA,
    reliability: float = 0.0,
    flat_band: float = DEFAULT_FLAT_BAND,
    timestamp: Optional[datetime] = None,
) -> MarketView:
    """Blend the aggregate signal with sentiment into a directional view.

    u = clamp(m_t / norm_scale, -1, 1); score = alpha*u + (1-alpha)*sentiment.
    """
    if norm_scale <= 0.0:
        raise ValueError(f"norm_scale must be > 0, got {norm_scale!r}")
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    u = max(-1.0, min(1.0, m_t / norm_scale))
    score = alpha * u + (1.0 - alpha) * insight.sentiment
    return MarketView(
        timestamp=timestamp if timestamp is not None else insight.timestamp,
        direction=direction_for_score(score, flat_band),
        score=score,
        m_t=m_t,
        sentiment=insight.sentiment,
        reliability=reliability,
    )


def reliability_score(
    m_t: float,
    recent_vol: float,
    insight: TextInsight,
    flat_band: float = DEFAULT_FLAT_BAND,
) -> float:
    """Confidence in the current view, in [0, 1).

    z = |m_t| / recent_vol measures signal strength against its own
    volatility; strength = z / (1 + z). Agreement is 1 when sentiment and
    signal point the same way, or when either is effectively zero (within
    the flat band); otherwise the score halves. Zero signal scores 0.
    """
    if recent_vol <= 0.0:
        raise NonPositiveVolatility(f"recent_vol must be > 0, got {recent_vol!r}")
    z = abs(m_t) / recent_vol
    strength = z / (1.0 + z)
    signal_zero = abs(m_t) <= flat_band
    sentiment_zero = abs(insight.sentiment) <= flat_band
    same_sign = (m_t > 0 and insight.sentiment > 0) or (m_t < 0 and insight.sentiment < 0)
    agreement = 1.0 if (same_sign or signal_zero or sentiment_zero) else 0.0
    return strength * (0.5 + 0.5 * agreement)


def gate_alert(
    view: MarketView,
    total: TotalRisk,
    threshold: float = DEFAULT_RELIABILITY_THRESHOLD,
    risk_trigger: float = 0.0,
    scope: tuple[str, ...] = (),
    insight: Optional[TextInsight] = None,
) -> Optional[Alert]:
    """Emit an alert iff reliability >= threshold AND r_total >= risk_trigger.

    Both comparisons are inclusive. The narrative is assembled from the
    insight's risk tags and rationale when one is supplied.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must lie in [0, 1], got {threshold!r}")
    if view.reliability < threshold or total.r_total < risk_trigger:
        return None
    parts = [f"direction {view.direction.value}", f"score {view.score:+.4f}"]
    if insight is not None and insight.risk_tags:
        parts.append("tags: " + ", ".join(sorted(insight.risk_tags)))
    if insight is not None and insight.rationale:
        parts.append(insight.rationale)
    return Alert(
        timestamp=view.timestamp,
        scope=scope,
        r_total=total.r_total,
        reliability=view.reliability,
        direction=view.direction,
        narrative="; ".join(parts),
    )


def alert_to_json(alert: Alert) -> str:
    """One JSON line per alert, keys fixed by the external interface."""
    return json.dumps(
        {
            "timestamp": format_timestamp(alert.timestamp),
            "scope": list(alert.scope),
            "r_total": alert.r_total,
            "reliability": alert.reliability,
            "direction": alert.direction.value,
            "narrative": alert.narrative,
        },
        sort_keys=True,
    )
