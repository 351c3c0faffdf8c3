"""Structured text insights from news batches.

A TextInsight is the engine's view of "what the news says": a bounded
sentiment score, a set of risk tags from a closed vocabulary, a short
rationale and the number of documents it covers. Two providers produce
them: a deterministic offline lexicon stub (word-list scorer, hermetic,
used everywhere by default) and a remote completion endpoint (see
remote.py). The context adjustment turns news negativity into a
non-negative risk increment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from importlib import resources
from typing import Iterable, Optional, Sequence

from ..analytics import RiskValue
from ..model import NewsDocument

RISK_TAG_VOCABULARY = frozenset({"volatility", "credit", "liquidity", "policy", "fx", "macro"})

DEFAULT_KAPPA = 0.5

# Trigger words mapping onto the closed tag vocabulary. Matching happens on
# the same lowercase alphanumeric tokens the sentiment scorer uses.
TAG_TRIGGERS: dict[str, frozenset[str]] = {
    "volatility": frozenset({"volatile", "volatility", "turbulence", "whipsaw", "swings"}),
    "credit": frozenset({"credit", "default", "downgrade", "bankrupt", "bankruptcy", "insolvency"}),
    "liquidity": frozenset({"liquidity", "illiquid", "funding", "redemption", "redemptions"}),
    "policy": frozenset({"policy", "fed", "rate", "rates", "hike", "tariff", "regulation", "stimulus"}),
    "fx": frozenset({"fx", "currency", "dollar", "euro", "yen", "devaluation", "peg"}),
    "macro": frozenset({"macro", "inflation", "gdp", "recession", "unemployment"}),
}

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def _load_lexicon(name: str) -> frozenset[str]:
    text = resources.files("crossrisk.textinsight").joinpath(f"data/{name}").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


POSITIVE_WORDS = _load_lexicon("positive_words.txt")
NEGATIVE_WORDS = _load_lexicon("negative_words.txt")


class ProviderKind(Enum):
    LEXICON_STUB = "lexicon_stub"
    REMOTE_COMPLETION = "remote_completion"


@dataclass(frozen=True)
class ProviderSpec:
    kind: ProviderKind = ProviderKind.LEXICON_STUB
    endpoint: str = ""
    model_name: str = "lexicon-stub"
    timeout: float = 10.0
    max_retries: int = 2
    prompt_template_id: str = "risk-insight-v1"
    parallelism: int = 4

    def __post_init__(self):
        if self.timeout <= 0.0:
            raise ValueError(f"timeout must be > 0, got {self.timeout!r}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries!r}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism!r}")
        if self.kind is ProviderKind.REMOTE_COMPLETION and not self.endpoint:
            raise ValueError("remote provider requires an endpoint URL")


@dataclass(frozen=True)
class TextInsight:
    timestamp: datetime
    sentiment: float
    risk_tags: frozenset[str] = frozenset()
    rationale: str = ""
    document_count: int = 0

    def __post_init__(self):
        if not math.isfinite(self.sentiment) or not (-1.0 <= self.sentiment <= 1.0):
            raise ValueError(f"sentiment must lie in [-1, 1], got {self.sentiment!r}")
        bad = set(self.risk_tags) - RISK_TAG_VOCABULARY
        if bad:
            raise ValueError(f"unknown risk tags: {sorted(bad)}")
        if self.document_count < 0:
            raise ValueError("document_count must be >= 0")
        object.__setattr__(self, "risk_tags", frozenset(self.risk_tags))


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumerics; drops empties."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def stub_score(text: str) -> float:
    """Deterministic lexicon sentiment: (p - n) / (p + n + 1) in (-1, 1).

    p and n count positive/negative lexicon hits with multiplicity.
    """
    tokens = tokenize(text)
    p = sum(1 for t in tokens if t in POSITIVE_WORDS)
    n = sum(1 for t in tokens if t in NEGATIVE_WORDS)
    return (p - n) / (p + n + 1)


def extract_tags(text: str) -> frozenset[str]:
    """Risk tags whose trigger words appear in the text."""
    tokens = set(tokenize(text))
    return frozenset(tag for tag, triggers in TAG_TRIGGERS.items() if tokens & triggers)


def document_text(doc: NewsDocument) -> str:
    return doc.headline + " " + doc.body if doc.body else doc.headline


def analyze_batch(
    docs: Sequence[NewsDocument],
    provider: ProviderSpec,
    timestamp: Optional[datetime] = None,
) -> TextInsight:
    """Turn one tick's news batch into a TextInsight.

    Per-document scores are aggregated by document-count-weighted mean;
    an empty batch yields sentiment 0 with no tags. The lexicon stub is a
    pure function of the document texts; the remote provider parses each
    completion into the insight schema and rejects unparseable replies.
    """
    if timestamp is None:
        if not docs:
            raise ValueError("timestamp is required for an empty batch")
        timestamp = max(d.timestamp for d in docs)
    if not docs:
        return TextInsight(timestamp=timestamp, sentiment=0.0, document_count=0)
    if provider.kind is ProviderKind.LEXICON_STUB:
        return _analyze_with_stub(docs, timestamp)
    from .remote import RemoteCompletionClient

    client = RemoteCompletionClient(provider)
    return merge_insights(client.score_documents(docs), timestamp)


def _analyze_with_stub(docs: Sequence[NewsDocument], timestamp: datetime) -> TextInsight:
    scores = []
    tags: set[str] = set()
    positives = negatives = 0
    for doc in docs:
        text = document_text(doc)
        scores.append(stub_score(text))
        tags |= extract_tags(text)
        tokens = tokenize(text)
        positives += sum(1 for t in tokens if t in POSITIVE_WORDS)
        negatives += sum(1 for t in tokens if t in NEGATIVE_WORDS)
    sentiment = sum(scores) / len(scores)
    rationale = (
        f"lexicon stub: {positives} positive / {negatives} negative hits "
        f"across {len(docs)} documents"
    )
    if tags:
        rationale += "; tags: " + ", ".join(sorted(tags))
    return TextInsight(
        timestamp=timestamp,
        sentiment=sentiment,
        risk_tags=frozenset(tags),
        rationale=rationale,
        document_count=len(docs),
    )


def merge_insights(insights: Iterable[TextInsight], timestamp: datetime) -> TextInsight:
    """Merge per-document insights, weighting sentiment by document count."""
    insights = list(insights)
    total_docs = sum(i.document_count for i in insights)
    if total_docs == 0:
        return TextInsight(timestamp=timestamp, sentiment=0.0, document_count=0)
    sentiment = sum(i.sentiment * i.document_count for i in insights) / total_docs
    tags = frozenset().union(*(i.risk_tags for i in insights))
    rationale = " | ".join(i.rationale for i in insights if i.rationale)
    return TextInsight(
        timestamp=timestamp,
        sentiment=sentiment,
        risk_tags=tags,
        rationale=rationale,
        document_count=total_docs,
    )


def context_adjustment(risk: RiskValue, insight: TextInsight, kappa: float = DEFAULT_KAPPA) -> float:
    """Non-negative risk increment from news negativity.

    negativity = (1 - sentiment) / 2 in [0, 1];
    C = kappa * negativity * max(r, 0). Context can amplify existing risk
    but never creates risk from a riskless state or reduces it.
    """
    if kappa < 0.0 or not math.isfinite(kappa):
        raise ValueError(f"kappa must be finite and >= 0, got {kappa!r}")
    negativity = (1.0 - insight.sentiment) / 2.0
    return kappa * negativity * max(risk.r, 0.0)
