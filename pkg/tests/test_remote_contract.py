"""Remote provider contract tests against committed golden fixtures.

No network: a fake transport stands in for HTTP, and the goldens pin the
wire format so protocol drift breaks loudly.
"""

import json
from pathlib import Path

import pytest

from crossrisk.errors import CredentialMissing, ProviderTimeout, ProviderUnparseable
from crossrisk.model import NewsDocument, SourceKind
from crossrisk.textinsight import ProviderKind, ProviderSpec, TextInsight, analyze_batch
from crossrisk.textinsight.remote import (
    CREDENTIAL_ENV,
    RemoteCompletionClient,
    build_request,
    insight_to_response,
    parse_response,
)

from conftest import day

FIXTURES = Path(__file__).parent / "fixtures" / "remote"

SPEC = ProviderSpec(
    kind=ProviderKind.REMOTE_COMPLETION,
    endpoint="https://provider.example/v1/complete",
    model_name="gpt-4",
    timeout=5.0,
    max_retries=2,
)

DOC = NewsDocument(
    timestamp=day(57),  # 2022-03-01
    source_kind=SourceKind.MARKET_NEWS,
    headline="credit stress spreads",
    body="selloff deepens as liquidity worsens",
    instrument_ids=("ust10y",),
)


@pytest.fixture
def credential(monkeypatch):
    monkeypatch.setenv(CREDENTIAL_ENV, "test-key")


def load_golden(name):
    return json.loads((FIXTURES / name).read_text())


def test_request_matches_golden():
    assert build_request(SPEC, [DOC]) == load_golden("golden_request.json")


def test_response_golden_parses():
    sentiment, tags, rationale = parse_response(load_golden("golden_response.json"))
    assert sentiment == pytest.approx(-0.72)
    assert tags == {"credit", "liquidity"}
    assert rationale == "credit and liquidity strain with a broad selloff"


def test_insight_round_trips_through_response_schema():
    insight = TextInsight(
        timestamp=day(57),
        sentiment=-0.72,
        risk_tags=frozenset({"credit", "liquidity"}),
        rationale="credit and liquidity strain with a broad selloff",
        document_count=1,
    )
    sentiment, tags, rationale = parse_response(insight_to_response(insight))
    rebuilt = TextInsight(
        timestamp=insight.timestamp,
        sentiment=sentiment,
        risk_tags=tags,
        rationale=rationale,
        document_count=1,
    )
    assert rebuilt == insight


def test_golden_response_round_trip_bytes():
    golden = load_golden("golden_response.json")
    sentiment, tags, rationale = parse_response(golden)
    insight = TextInsight(
        timestamp=day(57), sentiment=sentiment, risk_tags=tags, rationale=rationale,
        document_count=1,
    )
    assert insight_to_response(insight) == golden


def test_remote_analyze_batch_with_fake_transport(credential):
    calls = []

    def transport(url, body, headers, timeout):
        calls.append((url, body, headers, timeout))
        return 200, load_golden("golden_response.json")

    client = RemoteCompletionClient(SPEC, transport=transport)
    insights = client.score_documents([DOC])
    assert len(insights) == 1
    assert insights[0].sentiment == pytest.approx(-0.72)
    url, body, headers, timeout = calls[0]
    assert url == SPEC.endpoint
    assert body == load_golden("golden_request.json")
    assert headers["Authorization"] == "Bearer test-key"
    assert timeout == 5.0


def test_missing_credential(monkeypatch):
    monkeypatch.delenv(CREDENTIAL_ENV, raising=False)
    client = RemoteCompletionClient(SPEC, transport=lambda *a: (200, {}))
    with pytest.raises(CredentialMissing):
        client.score_documents([DOC])


def test_timeout_retries_then_raises(credential):
    attempts = []

    def transport(url, body, headers, timeout):
        attempts.append(1)
        raise TimeoutError("deadline")

    client = RemoteCompletionClient(SPEC, transport=transport)
    with pytest.raises(ProviderTimeout):
        client.score_documents([DOC])
    assert len(attempts) == SPEC.max_retries + 1


def test_unparseable_after_retries(credential):
    def transport(url, body, headers, timeout):
        return 200, {"completion": "the vibes are bad"}

    client = RemoteCompletionClient(SPEC, transport=transport)
    with pytest.raises(ProviderUnparseable):
        client.score_documents([DOC])


def test_retry_recovers_after_transient_failure(credential):
    state = {"calls": 0}

    def transport(url, body, headers, timeout):
        state["calls"] += 1
        if state["calls"] == 1:
            return 503, {}
        return 200, load_golden("golden_response.json")

    client = RemoteCompletionClient(SPEC, transport=transport)
    insights = client.score_documents([DOC])
    assert insights[0].risk_tags == {"credit", "liquidity"}
    assert state["calls"] == 2


def test_schema_violations_rejected():
    for completion in (
        "not json",
        json.dumps({"sentiment": 2.0, "risk_tags": [], "rationale": ""}),
        json.dumps({"sentiment": 0.1, "risk_tags": ["weather"], "rationale": ""}),
        json.dumps({"sentiment": 0.1, "risk_tags": []}),
        json.dumps([1, 2, 3]),
    ):
        with pytest.raises(ProviderUnparseable):
            parse_response({"completion": completion})
    with pytest.raises(ProviderUnparseable):
        parse_response({"no_completion_here": 1})


def test_analyze_batch_merges_remote_insights(credential, monkeypatch):
    responses = {
        "good news today": {"sentiment": 0.6, "risk_tags": [], "rationale": "calm"},
        "bad news today": {"sentiment": -0.4, "risk_tags": ["volatility"], "rationale": "rough"},
    }

    def transport(url, body, headers, timeout):
        for key, payload in responses.items():
            if key in body["prompt"]:
                return 200, {"completion": json.dumps(payload)}
        return 200, {}

    docs = [
        NewsDocument(timestamp=day(3), source_kind=SourceKind.MARKET_NEWS, headline="good news today"),
        NewsDocument(timestamp=day(3), source_kind=SourceKind.MARKET_NEWS, headline="bad news today"),
    ]
    import crossrisk.textinsight.remote as remote_mod

    monkeypatch.setattr(remote_mod, "_requests_transport", transport)
    insight = analyze_batch(docs, SPEC, timestamp=day(3))
    assert insight.sentiment == pytest.approx((0.6 - 0.4) / 2)
    assert insight.risk_tags == {"volatility"}
    assert insight.document_count == 2
