"""Remote completion provider client.

Wire protocol (documented here and frozen by the golden fixtures under
tests/fixtures/remote/):

  request   HTTP POST to the configured endpoint
            headers: Authorization: Bearer $CROSSRISK_PROVIDER_KEY,
                     Content-Type: application/json
            body: {"model": <model_name>, "prompt": <rendered template>,
                   "max_tokens": <int>}

  response  200 with JSON body {"completion": <string>} where the string
            itself parses as {"sentiment": <number in [-1,1]>,
            "risk_tags": [<closed-vocabulary tags>], "rationale": <string>}

Free-text answers are rejected, not scraped: a reply that fails schema
validation counts as a retryable failure and becomes ProviderUnparseable
once retries are exhausted. Timeouts and 5xx responses retry the same
way and end in ProviderTimeout. Documents are scored with bounded
parallelism and merged in document order.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import Callable, Optional, Sequence

from ..errors import CredentialMissing, ProviderTimeout, ProviderUnparseable
from ..model import NewsDocument, format_timestamp
from .insight import RISK_TAG_VOCABULARY, ProviderSpec, TextInsight

CREDENTIAL_ENV = "CROSSRISK_PROVIDER_KEY"
DEFAULT_MAX_TOKENS = 256

# transport(url, body, headers, timeout) -> (status_code, response_json)
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]


def load_prompt_template(template_id: str) -> str:
    path = resources.files("crossrisk.textinsight").joinpath(f"data/prompts/{template_id}.txt")
    try:
        return path.read_text()
    except FileNotFoundError:
        raise ValueError(f"unknown prompt template: {template_id!r}") from None


def render_prompt(template_id: str, docs: Sequence[NewsDocument]) -> str:
    """Render the versioned template over the document batch."""
    rendered = "\n".join(
        f"- [{format_timestamp(d.timestamp)}] {d.headline} :: {d.body}" for d in docs
    )
    return load_prompt_template(template_id).replace("{documents}", rendered)


def build_request(spec: ProviderSpec, docs: Sequence[NewsDocument], max_tokens: int = DEFAULT_MAX_TOKENS) -> dict:
    return {
        "model": spec.model_name,
        "prompt": render_prompt(spec.prompt_template_id, docs),
        "max_tokens": max_tokens,
    }


def parse_insight_fields(completion: str) -> tuple[float, frozenset[str], str]:
    """Parse a completion string into (sentiment, risk_tags, rationale).

    Raises ProviderUnparseable on any schema violation.
    """
    try:
        payload = json.loads(completion)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ProviderUnparseable(f"completion is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ProviderUnparseable("completion must be a JSON object")
    missing = {"sentiment", "risk_tags", "rationale"} - set(payload)
    if missing:
        raise ProviderUnparseable(f"completion lacks fields: {sorted(missing)}")
    sentiment = payload["sentiment"]
    if not isinstance(sentiment, (int, float)) or isinstance(sentiment, bool):
        raise ProviderUnparseable("sentiment must be a number")
    if not (-1.0 <= float(sentiment) <= 1.0):
        raise ProviderUnparseable(f"sentiment out of range: {sentiment!r}")
    tags = payload["risk_tags"]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ProviderUnparseable("risk_tags must be a list of strings")
    bad = set(tags) - RISK_TAG_VOCABULARY
    if bad:
        raise ProviderUnparseable(f"risk_tags outside vocabulary: {sorted(bad)}")
    rationale = payload["rationale"]
    if not isinstance(rationale, str):
        raise ProviderUnparseable("rationale must be a string")
    return float(sentiment), frozenset(tags), rationale


def parse_response(body: dict) -> tuple[float, frozenset[str], str]:
    if not isinstance(body, dict) or "completion" not in body:
        raise ProviderUnparseable("response body lacks a 'completion' field")
    return parse_insight_fields(body["completion"])


def insight_to_response(insight: TextInsight) -> dict:
    """Serialize an insight into the provider response schema (round-trips)."""
    completion = json.dumps(
        {
            "sentiment": insight.sentiment,
            "risk_tags": sorted(insight.risk_tags),
            "rationale": insight.rationale,
        },
        sort_keys=True,
    )
    return {"completion": completion}


def _requests_transport(url: str, body: dict, headers: dict, timeout: float) -> tuple[int, dict]:
    import requests

    try:
        resp = requests.post(url, json=body, headers=headers, timeout=timeout)
    except requests.Timeout as exc:
        raise TimeoutError(str(exc)) from exc
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    try:
        return resp.status_code, resp.json()
    except ValueError:
        return resp.status_code, {}


class RemoteCompletionClient:
    """Scores document batches against a remote completion endpoint."""

    def __init__(self, spec: ProviderSpec, transport: Optional[Transport] = None):
        self.spec = spec
        self._transport = transport or _requests_transport

    def _credential(self) -> str:
        key = os.environ.get(CREDENTIAL_ENV, "")
        if not key:
            raise CredentialMissing(f"set {CREDENTIAL_ENV} to use the remote provider")
        return key

    def score_documents(self, docs: Sequence[NewsDocument]) -> list[TextInsight]:
        """One insight per document, in document order."""
        key = self._credential()
        if not docs:
            return []
        workers = min(self.spec.parallelism, len(docs))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda d: self._score_one(d, key), docs))

    def _score_one(self, doc: NewsDocument, key: str) -> TextInsight:
        headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }
        body = build_request(self.spec, [doc])
        attempts = self.spec.max_retries + 1
        last_error: Exception = ProviderTimeout("no attempt made")
        for _ in range(attempts):
            try:
                status, payload = self._transport(self.spec.endpoint, body, headers, self.spec.timeout)
            except (TimeoutError, ConnectionError) as exc:
                last_error = ProviderTimeout(f"provider unreachable: {exc}")
                continue
            if status >= 500:
                last_error = ProviderTimeout(f"provider returned {status}")
                continue
            if status != 200:
                last_error = ProviderUnparseable(f"provider returned {status}: {payload}")
                continue
            try:
                sentiment, tags, rationale = parse_response(payload)
            except ProviderUnparseable as exc:
                last_error = exc
                continue
            return TextInsight(
                timestamp=doc.timestamp,
                sentiment=sentiment,
                risk_tags=tags,
                rationale=rationale,
                document_count=1,
            )
        raise last_error
