"""Engine configuration: strict keyed plain-text files.

Flat `key = value` sections, parsed with configparser but validated
strictly: unknown sections or keys are errors, every value is
range-checked, and omitted keys get documented defaults that are echoed
back in the resolved dump so a run's effective parameters are always
auditable. Violations are collected and reported together, each naming
its `section.key` path.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .engine import EngineParams
from .errors import ConfigError, FileUnreadable
from .ingest import IntegrationMethod, SourceAdapterConfig
from .model import AssetClass, Instrument, SourceKind, check_token
from .textinsight import ProviderKind, ProviderSpec

_SECTION_KEYS = {
    "data": {"bars", "news"},
    "risk": {"beta1", "beta2", "window"},
    "context": {
        "kappa",
        "alpha",
        "provider",
        "endpoint",
        "model_name",
        "timeout",
        "max_retries",
        "prompt_template_id",
        "parallelism",
    },
    "alerts": {"threshold", "risk_trigger", "flat_band"},
    "learner": {"learning_rate", "floor"},
}
_SOURCE_KEYS = {"kind", "file", "method", "allow_method_mismatch"}


@dataclass
class EngineConfig:
    params: EngineParams = field(default_factory=EngineParams)
    provider: ProviderSpec = field(default_factory=ProviderSpec)
    sources: list[SourceAdapterConfig] = field(default_factory=list)
    bar_paths: list[Path] = field(default_factory=list)
    news_paths: list[Path] = field(default_factory=list)
    instruments: dict[str, Instrument] = field(default_factory=dict)

    def source_kinds(self) -> dict[str, SourceKind]:
        return {s.source_id: s.source_kind for s in self.sources}


class _Collector:
    def __init__(self):
        self.violations: list[str] = []

    def error(self, path: str, message: str) -> None:
        self.violations.append(f"{path}: {message}")

    def parse(self, path: str, raw: Optional[str], kind, default, check=None):
        if raw is None:
            return default
        try:
            value = kind(raw)
        except (TypeError, ValueError):
            self.error(path, f"cannot parse {raw!r} as {kind.__name__}")
            return default
        if check is not None:
            message = check(value)
            if message:
                self.error(path, message)
                return default
        return value


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(raw)


def _split_paths(raw: str) -> list[Path]:
    return [Path(part.strip()) for part in raw.split(",") if part.strip()]


def load_config(path) -> EngineConfig:
    """Parse and validate a config file; raises ConfigError listing all violations."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # ids are case-sensitive tokens
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise FileUnreadable(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc

    c = _Collector()
    for section in parser.sections():
        if section in _SECTION_KEYS:
            unknown = set(parser[section]) - _SECTION_KEYS[section]
            for key in sorted(unknown):
                c.error(f"{section}.{key}", "unknown key")
        elif section.startswith("source."):
            unknown = set(parser[section]) - _SOURCE_KEYS
            for key in sorted(unknown):
                c.error(f"{section}.{key}", "unknown key")
        elif section != "instruments":
            c.error(section, "unknown section")

    def get(section: str, key: str) -> Optional[str]:
        return parser.get(section, key, fallback=None)

    beta1 = c.parse("risk.beta1", get("risk", "beta1"), float, 1.0,
                    lambda v: None if v >= 0 else "must be >= 0")
    beta2 = c.parse("risk.beta2", get("risk", "beta2"), float, 1.0,
                    lambda v: None if v >= 0 else "must be >= 0")
    window = c.parse("risk.window", get("risk", "window"), int, 30,
                     lambda v: None if v >= 2 else "must be >= 2")
    kappa = c.parse("context.kappa", get("context", "kappa"), float, 0.5,
                    lambda v: None if v >= 0 else "must be >= 0")
    alpha = c.parse("context.alpha", get("context", "alpha"), float, 0.6,
                    lambda v: None if 0 <= v <= 1 else "must lie in [0, 1]")
    threshold = c.parse("alerts.threshold", get("alerts", "threshold"), float, 0.75,
                        lambda v: None if 0 <= v <= 1 else "must lie in [0, 1]")
    flat_band = c.parse("alerts.flat_band", get("alerts", "flat_band"), float, 0.05,
                        lambda v: None if v >= 0 else "must be >= 0")
    raw_trigger = get("alerts", "risk_trigger")
    risk_trigger: Optional[float] = None
    if raw_trigger is not None and raw_trigger.strip().lower() != "auto":
        risk_trigger = c.parse("alerts.risk_trigger", raw_trigger, float, None)
    learning_rate = c.parse("learner.learning_rate", get("learner", "learning_rate"), float, 0.05,
                            lambda v: None if v > 0 else "must be > 0")
    floor = c.parse("learner.floor", get("learner", "floor"), float, 0.01,
                    lambda v: None if 0 < v < 1 else "must lie in (0, 1)")

    provider_kind = c.parse(
        "context.provider", get("context", "provider"), ProviderKind,
        ProviderKind.LEXICON_STUB,
    )
    endpoint = get("context", "endpoint") or ""
    model_name = get("context", "model_name") or "lexicon-stub"
    timeout = c.parse("context.timeout", get("context", "timeout"), float, 10.0,
                      lambda v: None if v > 0 else "must be > 0")
    max_retries = c.parse("context.max_retries", get("context", "max_retries"), int, 2,
                          lambda v: None if v >= 0 else "must be >= 0")
    template_id = get("context", "prompt_template_id") or "risk-insight-v1"
    parallelism = c.parse("context.parallelism", get("context", "parallelism"), int, 4,
                          lambda v: None if v >= 1 else "must be >= 1")
    if provider_kind is ProviderKind.REMOTE_COMPLETION and not endpoint:
        c.error("context.endpoint", "required for the remote provider")

    bar_paths = _split_paths(get("data", "bars") or "")
    news_paths = _split_paths(get("data", "news") or "")

    instruments: dict[str, Instrument] = {}
    if parser.has_section("instruments"):
        for inst_id, raw in parser["instruments"].items():
            parts = [p.strip() for p in raw.split(",")]
            try:
                asset_class = AssetClass(parts[0])
                quote_unit = parts[1] if len(parts) > 1 else "price-per-share"
                instruments[inst_id] = Instrument(
                    id=inst_id, asset_class=asset_class, quote_unit=quote_unit
                )
            except (ValueError, IndexError):
                c.error(f"instruments.{inst_id}", f"cannot parse {raw!r} (want asset_class[,quote_unit])")

    sources: list[SourceAdapterConfig] = []
    for section in sorted(parser.sections()):
        if not section.startswith("source."):
            continue
        source_id = section[len("source."):]
        spath = f"{section}"
        try:
            check_token(source_id, "source id")
        except ValueError as exc:
            c.error(spath, str(exc))
            continue
        kind_raw = get(section, "kind")
        file_raw = get(section, "file")
        if kind_raw is None:
            c.error(f"{spath}.kind", "required")
            continue
        if file_raw is None:
            c.error(f"{spath}.file", "required")
            continue
        try:
            kind = SourceKind(kind_raw.strip())
        except ValueError:
            c.error(f"{spath}.kind", f"unknown source kind {kind_raw!r}")
            continue
        method = None
        method_raw = get(section, "method")
        if method_raw is not None:
            try:
                method = IntegrationMethod(method_raw.strip())
            except ValueError:
                c.error(f"{spath}.method", f"unknown integration method {method_raw!r}")
                continue
        allow = c.parse(f"{spath}.allow_method_mismatch", get(section, "allow_method_mismatch"),
                        _parse_bool, False)
        try:
            sources.append(
                SourceAdapterConfig(
                    source_id=source_id,
                    source_kind=kind,
                    file_path=Path(file_raw.strip()),
                    integration_method=method,
                    allow_method_mismatch=allow,
                )
            )
        except ValueError as exc:
            c.error(f"{spath}.method", str(exc))

    if c.violations:
        raise ConfigError(sorted(c.violations))

    params = EngineParams(
        beta1=beta1,
        beta2=beta2,
        window=window,
        kappa=kappa,
        alpha=alpha,
        threshold=threshold,
        risk_trigger=risk_trigger,
        flat_band=flat_band,
        learning_rate=learning_rate,
        weight_floor=floor,
    )
    provider = ProviderSpec(
        kind=provider_kind,
        endpoint=endpoint,
        model_name=model_name,
        timeout=timeout,
        max_retries=max_retries,
        prompt_template_id=template_id,
        parallelism=parallelism,
    )
    return EngineConfig(
        params=params,
        provider=provider,
        sources=sources,
        bar_paths=bar_paths,
        news_paths=news_paths,
        instruments=instruments,
    )


def resolved_dump(config: EngineConfig) -> str:
    """Render the fully-resolved configuration, defaults included."""
    p = config.params
    pr = config.provider
    lines = [
        "[data]",
        "bars = " + ", ".join(str(x) for x in config.bar_paths),
        "news = " + ", ".join(str(x) for x in config.news_paths),
        "",
        "[risk]",
        f"beta1 = {p.beta1}",
        f"beta2 = {p.beta2}",
        f"window = {p.window}",
        "",
        "[context]",
        f"kappa = {p.kappa}",
        f"alpha = {p.alpha}",
        f"provider = {pr.kind.value}",
        f"endpoint = {pr.endpoint}",
        f"model_name = {pr.model_name}",
        f"timeout = {pr.timeout}",
        f"max_retries = {pr.max_retries}",
        f"prompt_template_id = {pr.prompt_template_id}",
        f"parallelism = {pr.parallelism}",
        "",
        "[alerts]",
        f"threshold = {p.threshold}",
        "risk_trigger = " + ("auto" if p.risk_trigger is None else str(p.risk_trigger)),
        f"flat_band = {p.flat_band}",
        "",
        "[learner]",
        f"learning_rate = {p.learning_rate}",
        f"floor = {p.weight_floor}",
        "",
        "[instruments]",
    ]
    for inst_id in sorted(config.instruments):
        inst = config.instruments[inst_id]
        lines.append(f"{inst_id} = {inst.asset_class.value},{inst.quote_unit}")
    for source in sorted(config.sources, key=lambda s: s.source_id):
        lines += [
            "",
            f"[source.{source.source_id}]",
            f"kind = {source.source_kind.value}",
            f"method = {source.integration_method.value}",
            f"file = {source.file_path}",
            f"allow_method_mismatch = {str(source.allow_method_mismatch).lower()}",
        ]
    return "\n".join(lines) + "\n"
