"""Strict config parsing: defaults, ranges, unknown keys."""

import pytest

from crossrisk.config import load_config, resolved_dump
from crossrisk.errors import ConfigError, FileUnreadable
from crossrisk.ingest import IntegrationMethod
from crossrisk.model import AssetClass, SourceKind
from crossrisk.textinsight import ProviderKind


def write_config(tmp_path, text):
    path = tmp_path / "engine.ini"
    path.write_text(text)
    return path


def test_minimal_config_gets_defaults(tmp_path):
    config = load_config(write_config(tmp_path, ""))
    assert config.params.threshold == 0.75
    assert config.params.window == 30
    assert config.params.beta1 == 1.0
    assert config.params.risk_trigger is None  # auto
    assert config.provider.kind is ProviderKind.LEXICON_STUB
    dump = resolved_dump(config)
    assert "threshold = 0.75" in dump
    assert "window = 30" in dump
    assert "risk_trigger = auto" in dump


def test_bad_range_names_key_path(tmp_path):
    path = write_config(tmp_path, "[risk]\nbeta1 = -1\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert any("risk.beta1" in v for v in err.value.violations)


def test_unknown_key_rejected(tmp_path):
    path = write_config(tmp_path, "[risk]\ngamma = 1.0\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert any("risk.gamma" in v for v in err.value.violations)


def test_unknown_section_rejected(tmp_path):
    path = write_config(tmp_path, "[quantum]\nstrength = 11\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_violations_are_collected_not_first_only(tmp_path):
    path = write_config(tmp_path, "[risk]\nbeta1 = -1\nbeta2 = -2\nwindow = 1\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert len(err.value.violations) == 3


def test_missing_file():
    with pytest.raises(FileUnreadable):
        load_config("/nonexistent/engine.ini")


def test_full_config_round_trip(tmp_path):
    data_file = tmp_path / "obs.csv"
    data_file.write_text("timestamp,source_id,source_kind,instrument_id,value\n")
    text = f"""
[data]
bars = bars_a.csv, bars_b.csv
news = wire.jsonl

[instruments]
eq_alpha = equity,price-per-share
fi_bund = fixed_income,yield-percent

[risk]
beta1 = 0.5
beta2 = 2.0
window = 20

[context]
kappa = 1.0
alpha = 0.7
provider = lexicon_stub

[alerts]
threshold = 0.8
risk_trigger = 0.02
flat_band = 0.01

[learner]
learning_rate = 0.1
floor = 0.02

[source.macro_feed]
kind = economic_indicators
file = {data_file}
"""
    config = load_config(write_config(tmp_path, text))
    assert config.params.beta1 == 0.5
    assert config.params.risk_trigger == 0.02
    assert [p.name for p in config.bar_paths] == ["bars_a.csv", "bars_b.csv"]
    assert config.instruments["fi_bund"].asset_class is AssetClass.FIXED_INCOME
    assert config.instruments["fi_bund"].quote_unit == "yield-percent"
    assert len(config.sources) == 1
    assert config.sources[0].source_kind is SourceKind.ECONOMIC_INDICATORS
    assert config.sources[0].integration_method is IntegrationMethod.CORRELATION_ANALYSIS
    assert config.source_kinds() == {"macro_feed": SourceKind.ECONOMIC_INDICATORS}
    dump = resolved_dump(config)
    assert "risk_trigger = 0.02" in dump
    assert "[source.macro_feed]" in dump
    assert "method = correlation_analysis" in dump


def test_source_method_mismatch_needs_override(tmp_path):
    text = """
[source.wire]
kind = market_news
file = wire.csv
method = time_series_analysis
"""
    with pytest.raises(ConfigError) as err:
        load_config(write_config(tmp_path, text))
    assert any("source.wire.method" in v for v in err.value.violations)

    text_ok = text.replace("method = time_series_analysis",
                           "method = time_series_analysis\nallow_method_mismatch = true")
    config = load_config(write_config(tmp_path, text_ok))
    assert config.sources[0].integration_method is IntegrationMethod.TIME_SERIES_ANALYSIS


def test_remote_provider_requires_endpoint(tmp_path):
    path = write_config(tmp_path, "[context]\nprovider = remote_completion\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert any("context.endpoint" in v for v in err.value.violations)


def test_shipped_default_config_is_valid():
    from pathlib import Path

    repo_default = Path(__file__).parent.parent / "scenarios" / "default.ini"
    config = load_config(repo_default)
    assert config.params.threshold == 0.75
