from .insight import (
    DEFAULT_KAPPA,
    NEGATIVE_WORDS,
    POSITIVE_WORDS,
    RISK_TAG_VOCABULARY,
    TAG_TRIGGERS,
    ProviderKind,
    ProviderSpec,
    TextInsight,
    analyze_batch,
    context_adjustment,
    extract_tags,
    merge_insights,
    stub_score,
    tokenize,
)

__all__ = [
    "DEFAULT_KAPPA",
    "NEGATIVE_WORDS",
    "POSITIVE_WORDS",
    "RISK_TAG_VOCABULARY",
    "TAG_TRIGGERS",
    "ProviderKind",
    "ProviderSpec",
    "TextInsight",
    "analyze_batch",
    "context_adjustment",
    "extract_tags",
    "merge_insights",
    "stub_score",
    "tokenize",
]
