"""CRF named-entity tagging for BIO-labelled corpora."""

from ._seqlab import (
    BoundsError,
    Clusters,
    ConfigError,
    CorruptionError,
    DataError,
    FormatError,
    MappingError,
    Model,
    NumericError,
    SeqlabError,
    ValidationError,
    cross_validate,
    evaluate,
    kappa,
    kappa_from_rates,
    parse_conll,
    read_conll,
    repair_bio,
    split_sizes,
    to_conll,
    token_features,
    tokenize,
)

__all__ = [
    "BoundsError",
    "Clusters",
    "ConfigError",
    "CorruptionError",
    "DataError",
    "FormatError",
    "MappingError",
    "Model",
    "NumericError",
    "SeqlabError",
    "ValidationError",
    "cross_validate",
    "evaluate",
    "kappa",
    "kappa_from_rates",
    "parse_conll",
    "read_conll",
    "repair_bio",
    "split_sizes",
    "to_conll",
    "token_features",
    "tokenize",
]
