"""Random two-generator subgroups of S_n: query model, group classification, estimators."""

from .exact import exact_generation_probability, exact_word_identity_probability
from .groups import classify, group_order
from .perm import Permutation
from .words import UnimodalWord, Word, make_unimodal

__all__ = [
    "Permutation",
    "Word",
    "UnimodalWord",
    "make_unimodal",
    "classify",
    "group_order",
    "exact_generation_probability",
    "exact_word_identity_probability",
]
