"""Exact probabilities over all ordered pairs in S_n x S_n (small n only)."""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .estimators import evaluate_batch, satisfaction_bound
from .groups import VERDICTS, classify_tables
from .words import UnimodalWord, Word

__all__ = [
    "ExactProbability",
    "ExactGeneration",
    "BoundViolation",
    "exact_generation_probability",
    "exact_word_identity_probability",
    "conjugacy_class_representatives",
]


class BoundViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ExactProbability:
    """``numerator / denominator`` with the raw pair count kept (denominator = (n!)^2)."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if not 0 <= self.numerator <= self.denominator:
            raise ValueError("probability outside [0, 1]")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        f = self.fraction
        return f"{f.numerator}/{f.denominator}"

    @property
    def decimal(self) -> str:
        return f"{float(self):.12f}"


@dataclass(frozen=True)
class ExactGeneration:
    n: int
    probability: ExactProbability
    verdicts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "probability": str(self.probability),
            "decimal": self.probability.decimal,
            "pairs": self.probability.denominator,
            "successes": self.probability.numerator,
            "verdicts": self.verdicts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def conjugacy_class_representatives(n: int) -> list[tuple[tuple[int, ...], int]]:
    """``(representative, class size)`` for every cycle type of S_n."""
    out = []
    for lam in _partitions(n):
        images = []
        start = 0
        for length in lam:
            images.extend(range(start + 1, start + length))
            images.append(start)
            start += length
        centraliser = math.prod(length**m * math.factorial(m) for length, m in Counter(lam).items())
        out.append((tuple(images), math.factorial(n) // centraliser))
    return out


def exact_generation_probability(n: int, *, method: str = "classes", allow_seven: bool = False) -> ExactGeneration:
    """Exact probability that two uniform elements of S_n generate a group containing A_n.

    ``method="classes"`` runs the first element over conjugacy class
    representatives weighted by class size (the verdict is invariant under
    simultaneous conjugation); ``method="full"`` visits all (n!)^2 pairs.
    """
    if not 2 <= n <= 6 and not (n == 7 and allow_seven):
        raise ValueError(f"exact enumeration supports 2 <= n <= 6 (n = 7 needs allow_seven), got {n}")
    if n == 7:
        warnings.warn("exact enumeration at n = 7 takes minutes", RuntimeWarning, stacklevel=2)
    perms = list(permutations(range(n)))
    if method == "classes":
        firsts = conjugacy_class_representatives(n)
    elif method == "full":
        firsts = [(p, 1) for p in perms]
    else:
        raise ValueError(f"unknown method {method!r}")
    counts = Counter()
    for x, weight in firsts:
        for y in perms:
            counts[classify_tables(x, y).verdict] += weight
    verdicts = {v: counts.get(v, 0) for v in VERDICTS}
    total = math.factorial(n) ** 2
    assert sum(verdicts.values()) == total
    prob = ExactProbability(verdicts["alternating"] + verdicts["symmetric"], total)
    return ExactGeneration(n, prob, verdicts)


def exact_word_identity_probability(w: Word | UnimodalWord, n: int) -> ExactProbability:
    """Exact ``Prob(w(xbar, ybar) = 1)``; checked against the satisfaction bound for unimodal words."""
    if not 2 <= n <= 5:
        raise ValueError(f"exact word enumeration supports 2 <= n <= 5, got {n}")
    text = w.w.text if isinstance(w, UnimodalWord) else w.text
    perms = np.array(list(permutations(range(n))), dtype=np.intp)
    m = len(perms)
    xs = np.repeat(perms, m, axis=0)
    ys = np.tile(perms, (m, 1))
    hits = int(np.count_nonzero((evaluate_batch(text, xs, ys) == np.arange(n)).all(axis=1)))
    prob = ExactProbability(hits, m * m)
    if isinstance(w, UnimodalWord) and prob.fraction > satisfaction_bound(w.ell, n, exact=True):
        raise BoundViolation(f"Prob({w.w} = 1) = {prob} exceeds the bound at n = {n}")
    return prob
