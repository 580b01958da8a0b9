"""Permutations of {0, ..., n-1} stored as image tables.

Points are 0-based internally and 1-based in every textual form.  Products
use the right action: ``compose(p, q)`` applies ``p`` first, then ``q``, so
that ``omega ** (p q) == (omega ** p) ** q``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Permutation",
    "CycleType",
    "identity",
    "compose",
    "inverse",
    "uniform_random",
    "cycle_type",
    "cycle_lengths",
    "as_rng",
]


def as_rng(seed) -> random.Random:
    """Return ``seed`` if it already is a ``random.Random``, else seed a new one."""
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


class Permutation:
    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        n = len(images)
        if n == 0:
            raise ValueError("invalid degree 0")
        if sorted(images) != list(range(n)):
            raise ValueError(f"not a permutation of 0..{n - 1}: {list(images)}")
        self.images = images

    @classmethod
    def _trusted(cls, images: tuple) -> "Permutation":
        # skip validation for results of operations on valid permutations
        p = object.__new__(cls)
        p.images = images
        return p

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __invert__(self) -> "Permutation":
        return inverse(self)

    def __pow__(self, k: int) -> "Permutation":
        base = self if k >= 0 else inverse(self)
        k = abs(k)
        result = identity(self.degree)
        while k:
            if k & 1:
                result = compose(result, base)
            base = compose(base, base)
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"

    def __str__(self) -> str:
        return self.cycle_string()

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.images))

    def is_even(self) -> bool:
        return cycle_type(self).even

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, each starting at its smallest point (0-based)."""
        seen = bytearray(self.degree)
        out = []
        for start, img in enumerate(self.images):
            if seen[start] or img == start:
                continue
            cyc = [start]
            seen[start] = 1
            j = img
            while j != start:
                seen[j] = 1
                cyc.append(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def one_line(self) -> str:
        """1-based image list, e.g. ``[2,3,1]``."""
        return "[" + ",".join(str(i + 1) for i in self.images) + "]"

    def cycle_string(self) -> str:
        """1-based cycle notation, e.g. ``(1 2 3)``; the identity prints as ``()``."""
        cycs = self.cycles()
        if not cycs:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cycs)

    @classmethod
    def parse(cls, text: str, degree: int | None = None) -> "Permutation":
        """Parse one-line ``[2,3,1]`` or cycle ``(1 2 3)(4 5)`` notation (1-based).

        Cycle notation needs ``degree`` unless the largest mentioned point is
        the degree.
        """
        text = text.strip()
        if text.startswith("["):
            if not text.endswith("]"):
                raise ValueError(f"unterminated image list: {text!r}")
            body = text[1:-1].strip()
            images = [int(tok) - 1 for tok in re.split(r"[,\s]+", body) if tok]
            p = cls(images)
            if degree is not None and p.degree != degree:
                raise ValueError(f"expected degree {degree}, got {p.degree}")
            return p
        if not re.fullmatch(r"(\(\s*(\d+(\s*,?\s*\d+)*)?\s*\)\s*)+", text):
            raise ValueError(f"cannot parse permutation: {text!r}")
        cycs = [
            [int(tok) - 1 for tok in re.split(r"[,\s]+", body.strip()) if tok]
            for body in re.findall(r"\(([^)]*)\)", text)
        ]
        largest = max((max(c) + 1 for c in cycs if c), default=1)
        n = largest if degree is None else degree
        if largest > n:
            raise ValueError(f"point {largest} exceeds degree {n}")
        images = list(range(n))
        seen = set()
        for c in cycs:
            if seen.intersection(c) or len(set(c)) != len(c):
                raise ValueError(f"cycles are not disjoint: {text!r}")
            seen.update(c)
            for a, b in zip(c, c[1:] + c[:1]):
                images[a] = b
        return cls(images)


@dataclass(frozen=True)
class CycleType:
    lengths: tuple[int, ...]
    degree: int

    @property
    def even(self) -> bool:
        return (self.degree - len(self.lengths)) % 2 == 0

    @property
    def parity(self) -> str:
        return "even" if self.even else "odd"


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError(f"invalid degree {n}")
    return Permutation._trusted(tuple(range(n)))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply ``p`` then ``q``."""
    if len(p.images) != len(q.images):
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    return Permutation._trusted(tuple(map(q.images.__getitem__, p.images)))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * len(p.images)
    for i, v in enumerate(p.images):
        inv[v] = i
    return Permutation._trusted(tuple(inv))


def uniform_random(n: int, rng=None) -> Permutation:
    """Uniform element of S_n by Fisher-Yates (``random.shuffle``)."""
    if n < 1:
        raise ValueError(f"invalid degree {n}")
    rng = as_rng(rng)
    images = list(range(n))
    rng.shuffle(images)
    return Permutation._trusted(tuple(images))


def cycle_lengths(images: Sequence[int]) -> list[int]:
    """Lengths of all cycles (fixed points included) of an image table."""
    n = len(images)
    seen = bytearray(n)
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = 1
            j = images[j]
            length += 1
        lengths.append(length)
    return lengths


def cycle_type(p: Permutation) -> CycleType:
    return CycleType(tuple(sorted(cycle_lengths(p.images))), p.degree)
