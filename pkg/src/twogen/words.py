"""Words in the free group on x, y.

A word is written as a string over ``x, y, X, Y`` where ``X = x^-1`` and
``Y = y^-1``.  Positive words use only ``x`` and ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .perm import Permutation, compose, identity, inverse

__all__ = [
    "Letter",
    "Word",
    "UnimodalWord",
    "make_unimodal",
    "evaluate",
    "free_reduce",
    "positive_words_up_to",
    "MAX_ENUMERATION",
]

ALPHABET = "xyXY"
# positive_words_up_to refuses to materialise more words than this
MAX_ENUMERATION = 2**24


class Letter(NamedTuple):
    generator: str  # "x" or "y"
    sign: int  # +1 or -1

    @classmethod
    def from_char(cls, c: str) -> "Letter":
        if c not in ALPHABET:
            raise ValueError(f"invalid letter {c!r}; expected one of {ALPHABET}")
        return cls(c.lower(), 1 if c.islower() else -1)

    @property
    def char(self) -> str:
        return self.generator if self.sign > 0 else self.generator.upper()

    def inverse(self) -> "Letter":
        return Letter(self.generator, -self.sign)


def _check(text: str) -> str:
    bad = set(text) - set(ALPHABET)
    if bad:
        raise ValueError(f"invalid letters {sorted(bad)} in word {text!r}")
    return text


def free_reduce(text: str) -> str:
    stack: list[str] = []
    for c in text:
        if stack and stack[-1] == c.swapcase():
            stack.pop()
        else:
            stack.append(c)
    return "".join(stack)


def _cyclic_reduce(text: str) -> tuple[str, str]:
    """Return ``(core, prefix)`` with ``text == prefix + core + prefix^-1``."""
    i, j = 0, len(text)
    while j - i >= 2 and text[i] == text[j - 1].swapcase():
        i += 1
        j -= 1
    return text[i:j], text[:i]


@dataclass(frozen=True)
class Word:
    text: str = ""

    def __post_init__(self):
        _check(self.text)

    @property
    def letters(self) -> tuple[Letter, ...]:
        return tuple(Letter.from_char(c) for c in self.text)

    def __len__(self) -> int:
        return len(self.text)

    def __str__(self) -> str:
        return self.text or "ε"

    def __add__(self, other: "Word") -> "Word":
        return Word(self.text + other.text)

    def inverse(self) -> "Word":
        return Word(self.text[::-1].swapcase())

    @property
    def is_positive(self) -> bool:
        return all(c in "xy" for c in self.text)

    @property
    def freely_reduced(self) -> bool:
        return free_reduce(self.text) == self.text

    @property
    def cyclically_reduced(self) -> bool:
        t = self.text
        return self.freely_reduced and (len(t) <= 1 or t[0] != t[-1].swapcase())

    def reduced(self) -> "Word":
        return Word(free_reduce(self.text))

    def cyclically_reduced_form(self) -> "Word":
        return Word(_cyclic_reduce(free_reduce(self.text))[0])


@dataclass(frozen=True)
class UnimodalWord:
    """``w = u v^-1`` for distinct positive words ``u, v``.

    ``w`` is the cyclic reduction, which is conjugate to ``u v^-1`` by
    ``conjugator``: ``u v^-1 == conjugator . w . conjugator^-1``.  ``ell`` is
    ``len(u) + len(v)``, the length used in every bound.
    """

    u: Word
    v: Word
    w: Word
    conjugator: Word

    @property
    def ell(self) -> int:
        return len(self.u) + len(self.v)

    @property
    def unreduced(self) -> Word:
        return self.u + self.v.inverse()

    def __str__(self) -> str:
        return f"{self.u}·({self.v})⁻¹"


def make_unimodal(u: str | Word, v: str | Word) -> UnimodalWord:
    u = u if isinstance(u, Word) else Word(u)
    v = v if isinstance(v, Word) else Word(v)
    if not (u.is_positive and v.is_positive):
        raise ValueError(f"u and v must be positive words over {{x, y}}, got {u.text!r}, {v.text!r}")
    if u.text == v.text:
        raise ValueError(f"u and v must be distinct (u = v = {u.text!r} gives the trivial word)")
    core, prefix = _cyclic_reduce(free_reduce(u.text + v.inverse().text))
    return UnimodalWord(u, v, Word(core), Word(prefix))


def evaluate(w: Word | str, xbar: Permutation, ybar: Permutation) -> Permutation:
    """``w(xbar, ybar)``, letters applied left to right."""
    text = w.text if isinstance(w, Word) else _check(w)
    if xbar.degree != ybar.degree:
        raise ValueError(f"degree mismatch: {xbar.degree} vs {ybar.degree}")
    table = {"x": xbar, "y": ybar, "X": inverse(xbar), "Y": inverse(ybar)}
    result = identity(xbar.degree)
    for c in text:
        result = compose(result, table[c])
    return result


def positive_words_up_to(r: int) -> list[Word]:
    """All positive words of length < r in length-lexicographic order (2^r - 1 words)."""
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    count = 2**r - 1
    if count > MAX_ENUMERATION:
        raise OverflowError(f"{count} words exceeds the enumeration capacity {MAX_ENUMERATION}")
    words = [""]
    layer = [""]
    for _ in range(r - 1):
        layer = [t + c for t in layer for c in "xy"]
        words.extend(layer)
    return [Word(t) for t in words]
