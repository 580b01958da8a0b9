"""Structure of the group generated by a few permutations.

Everything here works on raw image tuples internally; the public functions
accept :class:`~twogen.perm.Permutation` objects (or tuples).

Whether ``<gens>`` contains A_n is decided from the exact order only, with two
certified shortcuts that avoid a full stabiliser chain:

* a lower bound ``|G| >= n!/2`` (from a partial stabiliser chain, whose basic
  orbits can only be smaller than the true ones) forces index at most 2 in
  S_n, hence ``A_n <= G``;
* Jordan's theorem: a transitive group holding an element with a cycle of
  prime length ``p``, ``n/2 < p <= n - 3``, is primitive (the ``p``-cycle power
  cannot move blocks, and no block can hold ``p > n/2`` points) and therefore
  contains A_n.

Both are elementary; neither uses the classification of finite simple groups.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .perm import Permutation, cycle_lengths

__all__ = [
    "UnionFind",
    "orbits",
    "is_transitive",
    "is_primitive",
    "minimal_block_system",
    "group_order",
    "order_lower_bound",
    "contains_alternating",
    "classify",
    "GroupClassification",
    "NotTransitiveError",
    "VERDICTS",
    "MAX_DEGREE",
]

VERDICTS = ("intransitive", "transitive-imprimitive", "primitive-proper", "alternating", "symmetric")
MAX_DEGREE = 10_000

Perm = tuple  # image table


class NotTransitiveError(ValueError):
    pass


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        """Merge the classes of x and y; return the new root or None if already merged."""
        x, y = self.find(x), self.find(y)
        if x == y:
            return None
        if self.size[x] < self.size[y]:
            x, y = y, x
        self.parent[y] = x
        self.size[x] += self.size[y]
        return x

    def classes(self):
        out = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted(out.values())


def _tables(gens) -> list[Perm]:
    tables = [g.images if isinstance(g, Permutation) else tuple(g) for g in gens]
    if len({len(t) for t in tables}) > 1:
        raise ValueError("generators have different degrees")
    return tables


def _degree(gens, n):
    if gens:
        return len(gens[0])
    if n is None:
        raise ValueError("degree needed for an empty generator list")
    return n


def _mul(a: Perm, b: Perm) -> Perm:
    return tuple(map(b.__getitem__, a))


def _inv(a: Perm) -> Perm:
    inv = [0] * len(a)
    for i, v in enumerate(a):
        inv[v] = i
    return tuple(inv)


def _is_even(g: Perm) -> bool:
    return (len(g) - len(cycle_lengths(g))) % 2 == 0


def orbits(gens, n: int | None = None) -> list[list[int]]:
    """Orbits as sorted lists of 0-based points, ordered by smallest point."""
    gens = _tables(gens)
    n = _degree(gens, n)
    uf = UnionFind(n)
    for g in gens:
        for i, v in enumerate(g):
            if i != v:
                uf.union(i, v)
    return uf.classes()


def _orbit_of_zero_is_everything(gens: list[Perm], n: int) -> bool:
    seen = bytearray(n)
    seen[0] = 1
    stack = [0]
    count = 1
    while stack:
        a = stack.pop()
        for g in gens:
            b = g[a]
            if not seen[b]:
                seen[b] = 1
                count += 1
                stack.append(b)
    return count == n


def is_transitive(gens, n: int | None = None) -> bool:
    gens = _tables(gens)
    return _orbit_of_zero_is_everything(gens, _degree(gens, n))


def _minimal_block(gens: list[Perm], n: int, a: int, b: int) -> UnionFind:
    """Finest G-invariant partition in which a and b share a class (Atkinson)."""
    uf = UnionFind(n)
    uf.union(a, b)
    todo = [(a, b)]
    find = uf.find
    while todo:
        c, d = todo.pop()
        for g in gens:
            e, f = find(g[c]), find(g[d])
            if e != f:
                uf.union(e, f)
                todo.append((e, f))
    return uf


def minimal_block_system(gens, n: int | None = None) -> list[list[int]] | None:
    """A nontrivial block system of a transitive group, or None if primitive.

    Tries the pairs {0, 1}, {0, 2}, ... in order and returns the first minimal
    block system that is not the single block.
    """
    gens = _tables(gens)
    n = _degree(gens, n)
    if not _orbit_of_zero_is_everything(gens, n):
        raise NotTransitiveError("primitivity is only defined for transitive groups")
    for b in range(1, n):
        uf = _minimal_block(gens, n, 0, b)
        if uf.size[uf.find(0)] < n:
            return uf.classes()
    return None


def is_primitive(gens, n: int | None = None) -> tuple[bool, list[list[int]] | None]:
    """``(True, None)`` if primitive, else ``(False, block_system)``."""
    blocks = minimal_block_system(gens, n)
    return blocks is None, blocks


@lru_cache(maxsize=None)
def _jordan_primes(n: int) -> frozenset[int]:
    return frozenset(p for p in range(n // 2 + 1, n - 2) if all(p % q for q in range(2, math.isqrt(p) + 1)))


def _has_jordan_cycle(g: Perm, primes: frozenset[int]) -> bool:
    n = len(g)
    seen = bytearray(n)
    remaining = n
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = 1
            j = g[j]
            length += 1
        if length in primes:
            return True
        remaining -= length
        # a cycle longer than n/2 must lie in what is left
        if 2 * remaining <= n:
            return False
    return False


class _RandomElements:
    """Product replacement; deterministic so every caller sees a pure function."""

    def __init__(self, gens: list[Perm], seed: int = 0, slots: int = 6, warmup: int = 10):
        self.rng = random.Random(seed)
        self.slots = [gens[i % len(gens)] for i in range(max(slots, len(gens)))]
        self.acc = gens[0]
        for _ in range(warmup):
            self()

    def __call__(self) -> Perm:
        s = self.slots
        i, j = self.rng.sample(range(len(s)), 2)
        if self.rng.random() < 0.5:
            s[i] = _mul(s[i], s[j])
        else:
            s[i] = _mul(s[i], _inv(s[j]))
        self.acc = _mul(self.acc, s[i])
        return self.acc


def _jordan_certificate(gens: list[Perm], n: int, tries: int) -> bool:
    """True if some element found has a cycle of prime length in (n/2, n-3].

    Only meaningful for a transitive group; a False answer proves nothing.
    """
    primes = _jordan_primes(n)
    if not primes:
        return False
    for g in gens:
        if _has_jordan_cycle(g, primes):
            return True
    nontrivial = [g for g in gens if any(i != v for i, v in enumerate(g))]
    if not nontrivial or tries <= 0:
        return False
    rand = _RandomElements(nontrivial)
    return any(_has_jordan_cycle(rand(), primes) for _ in range(tries))


class _StabilizerChain:
    """Base and strong generating set with explicit transversals.

    Transversals only ever grow and existing coset representatives are never
    replaced, so a Schreier generator once verified stays verified.
    """

    def __init__(self, n: int):
        self.n = n
        self.id = tuple(range(n))
        self.base: list[int] = []
        self.strong: list[list[Perm]] = []  # generators of each stabiliser level
        self.trans: list[dict[int, Perm]] = []  # point -> u with base^u = point
        self.trans_inv: list[dict[int, Perm]] = []
        self.checked: list[set[tuple[int, int]]] = []  # (point, generator index) pairs

    def _grow(self, level: int, new: Perm) -> None:
        t, tinv, gens = self.trans[level], self.trans_inv[level], self.strong[level]
        queue = []
        for pt, u in list(t.items()):
            q = new[pt]
            if q not in t:
                t[q] = v = _mul(u, new)
                tinv[q] = _inv(v)
                queue.append(q)
        for pt in queue:
            u = t[pt]
            for s in gens:
                q = s[pt]
                if q not in t:
                    t[q] = v = _mul(u, s)
                    tinv[q] = _inv(v)
                    queue.append(q)

    def _new_level(self, point: int) -> None:
        self.base.append(point)
        self.strong.append([])
        self.trans.append({point: self.id})
        self.trans_inv.append({point: self.id})
        self.checked.append(set())

    def sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        base, trans_inv = self.base, self.trans_inv
        for level in range(start, len(base)):
            inv = trans_inv[level].get(g[base[level]])
            if inv is None:
                return g, level
            g = _mul(g, inv)
        return g, len(base)

    def add(self, h: Perm, start: int, stop: int) -> None:
        """Add residue ``h`` (fixing base[:stop]) to levels start..stop."""
        if stop == len(self.base):
            self._new_level(next(i for i, v in enumerate(h) if i != v))
        for level in range(start, stop + 1):
            self.strong[level].append(h)
            self._grow(level, h)

    def absorb(self, g: Perm) -> bool:
        h, j = self.sift(g)
        if j < len(self.base) or h != self.id:
            self.add(h, 0, j)
            return True
        return False

    def order(self) -> int:
        return math.prod(len(t) for t in self.trans)

    def random_phase(self, gens: list[Perm], stop_after: int, target: int | None = None) -> None:
        for g in gens:
            self.absorb(g)
        rand = _RandomElements(gens, seed=1)
        streak = 0
        while streak < stop_after:
            if target is not None and self.order() >= target:
                return
            streak = 0 if self.absorb(rand()) else streak + 1

    def complete(self) -> None:
        """Deterministic Schreier-Sims: sift every Schreier generator."""
        level = len(self.base) - 1
        while level >= 0:
            changed = False
            trans, trans_inv, checked = self.trans[level], self.trans_inv[level], self.checked[level]
            gens = self.strong[level]
            for beta, u in list(trans.items()):
                for si, s in enumerate(gens):
                    if (beta, si) in checked:
                        continue
                    g = _mul(_mul(u, s), trans_inv[s[beta]])
                    if g != self.id:
                        h, j = self.sift(g, level + 1)
                        if j < len(self.base) or h != self.id:
                            self.add(h, level + 1, j)
                            level = j
                            changed = True
                            break
                    checked.add((beta, si))
                if changed:
                    break
            if not changed:
                level -= 1


def _sign_vectors_span(gens: list[Perm], orbs: list[list[int]]) -> bool:
    """Do the per-orbit signs of ``gens`` span GF(2)^m (m = orbits of size >= 2)?

    Every index-2 subgroup of the product of the symmetric groups on the orbits
    is the kernel of a product of orbit signs, so this decides whether an
    index <= 2 subgroup of that product is all of it.
    """
    big = [o for o in orbs if len(o) >= 2]
    rows = []
    for g in gens:
        vec = 0
        for bit, orb in enumerate(big):
            cycles = 0
            seen = set()
            for a in orb:
                if a in seen:
                    continue
                cycles += 1
                while a not in seen:
                    seen.add(a)
                    a = g[a]
            if (len(orb) - cycles) % 2:
                vec |= 1 << bit
        rows.append(vec)
    rank = 0
    pivots: dict[int, int] = {}
    for vec in rows:
        while vec:
            top = vec.bit_length() - 1
            if top not in pivots:
                pivots[top] = vec
                rank += 1
                break
            vec ^= pivots[top]
    return rank == len(big)


def _chain(gens: list[Perm], n: int, *, randomized: bool, target: int | None = None) -> _StabilizerChain:
    chain = _StabilizerChain(n)
    nontrivial = [g for g in gens if g != chain.id]
    if not nontrivial:
        return chain
    if randomized:
        chain.random_phase(nontrivial, stop_after=30, target=target)
        if target is not None and chain.order() >= target:
            return chain
    else:
        for g in nontrivial:
            chain.absorb(g)
    chain.complete()
    return chain


def order_lower_bound(gens, n: int | None = None) -> int:
    """Certified lower bound on |<gens>| from a randomised stabiliser chain."""
    gens = _tables(gens)
    n = _degree(gens, n)
    chain = _StabilizerChain(n)
    nontrivial = [g for g in gens if g != chain.id]
    if nontrivial:
        chain.random_phase(nontrivial, stop_after=30)
    return chain.order()


def _alternating_order(gens: list[Perm], n: int) -> int:
    f = math.factorial(n)
    return f if any(not _is_even(g) for g in gens) else f // 2


def _order(gens: list[Perm], n: int, method: str) -> int:
    if method == "deterministic":
        return _chain(gens, n, randomized=False).order()
    if n >= 8 and _orbit_of_zero_is_everything(gens, n) and _jordan_certificate(gens, n, tries=60):
        return _alternating_order(gens, n)
    orbs = orbits(gens, n)
    full = math.prod(math.factorial(len(o)) for o in orbs)
    chain = _chain(gens, n, randomized=True, target=max(full // 2, 2))
    if 2 * chain.order() >= full:
        # index <= 2 in the product of the symmetric groups on the orbits
        return full if _sign_vectors_span(gens, orbs) else full // 2
    return chain.order()


def group_order(gens, n: int | None = None, *, method: str = "auto", max_degree: int = MAX_DEGREE) -> int:
    """Exact order of ``<gens>``.

    ``method="auto"`` uses the certified shortcuts described in the module
    docstring and otherwise a randomised chain completed by deterministic
    Schreier-Sims; ``method="deterministic"`` runs plain Schreier-Sims.
    """
    if method not in ("auto", "deterministic"):
        raise ValueError(f"unknown method {method!r}")
    gens = _tables(gens)
    n = _degree(gens, n)
    if n > max_degree:
        raise ValueError(f"degree {n} exceeds the configured maximum {max_degree}")
    if n == 1:
        return 1
    return _order(gens, n, method)


def contains_alternating(gens, n: int | None = None) -> bool:
    gens = _tables(gens)
    n = _degree(gens, n)
    return 2 * group_order(gens, n) >= math.factorial(n)


@dataclass(frozen=True)
class GroupClassification:
    """Structural verdict for ``<xbar, ybar>``.

    ``order`` is computed on first access when the verdict did not need it.
    """

    n: int
    transitive: bool
    primitive: bool | None  # None when intransitive
    verdict: str
    block_system: list[list[int]] | None = field(default=None, compare=False)
    gens: tuple = field(default=(), repr=False, compare=False)
    known_order: int | None = field(default=None, repr=False, compare=False)

    @property
    def contains_alternating(self) -> bool:
        return self.verdict in ("alternating", "symmetric")

    @cached_property
    def order(self) -> int:
        if self.known_order is not None:
            return self.known_order
        return group_order(list(self.gens), self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "transitive": self.transitive,
            "primitive": self.primitive,
            "order": str(self.order),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _classify_tables(x: Perm, y: Perm, jordan_tries: int = 200) -> GroupClassification:
    n = len(x)
    gens = [x, y]
    f = math.factorial(n)
    transitive = _orbit_of_zero_is_everything(gens, n)

    def verdict_from_order(order):
        if 2 * order < f:
            return None
        return "symmetric" if order == f else "alternating"

    if n <= 2:
        order = group_order(gens, n)
        return GroupClassification(n, transitive, True if transitive else None,
                                   verdict_from_order(order) or "intransitive", None, (x, y), order)
    if not transitive:
        return GroupClassification(n, False, None, "intransitive", None, (x, y))
    if n >= 8 and _jordan_certificate(gens, n, jordan_tries):
        order = _alternating_order(gens, n)
        return GroupClassification(n, True, True, verdict_from_order(order), None, (x, y), order)
    blocks = minimal_block_system(gens, n)
    if blocks is not None:
        return GroupClassification(n, True, False, "transitive-imprimitive", blocks, (x, y))
    order = group_order(gens, n)
    return GroupClassification(n, True, True, verdict_from_order(order) or "primitive-proper", None, (x, y), order)


@lru_cache(maxsize=1 << 16)
def _classify_cached(x: Perm, y: Perm) -> GroupClassification:
    return _classify_tables(x, y)


def classify(xbar, ybar) -> GroupClassification:
    """Classify ``<xbar, ybar>`` as one of :data:`VERDICTS`.

    ``alternating``/``symmetric`` mean the group has order n!/2 or n!
    (for n = 2 the trivial group counts as alternating).
    """
    x, y = _tables([xbar, ybar])
    return classify_tables(x, y)


def classify_tables(x: Perm, y: Perm) -> GroupClassification:
    """:func:`classify` on raw image tuples (used by the Monte Carlo loops)."""
    if len(x) <= 7:
        return _classify_cached(x, y)
    return _classify_tables(x, y)
