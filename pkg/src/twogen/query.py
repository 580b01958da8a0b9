"""Lazy exposure of two random permutations.

``xbar`` and ``ybar`` start completely unknown.  A query asks for the image of
a point under one of ``x, X, y, Y`` (capitals are inverses).  Known values
come back as *forced* choices; otherwise the value is drawn uniformly from
the points not yet used as images in that direction (a *free* choice).  A
free choice is a *coincidence* when its result already lies in the known
domain of any of the four maps.  Completing the partial maps uniformly at
random yields a uniform pair in S_n x S_n whatever the (adaptive) query
history was.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from .perm import Permutation, as_rng
from .words import UnimodalWord, Word

__all__ = [
    "PartialPermutation",
    "Exposure",
    "QueryResult",
    "TrajectoryStep",
    "TrajectoryLog",
    "ChainStep",
    "ChainReport",
    "ExposureFinalized",
    "CoincidenceViolation",
    "new_exposure",
    "query",
    "walk_trajectory",
    "finalize",
    "run_event_chain",
    "trajectory_records",
    "write_jsonl",
]

FORCED = "forced"
FREE = "free"


class ExposureFinalized(RuntimeError):
    pass


class CoincidenceViolation(AssertionError):
    """An event E_i held without any free choice landing on its start point."""


class PartialPermutation:
    """Injective partial map with its inverse kept in sync."""

    __slots__ = ("degree", "forward", "backward")

    def __init__(self, degree: int):
        self.degree = degree
        self.forward: dict[int, int] = {}
        self.backward: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.forward)

    def set(self, a: int, b: int) -> None:
        if a in self.forward or b in self.backward:
            raise ValueError(f"({a} -> {b}) conflicts with known values")
        self.forward[a] = b
        self.backward[b] = a

    def is_complete(self) -> bool:
        return len(self.forward) == self.degree


class QueryResult(NamedTuple):
    value: int
    kind: str  # "forced" | "free"
    coincidence: bool
    # number of candidates the free choice was drawn from (None when forced)
    pool: int | None = None

    @property
    def free(self) -> bool:
        return self.kind == FREE


class Exposure:
    __slots__ = ("n", "x", "y", "rng", "queries", "finalized", "_maps")

    def __init__(self, n: int, seed=None):
        if n < 1:
            raise ValueError(f"invalid degree {n}")
        self.n = n
        self.x = PartialPermutation(n)
        self.y = PartialPermutation(n)
        self.rng = as_rng(seed)
        self.queries = 0
        self.finalized = False
        # letter -> (map queried, map of its inverse)
        self._maps = {
            "x": (self.x.forward, self.x.backward),
            "X": (self.x.backward, self.x.forward),
            "y": (self.y.forward, self.y.backward),
            "Y": (self.y.backward, self.y.forward),
        }

    @property
    def known_pairs(self) -> int:
        return len(self.x) + len(self.y)

    def in_known_domain(self, point: int) -> bool:
        x, y = self.x, self.y
        return point in x.forward or point in x.backward or point in y.forward or point in y.backward


def new_exposure(n: int, seed=None) -> Exposure:
    """Fresh exposure; ``seed`` may be an int or a shared ``random.Random``."""
    return Exposure(n, seed)


def _draw_outside(used: dict, n: int, rng) -> int:
    # rejection keeps this O(1) expected while at most half the points are used
    if 2 * len(used) <= n:
        randrange = rng.randrange
        v = randrange(n)
        while v in used:
            v = randrange(n)
        return v
    pool = [i for i in range(n) if i not in used]
    return pool[rng.randrange(len(pool))]


def query(e: Exposure, pi: str, omega: int) -> QueryResult:
    """Image of ``omega`` under ``pi`` (one of ``x, X, y, Y``)."""
    if e.finalized:
        raise ExposureFinalized("query after finalize")
    if not 0 <= omega < e.n:
        raise ValueError(f"point {omega} out of range for degree {e.n}")
    try:
        known, other = e._maps[pi]
    except KeyError:
        raise ValueError(f"invalid query direction {pi!r}") from None
    e.queries += 1
    v = known.get(omega)
    if v is not None:
        return QueryResult(v, FORCED, False)
    pool = e.n - len(other)
    v = _draw_outside(other, e.n, e.rng)
    coincidence = e.in_known_domain(v)
    known[omega] = v
    other[v] = omega
    return QueryResult(v, FREE, coincidence, pool)


class TrajectoryStep(NamedTuple):
    letter: str
    point: int
    result: QueryResult


@dataclass
class TrajectoryLog:
    start: int
    steps: list[TrajectoryStep] = field(default_factory=list)

    @property
    def end(self) -> int:
        return self.steps[-1].result.value if self.steps else self.start

    @property
    def points(self) -> list[int]:
        return [self.start] + [s.result.value for s in self.steps]

    def returned(self) -> bool:
        return self.end == self.start


def walk_trajectory(e: Exposure, w: Word | str, omega: int) -> TrajectoryLog:
    """Query ``omega^{w_1}, omega^{w_1 w_2}, ...`` one letter at a time."""
    text = w.text if isinstance(w, Word) else Word(w).text
    if not text:
        raise ValueError("cannot walk the empty word")
    log = TrajectoryLog(omega)
    point = omega
    for c in text:
        res = query(e, c, point)
        log.steps.append(TrajectoryStep(c, point, res))
        point = res.value
    return log


def finalize(e: Exposure) -> tuple[Permutation, Permutation]:
    """Complete ``xbar`` then ``ybar`` by a uniform matching of unknown points.

    The exposure is closed afterwards; its partial maps are left as they were.
    """
    if e.finalized:
        raise ExposureFinalized("exposure already finalized")
    n = e.n
    out = []
    for pp in (e.x, e.y):
        fwd, bwd = pp.forward, pp.backward
        if len(fwd) == n:
            images = tuple(fwd[i] for i in range(n))
        else:
            free_range = [i for i in range(n) if i not in bwd]
            e.rng.shuffle(free_range)
            it = iter(free_range)
            get = fwd.get
            images = tuple([get(i) if i in fwd else next(it) for i in range(n)])
        out.append(Permutation._trusted(images))
    e.finalized = True
    return out[0], out[1]


@dataclass(frozen=True)
class ChainStep:
    i: int  # 1-based step index
    start: int
    held: bool  # the event E_i: the trajectory returned to its start
    hit_start: bool  # some free choice in the trajectory returned the start point
    coincidence_hit: bool  # ... and that free choice was flagged a coincidence
    log: TrajectoryLog

    @property
    def violation(self) -> bool:
        return self.held and not self.hit_start


@dataclass
class ChainReport:
    n: int
    word: UnimodalWord | Word
    k: int
    steps: list[ChainStep] = field(default_factory=list)

    @property
    def all_held(self) -> bool:
        return len(self.steps) == self.k and all(s.held for s in self.steps)

    @property
    def violations(self) -> int:
        return sum(s.violation for s in self.steps)


def run_event_chain(
    n: int,
    w: UnimodalWord | Word,
    k: int,
    seed=None,
    *,
    stop_on_failure: bool = True,
    strict: bool = True,
) -> ChainReport:
    """Walk the trajectories of fresh points omega_1, ..., omega_k under ``w``.

    Each start point is the smallest point outside every earlier trajectory.
    With ``stop_on_failure`` the chain ends at the first i where E_i fails,
    so later steps are sampled conditionally on E_1, ..., E_{i-1}.
    ``strict`` raises :class:`CoincidenceViolation` if some E_i holds with
    no free choice landing on omega_i.

    A plain :class:`Word` (walked as given, with l = its length) is accepted
    for comparison with words not of the form u v^-1, where such violations
    do occur.
    """
    if isinstance(w, UnimodalWord):
        text, ell = w.w.text, w.ell
    else:
        text, ell = w.text, len(w)
        if not text:
            raise ValueError("cannot walk the empty word")
    if k < 0 or k > n // (2 * ell):
        raise ValueError(f"k={k} must satisfy 0 <= k <= floor(n / 2l) = {n // (2 * ell)}")
    e = new_exposure(n, seed)
    report = ChainReport(n, w, k)
    visited: set[int] = set()
    fresh = 0
    for i in range(1, k + 1):
        while fresh in visited:
            fresh += 1
        if fresh >= n:
            raise AssertionError("no fresh start point left")
        omega = fresh
        log = walk_trajectory(e, text, omega)
        visited.update(log.points)
        hit = coinc = False
        for s in log.steps:
            r = s.result
            if r.kind == FREE and r.value == omega:
                hit = True
                coinc = coinc or r.coincidence
        step = ChainStep(i, omega, log.end == omega, hit, coinc, log)
        report.steps.append(step)
        if strict and step.violation:
            raise CoincidenceViolation(
                f"E_{i} held for word {text} at degree {n} without a free choice onto {omega + 1}"
            )
        if stop_on_failure and not step.held:
            break
    return report


def trajectory_records(reports: Iterable[tuple[int, ChainReport]]) -> Iterator[dict]:
    """Flatten chain reports into audit records (points are 1-based)."""
    for trial, rep in reports:
        for step in rep.steps:
            for s in step.log.steps:
                yield {
                    "trial": trial,
                    "i": step.i,
                    "letter": s.letter,
                    "from": s.point + 1,
                    "to": s.result.value + 1,
                    "kind": s.result.kind,
                    "coincidence": s.result.coincidence,
                }


def write_jsonl(records: Iterable[dict], fh) -> None:
    for rec in records:
        fh.write(json.dumps(rec) + "\n")
