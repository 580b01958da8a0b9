"""Monte Carlo experiments and the closed-form quantities they are checked against.

Trials are split into fixed-size blocks; block ``b`` draws from
``SeedSequence(seed, spawn_key=(b,))``.  The block layout depends only on the
experiment parameters, so results are identical for any worker count.
"""

from __future__ import annotations

import math
import os
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial

import numpy as np
from scipy import stats

from .groups import VERDICTS, classify_tables, group_order
from .query import finalize, new_exposure, query, run_event_chain, walk_trajectory
from .words import UnimodalWord, Word, make_unimodal, positive_words_up_to

__all__ = [
    "Estimate",
    "wilson_interval",
    "SERIES_COEFFICIENTS",
    "SeriesTruncation",
    "series_value",
    "series_tolerance",
    "satisfaction_bound",
    "collision_union_bound",
    "estimate_word_identity",
    "estimate_generation",
    "order_growth_experiment",
    "default_r",
    "run_event_chain_experiment",
    "finalize_uniformity",
    "QUERY_POLICIES",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 10_000
SERIES_COEFFICIENTS = (1, 1, 4, 23, 171)
SERIES_SAFETY = 50
MAX_WORDS = 2**16


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    # keep p inside the interval despite rounding at p = 0 or 1
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


@dataclass(frozen=True)
class Estimate:
    trials: int
    successes: int
    seed: int | None = None
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes={self.successes} outside [0, trials={self.trials}]")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1 - p) / self.trials)

    def interval(self, confidence: float = 0.95) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials, confidence)

    @property
    def ci_low(self) -> float:
        return self.interval()[0]

    @property
    def ci_high(self) -> float:
        return self.interval()[1]

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "seed": self.seed,
        }


# -- closed forms -----------------------------------------------------------


def satisfaction_bound(ell: int, n: int, exact: bool = False):
    """``(2 ell / n) ** floor(n / 2 ell)``; 1 when the exponent is 0."""
    e = n // (2 * ell)
    value = Fraction(2 * ell, n) ** e
    return value if exact else float(value)


def collision_union_bound(r: int, n: int, exact: bool = False):
    """``4**r * (4 r / n) ** floor(n / 4 r)`` (vacuous above 1)."""
    e = n // (4 * r)
    value = 4**r * Fraction(4 * r, n) ** e
    return value if exact else float(value)


def default_r(n: int, c3: float = 0.5) -> int:
    """``floor(c3 * sqrt(n log n))``, at least 1."""
    return max(1, math.floor(c3 * math.sqrt(n * math.log(n)))) if n > 1 else 1


@dataclass(frozen=True)
class SeriesTruncation:
    order: int
    coefficients: tuple[int, ...] = SERIES_COEFFICIENTS

    def __post_init__(self):
        if not 0 <= self.order <= len(self.coefficients):
            raise ValueError(f"truncation order must be in 0..{len(self.coefficients)}, got {self.order}")

    def value(self, n: int, exact: bool = False):
        if n < 2:
            raise ValueError("series needs n >= 2")
        v = 1 - sum(Fraction(a, n**j) for j, a in enumerate(self.coefficients[: self.order], start=1))
        return v if exact else float(v)

    def next_term(self, n: int) -> float:
        """Size of the first omitted term; past the last known coefficient, a_5 / n^6."""
        if self.order < len(self.coefficients):
            return self.coefficients[self.order] / n ** (self.order + 1)
        return self.coefficients[-1] / n ** (len(self.coefficients) + 1)


def series_value(n: int, k: int = 5, exact: bool = False):
    """``1 - 1/n - 1/n^2 - 4/n^3 - 23/n^4 - 171/n^5`` truncated after ``k`` terms."""
    return SeriesTruncation(k).value(n, exact)


def series_tolerance(n: int, k: int, stderr: float, safety: float = SERIES_SAFETY) -> float:
    return 3 * stderr + safety * SeriesTruncation(k).next_term(n)


# -- block machinery --------------------------------------------------------


def _blocks(trials: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int]]:
    return [(b, min(block_size, trials - b * block_size)) for b in range(math.ceil(trials / block_size))]


def _seedseq(seed: int, block: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(block,))


def _py_rng(seed: int, block: int) -> random.Random:
    return random.Random(int(_seedseq(seed, block).generate_state(2, np.uint64)[0]))


def default_workers() -> int:
    return max(1, int(os.environ.get("TWOGEN_WORKERS", "1")))


def _map_blocks(fn, blocks, workers: int | None):
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")


def _sample(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    base = np.tile(np.arange(n, dtype=np.intp), (size, 1))
    return rng.permuted(base, axis=1)


def _compose_batch(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise ``p`` then ``q``."""
    return np.take_along_axis(q, p, axis=1)


def _inverse_batch(p: np.ndarray) -> np.ndarray:
    return np.argsort(p, axis=1)


def evaluate_batch(text: str, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Evaluate a word at every row pair of ``xs, ys``."""
    table = {"x": xs, "y": ys}
    if "X" in text:
        table["X"] = _inverse_batch(xs)
    if "Y" in text:
        table["Y"] = _inverse_batch(ys)
    out = np.tile(np.arange(xs.shape[1], dtype=np.intp), (xs.shape[0], 1))
    for c in text:
        out = _compose_batch(out, table[c])
    return out


# -- generation probability -------------------------------------------------


@dataclass
class GenerationReport:
    n: int
    estimate: Estimate
    verdicts: dict[str, int]

    def series(self, k: int = 5) -> float:
        return series_value(self.n, k)

    def deviation(self, k: int = 5) -> float:
        return self.estimate.p_hat - self.series(k)

    def tolerance(self, k: int = 5) -> float:
        return series_tolerance(self.n, k, self.estimate.stderr)

    def within_tolerance(self, k: int = 5) -> bool:
        return abs(self.deviation(k)) <= self.tolerance(k)


def _generation_block(block, *, n, seed):
    b, size = block
    rng = np.random.default_rng(_seedseq(seed, b))
    xs = _sample(rng, n, size)
    ys = _sample(rng, n, size)
    counts = Counter()
    if n <= 7:
        rows, mult = np.unique(np.hstack([xs, ys]), axis=0, return_counts=True)
        for row, m in zip(rows.tolist(), mult.tolist()):
            counts[classify_tables(tuple(row[:n]), tuple(row[n:])).verdict] += m
    else:
        for x, y in zip(xs.tolist(), ys.tolist()):
            counts[classify_tables(tuple(x), tuple(y)).verdict] += 1
    return counts


def estimate_generation(n: int, trials: int, seed: int, workers: int | None = None) -> GenerationReport:
    """Probability that two uniform elements of S_n generate a group containing A_n."""
    _check_trials(trials)
    t0 = time.perf_counter()
    parts = _map_blocks(partial(_generation_block, n=n, seed=seed), _blocks(trials), workers)
    total = Counter()
    for c in parts:
        total.update(c)
    verdicts = {v: total.get(v, 0) for v in VERDICTS}
    est = Estimate(trials, verdicts["alternating"] + verdicts["symmetric"], seed, time.perf_counter() - t0)
    return GenerationReport(n, est, verdicts)


# -- word identity ----------------------------------------------------------


@dataclass
class WordReport:
    word: UnimodalWord
    n: int
    estimate: Estimate
    bound: float

    @property
    def violation(self) -> bool:
        return self.estimate.ci_low > self.bound


def _word_block(block, *, text, n, seed):
    b, size = block
    rng = np.random.default_rng(_seedseq(seed, b))
    xs = _sample(rng, n, size)
    ys = _sample(rng, n, size)
    w = evaluate_batch(text, xs, ys)
    return int(np.count_nonzero((w == np.arange(n)).all(axis=1)))


def estimate_word_identity(w: UnimodalWord, n: int, trials: int, seed: int, workers: int | None = None) -> WordReport:
    """Frequency of ``w(xbar, ybar) = 1`` against ``satisfaction_bound(ell, n)``."""
    _check_trials(trials)
    t0 = time.perf_counter()
    hits = _map_blocks(partial(_word_block, text=w.w.text, n=n, seed=seed), _blocks(trials), workers)
    est = Estimate(trials, sum(hits), seed, time.perf_counter() - t0)
    return WordReport(w, n, est, satisfaction_bound(w.ell, n))


# -- order growth -----------------------------------------------------------


@dataclass
class OrderGrowthReport:
    n: int
    r: int
    collisions: Estimate
    bound: float
    verified: int = 0
    verification_failures: int = 0

    @property
    def words(self) -> int:
        return 2**self.r - 1

    @property
    def certified(self) -> Estimate:
        """Trials certifying ``|G| >= 2^r - 1`` (no two evaluations equal)."""
        c = self.collisions
        return Estimate(c.trials, c.trials - c.successes, c.seed, c.wall_time)

    @property
    def violation(self) -> bool:
        return self.collisions.p_hat > self.bound + 3 * self.collisions.stderr


def _positive_word_evaluations(xs: np.ndarray, ys: np.ndarray, r: int) -> np.ndarray:
    """Shape (2^r - 1, trials, n), words in length-lexicographic order."""
    size, n = xs.shape
    out = np.empty((2**r - 1, size, n), dtype=np.intp)
    out[0] = np.arange(n)
    start, stop = 0, 1
    for _ in range(r - 1):
        nxt = stop
        for i in range(start, stop):
            out[nxt] = _compose_batch(out[i], xs)
            out[nxt + 1] = _compose_batch(out[i], ys)
            nxt += 2
        start, stop = stop, nxt
    return out


def _order_block(block, *, n, r, seed, keep):
    b, size = block
    rng = np.random.default_rng(_seedseq(seed, b))
    xs = _sample(rng, n, size)
    ys = _sample(rng, n, size)
    words = 2**r - 1
    chunk = max(1, min(size, 2_000_000 // (words * n)))
    collisions = 0
    kept = []
    for lo in range(0, size, chunk):
        ev = _positive_word_evaluations(xs[lo : lo + chunk], ys[lo : lo + chunk], r)
        for t in range(ev.shape[1]):
            # set membership compares the full image tables, not just hashes
            distinct = {ev[i, t].tobytes() for i in range(words)}
            if len(distinct) < words:
                collisions += 1
            elif len(kept) < keep:
                kept.append((tuple(xs[lo + t].tolist()), tuple(ys[lo + t].tolist())))
    return collisions, kept


def order_growth_experiment(
    n: int,
    r: int | None,
    trials: int,
    seed: int,
    *,
    c3: float = 0.5,
    verify: int = 20,
    max_words: int = MAX_WORDS,
    workers: int | None = None,
) -> OrderGrowthReport:
    """Look for equal pairs among the 2^r - 1 positive words of length < r.

    ``verify`` collision-free trials are re-checked with an exact
    :func:`group_order` computation.
    """
    _check_trials(trials)
    if r is None:
        r = default_r(n, c3)
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    if 2**r - 1 > max_words:
        raise OverflowError(f"2^{r} - 1 = {2**r - 1} word evaluations per trial exceeds the budget of {max_words}")
    t0 = time.perf_counter()
    fn = partial(_order_block, n=n, r=r, seed=seed, keep=verify)
    parts = _map_blocks(fn, _blocks(trials), workers)
    collisions = sum(p[0] for p in parts)
    sample = [pair for p in parts for pair in p[1]][:verify]
    failures = sum(group_order(list(pair), n) < 2**r - 1 for pair in sample)
    est = Estimate(trials, collisions, seed, time.perf_counter() - t0)
    return OrderGrowthReport(n, r, est, collision_union_bound(r, n), len(sample), failures)


# -- event chain ------------------------------------------------------------


@dataclass
class ChainStepStats:
    i: int
    attempts: int  # trials in which E_1, ..., E_{i-1} held
    held: int
    bound: float  # ell / (n - i ell)

    @property
    def estimate(self) -> Estimate:
        return Estimate(self.attempts, self.held)

    def exceeds(self, min_samples: int = 100) -> bool:
        if self.attempts < min_samples:
            return False
        e = self.estimate
        return e.p_hat > self.bound + 3 * e.stderr


@dataclass
class ChainExperimentReport:
    n: int
    word: UnimodalWord
    k: int
    trials: int
    seed: int
    steps: list[ChainStepStats]
    full_chain: Estimate
    violations: int
    unflagged_hits: int  # E_i held but the free choice onto omega_i was not flagged a coincidence
    logs: list = field(default_factory=list, repr=False)

    @property
    def product_bound(self) -> float:
        ell = self.word.ell
        return math.prod(ell / (self.n - i * ell) for i in range(1, self.k + 1))

    @property
    def bound(self) -> float:
        return satisfaction_bound(self.word.ell, self.n)

    def exceeded_steps(self, min_samples: int = 100) -> list[ChainStepStats]:
        return [s for s in self.steps if s.exceeds(min_samples)]

    @property
    def violation(self) -> bool:
        fc = self.full_chain
        return bool(self.violations or self.exceeded_steps() or fc.p_hat > self.product_bound + 3 * fc.stderr)


def _chain_block(block, *, n, u, v, k, seed, keep_logs):
    b, size = block
    w = make_unimodal(u, v)
    rng = _py_rng(seed, b)
    attempts = [0] * (k + 1)
    held = [0] * (k + 1)
    full = violations = unflagged = 0
    logs = []
    for t in range(size):
        rep = run_event_chain(n, w, k, rng, strict=False)
        for step in rep.steps:
            attempts[step.i] += 1
            if step.held:
                held[step.i] += 1
                if not step.coincidence_hit:
                    unflagged += 1
            violations += step.violation
        full += rep.all_held
        if len(logs) < keep_logs:
            logs.append((b * BLOCK_SIZE + t, rep))
    return attempts, held, full, violations, unflagged, logs


def run_event_chain_experiment(
    n: int,
    w: UnimodalWord,
    k: int | None,
    trials: int,
    seed: int,
    *,
    workers: int | None = None,
    keep_logs: int = 0,
) -> ChainExperimentReport:
    """Conditional frequencies of E_i given E_1, ..., E_{i-1}, against ``ell / (n - i ell)``."""
    _check_trials(trials)
    ell = w.ell
    kmax = n // (2 * ell)
    k = kmax if k is None else k
    if not 1 <= k <= kmax:
        raise ValueError(f"k={k} must satisfy 1 <= k <= floor(n / 2l) = {kmax}")
    t0 = time.perf_counter()
    fn = partial(_chain_block, n=n, u=w.u.text, v=w.v.text, k=k, seed=seed, keep_logs=keep_logs)
    parts = _map_blocks(fn, _blocks(trials), workers)
    attempts = [sum(p[0][i] for p in parts) for i in range(k + 1)]
    held = [sum(p[1][i] for p in parts) for i in range(k + 1)]
    steps = [ChainStepStats(i, attempts[i], held[i], ell / (n - i * ell)) for i in range(1, k + 1)]
    full = Estimate(trials, sum(p[2] for p in parts), seed, time.perf_counter() - t0)
    logs = [log for p in parts for log in p[5]][:keep_logs]
    return ChainExperimentReport(
        n, w, k, trials, seed, steps, full,
        violations=sum(p[3] for p in parts),
        unflagged_hits=sum(p[4] for p in parts),
        logs=logs,
    )


# -- query-model uniformity -------------------------------------------------


def _policy_none(e):
    pass


def _policy_single_query(e):
    query(e, "x", 0)


def _policy_trajectory(e):
    walk_trajectory(e, "xyXY", 0)


def _policy_adaptive(e):
    # the second walk depends on what the first revealed
    log = walk_trajectory(e, "xY", 0)
    if log.returned():
        walk_trajectory(e, "yx", e.n - 1)
    else:
        query(e, "X", log.end)


QUERY_POLICIES = {
    "none": _policy_none,
    "single-query": _policy_single_query,
    "trajectory": _policy_trajectory,
    "adaptive": _policy_adaptive,
}


def _uniformity_block(block, *, n, policy, seed):
    b, size = block
    rng = _py_rng(seed, b)
    act = QUERY_POLICIES[policy]
    counts = Counter()
    for _ in range(size):
        e = new_exposure(n, rng)
        act(e)
        x, y = finalize(e)
        counts[x.images, y.images] += 1
    return counts


@dataclass
class UniformityReport:
    n: int
    policy: str
    samples: int
    counts: dict
    statistic: float
    p_value: float


def finalize_uniformity(n: int, policy: str, samples: int, seed: int, workers: int | None = None) -> UniformityReport:
    """Chi-square test of ``finalize`` output against uniform on S_n x S_n."""
    from itertools import permutations

    if policy not in QUERY_POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {sorted(QUERY_POLICIES)}")
    _check_trials(samples)
    parts = _map_blocks(partial(_uniformity_block, n=n, policy=policy, seed=seed), _blocks(samples), workers)
    total = Counter()
    for c in parts:
        total.update(c)
    perms = list(permutations(range(n)))
    observed = [total.get((x, y), 0) for x in perms for y in perms]
    chi = stats.chisquare(observed)
    return UniformityReport(n, policy, samples, dict(total), float(chi.statistic), float(chi.pvalue))
