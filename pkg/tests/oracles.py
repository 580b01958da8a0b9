"""Brute-force references kept independent of the code they check."""

import math
from itertools import combinations


def closure(gens, n):
    """All elements of <gens> by breadth-first multiplication of image tuples."""
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = tuple(s[g[i]] for i in range(n))
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def set_partitions(points):
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def invariant_block_systems(gens, n):
    """Every nontrivial partition into equal blocks preserved by all generators."""
    out = []
    for part in set_partitions(list(range(n))):
        sizes = {len(b) for b in part}
        if len(sizes) != 1 or sizes in ({1}, {n}):
            continue
        blocks = {frozenset(b) for b in part}
        if all(frozenset(g[i] for i in b) in blocks for g in gens for b in blocks):
            out.append(sorted(sorted(b) for b in part))
    return out


def chi_square_critical(df, alpha):
    from scipy import stats

    return stats.chi2.ppf(1 - alpha, df)


def pair_count_with_common_transposition_subgroup(n=3):
    """Pairs in S_3 lying in one subgroup of order <= 2, by inclusion-exclusion."""
    subgroups = 3  # <(1 2)>, <(1 3)>, <(2 3)>
    # each subgroup holds 2 x 2 pairs; they pairwise (and triply) meet only in (e, e)
    return subgroups * 4 - math.comb(3, 2) * 1 + 1
