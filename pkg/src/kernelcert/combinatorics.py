"""Closed-form counts for stable k-sets, each paired with an exhaustive enumerator.

Disagreements are returned as data (CountComparison), never raised.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx


class OracleScaleError(ValueError):
    pass


@dataclass
class CountComparison:
    name: str
    params: dict
    formula: int
    enumeration: int
    agree: bool = field(init=False)

    def __post_init__(self):
        self.agree = self.formula == self.enumeration

    def to_json(self) -> dict:
        return {"lemma": self.name, **self.params, "formula": self.formula,
                "enumeration": self.enumeration, "agree": self.agree}


def binom(n, k) -> int:
    """Binomial coefficient, zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


# ---------------------------------------------------------------- stars and bars


def stars_and_bars(n, k) -> int:
    """Nonnegative integer solutions of x_1 + ... + x_k = n."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    return binom(n + k - 1, k - 1)


def enumerate_compositions(n, k):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in enumerate_compositions(n - first, k - 1):
            yield (first,) + rest


def stars_and_bars_comparison(n, k) -> CountComparison:
    return CountComparison("starsbars", {"n": n, "k": k}, stars_and_bars(n, k),
                           sum(1 for _ in enumerate_compositions(n, k)))


# ---------------------------------------------------------------- stable sets


def is_stable(s, n) -> bool:
    """No two elements cyclically consecutive in [n] (n and 1 are neighbours)."""
    ss = set(s)
    return all((x % n) + 1 not in ss for x in ss) if len(ss) > 1 or n > 1 else True


def enumerate_stable_sets(n, k) -> list:
    return [s for s in itertools.combinations(range(1, n + 1), k) if is_stable(s, n)]


def stable_count_formula(n, k) -> int:
    """The printed count C(n-k+1, k) + C(n-k, k-1)."""
    return binom(n - k + 1, k) + binom(n - k, k - 1)


def stable_count_comparison(n, k) -> CountComparison:
    return CountComparison("stablecount", {"n": n, "k": k}, stable_count_formula(n, k),
                           len(enumerate_stable_sets(n, k)))


def count_stable_containing(n, k, x) -> CountComparison:
    enum = sum(1 for s in enumerate_stable_sets(n, k) if x in s)
    return CountComparison("containing", {"n": n, "k": k, "x": x}, binom(n - k, k - 1), enum)


def enumerate_path_stable(a, b, r) -> list:
    """r-subsets of the segment a..b with no two consecutive integers (no wraparound)."""
    return [s for s in itertools.combinations(range(a, b + 1), r)
            if all(y - x >= 2 for x, y in zip(s, s[1:]))]


def segment_stable_count(a, b, r) -> CountComparison:
    if a >= b or r < 0:
        raise ValueError("need a < b and r >= 0")
    return CountComparison("segment", {"a": a, "b": b, "r": r}, binom(b - a - r + 2, r),
                           len(enumerate_path_stable(a, b, r)))


def stable_pair_counts(n, k) -> dict:
    """For every cyclically non-adjacent pair (a, b): stable k-sets containing both."""
    sets = enumerate_stable_sets(n, k)
    out = {}
    for a, b in itertools.combinations(range(1, n + 1), 2):
        if is_stable((a, b), n):
            out[a, b] = sum(1 for s in sets if a in s and b in s)
    return out


def stable_two_check(n, k) -> dict:
    """Pairs at cyclic distance two maximize the number of stable k-sets through both points."""
    counts = stable_pair_counts(n, k)
    anchor = counts.get((1, 3), 0)
    worst = max(counts.values(), default=0)
    return {"n": n, "k": k, "anchor": anchor, "max": worst, "printed_bound": binom(n + k - 1, k - 2),
            "ok": worst <= anchor}


# ---------------------------------------------------------------- non-star families


NONSTAR_MAX_SETS = 40


def nonstar_bound(n, k) -> int:
    return k * k * binom(n + k - 1, k - 2)


def max_nonstar_family(n, k) -> int:
    """Largest pairwise-intersecting family of stable k-sets with no common element."""
    sets = enumerate_stable_sets(n, k)
    if len(sets) > NONSTAR_MAX_SETS:
        raise OracleScaleError(f"{len(sets)} stable sets exceed the exhaustive limit {NONSTAR_MAX_SETS}")
    g = nx.Graph()
    g.add_nodes_from(range(len(sets)))
    fs = [frozenset(s) for s in sets]
    for i, j in itertools.combinations(range(len(sets)), 2):
        if fs[i] & fs[j]:
            g.add_edge(i, j)
    best = 0
    # every family is a clique of the intersection graph; enumerate_all_cliques is exhaustive
    for clique in nx.enumerate_all_cliques(g):
        if len(clique) <= best:
            continue
        if not frozenset.intersection(*(fs[i] for i in clique)):
            best = len(clique)
    return best


def nonstar_bound_check(n, k) -> CountComparison:
    """formula = printed bound, enumeration = exhaustive maximum; the claim is enumeration <= formula."""
    c = CountComparison("nonstar", {"n": n, "k": k}, nonstar_bound(n, k), max_nonstar_family(n, k))
    c.params["bound_holds"] = c.enumeration <= c.formula
    return c


# ---------------------------------------------------------------- star-shaped colour classes


def star_class_lower_bound(n, k, counts="formula"):
    """Lower bound on the number of star-shaped colour classes in an (n-2k+1)-colouring.

    counts="formula" uses the printed vertex count, "enumeration" the exhaustive one.
    Returns None when the denominator is not positive (bound undefined).
    """
    total = stable_count_formula(n, k) if counts == "formula" else len(enumerate_stable_sets(n, k))
    nonstar = nonstar_bound(n, k)
    num = total - (n - 2 * k + 1) * nonstar
    den = binom(n - k - 1, k - 1) - nonstar
    if den <= 0:
        return None
    return Fraction(num, den)


def star_class_bound(n, k, beta, counts="formula") -> dict:
    beta = Fraction(beta)
    b = star_class_lower_bound(n, k, counts)
    target = Fraction(n) * beta / k
    return {"n": n, "k": k, "beta": str(beta), "counts": counts,
            "bound": None if b is None else str(b),
            "bound_float": None if b is None else float(b),
            "target": float(target), "exceeds": b is not None and b > target}


def star_threshold(k, beta, n_max=10_000, counts="formula"):
    """Least n0 such that the bound exceeds n*beta/k for every n0 <= n <= n_max (None if never)."""
    beta = Fraction(beta)
    last_fail = None
    for n in range(2 * k, n_max + 1):
        b = star_class_lower_bound(n, k, counts)
        if b is None or b <= Fraction(n) * beta / k:
            last_fail = n
    if last_fail == n_max:
        return None
    return 2 * k if last_fail is None else last_fail + 1


def schrijver_chain_length(n, k, beta, threshold=None) -> int:
    """Rounds of n <- n - ceil(n*beta/k) until n <= threshold."""
    if not (0 < Fraction(beta) < 1) or k <= 1:
        raise ValueError("need 0 < beta < 1 and k > 1")
    beta = Fraction(beta)
    if threshold is None:
        threshold = star_threshold(k, beta)
    steps = 0
    while n > threshold:
        n -= math.ceil(n * beta / k)
        steps += 1
    return steps


def chain_length_closed_form(n, k, beta) -> int:
    beta = Fraction(beta)
    base = 1 + float(beta / (k - beta))
    return math.ceil(math.log(n) / math.log(base)) if n > 1 else 0


def lemma_report(name, **kw):
    """Dispatch used by the command line; yields JSON-able records."""
    if name == "starsbars":
        for n in range(kw.get("n_max", 12) + 1):
            for k in range(1, kw.get("k_max", 5) + 1):
                yield stars_and_bars_comparison(n, k).to_json()
    elif name == "stablecount":
        for k in range(1, kw.get("k_max", 4) + 1):
            for n in range(2 * k, kw.get("n_max", 14) + 1):
                yield stable_count_comparison(n, k).to_json()
    elif name == "containing":
        for k in range(1, kw.get("k_max", 4) + 1):
            for n in range(2 * k, kw.get("n_max", 12) + 1):
                for x in range(1, n + 1):
                    yield count_stable_containing(n, k, x).to_json()
    elif name == "segment":
        top = kw.get("b_max", 13)
        for a in range(1, top + 1):
            for b in range(a + 1, top + 1):
                for r in range(kw.get("r_max", 5) + 1):
                    yield segment_stable_count(a, b, r).to_json()
    elif name == "nonstar":
        for n in range(4, kw.get("n_max", 9) + 1):
            yield nonstar_bound_check(n, 2).to_json()
    elif name == "beta":
        k, beta = kw.get("k", 2), Fraction(kw.get("beta", "1/2"))
        for counts in ("formula", "enumeration"):
            yield {"lemma": "beta", "k": k, "beta": str(beta), "counts": counts,
                   "threshold": star_threshold(k, beta, n_max=kw.get("n_max", 300), counts=counts)}
    elif name == "chainlen":
        k, beta = kw.get("k", 2), Fraction(kw.get("beta", "1/2"))
        thr = star_threshold(k, beta)
        for n in kw.get("ns", (64, 128, 256, 512, 1024, 2048)):
            yield {"lemma": "chainlen", "n": n, "k": k, "beta": str(beta), "threshold": thr,
                   "rounds": schrijver_chain_length(n, k, beta, thr),
                   "closed_form": chain_length_closed_form(n, k, beta)}
    else:
        raise ValueError(f"unknown lemma {name!r}")
