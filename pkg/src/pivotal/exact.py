"""Exact design distributions by enumeration, and the variances built on them.

In exact mode every probability below is a ``Fraction``, so identities can be
checked with ``==``. Study variables given as ints, Fractions or decimal
strings stay exact; floats propagate as floats.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Iterator, Literal, Optional, Sequence

import numpy as np

from .designs import MultiSample, OrderedSample, first_cross, keep_first_probability
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    RequiresClusterLayout,
    RequiresNAtLeast2,
    ValidationError,
)
from .estimators import StudyVariable, make_study_variable, vhh_estimate
from .population import ClusteredPopulation, Population, build_clustered, cross_border

DEFAULT_CAP = 16
MAX_OUTCOMES = 500_000

Kind = Literal["ops", "multinomial", "two_stage", "randomized_ops"]


@dataclass
class TreeNode:
    """One branch of the ordered pivotal probability tree.

    ``event`` is ``"challenger"`` (``unit`` drawn as H), ``"duel"`` (``unit``
    wins, ``loser`` carries the residual), ``"certain"`` (``unit`` has
    probability one and no challenger) or ``"final"`` (``unit`` drawn in the
    last segment). ``prob`` is conditional on the parent.
    """

    event: str
    unit: Optional[int]
    prob: object
    loser: Optional[int] = None
    children: list = field(default_factory=list)

    @property
    def selects(self) -> bool:
        return self.event in ("duel", "certain", "final")

    def child(self, event: str, unit: int) -> "TreeNode":
        for c in self.children:
            if c.event == event and c.unit == unit:
                return c
        raise KeyError((event, unit))


def _expand(items: list, remaining: int, exact: bool) -> list:
    if remaining == 0:
        return []
    if remaining == 1:
        total = sum(q for _, q in items)
        return [TreeNode("final", k, q / total) for k, q in items if q > 0]
    j, a, b = first_cross([q for _, q in items], exact)
    k = items[j][0]
    segment, rest = items[:j], items[j + 1:]
    if not segment:
        node = TreeNode("certain", k, Fraction(1) if exact else 1.0)
        node.children = _expand(rest, remaining - 1, exact)
        return [node]
    keep = keep_first_probability(a, b)
    seg_total = sum(q for _, q in segment)
    nodes = []
    for h, q in segment:
        hn = TreeNode("challenger", h, q / seg_total)
        for win, lose, pr in ((h, k, keep), (k, h, 1 - keep)):
            if pr <= 0:
                continue
            dn = TreeNode("duel", win, pr, loser=lose)
            residual = ([(lose, b)] if b > 0 else []) + rest
            dn.children = _expand(residual, remaining - 1, exact)
            hn.children.append(dn)
        nodes.append(hn)
    return nodes


def _tree_from_items(items: list, n: int, exact: bool) -> TreeNode:
    root = TreeNode("root", None, Fraction(1) if exact else 1.0)
    root.children = _expand(items, n, exact)
    return root


def probability_tree(p: Population, cap: int = DEFAULT_CAP) -> TreeNode:
    """Full probability tree of ordered pivotal sampling on ``p``."""
    if p.N > cap:
        raise EnumerationTooLarge(f"N = {p.N} exceeds enumeration cap {cap}")
    return _tree_from_items(list(zip(p.units, p.pi)), p.n, p.exact)


def iter_leaves(node: TreeNode, selected: tuple = (), prob=1) -> Iterator[tuple]:
    """Yield ``(selection order, path probability)`` for every leaf below ``node``."""
    prob = prob * node.prob
    if node.selects:
        selected = selected + (node.unit,)
    if not node.children:
        yield selected, prob
        return
    for c in node.children:
        yield from iter_leaves(c, selected, prob)


@dataclass(frozen=True)
class DesignDistribution:
    outcomes: tuple
    kind: str
    N: int

    @property
    def with_replacement(self) -> bool:
        return self.kind == "multinomial"

    def total(self):
        return sum(pr for _, pr in self.outcomes)

    def unordered(self) -> dict:
        """Distribution over unit sets (or count vectors when with replacement)."""
        out: dict = defaultdict(int)
        for s, pr in self.outcomes:
            key = s.counts if self.with_replacement else s.as_set()
            out[key] += pr
        return dict(out)

    def first_order(self) -> tuple:
        """Expected number of selections of each unit."""
        acc = [0] * self.N
        for s, pr in self.outcomes:
            if self.with_replacement:
                for k, c in enumerate(s.counts):
                    acc[k] += c * pr
            else:
                for k in s.f:
                    acc[k - 1] += pr
        return tuple(acc)


def _collect(pairs, kind: str, N: int, make) -> DesignDistribution:
    agg: dict = {}
    for key, pr in pairs:
        if pr == 0:
            continue
        agg[key] = agg.get(key, 0) + pr
    return DesignDistribution(tuple((make(k), pr) for k, pr in agg.items()), kind, N)


def enumerate_ops(p: Population, cap: int = DEFAULT_CAP) -> DesignDistribution:
    """Exact distribution of ordered pivotal samples, keyed by selection order."""
    tree = probability_tree(p, cap)
    return _collect(iter_leaves(tree), "ops", p.N, OrderedSample)


def enumerate_randomized_ops(p: Population, cap: int = 8) -> DesignDistribution:
    """Exact distribution of randomized pivotal sampling (uniform over N! orders)."""
    if p.N > cap:
        raise EnumerationTooLarge(f"N = {p.N} exceeds randomized enumeration cap {cap}")
    weight = Fraction(1, math.factorial(p.N)) if p.exact else 1.0 / math.factorial(p.N)

    def pairs():
        for perm in permutations(p.units):
            tree = _tree_from_items([(k, p.prob(k)) for k in perm], p.n, p.exact)
            for sel, pr in iter_leaves(tree):
                yield sel, pr * weight

    return _collect(pairs(), "randomized_ops", p.N, OrderedSample)


def _compositions(n: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def _multinomial_pmf(counts: Sequence[int], probs: Sequence):
    coef = math.factorial(sum(counts))
    for c in counts:
        coef //= math.factorial(c)
    pr = coef
    for c, q in zip(counts, probs):
        if c:
            pr = pr * q**c
    return pr


def enumerate_multinomial(p: Population, cap: int = DEFAULT_CAP) -> DesignDistribution:
    """Exact distribution of draw-count vectors under multinomial sampling."""
    if p.N > cap or math.comb(p.n + p.N - 1, p.N - 1) > MAX_OUTCOMES:
        raise EnumerationTooLarge(f"multinomial enumeration too large for N={p.N}, n={p.n}")
    cell = [q / p.n for q in p.pi]
    pairs = ((c, _multinomial_pmf(c, cell)) for c in _compositions(p.n, p.N))
    return _collect(pairs, "multinomial", p.N, MultiSample)


def enumerate_two_stage(
    cp: ClusteredPopulation, first_stage: str = "ops", cap: int = DEFAULT_CAP
) -> DesignDistribution:
    """Exact distribution of the two-stage composition over the original units."""
    cpop, kept = cp.cluster_population()
    N = cp.population.N
    if first_stage == "ops":
        stage1 = enumerate_ops(cpop, cap)

        def pairs():
            for s, pr in stage1.outcomes:
                clusters = [kept[i - 1] for i in s.f]
                for picks in product(*(cp.within[c - 1] for c in clusters)):
                    w = pr
                    for _, q in picks:
                        w = w * q
                    yield tuple(k for k, _ in picks), w

        return _collect(pairs(), "two_stage", N, OrderedSample)

    if first_stage not in ("multinomial", "ms"):
        raise ValidationError(f"unknown first-stage design {first_stage!r}")
    stage1 = enumerate_multinomial(cpop, cap)

    def ms_pairs():
        for s, pr in stage1.outcomes:
            # per selected cluster: distribution of unit counts for its draws
            parts = []
            for i, c in enumerate(s.counts, start=1):
                if c == 0:
                    continue
                within = cp.within[kept[i - 1] - 1]
                units = [k for k, _ in within]
                probs = [q for _, q in within]
                parts.append(
                    [(units, comp, _multinomial_pmf(comp, probs))
                     for comp in _compositions(c, len(units))]
                )
            for combo in product(*parts):
                counts = [0] * N
                w = pr
                for units, comp, q in combo:
                    w = w * q
                    for k, ck in zip(units, comp):
                        counts[k - 1] += ck
                yield tuple(counts), w

    return _collect(ms_pairs(), "multinomial", N, MultiSample)


def enumerate_design(p: Population, design: str, cap: int = DEFAULT_CAP) -> DesignDistribution:
    """Dispatch on a design name: ``ops``, ``ms``, ``two-stage`` or ``rops``."""
    design = design.replace("_", "-")
    if design == "ops":
        return enumerate_ops(p, cap)
    if design in ("ms", "multinomial"):
        return enumerate_multinomial(p, cap)
    if design == "two-stage":
        return enumerate_two_stage(build_clustered(p), "ops", cap)
    if design == "two-stage-ms":
        return enumerate_two_stage(build_clustered(p), "multinomial", cap)
    if design in ("rops", "randomized-ops"):
        return enumerate_randomized_ops(p, min(cap, 8))
    raise ValidationError(f"unknown design {design!r}")


def write_csv(d: DesignDistribution, fh: io.TextIOBase) -> None:
    """Write ``outcome,numerator,denominator`` rows; outcome ids are ``;``-joined."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["outcome", "numerator", "denominator"])
    for s, pr in d.outcomes:
        ids = s.units() if d.with_replacement else s.f
        fr = pr if isinstance(pr, Fraction) else Fraction(repr(float(pr)))
        w.writerow([";".join(map(str, ids)), fr.numerator, fr.denominator])


@dataclass(frozen=True)
class InclusionMatrix:
    first: tuple
    second: tuple

    @property
    def size(self) -> int:
        return len(self.first)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.second])


def inclusion_matrix(d: DesignDistribution) -> InclusionMatrix:
    """First- and second-order inclusion probabilities of a without-replacement design."""
    if d.with_replacement:
        raise ValidationError("inclusion probabilities need a without-replacement design")
    N = d.N
    second = [[0] * N for _ in range(N)]
    for units, pr in d.unordered().items():
        idx = sorted(k - 1 for k in units)
        for a, i in enumerate(idx):
            row = second[i]
            for j in idx[a:]:
                row[j] += pr
    for i in range(N):
        for j in range(i):
            second[i][j] = second[j][i]
    first = tuple(second[i][i] for i in range(N))
    return InclusionMatrix(first, tuple(tuple(r) for r in second))


def _estimate(s, d: DesignDistribution, v: StudyVariable):
    if d.with_replacement:
        return sum(c * yc for c, yc in zip(s.counts, v.ycheck) if c)
    return sum(v.ycheck[k - 1] for k in s.f)


def exact_variance(d: DesignDistribution, p: Population, y: Sequence):
    """Variance of the HT (or HH) estimator of the total over the enumerated design."""
    v = make_study_variable(p, y)
    if d.N != p.N:
        raise DimensionMismatch(f"design over {d.N} units, population has {p.N}")
    return sum(pr * (_estimate(s, d, v) - v.total) ** 2 for s, pr in d.outcomes)


def multinomial_variance_formula(p: Population, y: Sequence):
    """Closed-form variance of the Hansen-Hurvitz estimator under multinomial sampling."""
    v = make_study_variable(p, y)
    mean = v.total / p.n
    return sum(q * (yc - mean) ** 2 for q, yc in zip(p.pi, v.ycheck))


def expected_vhh(d: DesignDistribution, p: Population, y: Sequence):
    """Exact expectation of the with-replacement variance estimator on a pivotal design."""
    if p.n < 2:
        raise RequiresNAtLeast2("the HH variance estimator needs n >= 2")
    if d.with_replacement:
        raise ValidationError("expected_vhh needs a without-replacement design")
    v = make_study_variable(p, y)
    return sum(pr * vhh_estimate(s, v) for s, pr in d.outcomes)


@dataclass(frozen=True)
class ClusterTotals:
    Y: tuple
    Ycheck: tuple
    within: object


def cluster_totals(cp: ClusteredPopulation, y: Sequence) -> ClusterTotals:
    """Cluster totals ``Y_i``, their expanded values ``Y_i / phi_i`` and the within term.

    The within term is the second-stage variance shared by both designs. Empty
    clusters get ``Y = Ycheck = 0``.
    """
    p = cp.population
    v = make_study_variable(p, y)
    Y, Ych = [], []
    within = 0
    for f, mem in zip(cp.phi, cp.members):
        tot = sum(v.y[k - 1] for k in mem) if mem else 0
        yc = tot / f if mem else 0
        Y.append(tot)
        Ych.append(yc)
        for k in mem:
            within += p.prob(k) * (v.ycheck[k - 1] - yc) ** 2
    return ClusterTotals(tuple(Y), tuple(Ych), within)


def within_cluster_term(cp: ClusteredPopulation, y: Sequence):
    return cluster_totals(cp, y).within


def _is_cluster_layout(p: Population) -> bool:
    cb = cross_border(p)
    return p.N == 2 * p.n - 1 and cb.k == tuple(range(2, 2 * p.n - 1, 2))


@dataclass(frozen=True)
class Prop2Check:
    lhs: object
    rhs: object
    duel_term: object
    expected_conditional_variance: object


def prop2_recursion_check(p: Population, y: Sequence, design: str = "ops") -> Prop2Check:
    """Both sides of the first-duel variance recursion on a clustered layout.

    ``p`` must already be a clustered population (``2n-1`` units, cross-border
    units at even positions) and ``y`` holds the cluster totals. For ``"ops"``
    the two sides are equal; for ``"multinomial"`` the left side (the
    multinomial variance) dominates the right side, whose conditional term is
    the variance of a multinomial sample of size ``n-1`` drawn in the residual
    population ``(L_1, u_3, ..., u_{2n-1})`` with parameter ``(b_1, phi_3, ...)``.
    """
    if p.n < 2 or not _is_cluster_layout(p):
        raise RequiresClusterLayout("expected 2n-1 clusters with cross-border units at even positions")
    v = make_study_variable(p, y)
    cb = cross_border(p)
    a1, b1 = cb.a[0], cb.b[0]
    Yc = v.ycheck
    duel_term = a1 * (1 - a1 - b1) * (Yc[0] - Yc[1]) ** 2

    d = enumerate_ops(p)
    by_first: dict = defaultdict(list)
    for s, pr in d.outcomes:
        by_first[s.f[0]].append((s, pr))

    if design == "ops":
        lhs = exact_variance(d, p, y)
        cond = 0
        for outcomes in by_first.values():
            pf = sum(pr for _, pr in outcomes)
            m1 = sum(pr * sum(Yc[k - 1] for k in s.f[1:]) for s, pr in outcomes) / pf
            m2 = sum(pr * sum(Yc[k - 1] for k in s.f[1:]) ** 2 for s, pr in outcomes) / pf
            cond += pf * (m2 - m1**2)
    elif design in ("multinomial", "ms"):
        lhs = multinomial_variance_formula(p, y)
        cond = 0
        rest = list(range(3, p.N + 1))
        for f1, outcomes in by_first.items():
            pf = sum(pr for _, pr in outcomes)
            loser = 2 if f1 == 1 else 1
            units = [loser] + rest
            weights = [b1] + [p.prob(k) for k in rest]
            m = p.n - 1
            q = [w / m for w in weights]
            mu = sum(qi * Yc[k - 1] for qi, k in zip(q, units))
            mu2 = sum(qi * Yc[k - 1] ** 2 for qi, k in zip(q, units))
            cond += pf * m * (mu2 - mu**2)
    else:
        raise ValidationError(f"unknown design {design!r}")
    return Prop2Check(lhs, duel_term + cond, duel_term, cond)


def cluster_inclusion_matrix(cp: ClusteredPopulation) -> InclusionMatrix:
    """Inclusion matrix of pivotal sampling over clusters, in the full ``2n-1`` layout.

    Empty clusters keep their rows and columns, filled with zeros.
    """
    cpop, kept = cp.cluster_population()
    inner = inclusion_matrix(enumerate_ops(cpop))
    m = cp.size
    second = [[0] * m for _ in range(m)]
    for a, i in enumerate(kept):
        for b, j in enumerate(kept):
            second[i - 1][j - 1] = inner.second[a][b]
    return InclusionMatrix(tuple(second[i][i] for i in range(m)), tuple(map(tuple, second)))
