"""Point and variance estimators evaluated on realised samples."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CountMismatch, DimensionMismatch, IndexOutOfRange, RequiresNAtLeast2
from .population import Population


@dataclass(frozen=True)
class StudyVariable:
    y: tuple
    ycheck: tuple
    total: object
    n: int


def _value(x):
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int):
        return Fraction(x)
    return x


def make_study_variable(p: Population, y: Sequence) -> StudyVariable:
    """Attach ``y`` to ``p``: precomputes the expanded values ``y_k / pi_k`` and the total."""
    if isinstance(y, StudyVariable):
        if len(y.y) != p.N:
            raise DimensionMismatch(f"y has length {len(y.y)}, population has {p.N} units")
        return y
    if len(y) != p.N:
        raise DimensionMismatch(f"y has length {len(y)}, population has {p.N} units")
    vals = tuple(_value(x) for x in y)
    ycheck = tuple(yk / q for yk, q in zip(vals, p.pi))
    return StudyVariable(vals, ycheck, sum(vals), p.n)


def ht_estimate(s, v: StudyVariable):
    """Horvitz-Thompson estimate of the total from a without-replacement sample."""
    N = len(v.y)
    total = 0
    for k in s:
        if not 1 <= k <= N:
            raise IndexOutOfRange(f"unit {k} outside 1..{N}")
        total += v.ycheck[k - 1]
    return total


def hh_estimate(m, v: StudyVariable):
    """Hansen-Hurvitz estimate; each draw of unit ``k`` contributes ``y_k / pi_k``."""
    if len(m.counts) != len(v.y):
        raise DimensionMismatch(f"{len(m.counts)} counts for {len(v.y)} units")
    if sum(m.counts) != v.n:
        raise CountMismatch(f"{sum(m.counts)} draws, expected {v.n}")
    return sum(c * yc for c, yc in zip(m.counts, v.ycheck) if c)


def vhh_estimate(s, v: StudyVariable):
    """With-replacement variance estimator applied to a pivotal sample.

    ``n/(n-1) * sum_{k in S} (ycheck_k - t_hat/n)**2``; never negative.
    """
    n = len(s)
    if n < 2:
        raise RequiresNAtLeast2("the HH variance estimator needs n >= 2")
    t_hat = ht_estimate(s, v)
    mean = t_hat / n
    return n * sum((v.ycheck[k - 1] - mean) ** 2 for k in s) / (n - 1)
