"""Inclusion-probability vectors, cross-border units and the clustered population.

Units are labelled ``1..N`` and clusters ``1..2n-1`` throughout the package, so
that labels read the same as in the usual notation for ordered pivotal sampling.

Two arithmetic modes are supported. In exact mode every probability is a
``fractions.Fraction`` and integer boundaries (a cumulated probability equal to
an integer) are decided exactly. In float mode probabilities are ``float`` and
cumulated sums within ``FLOAT_TOL`` of an integer are snapped onto it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from numbers import Rational, Real
from typing import Sequence, Union

from .errors import NonIntegerSampleSize, NonPositiveProbability, ProbabilityAboveOne

Number = Union[Fraction, float]

FLOAT_TOL = 1e-9


def to_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction, reading floats through their decimal repr.

    ``to_fraction(0.1) == Fraction(1, 10)``, unlike ``Fraction(0.1)``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a probability")


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= FLOAT_TOL else x


@dataclass(frozen=True)
class Population:
    pi: tuple
    n: int
    cum: tuple
    exact: bool = True

    @property
    def N(self) -> int:
        return len(self.pi)

    @property
    def units(self) -> range:
        return range(1, len(self.pi) + 1)

    def prob(self, k: int):
        """Inclusion probability of unit ``k`` (1-based)."""
        return self.pi[k - 1]

    def to_float(self) -> "Population":
        if not self.exact:
            return self
        return make_population([float(x) for x in self.pi], exact=False)

    def to_exact(self) -> "Population":
        if self.exact:
            return self
        return make_population(self.pi, exact=True)


@dataclass(frozen=True)
class CrossBorderInfo:
    k: tuple
    a: tuple
    b: tuple

    def __len__(self) -> int:
        return len(self.k)


@dataclass(frozen=True)
class ClusteredPopulation:
    """The population of ``2n-1`` clusters.

    ``phi[i-1]`` is the probability of cluster ``i``; ``members[i-1]`` lists the
    original units in that cluster (possibly empty when ``phi`` is zero) and
    ``within[i-1]`` maps each member to its second-stage selection probability.
    """

    population: Population
    phi: tuple
    members: tuple
    within: tuple

    @property
    def n(self) -> int:
        return self.population.n

    @property
    def size(self) -> int:
        return len(self.phi)

    def cluster_of(self, k: int) -> int:
        for i, mem in enumerate(self.members, start=1):
            if k in mem:
                return i
        raise KeyError(k)

    def positive_clusters(self) -> tuple:
        return tuple(i for i, f in enumerate(self.phi, start=1) if f > 0)

    def cluster_population(self) -> tuple[Population, tuple]:
        """Population over the positive-probability clusters, and their labels."""
        kept = self.positive_clusters()
        pop = make_population([self.phi[i - 1] for i in kept], exact=self.population.exact)
        return pop, kept


def make_population(pi: Sequence, exact: bool = True) -> Population:
    """Validate ``pi`` and build a :class:`Population`.

    Raises
    ------
    NonPositiveProbability, ProbabilityAboveOne, NonIntegerSampleSize
    """
    if len(pi) == 0:
        raise NonIntegerSampleSize("empty probability vector")
    if exact:
        vals = tuple(to_fraction(x) for x in pi)
    else:
        vals = tuple(float(x) for x in pi)
    for k, x in enumerate(vals, start=1):
        if not x > 0:
            raise NonPositiveProbability(f"pi_{k} = {x} is not positive")
        if x > 1 and (exact or x - 1 > FLOAT_TOL):
            raise ProbabilityAboveOne(f"pi_{k} = {x} exceeds 1")
    if not exact:
        vals = tuple(min(x, 1.0) for x in vals)
    total = sum(vals)
    if exact:
        if total.denominator != 1:
            raise NonIntegerSampleSize(f"sum of probabilities {total} is not an integer")
        n = int(total)
        cum = tuple(accumulate(vals))
    else:
        n = round(total)
        if abs(total - n) > FLOAT_TOL:
            raise NonIntegerSampleSize(f"sum of probabilities {total} is not an integer")
        cum = tuple(_snap(c) for c in accumulate(vals))
        cum = cum[:-1] + (float(n),)
    return Population(pi=vals, n=n, cum=cum, exact=exact)


def cross_border(p: Population) -> CrossBorderInfo:
    """Cross-border units ``k_i`` with their splits ``a_i``, ``b_i``, ``i = 1..n-1``."""
    ks, as_, bs = [], [], []
    prev = 0 if p.exact else 0.0
    k = 0
    for i in range(1, p.n):
        while not (prev < i <= p.cum[k]):
            prev = p.cum[k]
            k += 1
        ks.append(k + 1)
        as_.append(i - prev)
        bs.append(p.cum[k] - i)
    return CrossBorderInfo(k=tuple(ks), a=tuple(as_), b=tuple(bs))


def build_clustered(p: Population) -> ClusteredPopulation:
    """Group units into the clustered population of ``2n-1`` clusters."""
    cb = cross_border(p)
    zero = Fraction(0) if p.exact else 0.0
    bounds = (0,) + cb.k + (p.N + 1,)
    phi, members = [], []
    for i in range(1, p.n + 1):
        b_prev = cb.b[i - 2] if i >= 2 else zero
        a_i = cb.a[i - 1] if i <= p.n - 1 else zero
        phi.append(1 - b_prev - a_i)
        members.append(tuple(range(bounds[i - 1] + 1, bounds[i])))
        if i <= p.n - 1:
            phi.append(cb.a[i - 1] + cb.b[i - 1])
            members.append((cb.k[i - 1],))
    if not p.exact:
        phi = [_snap(f) for f in phi]
    within = []
    for f, mem in zip(phi, members):
        within.append(tuple((k, p.prob(k) / f) for k in mem) if mem else ())
    return ClusteredPopulation(
        population=p, phi=tuple(phi), members=tuple(members), within=tuple(within)
    )
