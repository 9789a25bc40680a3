"""Random selection: ordered pivotal, multinomial, randomized pivotal and two-stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateDuel, EmptyClusterSelected
from .population import FLOAT_TOL, ClusteredPopulation, Population


@dataclass(frozen=True)
class OrderedSample:
    """Without-replacement sample; ``f`` holds unit labels in selection order."""

    f: tuple

    def __len__(self) -> int:
        return len(self.f)

    def __iter__(self):
        return iter(self.f)

    def as_set(self) -> frozenset:
        return frozenset(self.f)


@dataclass(frozen=True)
class MultiSample:
    """With-replacement sample; ``counts[k-1]`` is the number of draws of unit ``k``."""

    counts: tuple

    @property
    def size(self) -> int:
        return sum(self.counts)

    def units(self) -> tuple:
        """Unit labels repeated by multiplicity, ascending."""
        return tuple(k for k, c in enumerate(self.counts, start=1) for _ in range(c))


class RandomStream:
    """Seeded stream of uniforms on [0, 1).

    The stream for replicate ``r`` of a run seeded with ``seed`` is
    ``RandomStream(seed, r)``; distinct keys give independent streams.
    """

    _BATCH = 512

    def __init__(self, seed: int, *key: int):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._buf: list = []
        self.position = 0

    def uniform(self) -> float:
        if not self._buf:
            self._buf = self._gen.random(self._BATCH).tolist()[::-1]
        self.position += 1
        return self._buf.pop()

    def spawn(self, r: int) -> "RandomStream":
        return RandomStream(self.seed, *self.key, r)


def _choose(weights, u: float) -> int:
    """Inverse-CDF index over ``weights`` (ascending order) for a uniform ``u``."""
    w = [float(x) for x in weights]
    target = u * sum(w)
    acc = 0.0
    last = None
    for i, x in enumerate(w):
        if x <= 0:
            continue
        acc += x
        last = i
        if target < acc:
            return i
    return last


def first_cross(probs, exact: bool):
    """Locate the first cross-border position of a residual probability list.

    Returns ``(j, a, b)``: ``j`` is the 0-based position of the first item whose
    cumulated probability reaches 1, ``a = 1 - C_{j-1}`` and ``b = C_j - 1``.
    """
    c = 0 if exact else 0.0
    for j, q in enumerate(probs):
        reached = c + q >= 1 if exact else c + q >= 1 - FLOAT_TOL
        if reached:
            a = 1 - c
            b = c + q - 1
            if not exact and b <= FLOAT_TOL:
                b = 0.0
            return j, a, b
        c += q
    raise ValueError("residual probabilities sum below 1")


def keep_first_probability(a, b):
    """Probability that the challenger ``H`` wins its duel with the cross-border unit."""
    if 1 - b == 0:
        raise DegenerateDuel(f"duel with a={a}, b={b}")
    return 1 - a / (1 - b)


def _ops_walk(items: list, n: int, exact: bool, rng: RandomStream) -> tuple:
    selected = []
    remaining = n
    while remaining > 1:
        j, a, b = first_cross([q for _, q in items], exact)
        k = items[j][0]
        segment = items[:j]
        if not segment:
            # pi_k = 1 with nothing in front: the duel is degenerate, k is selected
            selected.append(k)
            items = items[j + 1:]
        else:
            h = segment[_choose([q for _, q in segment], rng.uniform())][0]
            if rng.uniform() < keep_first_probability(a, b):
                winner, loser = h, k
            else:
                winner, loser = k, h
            selected.append(winner)
            items = ([(loser, b)] if b > 0 else []) + items[j + 1:]
        remaining -= 1
    if remaining == 1:
        selected.append(items[_choose([q for _, q in items], rng.uniform())][0])
    return tuple(selected)


def sample_ops(p: Population, rng: RandomStream) -> OrderedSample:
    """Draw one ordered pivotal sample; units are returned in selection order."""
    items = list(zip(p.units, p.pi))
    return OrderedSample(_ops_walk(items, p.n, p.exact, rng))


def sample_multinomial(p: Population, rng: RandomStream) -> MultiSample:
    """``n`` independent draws, unit ``k`` drawn with probability ``pi_k / n``."""
    counts = [0] * p.N
    for _ in range(p.n):
        counts[_choose(p.pi, rng.uniform())] += 1
    return MultiSample(tuple(counts))


def random_permutation(N: int, rng: RandomStream) -> list:
    """Uniform permutation of ``1..N`` by Fisher-Yates."""
    perm = list(range(1, N + 1))
    for i in range(N - 1, 0, -1):
        j = min(int(rng.uniform() * (i + 1)), i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def sample_randomized_ops(p: Population, rng: RandomStream) -> OrderedSample:
    """Ordered pivotal sampling applied to a uniformly permuted population."""
    perm = random_permutation(p.N, rng)
    items = [(k, p.prob(k)) for k in perm]
    return OrderedSample(_ops_walk(items, p.n, p.exact, rng))


def sample_two_stage(
    cp: ClusteredPopulation,
    first_stage: Literal["ops", "multinomial"],
    rng: RandomStream,
):
    """Select clusters by ``first_stage`` with parameter phi, then one unit per selection.

    Returns an :class:`OrderedSample` for ``"ops"`` and a :class:`MultiSample`
    for ``"multinomial"``; in the latter each draw of a cluster picks its unit
    independently.
    """
    cpop, kept = cp.cluster_population()
    if first_stage == "ops":
        clusters = [kept[i - 1] for i in sample_ops(cpop, rng).f]
    elif first_stage in ("multinomial", "ms"):
        ms = sample_multinomial(cpop, rng)
        clusters = [kept[i - 1] for i in ms.units()]
    else:
        raise ValueError(f"unknown first-stage design {first_stage!r}")

    units = []
    for c in clusters:
        within = cp.within[c - 1]
        if not within:
            raise EmptyClusterSelected(f"cluster {c} has no units")
        units.append(within[_choose([w for _, w in within], rng.uniform())][0])

    if first_stage == "ops":
        return OrderedSample(tuple(units))
    counts = [0] * cp.population.N
    for k in units:
        counts[k - 1] += 1
    return MultiSample(tuple(counts))
