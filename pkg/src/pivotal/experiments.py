"""Grid scans of the second eigenvalue and Monte Carlo comparisons of the two designs."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .designs import RandomStream, sample_multinomial, sample_ops
from .errors import NoConvergence, ValidationError
from .estimators import hh_estimate, ht_estimate, make_study_variable, vhh_estimate
from .exact import (
    DEFAULT_CAP,
    enumerate_ops,
    exact_variance,
    expected_vhh,
    inclusion_matrix,
    multinomial_variance_formula,
)
from .population import Population, make_population, to_fraction
from .spectral import gabler_summary

VARIANTS = ("plain", "structural_strict", "structural_nonstrict")
# matches both case counts reported for the original grid study
DEFAULT_VARIANT = "structural_strict"


def normalize_variant(name: str) -> str:
    v = name.replace("-", "_")
    if v not in VARIANTS:
        raise ValidationError(f"unknown constraint variant {name!r}")
    return v


@dataclass(frozen=True)
class GridSpec:
    """Grid of cluster probability vectors ``phi = skip * m`` with integer ``m``.

    ``structural_*`` variants keep only vectors whose cross-border units sit at
    the even positions ``2, 4, ..., 2n-2``: ``C_{2i-1} < i`` and ``C_{2i} > i``
    (strict) or ``C_{2i} >= i`` (nonstrict).
    """

    n: int
    skip: Fraction
    dim: Optional[int] = None
    variant: str = DEFAULT_VARIANT

    def __post_init__(self):
        object.__setattr__(self, "skip", to_fraction(self.skip))
        object.__setattr__(self, "variant", normalize_variant(self.variant))
        if self.dim is None:
            object.__setattr__(self, "dim", 2 * self.n - 1)
        if self.n < 1 or self.dim < 1:
            raise ValidationError("n and dim must be positive")
        if not 0 < self.skip <= 1 or (1 / self.skip).denominator != 1:
            raise ValidationError(f"skip {self.skip} must divide 1")
        if self.variant != "plain" and self.dim != 2 * self.n - 1:
            raise ValidationError("structural variants need dim = 2n - 1")

    @property
    def den(self) -> int:
        return int(1 / self.skip)


@dataclass(frozen=True)
class ScanRecord:
    case_index: int
    phi: tuple
    lambda2: float


@dataclass
class ScanSummary:
    count: int
    min_lambda2: float
    max_lambda2: float
    variant: str
    runtime_ms: float
    argmin: Optional[tuple] = None
    argmax: Optional[tuple] = None
    records: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "min_lambda2": self.min_lambda2,
            "max_lambda2": self.max_lambda2,
            "variant": self.variant.replace("_", "-"),
            "runtime_ms": self.runtime_ms,
        }


def enumerate_numerators(spec: GridSpec) -> Iterator[tuple]:
    """Integer vectors ``m`` with ``phi = m / den`` on the grid, in lexicographic order."""
    den, n, dim = spec.den, spec.n, spec.dim
    total = n * den
    structural = spec.variant != "plain"
    strict = spec.variant == "structural_strict"
    m = [0] * dim

    def ok(j: int, c: int) -> bool:
        # j is the 1-based position just filled, c the cumulated numerator
        if not structural:
            return True
        i, odd = (j + 1) // 2, j % 2 == 1
        if i > n - 1:
            return True
        if odd:
            return c < i * den
        return c > i * den if strict else c >= i * den

    def rec(j: int, c: int):
        left = dim - j
        if left == 0:
            if c == total:
                yield tuple(m)
            return
        lo = max(1, total - c - (left - 1) * (den - 1))
        hi = min(den - 1, total - c - (left - 1))
        for v in range(lo, hi + 1):
            m[j] = v
            if ok(j + 1, c + v):
                yield from rec(j + 1, c + v)

    yield from rec(0, 0)


def enumerate_grid(spec: GridSpec) -> Iterator[tuple]:
    """Grid vectors ``phi`` (as Fractions) with ``0 < phi_i < 1`` and ``sum(phi) = n``."""
    den = spec.den
    for m in enumerate_numerators(spec):
        yield tuple(Fraction(v, den) for v in m)


def count_grid(spec: GridSpec) -> int:
    return sum(1 for _ in enumerate_numerators(spec))


def case_lambda2(phi: Sequence) -> float:
    """Second eigenvalue of the matrix ``B`` of ordered pivotal sampling with parameter ``phi``."""
    p = make_population(phi)
    try:
        return gabler_summary(inclusion_matrix(enumerate_ops(p))).lambda2
    except NoConvergence as e:
        raise NoConvergence(f"{e} for phi = {[str(x) for x in phi]}") from e


def _case_from_numerators(args) -> float:
    m, den = args
    return case_lambda2([Fraction(v, den) for v in m])


def scan(spec: GridSpec, threads: int = 1, keep_records: bool = True) -> ScanSummary:
    """Compute the second eigenvalue for every grid vector of ``spec``."""
    start = time.perf_counter()
    den = spec.den
    cases = list(enumerate_numerators(spec))
    work = ((m, den) for m in cases)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            values = list(ex.map(_case_from_numerators, work, chunksize=256))
    else:
        values = [_case_from_numerators(w) for w in work]

    records = []
    lo = hi = None
    for idx, (m, l2) in enumerate(zip(cases, values), start=1):
        if lo is None or l2 < lo[0]:
            lo = (l2, m)
        if hi is None or l2 > hi[0]:
            hi = (l2, m)
        if keep_records:
            records.append(ScanRecord(idx, tuple(Fraction(v, den) for v in m), l2))
    runtime = (time.perf_counter() - start) * 1000.0
    if lo is None:
        return ScanSummary(0, math.nan, math.nan, spec.variant, runtime, records=records)
    return ScanSummary(
        count=len(cases),
        min_lambda2=lo[0],
        max_lambda2=hi[0],
        variant=spec.variant,
        runtime_ms=runtime,
        argmin=tuple(Fraction(v, den) for v in lo[1]),
        argmax=tuple(Fraction(v, den) for v in hi[1]),
        records=records,
    )


def _fmt(f: Fraction) -> str:
    return repr(float(f))


def write_scan_csv(summary: ScanSummary, dim: int, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["case_index"] + [f"phi_{i}" for i in range(1, dim + 1)] + ["lambda2"])
    for r in summary.records:
        w.writerow([r.case_index] + [_fmt(f) for f in r.phi] + [repr(r.lambda2)])


def write_scan_json(summary: ScanSummary, fh) -> None:
    json.dump(summary.to_json(), fh, indent=2)
    fh.write("\n")


@dataclass
class MCReport:
    replicates: int
    seed: int
    total: float
    var_ops: float
    se_var_ops: float
    var_ms: float
    se_var_ms: float
    exact_var_ops: Optional[float]
    exact_var_ms: float
    exact_expected_vhh: Optional[float]
    mean_vhh: Optional[float]
    coverage: Optional[float]
    coverage_se: Optional[float]
    nominal: float

    def to_json(self) -> dict:
        return asdict(self)


def mc_compare(
    p: Population,
    y: Sequence,
    replicates: int,
    seed: int,
    z: float = 1.959963984540054,
    nominal: float = 0.95,
    cap: int = DEFAULT_CAP,
) -> MCReport:
    """Empirical variances of both designs, with exact references and v_HH CI coverage.

    Replicate ``r`` draws from ``RandomStream(seed, r)``. Empirical variances are
    mean squared deviations from the known total, with standard errors from the
    spread of the squared deviations.
    """
    if replicates < 1:
        raise ValidationError("replicates must be positive")
    pf = p.to_float()
    vf = make_study_variable(pf, [float(x) for x in y])
    t = vf.total
    est_ops = np.empty(replicates)
    est_ms = np.empty(replicates)
    vhh = np.empty(replicates) if p.n >= 2 else None
    for r in range(replicates):
        rng = RandomStream(seed, r)
        s = sample_ops(pf, rng)
        est_ops[r] = ht_estimate(s, vf)
        est_ms[r] = hh_estimate(sample_multinomial(pf, rng), vf)
        if vhh is not None:
            vhh[r] = vhh_estimate(s, vf)

    sq_ops = (est_ops - t) ** 2
    sq_ms = (est_ms - t) ** 2
    root_r = math.sqrt(replicates)

    exact_ops = exact_e_vhh = None
    exact_ms = float(multinomial_variance_formula(p, y))
    if p.N <= cap:
        d = enumerate_ops(p, cap)
        exact_ops = float(exact_variance(d, p, y))
        if p.n >= 2:
            exact_e_vhh = float(expected_vhh(d, p, y))

    coverage = coverage_se = mean_vhh = None
    if vhh is not None:
        covered = np.abs(est_ops - t) <= z * np.sqrt(vhh) + 1e-12 * max(1.0, abs(t))
        coverage = float(covered.mean())
        coverage_se = math.sqrt(nominal * (1 - nominal) / replicates)
        mean_vhh = float(vhh.mean())

    return MCReport(
        replicates=replicates,
        seed=seed,
        total=float(t),
        var_ops=float(sq_ops.mean()),
        se_var_ops=float(sq_ops.std(ddof=1) / root_r) if replicates > 1 else math.nan,
        var_ms=float(sq_ms.mean()),
        se_var_ms=float(sq_ms.std(ddof=1) / root_r) if replicates > 1 else math.nan,
        exact_var_ops=exact_ops,
        exact_var_ms=exact_ms,
        exact_expected_vhh=exact_e_vhh,
        mean_vhh=mean_vhh,
        coverage=coverage,
        coverage_se=coverage_se,
        nominal=nominal,
    )
