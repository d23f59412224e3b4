"""Finite-window estimators with explicit error accounting.

Upper asymptotic density, the Besicovitch-average pseudometric, its
threshold variant D', and the plain mismatch-density dbar.  Every limsup
quantity is replaced by a finite-n trace whose summary is the max over
the last half of the evaluated indices; truncation error enters as an
exact [lo, hi] interval, never as a hidden float tolerance.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Sequence

from .configs import (
    DEFAULT_RADIUS,
    AdmissibleMetric,
    Configuration,
    default_metric,
)
from .errors import InvalidDimensionError
from .groups import FiniteSubset, FolnerSequence, Point, compose


@dataclass(frozen=True)
class TraceRow:
    n: int
    value: Fraction
    lo: Fraction
    hi: Fraction


@dataclass
class EstimateTrace:
    """Rows of (n, value, lo, hi) at strictly increasing indices."""

    rows: list[TraceRow]

    def __post_init__(self) -> None:
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("trace indices must be strictly increasing")
        for r in self.rows:
            if not r.lo <= r.value <= r.hi:
                raise ValueError(f"row n={r.n} violates lo <= value <= hi")

    def summary(self) -> Fraction:
        """Max of `value` over the last half of the rows (limsup proxy)."""
        if not self.rows:
            raise ValueError("summary of an empty trace")
        return max(r.value for r in self.rows[len(self.rows) // 2 :])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["n", "value", "lo", "hi"])
        for r in self.rows:
            writer.writerow([r.n, repr(float(r.value)), repr(float(r.lo)), repr(float(r.hi))])
        return buf.getvalue()


def _checked_n_list(n_list: Sequence[int]) -> list[int]:
    ns = [int(n) for n in n_list]
    if not ns:
        raise ValueError("n_list must be non-empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be strictly increasing")
    return ns


def upper_density(
    rule: Callable[[Point], bool], F: FolnerSequence, n_list: Sequence[int]
) -> EstimateTrace:
    """Exact |A cap F_n| / |F_n| for the membership rule, per n."""
    rows = []
    for n in _checked_n_list(n_list):
        window = F.set_at(n)
        hits = sum(1 for g in window if rule(g))
        val = Fraction(hits, len(window))
        rows.append(TraceRow(n, val, val, val))
    return EstimateTrace(rows)


def _mismatch_memo(x: Configuration, z: Configuration) -> Callable[[Point], bool]:
    cache: dict[Point, bool] = {}
    xv, zv = x.value, z.value

    def mm(p: Point) -> bool:
        v = cache.get(p)
        if v is None:
            v = xv(p) != zv(p)
            cache[p] = v
        return v

    return mm


def _site_lower_sums(
    x: Configuration,
    z: Configuration,
    window: FiniteSubset,
    metric: AdmissibleMetric,
    radius: int,
) -> list[Fraction]:
    """Truncated distance lower bounds d_lo(g x, g z), one per g in window."""
    ball = metric.ball_weights(radius)
    mm = _mismatch_memo(x, z)
    out = []
    for g in window:
        acc = Fraction(0)
        for h, w in ball:
            if mm(compose(g, h)):
                acc += w
        out.append(acc)
    return out


def _common_metric(x: Configuration, z: Configuration, metric: AdmissibleMetric | None) -> AdmissibleMetric:
    if x.dim != z.dim:
        raise InvalidDimensionError("configurations of different dimension")
    if metric is None:
        metric = default_metric(x.dim)
    if metric.dim != x.dim:
        raise InvalidDimensionError("metric dimension does not match configurations")
    return metric


def besicovitch_estimate(
    x: Configuration,
    z: Configuration,
    F: FolnerSequence,
    n: int,
    metric: AdmissibleMetric | None = None,
    radius: int = DEFAULT_RADIUS,
) -> tuple[Fraction, Fraction]:
    """Folner average of truncated distances: interval [lo, hi], hi-lo <= tail.

    Summands are exact rationals, so the reduction order is immaterial and
    per-g terms could be evaluated in parallel without changing the result.
    """
    metric = _common_metric(x, z, metric)
    window = F.set_at(n)
    tail = metric.tail_bound(radius)
    one = Fraction(1)
    lo_total = Fraction(0)
    hi_total = Fraction(0)
    for lo_g in _site_lower_sums(x, z, window, metric, radius):
        lo_total += lo_g
        hi_total += min(lo_g + tail, one)
    count = len(window)
    return lo_total / count, hi_total / count


def besicovitch_trace(
    x: Configuration,
    z: Configuration,
    F: FolnerSequence,
    n_list: Sequence[int],
    metric: AdmissibleMetric | None = None,
    radius: int = DEFAULT_RADIUS,
) -> EstimateTrace:
    """Interval rows per n; row value is the interval midpoint."""
    rows = []
    for n in _checked_n_list(n_list):
        lo, hi = besicovitch_estimate(x, z, F, n, metric, radius)
        rows.append(TraceRow(n, (lo + hi) / 2, lo, hi))
    return EstimateTrace(rows)


@dataclass(frozen=True)
class DPrimeEstimate:
    value: Fraction
    saturated: bool


def default_delta_grid() -> tuple[Fraction, ...]:
    """{1.0001} followed by {k/200}, descending."""
    return (Fraction(10001, 10000),) + tuple(Fraction(k, 200) for k in range(200, 0, -1))


def besicovitch_prime_estimate(
    x: Configuration,
    z: Configuration,
    F: FolnerSequence,
    n: int,
    metric: AdmissibleMetric | None = None,
    radius: int = DEFAULT_RADIUS,
    delta_grid: Sequence[Fraction] | None = None,
) -> DPrimeEstimate:
    """Smallest grid delta with density{g : d_lo(g x, g z) >= delta} < delta.

    A site counts toward the density only when the truncation LOWER bound
    already clears delta.  Feasibility is monotone in delta, so the minimum
    is well defined; when no grid value is feasible the grid maximum comes
    back with saturated=True.
    """
    metric = _common_metric(x, z, metric)
    if delta_grid is None:
        delta_grid = default_delta_grid()
    grid = sorted(Fraction(d) for d in delta_grid)
    if not grid:
        raise ValueError("delta grid must be non-empty")
    if grid[0] <= 0:
        raise ValueError("delta grid values must be positive")
    window = F.set_at(n)
    los = sorted(_site_lower_sums(x, z, window, metric, radius))
    count = len(los)
    for delta in grid:
        dens = Fraction(count - bisect_left(los, delta), count)
        if dens < delta:
            return DPrimeEstimate(delta, False)
    return DPrimeEstimate(grid[-1], True)


def dbar_estimate(x: Configuration, z: Configuration, F: FolnerSequence, n: int) -> Fraction:
    """Exact mismatch density |{f in F_n : x(f) != z(f)}| / |F_n|."""
    if x.dim != z.dim:
        raise InvalidDimensionError("configurations of different dimension")
    window = F.set_at(n)
    xv, zv = x.value, z.value
    bad = sum(1 for f in window if xv(f) != zv(f))
    return Fraction(bad, len(window))


def dbar_trace(
    x: Configuration, z: Configuration, F: FolnerSequence, n_list: Sequence[int]
) -> EstimateTrace:
    rows = []
    for n in _checked_n_list(n_list):
        val = dbar_estimate(x, z, F, n)
        rows.append(TraceRow(n, val, val, val))
    return EstimateTrace(rows)


def exact_mismatch_density(x: Configuration, z: Configuration) -> Fraction:
    """Exact dbar limit for two periodic configurations.

    Averages mismatches over one joint period: M Z^d is a common sublattice
    of both period lattices when M is the lcm of their indices, so the box
    [0, M)^d is a full joint period.
    """
    if x.dim != z.dim:
        raise InvalidDimensionError("configurations of different dimension")
    if x.period_lattice is None or z.period_lattice is None:
        raise ValueError("exact density needs two periodic configurations")
    la, lb = x.period_lattice, z.period_lattice
    if la.moduli is not None and lb.moduli is not None:
        axes = tuple(lcm(a, b) for a, b in zip(la.moduli, lb.moduli))
    else:
        axes = (lcm(la.index, lb.index),) * x.dim
    period_box = FiniteSubset.box((0,) * x.dim, tuple(m - 1 for m in axes))
    xv, zv = x.value, z.value
    bad = sum(1 for f in period_box if xv(f) != zv(f))
    return Fraction(bad, len(period_box))
