"""Empirical pattern measures and Prokhorov-style comparisons.

A PatternDistribution is an exact rational probability vector over the
patterns of a fixed finite window.  Prokhorov distances are computed by
exact Strassen feasibility tests (maximum bipartite flow in Fraction
arithmetic) wrapped in a dyadic binary search; the exact-zero case is
decided without any search, so period-aligned empirical measures compare
to orbit marginals at literal distance 0.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .configs import AdmissibleMetric, Configuration, default_metric
from .errors import IncompatibleWindowsError
from .groups import FiniteSubset, FolnerSequence, Point, compose

Pattern = tuple[int, ...]
PatternCost = Callable[[Pattern, Pattern], Fraction]

PROKHOROV_RESOLUTION = Fraction(1, 10**6)


class PatternDistribution:
    """Probability distribution over patterns of one finite window.

    Sites are stored in canonical (ascending lexicographic) order; weights
    are positive Fractions summing to exactly 1.  Zero-weight patterns are
    dropped on construction.
    """

    __slots__ = ("sites", "weights")

    def __init__(
        self,
        window: FiniteSubset | Iterable[Point],
        weights: Mapping[Pattern, Fraction | int],
    ):
        sites = (
            window.sorted_points()
            if isinstance(window, FiniteSubset)
            else tuple(sorted(tuple(p) for p in window))
        )
        if not sites:
            raise ValueError("window must be non-empty")
        filtered: dict[Pattern, Fraction] = {}
        total = Fraction(0)
        for pat, w in weights.items():
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight for pattern {pat}")
            if len(pat) != len(sites):
                raise ValueError(
                    f"pattern of length {len(pat)} on a window of {len(sites)} sites"
                )
            if w > 0:
                pat = tuple(int(s) for s in pat)
                filtered[pat] = filtered.get(pat, Fraction(0)) + w
                total += w
        if total != 1:
            raise ValueError(f"weights must sum to exactly 1, got {total}")
        self.sites = sites
        self.weights = filtered

    def support(self) -> list[Pattern]:
        return sorted(self.weights)

    def mass(self, pat: Pattern) -> Fraction:
        return self.weights.get(tuple(pat), Fraction(0))

    def same_window(self, other: "PatternDistribution") -> bool:
        return self.sites == other.sites

    def marginal(self, sub_window: FiniteSubset | Iterable[Point]) -> "PatternDistribution":
        """Projection onto a sub-window of the current sites."""
        sub = (
            sub_window.sorted_points()
            if isinstance(sub_window, FiniteSubset)
            else tuple(sorted(tuple(p) for p in sub_window))
        )
        index = {s: i for i, s in enumerate(self.sites)}
        missing = [s for s in sub if s not in index]
        if missing:
            raise IncompatibleWindowsError(f"sites {missing} not in the window")
        picks = [index[s] for s in sub]
        out: dict[Pattern, Fraction] = {}
        for pat, w in self.weights.items():
            key = tuple(pat[i] for i in picks)
            out[key] = out.get(key, Fraction(0)) + w
        return PatternDistribution(sub, out)

    def tv_distance(self, other: "PatternDistribution") -> Fraction:
        if not self.same_window(other):
            raise IncompatibleWindowsError("total variation across windows")
        keys = set(self.weights) | set(other.weights)
        return sum((abs(self.mass(k) - other.mass(k)) for k in keys), Fraction(0)) / 2

    def to_json(self) -> str:
        return json.dumps(
            {
                "window": [list(p) for p in self.sites],
                "weights": [
                    [list(pat), w.numerator, w.denominator]
                    for pat, w in sorted(self.weights.items())
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PatternDistribution":
        obj = json.loads(text)
        window = [tuple(int(c) for c in p) for p in obj["window"]]
        weights = {
            tuple(int(s) for s in pat): Fraction(num, den)
            for pat, num, den in obj["weights"]
        }
        return cls(window, weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternDistribution):
            return NotImplemented
        return self.sites == other.sites and self.weights == other.weights

    def __repr__(self) -> str:
        return (
            f"PatternDistribution({len(self.sites)} sites, "
            f"{len(self.weights)} patterns)"
        )


@dataclass
class MeasureSet:
    """Finite list of distributions over a common window."""

    members: list[PatternDistribution]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("measure set must be non-empty")
        first = self.members[0]
        if any(not m.same_window(first) for m in self.members):
            raise IncompatibleWindowsError("measure set spans several windows")


def empirical_measure(
    x: Configuration, window_set: FiniteSubset, W: FiniteSubset
) -> PatternDistribution:
    """Pattern frequencies of { (f.x)|_W : f in window_set }, exact."""
    if len(window_set) == 0 or len(W) == 0:
        raise ValueError("empirical measure needs non-empty sets")
    sites = W.sorted_points()
    xv = x.value
    counts: dict[Pattern, int] = {}
    for f in window_set:
        pat = tuple(xv(compose(w, f)) for w in sites)
        counts[pat] = counts.get(pat, 0) + 1
    total = len(window_set)
    return PatternDistribution(W, {p: Fraction(c, total) for p, c in counts.items()})


def pattern_metric(
    window: FiniteSubset | Sequence[Point], metric: AdmissibleMetric
) -> PatternCost:
    """Truncated admissible metric on patterns: sum of site weights over
    mismatched positions.  Strictly below 1 since the window is finite."""
    sites = (
        window.sorted_points()
        if isinstance(window, FiniteSubset)
        else tuple(sorted(tuple(p) for p in window))
    )
    site_weights = tuple(metric.weight(s) for s in sites)

    def dist(p: Pattern, q: Pattern) -> Fraction:
        acc = Fraction(0)
        for w, a, b in zip(site_weights, p, q):
            if a != b:
                acc += w
        return acc

    return dist


def _max_flow(capacity: dict[int, dict[int, Fraction]], source: int, sink: int) -> Fraction:
    """Edmonds-Karp on a small graph with Fraction capacities."""
    residual: dict[int, dict[int, Fraction]] = {}
    for u, edges in capacity.items():
        for v, c in edges.items():
            residual.setdefault(u, {})[v] = residual.get(u, {}).get(v, Fraction(0)) + c
            residual.setdefault(v, {}).setdefault(u, Fraction(0))
    flow = Fraction(0)
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in residual.get(u, {}).items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        bottleneck = None
        v = sink
        while parent[v] is not None:
            u = parent[v]
            c = residual[u][v]
            bottleneck = c if bottleneck is None else min(bottleneck, c)
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            residual[u][v] -= bottleneck
            residual[v][u] += bottleneck
            v = u
        flow += bottleneck


def _strassen_feasible(
    mu: PatternDistribution,
    nu: PatternDistribution,
    dist: PatternCost,
    eps: Fraction,
) -> bool:
    """Exact test of: exists coupling shipping mass >= 1 - eps across pairs
    at distance <= eps (Strassen's condition for the Prokhorov metric)."""
    left = mu.support()
    right = nu.support()
    source, sink = 0, 1
    capacity: dict[int, dict[int, Fraction]] = {source: {}, sink: {}}
    for i, p in enumerate(left):
        capacity[source][2 + i] = mu.weights[p]
    for j, q in enumerate(right):
        capacity.setdefault(2 + len(left) + j, {})[sink] = nu.weights[q]
    for i, p in enumerate(left):
        row = capacity.setdefault(2 + i, {})
        for j, q in enumerate(right):
            if dist(p, q) <= eps:
                row[2 + len(left) + j] = Fraction(1)
    return _max_flow(capacity, source, sink) >= 1 - eps


def _resolve_cost(
    mu: PatternDistribution,
    nu: PatternDistribution,
    metric: AdmissibleMetric | None,
    dist_fn: PatternCost | None,
) -> PatternCost:
    if not mu.same_window(nu):
        raise IncompatibleWindowsError("distributions on different windows")
    if dist_fn is not None:
        return lambda p, q: Fraction(dist_fn(p, q))
    dim = len(mu.sites[0])
    return pattern_metric(mu.sites, metric if metric is not None else default_metric(dim))


def prokhorov_distance(
    mu: PatternDistribution,
    nu: PatternDistribution,
    metric: AdmissibleMetric | None = None,
    *,
    dist_fn: PatternCost | None = None,
    resolution: Fraction = PROKHOROV_RESOLUTION,
) -> Fraction:
    """Smallest feasible Prokhorov epsilon, to the given resolution.

    The default pattern metric is the truncated admissible metric on the
    common window; pass dist_fn to override.  Exact zero is decided by a
    single feasibility test, so equal distributions return Fraction(0); the
    general case binary-searches dyadic rationals and returns a certified
    FEASIBLE epsilon within `resolution` of the infimum.
    """
    dist = _resolve_cost(mu, nu, metric, dist_fn)
    if _strassen_feasible(mu, nu, dist, Fraction(0)):
        return Fraction(0)
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if _strassen_feasible(mu, nu, dist, mid):
            hi = mid
        else:
            lo = mid
    return hi


def hausdorff_prokhorov(
    S: MeasureSet | Sequence[PatternDistribution],
    T: MeasureSet | Sequence[PatternDistribution],
    metric: AdmissibleMetric | None = None,
    *,
    dist_fn: PatternCost | None = None,
    resolution: Fraction = PROKHOROV_RESOLUTION,
) -> Fraction:
    """max(sup_s inf_t, sup_t inf_s) of pairwise Prokhorov distances."""
    s_members = list(S.members if isinstance(S, MeasureSet) else S)
    t_members = list(T.members if isinstance(T, MeasureSet) else T)
    if not s_members or not t_members:
        raise ValueError("Hausdorff distance of an empty measure set")
    table = [
        [
            prokhorov_distance(s, t, metric, dist_fn=dist_fn, resolution=resolution)
            for t in t_members
        ]
        for s in s_members
    ]
    forward = max(min(row) for row in table)
    backward = max(min(table[i][j] for i in range(len(s_members))) for j in range(len(t_members)))
    return max(forward, backward)


def omega_hat_approx(
    x: Configuration,
    F: FolnerSequence,
    n_list: Sequence[int],
    W: FiniteSubset,
    merge_tol: Fraction | float,
    metric: AdmissibleMetric | None = None,
) -> MeasureSet:
    """Greedy cluster representatives of the empirical measures along n_list.

    A new empirical measure joins an existing cluster when its Prokhorov
    distance to the representative (the cluster's first member) is at most
    merge_tol; otherwise it opens a new cluster.
    """
    if not n_list:
        raise ValueError("n_list must be non-empty")
    merge_tol = Fraction(merge_tol)
    if merge_tol <= 0:
        raise ValueError("merge tolerance must be positive")
    reps: list[PatternDistribution] = []
    for n in n_list:
        emp = empirical_measure(x, F.set_at(n), W)
        if all(prokhorov_distance(emp, rep, metric) > merge_tol for rep in reps):
            reps.append(emp)
    return MeasureSet(reps)


@dataclass(frozen=True)
class GenericityReport:
    passed: bool
    final_distance: Fraction
    distances: tuple[Fraction, ...]
    n_list: tuple[int, ...]


def genericity_check(
    x: Configuration,
    F: FolnerSequence,
    target: PatternDistribution,
    W: FiniteSubset,
    n_list: Sequence[int],
    tol: Fraction | float,
    metric: AdmissibleMetric | None = None,
) -> GenericityReport:
    """Empirical measures approach the target: final Prokhorov distance
    <= tol and nonincreasing over the last three indices within tol/2."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    ns = tuple(int(n) for n in n_list)
    if not ns:
        raise ValueError("n_list must be non-empty")
    distances = tuple(
        prokhorov_distance(empirical_measure(x, F.set_at(n), W), target, metric)
        for n in ns
    )
    final = distances[-1]
    tail = distances[-3:]
    monotone = all(b <= a + tol / 2 for a, b in zip(tail, tail[1:]))
    return GenericityReport(
        passed=final <= tol and monotone,
        final_distance=final,
        distances=distances,
        n_list=ns,
    )
