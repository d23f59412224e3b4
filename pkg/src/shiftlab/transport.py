"""Exact optimal transport between pattern distributions, and the joining
pseudometric machinery built on it.

The solver is a transportation simplex in Fraction arithmetic: northwest
corner start, tree duals, Bland-rule pivoting, and a complementary
slackness certificate checked on every solve.  A brute-force oracle
enumerates integer contingency tables at a common denominator (the
transportation polytope has integral vertices there, so the enumeration
is exhaustive for the optimum).  The general joining infimum is computed
only two honest ways: a monotone lower-bound chain from finite windows
and an exact shift-enumeration oracle for periodic orbit measures.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Mapping, Sequence

from .configs import AdmissibleMetric, Configuration, Lattice, default_metric
from .errors import (
    IncompatibleMiddleError,
    IncompatibleWindowsError,
    InvalidDimensionError,
    InvalidFamilyError,
)
from .groups import FiniteSubset, FolnerSequence, Point, compose
from .measures import PatternDistribution, empirical_measure, pattern_metric
from .metrics import dbar_estimate

Pattern = tuple[int, ...]
CostFn = Callable[[Pattern, Pattern], Fraction]


class Coupling:
    """Joint distribution over pattern pairs with prescribed marginals."""

    __slots__ = ("left", "right", "weights")

    def __init__(
        self,
        left: PatternDistribution,
        right: PatternDistribution,
        weights: Mapping[tuple[Pattern, Pattern], Fraction],
    ):
        if not left.same_window(right):
            raise IncompatibleWindowsError("coupling across different windows")
        cleaned: dict[tuple[Pattern, Pattern], Fraction] = {}
        row_sums: dict[Pattern, Fraction] = defaultdict(Fraction)
        col_sums: dict[Pattern, Fraction] = defaultdict(Fraction)
        for (p, q), w in weights.items():
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative coupling weight at {(p, q)}")
            if w > 0:
                key = (tuple(p), tuple(q))
                cleaned[key] = cleaned.get(key, Fraction(0)) + w
                row_sums[key[0]] += w
                col_sums[key[1]] += w
        if dict(row_sums) != left.weights:
            raise ValueError("row sums do not match the left marginal")
        if dict(col_sums) != right.weights:
            raise ValueError("column sums do not match the right marginal")
        self.left = left
        self.right = right
        self.weights = cleaned

    def cost(self, cost_fn: CostFn) -> Fraction:
        return sum(
            (w * Fraction(cost_fn(p, q)) for (p, q), w in self.weights.items()),
            Fraction(0),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "window": [list(s) for s in self.left.sites],
                "pairs": [
                    [list(p), list(q), w.numerator, w.denominator]
                    for (p, q), w in sorted(self.weights.items())
                ],
            }
        )

    def __repr__(self) -> str:
        return f"Coupling({len(self.weights)} atoms)"


def _as_cost_fn(cost: CostFn | Mapping[tuple[Pattern, Pattern], Fraction]) -> CostFn:
    if callable(cost):
        return lambda p, q: Fraction(cost(p, q))
    table = {(tuple(p), tuple(q)): Fraction(w) for (p, q), w in cost.items()}

    def fn(p: Pattern, q: Pattern) -> Fraction:
        try:
            return table[(p, q)]
        except KeyError:
            raise ValueError(f"cost table misses pair {(p, q)}") from None

    return fn


def hamming_per_site_cost(sites: Sequence[Point]) -> CostFn:
    """Mismatch count divided by window size."""
    size = len(sites)
    if size == 0:
        raise ValueError("empty window")

    def fn(p: Pattern, q: Pattern) -> Fraction:
        return Fraction(sum(1 for a, b in zip(p, q) if a != b), size)

    return fn


@dataclass(frozen=True)
class TransportResult:
    coupling: Coupling
    value: Fraction
    row_potentials: dict[Pattern, Fraction]
    col_potentials: dict[Pattern, Fraction]

    def __iter__(self):
        # unpacks as (coupling, value); potentials stay on the object
        return iter((self.coupling, self.value))


def _northwest_corner(a: list[Fraction], b: list[Fraction]):
    """Initial basic feasible staircase with exactly m+n-1 cells."""
    m, n = len(a), len(b)
    rem_a, rem_b = a[:], b[:]
    basis: list[tuple[int, int]] = []
    flows: dict[tuple[int, int], Fraction] = {}
    i = j = 0
    while True:
        t = min(rem_a[i], rem_b[j])
        basis.append((i, j))
        flows[(i, j)] = t
        rem_a[i] -= t
        rem_b[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if rem_a[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    return flows, set(basis)


def _tree_duals(basis, C, m, n):
    row_adj: dict[int, list[int]] = defaultdict(list)
    col_adj: dict[int, list[int]] = defaultdict(list)
    for i, j in basis:
        row_adj[i].append(j)
        col_adj[j].append(i)
    u: list[Fraction | None] = [None] * m
    v: list[Fraction | None] = [None] * n
    u[0] = Fraction(0)
    stack: list[tuple[str, int]] = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in row_adj[k]:
                if v[j] is None:
                    v[j] = C[k][j] - u[k]
                    stack.append(("c", j))
        else:
            for i in col_adj[k]:
                if u[i] is None:
                    u[i] = C[i][k] - v[k]
                    stack.append(("r", i))
    if any(x is None for x in u) or any(x is None for x in v):
        raise AssertionError("basis does not span the bipartite node set")
    return u, v


def _basis_cycle(basis, enter):
    """Alternating cycle closed by the entering cell: [(cell, sign), ...]."""
    i0, j0 = enter
    row_adj: dict[int, list[int]] = defaultdict(list)
    col_adj: dict[int, list[int]] = defaultdict(list)
    for i, j in basis:
        row_adj[i].append(j)
        col_adj[j].append(i)
    # path from column j0 back to row i0 through the basis tree
    start = ("c", j0)
    goal = ("r", i0)
    parent: dict[tuple[str, int], tuple[str, int] | None] = {start: None}
    queue = deque([start])
    while queue and goal not in parent:
        kind, k = queue.popleft()
        if kind == "c":
            for i in col_adj[k]:
                node = ("r", i)
                if node not in parent:
                    parent[node] = (kind, k)
                    queue.append(node)
        else:
            for j in row_adj[k]:
                node = ("c", j)
                if node not in parent:
                    parent[node] = (kind, k)
                    queue.append(node)
    if goal not in parent:
        raise AssertionError("entering cell not connected to the basis tree")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    # path runs row i0 -> ... -> col j0; edges alternate, signs alternate
    cycle = [(enter, 1)]
    sign = -1
    for a, b in zip(path, path[1:]):
        (ka, na), (kb, nb) = a, b
        cell = (na, nb) if ka == "r" else (nb, na)
        cycle.append((cell, sign))
        sign = -sign
    return cycle


MAX_PIVOTS = 100_000


def min_cost_transport(
    mu: PatternDistribution,
    nu: PatternDistribution,
    cost: CostFn | Mapping[tuple[Pattern, Pattern], Fraction],
) -> TransportResult:
    """Exact optimal coupling and cost, with a dual certificate.

    Pivoting uses Bland's rule (first negative reduced cost in row-major
    support order; lexicographically smallest leaving cell), so the solve
    is deterministic and cannot cycle.  The returned potentials satisfy
    u_i + v_j <= c_ij everywhere with equality on the support, and the
    primal value equals the dual value; both facts are asserted before
    returning.
    """
    if not mu.same_window(nu):
        raise IncompatibleWindowsError("transport across different windows")
    cost_fn = _as_cost_fn(cost)
    rows = mu.support()
    cols = nu.support()
    a = [mu.weights[p] for p in rows]
    b = [nu.weights[q] for q in cols]
    C = [[Fraction(cost_fn(p, q)) for q in cols] for p in rows]
    if any(c < 0 for row in C for c in row):
        raise ValueError("costs must be nonnegative")
    m, n = len(rows), len(cols)
    flows, basis = _northwest_corner(a, b)
    for _ in range(MAX_PIVOTS):
        u, v = _tree_duals(basis, C, m, n)
        enter = None
        for i in range(m):
            ui = u[i]
            for j in range(n):
                if (i, j) not in basis and C[i][j] - ui - v[j] < 0:
                    enter = (i, j)
                    break
            if enter:
                break
        if enter is None:
            break
        cycle = _basis_cycle(basis, enter)
        minus_cells = [cell for cell, sign in cycle if sign < 0]
        theta = min(flows[cell] for cell in minus_cells)
        leaving = min(cell for cell in minus_cells if flows[cell] == theta)
        for cell, sign in cycle:
            if cell == enter:
                flows[cell] = theta
            else:
                flows[cell] += sign * theta
        basis.remove(leaving)
        del flows[leaving]
        basis.add(enter)
    else:
        raise AssertionError("pivot limit exceeded; Bland's rule should prevent this")

    value = sum((flows[(i, j)] * C[i][j] for i, j in basis), Fraction(0))
    u, v = _tree_duals(basis, C, m, n)
    # complementary slackness + strong duality, exact
    for i in range(m):
        for j in range(n):
            if C[i][j] - u[i] - v[j] < 0:
                raise AssertionError("dual infeasibility after termination")
    dual_value = sum((u[i] * a[i] for i in range(m)), Fraction(0)) + sum(
        (v[j] * b[j] for j in range(n)), Fraction(0)
    )
    if dual_value != value:
        raise AssertionError("strong duality violated; solver bug")
    weights = {
        (rows[i], cols[j]): f for (i, j), f in flows.items() if f > 0
    }
    coupling = Coupling(mu, nu, weights)
    return TransportResult(
        coupling=coupling,
        value=value,
        row_potentials={rows[i]: u[i] for i in range(m)},
        col_potentials={cols[j]: v[j] for j in range(n)},
    )


def verify_transport_certificate(
    result: TransportResult,
    cost: CostFn | Mapping[tuple[Pattern, Pattern], Fraction],
) -> bool:
    """Re-check the optimality certificate independently of the solver."""
    cost_fn = _as_cost_fn(cost)
    mu, nu = result.coupling.left, result.coupling.right
    u, v = result.row_potentials, result.col_potentials
    for p in mu.support():
        for q in nu.support():
            if u[p] + v[q] > Fraction(cost_fn(p, q)):
                return False
    for (p, q), w in result.coupling.weights.items():
        if w > 0 and u[p] + v[q] != Fraction(cost_fn(p, q)):
            return False
    primal = result.coupling.cost(cost_fn)
    dual = sum((u[p] * w for p, w in mu.weights.items()), Fraction(0)) + sum(
        (v[q] * w for q, w in nu.weights.items()), Fraction(0)
    )
    return primal == result.value == dual


def brute_force_min_cost(
    mu: PatternDistribution,
    nu: PatternDistribution,
    cost: CostFn | Mapping[tuple[Pattern, Pattern], Fraction],
) -> Fraction:
    """Exhaustive minimum over integer contingency tables.

    At the common denominator D of all marginal masses the transportation
    polytope has integer-numerator vertices, so scanning integer tables
    with the prescribed margins finds the exact optimum.  Exponential in
    the support sizes; intended as an oracle for small instances.
    """
    if not mu.same_window(nu):
        raise IncompatibleWindowsError("transport across different windows")
    cost_fn = _as_cost_fn(cost)
    rows = mu.support()
    cols = nu.support()
    D = 1
    for w in list(mu.weights.values()) + list(nu.weights.values()):
        D = lcm(D, w.denominator)
    r = [int(mu.weights[p] * D) for p in rows]
    c = [int(nu.weights[q] * D) for q in cols]
    C = [[Fraction(cost_fn(p, q)) for q in cols] for p in rows]
    n = len(cols)
    best: list[Fraction | None] = [None]

    def fill(i: int, rem_cols: tuple[int, ...], acc: Fraction) -> None:
        if best[0] is not None and acc >= best[0]:
            return
        if i == len(rows):
            if all(x == 0 for x in rem_cols):
                best[0] = acc
            return
        target = r[i]

        def comp(j: int, left: int, rem: tuple[int, ...], cur: Fraction) -> None:
            if best[0] is not None and cur >= best[0]:
                return
            if j == n - 1:
                if left <= rem[j]:
                    new_rem = rem[:j] + (rem[j] - left,)
                    fill(i + 1, new_rem, cur + left * C[i][j] / D)
                return
            for t in range(min(left, rem[j]) + 1):
                comp(
                    j + 1,
                    left - t,
                    rem[:j] + (rem[j] - t,) + rem[j + 1 :],
                    cur + t * C[i][j] / D,
                )

        comp(0, target, rem_cols, acc)

    fill(0, tuple(c), Fraction(0))
    if best[0] is None:
        raise AssertionError("no feasible table; marginals inconsistent")
    return best[0]


def glue_couplings(pi12: Coupling, pi23: Coupling) -> Coupling:
    """Relatively independent gluing over the shared middle marginal.

    pi13(a, c) = sum_b pi12(a, b) pi23(b, c) / eta(b), eta = the common
    middle.  Exact rational arithmetic; marginals are preserved exactly.
    """
    eta = pi12.right
    if eta != pi23.left:
        raise IncompatibleMiddleError("middle marginals disagree")
    by_middle_left: dict[Pattern, list[tuple[Pattern, Fraction]]] = defaultdict(list)
    for (a, b), w in pi12.weights.items():
        by_middle_left[b].append((a, w))
    by_middle_right: dict[Pattern, list[tuple[Pattern, Fraction]]] = defaultdict(list)
    for (b, c), w in pi23.weights.items():
        by_middle_right[b].append((c, w))
    out: dict[tuple[Pattern, Pattern], Fraction] = defaultdict(Fraction)
    for b, mass in eta.weights.items():
        # Coupling invariants force mass > 0 on every middle atom seen here
        for a, w1 in by_middle_left.get(b, ()):
            for c, w2 in by_middle_right.get(b, ()):
                out[(a, c)] += w1 * w2 / mass
    return Coupling(pi12.left, pi23.right, out)


def pair_empirical_joining(
    x: Configuration, z: Configuration, F_n: FiniteSubset, W: FiniteSubset
) -> Coupling:
    """Empirical distribution of joint W-patterns of (f.x, f.z), f in F_n."""
    if len(F_n) == 0 or len(W) == 0:
        raise ValueError("pair joining needs non-empty sets")
    sites = W.sorted_points()
    xv, zv = x.value, z.value
    counts: dict[tuple[Pattern, Pattern], int] = defaultdict(int)
    for f in F_n:
        p = tuple(xv(compose(w, f)) for w in sites)
        q = tuple(zv(compose(w, f)) for w in sites)
        counts[(p, q)] += 1
    total = len(F_n)
    weights = {pq: Fraction(cnt, total) for pq, cnt in counts.items()}
    mu = empirical_measure(x, F_n, W)
    nu = empirical_measure(z, F_n, W)
    return Coupling(mu, nu, weights)


@dataclass(frozen=True)
class PeriodicOrbitMeasure:
    """Uniform measure on the finitely many translates of a periodic config."""

    config: Configuration
    lattice: Lattice

    def __post_init__(self) -> None:
        if self.config.dim != self.lattice.dim:
            raise InvalidDimensionError("config and lattice dimension differ")
        # spot-check periodicity on the fundamental domain, one generator at a time
        domain = self.lattice.fundamental_domain()
        if len(domain) <= 100_000:
            val = self.config.value
            for j in range(self.lattice.dim):
                gen = tuple(self.lattice.basis[i][j] for i in range(self.lattice.dim))
                bad = next((p for p in domain if val(p) != val(compose(p, gen))), None)
                if bad is not None:
                    raise ValueError(
                        f"config not periodic under the lattice: site {bad}, generator {gen}"
                    )

    @classmethod
    def from_config(cls, x: Configuration) -> "PeriodicOrbitMeasure":
        if x.period_lattice is None:
            raise ValueError("configuration does not declare a period lattice")
        return cls(config=x, lattice=x.period_lattice)

    def block_marginal(self, W: FiniteSubset) -> PatternDistribution:
        """Exact W-marginal: pattern frequencies over one fundamental domain."""
        return empirical_measure(self.config, self.lattice.fundamental_domain(), W)

    def marginal_family(self, windows: Sequence[FiniteSubset]) -> list[PatternDistribution]:
        return [self.block_marginal(W) for W in windows]


def _joint_period_axes(a: PeriodicOrbitMeasure, b: PeriodicOrbitMeasure) -> tuple[int, ...]:
    la, lb = a.lattice, b.lattice
    if la.moduli is not None and lb.moduli is not None:
        return tuple(lcm(p, q) for p, q in zip(la.moduli, lb.moduli))
    return (lcm(la.index, lb.index),) * la.dim


def periodic_rho_oracle(
    a: PeriodicOrbitMeasure,
    b: PeriodicOrbitMeasure,
    cost_kind: str = "hamming-per-site",
) -> Fraction:
    """Exact joining infimum for two periodic orbit measures.

    Every ergodic joining of two periodic systems is the uniform orbit
    measure of some relative shift, so the minimum of per-site mismatch
    frequency over one joint period, taken over all shifts in a joint
    fundamental domain, is the exact value.
    """
    if cost_kind != "hamming-per-site":
        raise ValueError(f"unsupported cost kind {cost_kind!r}")
    if a.lattice.dim != b.lattice.dim:
        raise InvalidDimensionError("orbit measures in different dimensions")
    axes = _joint_period_axes(a, b)
    box = FiniteSubset.box((0,) * len(axes), tuple(m - 1 for m in axes))
    size = len(box)
    if size * size > 10**8:
        raise ValueError(f"joint period {size} too large for shift enumeration")
    xv = a.config.value
    zv = b.config.value
    xs = {p: xv(p) for p in box}
    # z values are needed on box + box; evaluate once
    big = FiniteSubset.box((0,) * len(axes), tuple(2 * m - 2 for m in axes))
    zs = {p: zv(p) for p in big}
    best: Fraction | None = None
    for s in box:
        bad = sum(1 for p in box if xs[p] != zs[compose(p, s)])
        val = Fraction(bad, size)
        if best is None or val < best:
            best = val
            if best == 0:
                break
    return best


def rho_bar_lower(
    mu_family: Sequence[PatternDistribution],
    nu_family: Sequence[PatternDistribution],
    cost_kind: str = "hamming-per-site",
    metric: AdmissibleMetric | None = None,
) -> list[Fraction]:
    """Lower-bound chain for the joining infimum from nested block marginals.

    Any joining's W_k-marginal is a feasible coupling of the W_k block
    marginals, so each window's optimal transport value bounds the joining
    infimum from below.  cost_kind "hamming-per-site" averages mismatches
    over the window (dbar flavor); "admissible" sums the metric's absolute
    site weights (rho flavor, window read as centered at the origin).
    """
    if len(mu_family) != len(nu_family):
        raise InvalidFamilyError("families of different length")
    if not mu_family:
        raise InvalidFamilyError("empty marginal family")
    for k, (mu, nu) in enumerate(zip(mu_family, nu_family)):
        if not mu.same_window(nu):
            raise IncompatibleWindowsError(f"window mismatch at stage {k}")
    for fam in (mu_family, nu_family):
        for prev, cur in zip(fam, fam[1:]):
            prev_sites = set(prev.sites)
            cur_sites = set(cur.sites)
            if not prev_sites < cur_sites:
                raise InvalidFamilyError("windows must be strictly nested")
            if cur.marginal(prev.sites) != prev:
                raise InvalidFamilyError("marginal family is inconsistent")
    values = []
    for mu, nu in zip(mu_family, nu_family):
        if cost_kind == "hamming-per-site":
            cost = hamming_per_site_cost(mu.sites)
        elif cost_kind == "admissible":
            m = metric if metric is not None else default_metric(len(mu.sites[0]))
            cost = pattern_metric(mu.sites, m)
        else:
            raise ValueError(f"unknown cost kind {cost_kind!r}")
        values.append(min_cost_transport(mu, nu, cost).value)
    return values


@dataclass(frozen=True)
class DbRhoReport:
    dbar: Fraction
    oracle: Fraction
    chain: tuple[Fraction, ...]
    n: int
    k_max: int
    tol: Fraction
    passed: bool


def check_db_ge_rho(
    x: Configuration,
    z: Configuration,
    F: FolnerSequence,
    n: int,
    k_max: int,
    tol: Fraction | float = Fraction(1, 100),
) -> DbRhoReport:
    """Finite-scale harness for: Besicovitch dbar dominates the joining
    infimum.  Needs periodic configurations so the infimum is computable."""
    tol = Fraction(tol)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    oa = PeriodicOrbitMeasure.from_config(x)
    ob = PeriodicOrbitMeasure.from_config(z)
    windows = [
        FiniteSubset.box((0,) * x.dim, (k - 1,) * x.dim) for k in range(1, k_max + 1)
    ]
    chain = tuple(
        rho_bar_lower(oa.marginal_family(windows), ob.marginal_family(windows))
    )
    oracle = periodic_rho_oracle(oa, ob)
    dbar = dbar_estimate(x, z, F, n)
    passed = dbar >= oracle - tol and all(c <= oracle for c in chain)
    return DbRhoReport(
        dbar=dbar, oracle=oracle, chain=chain, n=n, k_max=k_max, tol=tol, passed=passed
    )


@dataclass(frozen=True)
class TriangleReport:
    d12: Fraction
    d23: Fraction
    d13: Fraction
    glued_cost: Fraction
    passed: bool


def rho_triangle_check(
    mu: PatternDistribution,
    eta: PatternDistribution,
    nu: PatternDistribution,
    cost: CostFn | Mapping[tuple[Pattern, Pattern], Fraction],
) -> TriangleReport:
    """Exact triangle inequality check, with the glued coupling as witness."""
    cost_fn = _as_cost_fn(cost)
    r12 = min_cost_transport(mu, eta, cost_fn)
    r23 = min_cost_transport(eta, nu, cost_fn)
    r13 = min_cost_transport(mu, nu, cost_fn)
    glued = glue_couplings(r12.coupling, r23.coupling)
    glued_cost = glued.cost(cost_fn)
    passed = r13.value <= r12.value + r23.value and r13.value <= glued_cost
    return TriangleReport(
        d12=r12.value, d23=r23.value, d13=r13.value, glued_cost=glued_cost, passed=passed
    )
