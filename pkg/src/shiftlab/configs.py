"""Configurations on Z^d given by finite rules, plus the weighted metric.

A configuration is a total map Z^d -> alphabet described by a finite rule:
a constant, a periodic table over a finite-index sublattice, a predicate,
or a finite patch over another configuration.  The metric machinery at the
bottom implements summable translation weights with certified tail bounds,
so truncated distances come back as exact [lo, hi] Fraction intervals.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InvalidDimensionError
from .groups import FiniteSubset, Point, compose, sup_norm


@dataclass(frozen=True)
class Alphabet:
    """Finite alphabet {0, ..., size-1}."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError(f"alphabet needs at least 2 symbols, got {self.size}")

    def symbols(self) -> range:
        return range(self.size)

    def check(self, s: int) -> int:
        if not 0 <= s < self.size:
            raise ValueError(f"symbol {s} outside alphabet of size {self.size}")
        return s


def _gauss_invert(rows: tuple[tuple[int, ...], ...]):
    """Exact inverse and determinant of an integer matrix via Fraction Gauss.

    Returns (inverse as tuple-of-tuples of Fractions, det as Fraction).
    """
    d = len(rows)
    a = [[Fraction(rows[i][j]) for j in range(d)] + [Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    det = Fraction(1)
    for col in range(d):
        pivot = next((r for r in range(col, d) if a[r][col] != 0), None)
        if pivot is None:
            return None, Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(d):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return tuple(tuple(row[d:]) for row in a), det


class Lattice:
    """Finite-index sublattice of Z^d spanned by integer basis columns.

    basis[i][j] is the i-th coordinate of the j-th generator.  The index in
    Z^d equals |det basis| and must be finite (nonzero determinant).
    """

    __slots__ = ("dim", "basis", "index", "_inv", "_moduli")

    def __init__(self, basis: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(c) for c in row) for row in basis)
        d = len(rows)
        if d < 1 or any(len(r) != d for r in rows):
            raise InvalidDimensionError("basis must be a square matrix")
        inv, det = _gauss_invert(rows)
        if det == 0:
            raise ValueError("basis is singular; the sublattice must have finite index")
        self.dim = d
        self.basis = rows
        self.index = abs(int(det))
        self._inv = inv
        moduli = None
        if all(rows[i][j] == 0 for i in range(d) for j in range(d) if i != j):
            diag = tuple(rows[i][i] for i in range(d))
            if all(m > 0 for m in diag):
                moduli = diag
        self._moduli = moduli

    @classmethod
    def diagonal(cls, moduli: Sequence[int] | int, dim: int | None = None) -> "Lattice":
        """prod_i (m_i Z); a scalar m with dim=d means (mZ)^d."""
        if isinstance(moduli, int):
            if dim is None:
                raise InvalidDimensionError("scalar modulus needs an explicit dim")
            moduli = (moduli,) * dim
        moduli = tuple(int(m) for m in moduli)
        if any(m < 1 for m in moduli):
            raise ValueError(f"moduli must be >= 1, got {moduli}")
        d = len(moduli)
        return cls([[moduli[i] if i == j else 0 for j in range(d)] for i in range(d)])

    @property
    def moduli(self) -> tuple[int, ...] | None:
        """Per-axis moduli when the basis is diagonal, else None."""
        return self._moduli

    def coords(self, p: Point) -> tuple[Fraction, ...]:
        if len(p) != self.dim:
            raise InvalidDimensionError("point of wrong dimension")
        return tuple(
            sum(self._inv[i][j] * p[j] for j in range(self.dim)) for i in range(self.dim)
        )

    def contains(self, p: Point) -> bool:
        if self._moduli is not None:
            return len(p) == self.dim and all(c % m == 0 for c, m in zip(p, self._moduli))
        return all(c.denominator == 1 for c in self.coords(p))

    def reduce(self, p: Point) -> Point:
        """Canonical representative of p + L (basis coordinates in [0,1))."""
        if self._moduli is not None:
            if len(p) != self.dim:
                raise InvalidDimensionError("point of wrong dimension")
            return tuple(c % m for c, m in zip(p, self._moduli))
        floors = [math.floor(c) for c in self.coords(p)]
        return tuple(
            p[i] - sum(self.basis[i][j] * floors[j] for j in range(self.dim))
            for i in range(self.dim)
        )

    def fundamental_domain(self) -> FiniteSubset:
        """One representative per coset of L in Z^d (index-many points)."""
        if self._moduli is not None:
            return FiniteSubset.box((0,) * self.dim, tuple(m - 1 for m in self._moduli))
        seen: dict[Point, None] = {}
        ranges = [range(self.index) for _ in range(self.dim)]
        for p in itertools.product(*ranges):
            r = self.reduce(p)
            seen.setdefault(r, None)
        if len(seen) != self.index:
            raise AssertionError("fundamental domain enumeration mismatch")
        return FiniteSubset(seen.keys())

    def __repr__(self) -> str:
        if self._moduli is not None:
            return f"Lattice.diagonal({list(self._moduli)})"
        return f"Lattice({[list(r) for r in self.basis]})"


class Configuration:
    """A point of the shift space: a total rule Z^dim -> alphabet.

    `period_lattice` is an optional promise that the rule is invariant
    under translation by that sublattice; exact-orbit tooling relies on it.
    """

    __slots__ = ("dim", "alphabet", "kind", "period_lattice", "_rule")

    def __init__(
        self,
        dim: int,
        alphabet: Alphabet | int,
        rule: Callable[[Point], int],
        *,
        kind: str = "rule",
        period_lattice: Lattice | None = None,
    ):
        if dim < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
        self.dim = dim
        self.alphabet = Alphabet(alphabet) if isinstance(alphabet, int) else alphabet
        self.kind = kind
        self.period_lattice = period_lattice
        self._rule = rule

    def value(self, g: Point) -> int:
        return self._rule(g)

    def __repr__(self) -> str:
        return f"Configuration(kind={self.kind!r}, dim={self.dim}, |A|={self.alphabet.size})"


def constant_config(dim: int, symbol: int, alphabet: int = 2) -> Configuration:
    a = Alphabet(alphabet)
    a.check(symbol)
    return Configuration(dim, a, lambda g: symbol, kind=f"constant:{symbol}",
                         period_lattice=Lattice.diagonal(1, dim=dim))


def periodic_config(lattice: Lattice, table: Mapping[Point, int], alphabet: int = 2) -> Configuration:
    """Configuration invariant under `lattice`, given by a coset table.

    The table must assign a symbol to every coset; keys are canonicalized
    through lattice.reduce, so any coset representatives are accepted.
    """
    a = Alphabet(alphabet)
    canon: dict[Point, int] = {}
    for k, v in table.items():
        canon[lattice.reduce(tuple(k))] = a.check(v)
    domain = lattice.fundamental_domain()
    missing = [p for p in domain if p not in canon]
    if missing:
        raise ValueError(f"table misses {len(missing)} cosets, e.g. {missing[0]}")
    if len(canon) != len(domain):
        raise ValueError("table has entries outside the fundamental domain")
    moduli = lattice.moduli
    if moduli is not None and len(moduli) == 1:
        m = moduli[0]
        row = tuple(canon[(i,)] for i in range(m))
        return Configuration(1, a, lambda g: row[g[0] % m], kind="periodic",
                             period_lattice=lattice)
    if moduli is not None:
        table_c = dict(canon)
        def rule(g: Point, _m=moduli, _t=table_c) -> int:
            return _t[tuple(c % m for c, m in zip(g, _m))]
        return Configuration(lattice.dim, a, rule, kind="periodic", period_lattice=lattice)
    table_c = dict(canon)
    return Configuration(lattice.dim, a, lambda g: table_c[lattice.reduce(g)],
                         kind="periodic", period_lattice=lattice)


def word_config(word: Sequence[int], alphabet: int = 2) -> Configuration:
    """d=1 configuration repeating `word` with period len(word)."""
    word = tuple(int(s) for s in word)
    if not word:
        raise ValueError("word must be non-empty")
    lat = Lattice.diagonal([len(word)])
    return periodic_config(lat, {(i,): s for i, s in enumerate(word)}, alphabet)


def predicate_config(
    dim: int,
    predicate: Callable[[Point], bool],
    *,
    name: str = "predicate",
    alphabet: int = 2,
    period_lattice: Lattice | None = None,
) -> Configuration:
    """Indicator configuration: 1 where the predicate holds."""
    return Configuration(dim, alphabet, lambda g: int(bool(predicate(g))),
                         kind=name, period_lattice=period_lattice)


def patched_config(base: Configuration, patch: Mapping[Point, int]) -> Configuration:
    """Finite modification of `base` (patch wins on its domain)."""
    fixed = {tuple(k): base.alphabet.check(v) for k, v in patch.items()}
    if any(len(k) != base.dim for k in fixed):
        raise InvalidDimensionError("patch key of wrong dimension")
    def rule(g: Point) -> int:
        hit = fixed.get(g)
        return base.value(g) if hit is None else hit
    return Configuration(base.dim, base.alphabet, rule, kind=f"patched:{base.kind}")


def shift(g: Point, x: Configuration) -> Configuration:
    """Left shift action: (g.x)(h) = x(h + g)."""
    if len(g) != x.dim:
        raise InvalidDimensionError("shift by point of wrong dimension")
    return Configuration(
        x.dim,
        x.alphabet,
        lambda h: x.value(compose(h, g)),
        kind=x.kind,
        period_lattice=x.period_lattice,
    )


def restrict(x: Configuration, window: FiniteSubset | Iterable[Point]) -> tuple[int, ...]:
    """Pattern of x over the window, in ascending lexicographic site order."""
    sites = window.sorted_points() if isinstance(window, FiniteSubset) else tuple(sorted(window))
    return tuple(x.value(p) for p in sites)


def pattern_to_json(window: FiniteSubset | Iterable[Point], symbols: Sequence[int]) -> str:
    """Serialize a finite pattern: canonical site list plus symbol list."""
    sites = window.sorted_points() if isinstance(window, FiniteSubset) else tuple(sorted(window))
    symbols = tuple(int(s) for s in symbols)
    if len(sites) != len(symbols):
        raise ValueError(f"{len(sites)} sites vs {len(symbols)} symbols")
    return json.dumps({"window": [list(p) for p in sites], "symbols": list(symbols)})


def pattern_from_json(text: str) -> tuple[FiniteSubset, tuple[int, ...]]:
    obj = json.loads(text)
    sites = [tuple(int(c) for c in p) for p in obj["window"]]
    symbols = tuple(int(s) for s in obj["symbols"])
    if len(sites) != len(symbols):
        raise ValueError("window/symbols length mismatch")
    if sites != sorted(sites):
        raise ValueError("window sites not in canonical order")
    return FiniteSubset(sites), symbols


# --- admissible metric ------------------------------------------------------

DEFAULT_RADIUS = 12


def shell_size(dim: int, r: int) -> int:
    """Number of points with sup-norm exactly r."""
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    if r < 0:
        raise ValueError(f"shell radius must be >= 0, got {r}")
    if r == 0:
        return 1
    return (2 * r + 1) ** dim - (2 * r - 1) ** dim


@dataclass(frozen=True)
class AdmissibleMetric:
    """Summable translation-weight metric d(x,z) = sum_g w(g) [x(g) != z(g)].

    tail_bound(R) must dominate the total weight outside the closed sup-norm
    ball of radius R; it may be slack (the default family declares 2^-R
    although its exact tail is 2^-(R+1)).
    """

    dim: int
    weight: Callable[[Point], Fraction]
    tail_bound: Callable[[int], Fraction]

    def ball_weights(self, radius: int) -> tuple[tuple[Point, Fraction], ...]:
        return _ball_weights(self, radius)


@lru_cache(maxsize=64)
def _ball_weights(metric: AdmissibleMetric, radius: int) -> tuple[tuple[Point, Fraction], ...]:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    box = FiniteSubset.box((-radius,) * metric.dim, (radius,) * metric.dim)
    return tuple((p, metric.weight(p)) for p in box)


def default_metric(dim: int) -> AdmissibleMetric:
    """Weight 2^-r / (2 * shell_size(dim, r)) at sup-norm r; total mass 1.

    Each shell carries mass 2^-r / 2, so the declared tail bound 2^-R is an
    upper bound with a factor-2 margin over the exact tail 2^-(R+1).
    """
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")

    @lru_cache(maxsize=None)
    def shell_weight(r: int) -> Fraction:
        return Fraction(1, 2**r * 2 * shell_size(dim, r))

    def weight(g: Point) -> Fraction:
        return shell_weight(sup_norm(g))

    def tail_bound(radius: int) -> Fraction:
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        return Fraction(1, 2**radius)

    return AdmissibleMetric(dim=dim, weight=weight, tail_bound=tail_bound)


def config_distance(
    x: Configuration,
    z: Configuration,
    metric: AdmissibleMetric | None = None,
    radius: int = DEFAULT_RADIUS,
) -> tuple[Fraction, Fraction]:
    """Certified interval [lo, hi] for the metric distance between x and z.

    lo sums weights of observed mismatches within the ball; hi adds the
    declared tail bound, clamped at the metric's total mass ceiling 1.
    """
    if x.dim != z.dim:
        raise InvalidDimensionError("configurations of different dimension")
    if metric is None:
        metric = default_metric(x.dim)
    if metric.dim != x.dim:
        raise InvalidDimensionError("metric dimension does not match configurations")
    lo = Fraction(0)
    for p, w in metric.ball_weights(radius):
        if x.value(p) != z.value(p):
            lo += w
    hi = min(lo + metric.tail_bound(radius), Fraction(1))
    return lo, hi
