"""Named example configurations: visible lattice points, their periodic
approximants from finite prime sets, a residually finite substitution
sequence over the integers, block-entropy evidence, and seeded random
configurations for negative controls and randomized checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from random import Random
from typing import Callable, Mapping, Sequence

from .configs import Configuration, Lattice, constant_config, predicate_config, word_config
from .errors import StageExhaustedError
from .groups import FiniteSubset, Point
from .measures import empirical_measure

# first 25 primes; enough for every approximant stage this package exposes
PRIMES: tuple[int, ...] = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
)


def visible_points_config() -> Configuration:
    """Indicator of the planar points visible from the origin.

    v(m, n) = 1 iff gcd(m, n) = 1.  gcd(0, 0) is 0, so the origin itself
    is not visible.
    """
    return predicate_config(2, lambda g: gcd(g[0], g[1]) == 1, name="visible")


def prime_approx_config(n: int) -> Configuration:
    """Periodic approximant: 0 exactly where one of the first n primes
    divides both coordinates.  Periodic under (p_1 ... p_n) Z^2."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n > len(PRIMES):
        raise ValueError(f"only {len(PRIMES)} primes configured, got n={n}")
    ps = PRIMES[:n]
    period = math.prod(ps)

    def rule(g: Point) -> bool:
        m, k = g
        return not any(m % p == 0 and k % p == 0 for p in ps)

    return predicate_config(
        2,
        rule,
        name=f"prime-approx:{n}",
        period_lattice=Lattice.diagonal(period, dim=2),
    )


def _default_complement(tile_count: int) -> int:
    return tile_count - 1


@dataclass(frozen=True)
class SubstitutionStage:
    """Stage data for the one-dimensional substitution sequence.

    ratios[k-1] is the index of H_{k+1} in H_k; each must exceed 2^k.
    Domains default to the intervals {0..m_k-1}; domain_override replaces
    individual stages for negative controls and is honored only by
    cortez_petite_check, never by the word construction.
    """

    ratios: tuple[int, ...] = (3, 5, 9, 17, 33)
    complement_choice: Callable[[int], int] = _default_complement
    domain_override: Mapping[int, tuple[int, ...]] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratios", tuple(int(r) for r in self.ratios))
        for k, r in enumerate(self.ratios, start=1):
            if r <= 2**k:
                raise ValueError(f"ratio r_{k}={r} must exceed 2^{k}={2**k}")

    @property
    def stages(self) -> int:
        """Number of configurations available: x^(1) .. x^(stages)."""
        return len(self.ratios) + 1

    def modulus(self, k: int) -> int:
        """Period m_k of stage k; m_1 = 1, m_{k+1} = m_k * r_k."""
        if not 1 <= k <= self.stages:
            raise StageExhaustedError(f"stage {k} outside 1..{self.stages}")
        return math.prod(self.ratios[: k - 1])

    def domain(self, k: int) -> tuple[int, ...]:
        if self.domain_override and k in self.domain_override:
            return tuple(self.domain_override[k])
        return tuple(range(self.modulus(k)))

    def word(self, k: int) -> tuple[int, ...]:
        """The length-m_k word whose periodic extension is x^(k)."""
        if not 1 <= k <= self.stages:
            raise StageExhaustedError(f"stage {k} outside 1..{self.stages}")
        w = (0,)
        for r in self.ratios[: k - 1]:
            comp_at = self.complement_choice(r)
            if not 0 <= comp_at < r:
                raise ValueError(f"complement tile {comp_at} outside 0..{r - 1}")
            flipped = tuple(1 - s for s in w)
            w = sum((flipped if t == comp_at else w for t in range(r)), ())
        return w


def rf_substitution(stage: SubstitutionStage, k: int) -> Configuration:
    """Stage-k configuration: x^(1) is constant 0; stage k+1 repeats the
    stage-k word on every tile except one, which gets its complement."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if k > stage.stages:
        raise StageExhaustedError(f"stage {k} exceeds configured {stage.stages}")
    if k == 1:
        return constant_config(1, 0)
    return word_config(stage.word(k))


@dataclass(frozen=True)
class CortezPetiteReport:
    k: int
    passed: bool
    witness: str | None


def cortez_petite_check(stage: SubstitutionStage, k: int) -> CortezPetiteReport:
    """Verify the stage-k tiling data exactly.

    (i) the stage-k domain is a transversal of Z / m_k Z, and (ii) the
    stage-(k+1) domain is the disjoint union of its translates over the
    stage-(k+1) domain's intersection with m_k Z.
    """
    if not 1 <= k <= stage.stages - 1:
        raise StageExhaustedError(f"check needs stages k and k+1; got k={k}")
    m_k = stage.modulus(k)
    F_k = stage.domain(k)
    F_next = stage.domain(k + 1)

    residues: dict[int, int] = {}
    for p in F_k:
        res = p % m_k
        if res in residues:
            return CortezPetiteReport(
                k, False, f"coset {res} mod {m_k} has representatives {residues[res]} and {p}"
            )
        residues[res] = p
    if len(residues) != m_k:
        missing = next(r for r in range(m_k) if r not in residues)
        return CortezPetiteReport(k, False, f"coset {missing} mod {m_k} has no representative")

    anchors = [v for v in F_next if v % m_k == 0]
    target = set(F_next)
    seen: dict[int, int] = {}
    for v in anchors:
        for p in F_k:
            q = p + v
            if q in seen:
                return CortezPetiteReport(
                    k, False, f"point {q} covered by tiles at {seen[q]} and {v}"
                )
            seen[q] = v
    extra = next((q for q in seen if q not in target), None)
    if extra is not None:
        return CortezPetiteReport(k, False, f"tiled point {extra} outside the stage-{k+1} domain")
    if len(seen) != len(F_next):
        missing = next(q for q in F_next if q not in seen)
        return CortezPetiteReport(k, False, f"point {missing} not covered by any tile")
    return CortezPetiteReport(k, True, None)


def block_entropy(
    x: Configuration, F_n: FiniteSubset, window_sizes: Sequence[int]
) -> list[tuple[int, float]]:
    """Empirical Shannon entropy of box-window patterns, in bits per site.

    For each side length k the window is the box {0..k-1}^dim; the value
    is H(empirical distribution) / k^dim.
    """
    out: list[tuple[int, float]] = []
    for k in window_sizes:
        if k < 1:
            raise ValueError(f"window side must be >= 1, got {k}")
        W = FiniteSubset.box((0,) * x.dim, (k - 1,) * x.dim)
        dist = empirical_measure(x, F_n, W)
        h = -sum(float(w) * math.log2(float(w)) for w in dist.weights.values())
        out.append((k, h / len(W)))
    return out


_MASK = (1 << 64) - 1


def _mix64(v: int) -> int:
    """splitmix64 finalizer; stable across platforms and runs."""
    v = (v + 0x9E3779B97F4A7C15) & _MASK
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK
    return v ^ (v >> 31)


def random_config(dim: int, seed: int, alphabet: int = 2) -> Configuration:
    """Deterministic point-addressable noise: each site's symbol is a
    splitmix64 hash of (seed, site).  Same seed, same configuration."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")

    def rule(g: Point) -> int:
        h = _mix64(seed & _MASK)
        for c in g:
            h = _mix64(h ^ (c & _MASK))
        return h % alphabet

    return Configuration(dim, alphabet, rule, kind=f"random:{seed}")


def random_periodic_pair(
    rng: Random, max_period: int = 12, alphabet: int = 2
) -> tuple[Configuration, Configuration]:
    """Two independent uniformly random word configurations with periods
    drawn from 1..max_period.  Driven by the caller's seeded Random so
    sequences are reproducible."""
    def one() -> Configuration:
        period = rng.randint(1, max_period)
        word = [rng.randrange(alphabet) for _ in range(period)]
        return word_config(word, alphabet)

    return one(), one()


def resolve_example_name(name: str) -> Configuration:
    """Map CLI names to configurations: visible, prime-approx:n, rf-sub:k."""
    if name == "visible":
        return visible_points_config()
    if name.startswith("prime-approx:"):
        return prime_approx_config(int(name.split(":", 1)[1]))
    if name.startswith("rf-sub:"):
        return rf_substitution(SubstitutionStage(), int(name.split(":", 1)[1]))
    raise ValueError(f"unknown example name {name!r}")
