"""Substitution stages: word data, exact step distances, entropy decay."""

from fractions import Fraction

from shiftlab.examples import (
    SubstitutionStage,
    block_entropy,
    cortez_petite_check,
    rf_substitution,
)
from shiftlab.groups import box_set
from shiftlab.metrics import exact_mismatch_density

stage = SubstitutionStage()
print(f"ratios r_k = {stage.ratios}")
print("moduli m_k =", [stage.modulus(k) for k in range(1, stage.stages + 1)])
print("stage-2 word:", stage.word(2))

print("\nexact dbar between consecutive stages (one flipped tile per r_k):")
for k in range(1, stage.stages):
    d = exact_mismatch_density(rf_substitution(stage, k), rf_substitution(stage, k + 1))
    assert d == Fraction(1, stage.ratios[k - 1])
    print(f"  k={k}  d(x^({k}), x^({k + 1})) = {d}  (allowed: below 1/2^{k})")

print("\ntiling checks, stage k against stage k+1:")
for k in range(1, stage.stages):
    rep = cortez_petite_check(stage, k)
    print(f"  k={k}  passed={rep.passed}")

x4 = rf_substitution(stage, 4)
m4 = stage.modulus(4)
F = box_set(1, 3 * m4 - 1)
print(f"\nblock entropy of x^(4) (period {m4}) over three full periods, bits per site:")
for k, h in block_entropy(x4, F, [1, 2, 4, 8]):
    print(f"  window side {k}: {h:.6f}")
print("periodicity caps the k-block entropy at log2(m_4)/k, so the tail shrinks")
