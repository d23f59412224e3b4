"""Box Folner sequences: shrinking defects and tempered subsequences."""

from fractions import Fraction

from shiftlab.groups import (
    check_tempered,
    folner_defect,
    make_box_folner,
    tempered_subsequence,
    temperedness_ratio,
)

F1 = make_box_folner(1)
print("translation defect of {0..n} under g=1:")
for n in (10, 100, 1000):
    print(f"  n={n:5d}  |gF Δ F|/|F| = {folner_defect(F1.set_at(n), (1,))}")

print("\ntemperedness ratios (boxes in Z approach 2, in Z^2 approach 4):")
F2 = make_box_folner(2)
for n in (2, 10, 50):
    print(f"  n={n:3d}  Z: {float(temperedness_ratio(F1, n)):.4f}"
          f"   Z^2: {float(temperedness_ratio(F2, n)):.4f}")

C = Fraction(6, 5)
chosen = tempered_subsequence(F1, C, 10)
print(f"\ngreedy subsequence of boxes in Z at C={C}: {chosen}")
print("re-checked explicitly:", check_tempered([F1.set_at(k) for k in chosen], C))
