"""Periodic approximants of the visible points converge in dbar."""

from shiftlab.examples import PRIMES, prime_approx_config, visible_points_config
from shiftlab.groups import make_box_folner
from shiftlab.metrics import dbar_estimate

v = visible_points_config()
F = make_box_folner(2, kind="centered")
N = 300

print(f"dbar(v, x^(n)) over the centered box of radius {N}")
print("mismatches only sit on p*Z^2 for primes p beyond stage n, so each")
print("value should stay under the prime-square tail sum plus finite-size slack\n")
tail = sum(1 / p**2 for p in PRIMES)
print("n   dbar        tail + slack")
for n in range(1, 5):
    xn = prime_approx_config(n)
    val = float(dbar_estimate(v, xn, F, N))
    tail -= 1 / PRIMES[n - 1] ** 2
    print(f"{n}   {val:.6f}    {tail + 0.01:.6f}")
