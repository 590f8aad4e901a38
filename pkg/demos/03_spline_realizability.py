"""Why the classical consistent-resampling filter can be unusable live.

Cubic-spline reconstruction from ideal samples needs the inverse of the
Gram filter (z + 4 + 1/z)/6.  One of its zeros lies outside the unit
circle, so the inverse is stable only with an anticausal part; forcing a
causal realization makes the impulse response blow up geometrically.
"""

import numpy as np

from hinfrecon import (
    Kernel,
    causal_inverse,
    gram_filter,
    invert_gram,
)

h = 1.0
phi1 = Kernel.impulse(h)        # ideal sampler
phi2 = Kernel.bspline(3, h)     # cubic spline hold

a12 = gram_filter(phi1, phi2)
print("Gram filter coefficients:")
for n in a12.indices():
    print(f"  c[{n:+d}] = {a12[n]:.6f}")

inverse, report = invert_gram(a12, tail_length=24)
print(f"\nzeros: {np.round(report.roots, 6)}")
print(f"inside/outside/on-circle: {report.inside_count}/"
      f"{report.outside_count}/{report.on_circle_count}")
print(f"causal_stable = {report.causal_stable}, "
      f"noncausal_stable = {report.noncausal_stable}")
print(f"truncation tail bound = {report.tail_bound:.3e}")

print("\nstable two-sided inverse (center taps):")
for n in range(-4, 5):
    print(f"  k[{n:+d}] = {inverse[n]:+.6f}")

# Convolving back gives the unit impulse.
conv = a12.convolve(inverse)
mid = np.abs([conv[n] for n in range(-8, 9) if n != 0])
print(f"\nconvolution identity residual near the center: "
      f"{max(mid):.2e}; c[0] = {conv[0]:.12f}")

# The same inverse, realized causally, diverges.
k = causal_inverse(a12, 30)
print("\ncausal realization impulse response magnitudes:")
for n in (0, 5, 10, 20, 29):
    print(f"  |k[{n:2d}]| = {abs(k[n]):.4e}")
print("growth rate per tap ~", abs(k[29] / k[28]))
