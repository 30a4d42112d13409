"""Closed-form predictions: frame-potential ratios and overlap densities.

The confinement picture gives exact scaling-limit expressions for how far
the projected ensemble sits from Haar.  For the staircase circuit the ratio
is a discrete sum over the pinned domain-wall position; for the glued
shallow circuit the bound wall pairs exponentiate.  This script tabulates
both, shows the wall-number series resumming to the same answer, and probes
the overlap densities including their Porter-Thomas limit.
"""

import math

import numpy as np

from rmpslab import theory as th

d = 2

print("frame-potential ratios F^(k)(x) / (k! D_A^-k)")
print(f"{'x':>6} | " + "  ".join(f"stair k={k}" for k in (1, 2, 3))
      + " | " + "  ".join(f"glued k={k}" for k in (1, 2, 3)))
for x in (0.0, 0.1, 0.5, 1.0, 2.0):
    stair = [th.setup1_ratio(k, x, d) for k in (1, 2, 3)]
    glued = [th.setup2_ratio(k, x, d) for k in (1, 2, 3)]
    print(f"{x:6.2f} | " + "  ".join(f"{v:10.3f}" for v in stair)
          + " | " + "  ".join(f"{v:10.3f}" for v in glued))

print()
print("staircase ratio rebuilt from the domain-wall expansion")
print("  sum_alpha C(k,alpha) x^alpha f_alpha with the confined lattice sums f_alpha:")
for alpha in range(5):
    direct = th.f_alpha(alpha, d, "direct") if alpha <= 4 else None
    closed = th.f_alpha(alpha, d, "closed")
    print(f"  f_{alpha}(d=2): closed = {closed:12.6f}   direct lattice sum = {direct:12.6f}")
for k, x in ((2, 1.0), (3, 0.5)):
    series = th.series_ratio_setup1(k, x, d)
    ratio = th.setup1_ratio(k, x, d)
    print(f"  k={k}, x={x}: series = {series:.12f}, closed sum = {ratio:.12f}")

print()
print("overlap densities P(u; x) (u = D_A |<psi(z)|psi(z')>|^2)")
us = np.array([0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
for x in (0.0, 1.0):
    row = [th.setup1_pdf(u, x, d) for u in us]
    print(f"  staircase x={x}: " + "  ".join(f"{v:.4f}" for v in row))
for x in (1e-6, 0.05):
    row = [th.setup2_pdf(u, x, d) for u in us]
    print(f"  glued     x={x}: " + "  ".join(f"{v:.4f}" for v in row))
print("  Porter-Thomas : " + "  ".join(f"{math.exp(-u):.4f}" for u in us))
print()
print("at x -> 0 both densities collapse onto exp(-u); at finite x the")
print("staircase density is a discrete mixture of exponentials whose u = 0")
print("value exceeds the rescaled Porter-Thomas curve.")
pt_rescaled = math.exp(0.0) / th.setup1_ratio(1, 1.0, d)
print(f"  staircase x=1: P(0) = {th.setup1_pdf(0.0, 1.0, d):.4f} "
      f"vs rescaled PT {pt_rescaled / 1.0:.4f}")
