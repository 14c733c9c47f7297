"""Fractional moments of the Green function and the bounds behind them.

E|G(x, y; z)|^s stays finite for 0 < s < 1 even at real energy because
eigenvalues move linearly in each local potential, which makes |G|^s
locally integrable.  The one-site moment has a closed form; the
decoupling ratio is bounded over complex arguments; and at strong
disorder the moments decay exponentially in |x - y| with a rate that
grows with the disorder.
"""

import numpy as np

from andersonlab import ComplexEnergy, UniformDensity, build_box
from andersonlab.fmm import (
    implied_lambda0,
    iteration_rate_prediction,
    a_priori_constant,
    decay_profile,
    decoupling_ratio,
    decoupling_scan,
    default_decoupling_grid,
    fractional_moment,
    one_site_moment_quadrature,
)

dist = UniformDensity(0.0, 1.0)
s = 0.5

print("== one-site moment: quadrature vs Monte Carlo ==")
quad = one_site_moment_quadrature(dist, 1.0, s, 0.5)
est = fractional_moment(
    build_box(1, 0), dist, 1.0, s, ComplexEnergy(0.5, 0.0), (0,), (0,), 5000, seed=3
)
print(f"quadrature: {quad:.6f}   (2*sqrt(2) = {2 * np.sqrt(2):.6f})")
print(f"MC, n=5000: {est.mean:.4f} +- {est.stderr:.4f}\n")

print("== a-priori constant and the 1/lam^s scaling ==")
c1 = a_priori_constant(dist, s)
print(f"C1(s=1/2, uniform density) = {c1:.6f}")
for lam in (1.0, 10.0, 100.0):
    val = one_site_moment_quadrature(dist, lam, s, 0.5)
    print(f"  lam = {lam:5.0f}: moment {val:.5f} <= C1/lam^s = {c1 / lam**s:.5f}")
print()

print("== decoupling ratio over complex arguments ==")
print(f"ratio at eta = beta = 0: {decoupling_ratio(dist, s, 0.0, 0.0):.6f} (exact 2)")
scan = decoupling_scan(dist, s, default_decoupling_grid(10.0, 9))
print(f"81-point scan, |eta|,|beta| <= 10: max ratio {scan.max_ratio:.4f} "
      "(finite everywhere; the scan reports its grid, it cannot certify\n"
      " the supremum over the whole complex plane)\n")

print("== exponential decay at strong disorder (d = 2) ==")
box = build_box(2, 8)
for lam in (8.0, 16.0):
    prof = decay_profile(
        box, dist, lam, 1.0 / 3.0, ComplexEnergy(0.0, 1e-3), (0, 0),
        list(range(1, 8)), n=400, seed=5,
    )
    pred = iteration_rate_prediction(dist, 1.0 / 3.0, 2, lam)
    note = (f"one-step contraction suggests {pred:.3f}" if pred > 0
            else "one-step bound still vacuous here")
    print(f"lam = {lam:4.0f}: rate {prof.fit.rate:.3f} "
          f"+- {prof.fit.slope_stderr:.3f} per site "
          f"(R^2 = {prof.fit.r_squared:.3f}; {note})")
lam0 = implied_lambda0(dist, 1.0 / 3.0, 2)
print(f"\nimplied contraction threshold (2d*C2)^(1/s) = {lam0:.1f}: the")
print("iteration argument only bites at very strong disorder, yet the")
print("measured decay is already there well below it -- the bound is a")
print("sufficient condition, not a sharp one.")
