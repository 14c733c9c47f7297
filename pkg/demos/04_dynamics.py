"""Wavepacket dynamics: ballistic spreading vs localization.

On the clean chain a particle released at the origin spreads
ballistically (first position moment grows linearly in time).  With
strong disorder the evolved state stays pinned: the time-uniform
evolution kernels decay exponentially in distance, position moments
saturate, and the time-averaged mass escaping any large ball vanishes.
"""

import numpy as np

from andersonlab import SeedSpec, UniformDensity, assemble, build_box
from andersonlab.disorder import sample_field
from andersonlab.dynamics import (
    default_time_grid,
    dynloc_profile,
    position_moment,
    rage_average,
)
from andersonlab.operator import free_hamiltonian

dist = UniformDensity(0.0, 1.0)
FULL = (-np.inf, np.inf)
box = build_box(1, 60)
psi0 = np.zeros(box.n_sites)
psi0[box.index_of((0,))] = 1.0

print("== first position moment of |psi(t)> released at the origin ==")
t = np.linspace(0.0, 25.0, 26)
free_tr = position_moment(free_hamiltonian(box), FULL, psi0, 1.0, t)
H_loc = assemble(box, sample_field(box, dist, SeedSpec(21, 0)), 4.0)
loc_tr = position_moment(H_loc, FULL, psi0, 1.0, t)
print(f"{'t':>5} {'free':>8} {'lam=4':>8}")
for i in range(0, 26, 5):
    print(f"{t[i]:5.0f} {free_tr.values[i]:8.2f} {loc_tr.values[i]:8.2f}")
print("free: linear growth; disordered: saturates within a few sites\n")

print("== time-averaged escape mass beyond radius R ==")
for label, H in (("free", free_hamiltonian(box)), ("lam=4", H_loc)):
    masses = rage_average(H, FULL, psi0, [5, 15, 30], T=400.0)
    pretty = ", ".join(f"R={R}: {m:.3f}" for R, m in masses.items())
    print(f"{label:>6}: {pretty}")
print("ballistic motion leaves every ball; localized motion never does\n")

print("== disorder-averaged sup-kernel profile ==")
prof = dynloc_profile(
    box, dist, 4.0, FULL, (0,), list(range(2, 20, 2)),
    default_time_grid(0.1, 200.0, 256), n=30, seed=23,
)
for r, m in zip(prof.distances, prof.means):
    bar = "#" * max(1, int(60 * m / prof.means[0]))
    print(f"  r = {r:2d}: {m:8.5f} {bar}")
print(f"fitted decay rate {prof.fit.rate:.3f} +- {prof.fit.slope_stderr:.3f} per site")
print(f"(sup taken over the grid; refining the grid changes the means by "
      f"{100 * prof.grid_refinement_growth:.1f}%)")
