"""Green's function evaluation and the resolvent identities behind the
fractional-moment machinery.

G(x, y; z) = <e_x, (H - z)^{-1} e_y>.  One shifted solve produces a full
column G(., y; z).  The module also verifies, instance by instance, the
operator identities the analysis rests on: the rank-two Krein block,
the double-decoupling geometric identity, and the deterministic
off-spectrum decay of the resolvent with its closed-form rate on the
free one-dimensional lattice (cosh(rate) = |E| / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitting import DecayFit, fit_log_decay
from .lattice import Site
from .numerics import ComplexEnergy, eigenvalues_only, solve_shifted
from .operator import Hamiltonian, deplete


@dataclass(frozen=True)
class GreensValue:
    x: Site
    y: Site
    z: complex
    value: complex


def green_column(H: Hamiltonian, y: Site, z: ComplexEnergy | complex) -> np.ndarray:
    """The column G(., y; z) from a single solve."""
    b = np.zeros(H.n_sites, dtype=complex)
    b[H.box.index_of(y)] = 1.0
    return solve_shifted(H, z, b)


def green(H: Hamiltonian, x: Site, y: Site, z: ComplexEnergy | complex) -> GreensValue:
    col = green_column(H, y, z)
    zc = z.z if isinstance(z, ComplexEnergy) else complex(z)
    return GreensValue(x=x, y=y, z=zc, value=complex(col[H.box.index_of(x)]))


@dataclass(frozen=True)
class KreinBlock:
    """Direct and reconstructed 2x2 resolvent blocks on span{e_x, e_y}.

    direct        = P (H - z)^{-1} P
    reconstructed = (A + lam * diag(w_x, w_y))^{-1}, where
    A is the inverse 2x2 block of the resolvent of H with the potential
    at x and y removed.  A depends on neither w_x nor w_y, and for
    Im z > 0 its imaginary part (A - A*) / 2i is negative definite.
    """

    direct: np.ndarray
    reconstructed: np.ndarray
    A: np.ndarray
    max_difference: float


def krein_block(H: Hamiltonian, x: Site, y: Site, z: ComplexEnergy | complex) -> KreinBlock:
    if x == y:
        raise ValueError("the rank-two block needs two distinct sites")
    ix, iy = H.box.index_of(x), H.box.index_of(y)
    n = H.n_sites
    b = np.zeros((n, 2), dtype=complex)
    b[ix, 0] = 1.0
    b[iy, 1] = 1.0
    cols = solve_shifted(H, z, b)
    direct = cols[np.ix_([ix, iy], [0, 1])]
    # same block with the potential zeroed at x and y
    stripped = H.matrix.tolil(copy=True)
    stripped[ix, ix] = 0.0
    stripped[iy, iy] = 0.0
    cols0 = solve_shifted(stripped.tocsr(), z, b)
    block0 = cols0[np.ix_([ix, iy], [0, 1])]
    A = np.linalg.inv(block0)
    shift = H.lam * np.diag([H.field[ix], H.field[iy]])
    reconstructed = np.linalg.inv(A + shift)
    return KreinBlock(
        direct=direct,
        reconstructed=reconstructed,
        A=A,
        max_difference=float(np.abs(direct - reconstructed).max()),
    )


def geometric_identity_residual(
    H: Hamiltonian,
    inner_L: int,
    z: ComplexEnergy | complex,
    probe_sites: list[Site] | None = None,
) -> float:
    """Max deviation, over declared probe columns, of the exact identity

        G = G_L - G_L T_L G_{L+1} + G_L T_L G T_{L+1} G_{L+1}

    where G_L, G_{L+1} are the resolvents depleted at the inner cube and
    at the cube one site larger, and T_L, T_{L+1} the removed hopping
    terms.  Probe columns default to one deep-interior, one
    boundary-adjacent and one far-corner site.
    """
    box = H.box
    if inner_L + 1 >= box.L:
        raise ValueError("need inner_L + 1 < box half-side for the double split")
    dep_L = deplete(H, inner_L)
    dep_L1 = deplete(H, inner_L + 1)
    if probe_sites is None:
        probe_sites = [
            (0,) * box.d,
            (inner_L + 1,) + (0,) * (box.d - 1),
            (box.L,) * box.d,
        ]
    n = box.n_sites
    b = np.zeros((n, len(probe_sites)), dtype=complex)
    for j, s in enumerate(probe_sites):
        b[box.index_of(s), j] = 1.0
    g_full = solve_shifted(H, z, b)
    g1 = solve_shifted(dep_L1.depleted, z, b)
    t1g1 = dep_L1.hopping @ g1
    mid = solve_shifted(H, z, t1g1)
    rhs_inner = dep_L.hopping @ (g1 - mid)
    rhs = solve_shifted(dep_L.depleted, z, b - rhs_inner)
    return float(np.abs(g_full - rhs).max())


CT_FIT_RANGE = (0.25, 0.75)


def ct_decay(
    H: Hamiltonian,
    E: float,
    x0: Site,
    fit_range: tuple[float, float] = CT_FIT_RANGE,
) -> DecayFit:
    """Off-diagonal decay of |G(x0, y; E)| for E strictly below the
    spectrum; fits log|G| against graph distance over the middle of the
    box to avoid boundary contamination."""
    e_min = float(eigenvalues_only(H, which="min")[0])
    if not E < e_min - 1e-6:
        raise ValueError(f"E={E} is not below the spectrum (min eig {e_min:.6f})")
    col = green_column(H, x0, ComplexEnergy(E, 0.0))
    norms = np.abs(H.box.sites() - np.asarray(x0)).sum(axis=1)
    lo = max(1, int(np.floor(fit_range[0] * H.box.L)))
    hi = max(lo + 2, int(np.ceil(fit_range[1] * H.box.L)))
    dists, vals = [], []
    for r in range(lo, hi + 1):
        mask = norms == r
        if not np.any(mask):
            continue
        dists.append(r)
        vals.append(float(np.abs(col[mask]).max()))
    fit = fit_log_decay(dists, vals)
    if fit.rate <= 0:
        raise ValueError("off-spectrum resolvent decay came out non-negative")
    return fit


def free_ct_rate(E: float, d: int = 1) -> float:
    """Closed-form decay rate of the free 1d lattice resolvent below the
    spectrum: cosh(rate) = |E| / 2."""
    if d != 1:
        raise ValueError("closed form implemented for d = 1 only")
    if abs(E) <= 2.0:
        raise ValueError("energy must lie outside [-2, 2]")
    return float(np.arccosh(abs(E) / 2.0))


def diagonal_rank_one_coefficient(H: Hamiltonian, x: Site, z: ComplexEnergy | complex) -> complex:
    """The number a in G(x, x; z) = 1 / (a + lam * w_x); independent of w_x."""
    g = green(H, x, x, z).value
    ix = H.box.index_of(x)
    return 1.0 / g - H.lam * H.field[ix]


def expansion_residual(H: Hamiltonian, x: Site, y: Site, z: ComplexEnergy | complex) -> float:
    """Residual of the row expansion of the resolvent at y != x:
    -sum_{|u-y|=1} G(x,u;z) + (lam*w_y - z) G(x,y;z) = 0."""
    if x == y:
        raise ValueError("expansion residual is defined for x != y")
    from .lattice import neighbors

    zc = z.z if isinstance(z, ComplexEnergy) else complex(z)
    col = green_column(H, x, z)  # symmetry: <e_x,(H-z)^{-1}e_u> = G(u->x column)
    acc = -sum(col[H.box.index_of(u)] for u in neighbors(H.box, y))
    iy = H.box.index_of(y)
    acc += (H.lam * H.field[iy] - zc) * col[iy]
    return float(abs(acc))
