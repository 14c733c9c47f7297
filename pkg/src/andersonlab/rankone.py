"""Rank-one perturbation families h_v = h0 + v P and their numerics.

P projects onto a normalized probe vector phi that must be cyclic for
h0 (checked through the smallest singular value of the Krylov matrix).
Verified facts: eigenvalue curves E_k(v) are strictly increasing and
interlace the spectrum of the compression of h0 to the orthogonal
complement of phi; E_k'(v) equals the squared overlap |<psi_k(v), phi>|^2;
and the fractional correlator integral identity

    int Q_v(phi, chi; I, s) |v|^{-s} dv = int_I |<phi, (h0-E)^{-1} chi>|^s dE

holds, with both sides evaluated by independent adaptive quadratures
(eigen-recomputation per node on the left, declared power-law
singularities on the right; the |v|^{-s} factor is removed analytically
by the substitution v = u^{1/(1-s)}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import CyclicityError
from .numerics import adaptive_quadrature

CYCLICITY_RTOL = 1e-8
DEGENERACY_TOL = 1e-8
DERIVATIVE_STEP = 1e-4


@dataclass(frozen=True)
class RankOneInstance:
    h0: np.ndarray
    phi: np.ndarray
    chi: np.ndarray

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def perturbed(self, v: float) -> np.ndarray:
        return self.h0 + v * np.outer(self.phi, self.phi)

    def eigen(self, v: float) -> tuple[np.ndarray, np.ndarray]:
        return scipy.linalg.eigh(self.perturbed(v))


def make_instance(h0, phi, chi=None) -> RankOneInstance:
    """Validated instance: phi is normalized, h0 symmetrized, and
    cyclicity is enforced via sigma_min(Krylov) >= 1e-8 * ||h0||."""
    h0 = np.asarray(h0, dtype=float)
    h0 = 0.5 * (h0 + h0.T)
    n = h0.shape[0]
    phi = np.asarray(phi, dtype=float)
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise ValueError("phi must be nonzero")
    phi = phi / norm
    if chi is None:
        chi = np.zeros(n)
        chi[-1] = 1.0
    chi = np.asarray(chi, dtype=float)
    krylov = np.empty((n, n))
    w = phi.copy()
    for k in range(n):
        krylov[:, k] = w
        w = h0 @ w
    smin = scipy.linalg.svdvals(krylov)[-1]
    hnorm = scipy.linalg.norm(h0, 2)
    if smin < CYCLICITY_RTOL * max(hnorm, 1e-300):
        raise CyclicityError(
            f"phi is not (numerically) cyclic: sigma_min(Krylov) = {smin:.3e} "
            f"< {CYCLICITY_RTOL:.0e} * ||h0|| = {CYCLICITY_RTOL * hnorm:.3e}"
        )
    return RankOneInstance(h0=h0, phi=phi, chi=chi)


def compression_eigenvalues(inst: RankOneInstance) -> np.ndarray:
    """Eigenvalues of h0 compressed to the orthogonal complement of phi
    (the v -> +inf limits of all but the top eigenvalue curve)."""
    U = np.linalg.svd(inst.phi[:, None], full_matrices=True)[0]
    Q = U[:, 1:]
    return scipy.linalg.eigvalsh(Q.T @ inst.h0 @ Q)


@dataclass(frozen=True)
class EigenFlow:
    v_grid: np.ndarray
    curves: np.ndarray  # shape (len(v_grid), N), ascending per row
    limits: np.ndarray  # compression eigenvalues, length N - 1


def eigenflow(inst: RankOneInstance, v_grid) -> EigenFlow:
    v_grid = np.asarray(v_grid, dtype=float)
    curves = np.stack(
        [scipy.linalg.eigvalsh(inst.perturbed(v)) for v in v_grid], axis=0
    )
    return EigenFlow(v_grid=v_grid, curves=curves, limits=compression_eigenvalues(inst))


@dataclass(frozen=True)
class IntertwineReport:
    passed: bool
    slack: float  # smallest gap in the interlacing chain


def intertwine_check(inst: RankOneInstance, v: float) -> IntertwineReport:
    """Strict interlacing E_1(v) < E_1(inf) < E_2(v) < ... < E_N(v)."""
    ev = scipy.linalg.eigvalsh(inst.perturbed(v))
    einf = compression_eigenvalues(inst)
    if ev.size == 1:
        return IntertwineReport(passed=True, slack=np.inf)
    chain = np.empty(2 * ev.size - 1)
    chain[0::2] = ev
    chain[1::2] = einf
    gaps = np.diff(chain)
    return IntertwineReport(passed=bool(np.all(gaps > 0)), slack=float(gaps.min()))


def derivative_check(inst: RankOneInstance, v: float, k: int) -> tuple[float, float]:
    """(Richardson central difference of E_k at v, |<psi_k(v), phi>|^2).

    k is zero-based.  Raises on near-degeneracy at v, where the curve
    label is ambiguous.
    """
    w, vecs = inst.eigen(v)
    gaps = np.diff(w)
    if gaps.size and gaps.min() < DEGENERACY_TOL:
        raise ValueError(
            f"eigenvalues degenerate within {DEGENERACY_TOL} at v={v}"
        )
    overlap = float(np.dot(vecs[:, k], inst.phi) ** 2)
    if overlap <= 0:
        raise CyclicityError("zero overlap contradicts cyclicity")

    def central(h):
        up = scipy.linalg.eigvalsh(inst.perturbed(v + h))[k]
        dn = scipy.linalg.eigvalsh(inst.perturbed(v - h))[k]
        return (up - dn) / (2.0 * h)

    h = DERIVATIVE_STEP
    deriv = (4.0 * central(h / 2.0) - central(h)) / 3.0
    return float(deriv), overlap


def correlator_q(inst: RankOneInstance, v: float, interval, s: float) -> float:
    """Q_v(phi, chi; I, s) = sum over E_k(v) in I of
    |<psi_k, phi>|^{2-s} |<psi_k, chi>|^s."""
    lo, hi = interval
    w, vecs = inst.eigen(v)
    sel = (w >= lo) & (w <= hi)
    a = np.abs(vecs[:, sel].T @ inst.phi)
    b = np.abs(vecs[:, sel].T @ inst.chi)
    return float(np.sum(a ** (2.0 - s) * b**s))


def _branch_term(inst: RankOneInstance, v: float, k: int, s: float) -> float:
    w, vecs = inst.eigen(v)
    a = abs(float(vecs[:, k] @ inst.phi))
    b = abs(float(vecs[:, k] @ inst.chi))
    return a ** (2.0 - s) * b**s


def _eigenvalue_curve(inst: RankOneInstance, k: int):
    def f(v):
        return scipy.linalg.eigvalsh(inst.perturbed(v))[k]

    return f


def _crossing(inst: RankOneInstance, k: int, target: float) -> float:
    """The v with E_k(v) = target (curve is strictly increasing)."""
    f = _eigenvalue_curve(inst, k)
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if f(lo) < target:
            break
        lo *= 2.0
    for _ in range(200):
        if f(hi) > target:
            break
        hi *= 2.0
    return float(brentq(lambda v: f(v) - target, lo, hi, xtol=1e-12, rtol=1e-14))


def _integrate_weighted(g, lo: float, hi: float, s: float, tol: float) -> float:
    """int_lo^hi g(v) |v|^{-s} dv for continuous g, endpoints possibly
    infinite; the v = 0 singularity is removed by v = sign * u^{1/(1-s)}."""
    total = 0.0
    pieces = []
    if lo < 0.0 < hi:
        pieces = [(lo, 0.0), (0.0, hi)]
    else:
        pieces = [(lo, hi)]
    for a, b in pieces:
        if a == b:
            continue
        if a == 0.0 or b == 0.0:
            # substitution removes the |v|^{-s} factor exactly
            sign = 1.0 if b > 0 else -1.0
            width = abs(b if b != 0.0 else a)
            expo = 1.0 / (1.0 - s)

            def transformed(u, sign=sign, expo=expo):
                return g(sign * u**expo)

            upper = width ** (1.0 - s) if np.isfinite(width) else np.inf
            total += adaptive_quadrature(transformed, 0.0, upper, tol=tol) / (1.0 - s)
        else:
            def weighted(v):
                return g(v) * abs(v) ** (-s)

            total += adaptive_quadrature(weighted, a, b, tol=tol)
    return total


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    relative_gap: float
    branches: int


def correlator_identity_check(
    inst: RankOneInstance, interval, s: float, tol: float = 1e-8
) -> IdentityReport:
    """Both sides of the fractional-correlator integral identity.

    Left: sum over eigenvalue branches of the weighted v-integral of the
    correlator term, each over the v-window where the branch crosses I
    (windows located by monotone root finding, eigen-recomputation at
    every quadrature node).  Right: energy integral of the fractional
    resolvent element with h0's eigenvalues in I declared singular.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"need 0 < s < 1, got {s}")
    a, b = interval
    if not a < b:
        raise ValueError("interval must be nontrivial")
    n = inst.dim
    einf = compression_eigenvalues(inst)
    range_lo = np.concatenate([[-np.inf], einf])
    range_hi = np.concatenate([einf, [np.inf]])
    lhs = 0.0
    branches = 0
    for k in range(n):
        if b <= range_lo[k] or a >= range_hi[k]:
            continue
        branches += 1
        v_lo = -np.inf if a <= range_lo[k] else _crossing(inst, k, a)
        v_hi = np.inf if b >= range_hi[k] else _crossing(inst, k, b)

        def term(v, k=k):
            return _branch_term(inst, v, k, s)

        lhs += _integrate_weighted(term, v_lo, v_hi, s, tol)

    w0, vecs0 = scipy.linalg.eigh(inst.h0)
    cphi = vecs0.T @ inst.phi
    cchi = vecs0.T @ inst.chi

    def resolvent_term(E):
        return abs(float(np.sum(cphi * cchi / (w0 - E)))) ** s

    sing = [float(e) for e in w0 if a < e < b]
    rhs = adaptive_quadrature(resolvent_term, a, b, singular_points=sing, tol=tol)
    denom = max(abs(lhs), abs(rhs), 1e-300)
    return IdentityReport(
        lhs=float(lhs), rhs=float(rhs),
        relative_gap=float(abs(lhs - rhs) / denom), branches=branches,
    )
