"""Single-site distributions and reproducible i.i.d. potential sampling.

Distributions come in three variants: uniform and piecewise-constant
densities (bounded, compactly supported) and a two-point atomic law.
Operations that integrate against a density refuse the atomic variant
with :class:`NoDensityError`.

Sampling is keyed: the stream for realization k of a run is derived
from ``SeedSequence(master_seed, spawn_key=(k,))`` and consumed in site
index order, so a field value is a pure function of
(master_seed, realization_index, site_index).  Results therefore do not
depend on scheduling, worker count or evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoDensityError
from .lattice import Box


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus realization index; the complete key of one field."""

    master_seed: int
    realization_index: int = 0

    def __post_init__(self):
        if self.realization_index < 0:
            raise ValueError("realization_index must be >= 0")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.realization_index,)
        )
        return np.random.default_rng(ss)


class Distribution:
    """Common interface of single-site laws."""

    has_density = False

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def density(self, v) -> np.ndarray:
        raise NoDensityError(f"{type(self).__name__} has no density")

    def cdf(self, v) -> np.ndarray:
        raise NotImplementedError

    def density_sup(self) -> float:
        raise NoDensityError(f"{type(self).__name__} has no density")

    def rescaled(self, lam: float) -> "Distribution":
        raise NotImplementedError


@dataclass(frozen=True)
class UniformDensity(Distribution):
    """Uniform law on [a, b] with constant density 1/(b-a)."""

    a: float
    b: float
    has_density = True

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    def sample(self, rng, size):
        return self.a + (self.b - self.a) * rng.random(size)

    def density(self, v):
        v = np.asarray(v, dtype=float)
        return np.where((v >= self.a) & (v <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip((v - self.a) / (self.b - self.a), 0.0, 1.0)

    def density_sup(self) -> float:
        return 1.0 / (self.b - self.a)

    def rescaled(self, lam):
        return UniformDensity(lam * self.a, lam * self.b)


@dataclass(frozen=True)
class PiecewiseConstantDensity(Distribution):
    """Density that is constant on each cell of a breakpoint grid.

    ``breakpoints`` has one more entry than ``values``; the values are
    renormalized at construction so the total mass is exactly 1.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    has_density = True

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        va = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or len(bp) != len(va) + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(va < 0) or not np.any(va > 0):
            raise ValueError("cell values must be >= 0 with positive total mass")
        mass = float(np.sum(va * np.diff(bp)))
        object.__setattr__(self, "breakpoints", tuple(bp))
        object.__setattr__(self, "values", tuple(va / mass))

    def _bp(self) -> np.ndarray:
        return np.asarray(self.breakpoints)

    def _va(self) -> np.ndarray:
        return np.asarray(self.values)

    def support(self) -> tuple[float, float]:
        return (self.breakpoints[0], self.breakpoints[-1])

    def _cum(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self._va() * np.diff(self._bp()))])

    def sample(self, rng, size):
        # inverse CDF on one uniform draw per site
        u = rng.random(size)
        cum = self._cum()
        cum[-1] = 1.0
        cell = np.searchsorted(cum, u, side="right") - 1
        cell = np.clip(cell, 0, len(self.values) - 1)
        bp, va = self._bp(), self._va()
        frac = (u - cum[cell]) / np.maximum(va[cell] * np.diff(bp)[cell], 1e-300)
        return bp[cell] + np.clip(frac, 0.0, 1.0) * np.diff(bp)[cell]

    def density(self, v):
        v = np.asarray(v, dtype=float)
        bp = self._bp()
        cell = np.clip(np.searchsorted(bp, v, side="right") - 1, 0, len(self.values) - 1)
        inside = (v >= bp[0]) & (v <= bp[-1])
        return np.where(inside, self._va()[cell], 0.0)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        bp, cum = self._bp(), self._cum()
        cell = np.clip(np.searchsorted(bp, v, side="right") - 1, 0, len(self.values) - 1)
        inner = cum[cell] + self._va()[cell] * (v - bp[cell])
        return np.clip(np.where(v < bp[0], 0.0, np.where(v > bp[-1], 1.0, inner)), 0.0, 1.0)

    def density_sup(self) -> float:
        return float(max(self.values))

    def rescaled(self, lam):
        return PiecewiseConstantDensity(
            tuple(lam * b for b in self.breakpoints),
            tuple(v / lam for v in self.values),
        )


@dataclass(frozen=True)
class BernoulliAtoms(Distribution):
    """Two-point law P(a) = p, P(b) = 1 - p.  No density: operations
    built on fractional-moment integrals must reject this variant."""

    a: float
    b: float
    p: float
    has_density = False

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("atoms must be distinct")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"need 0 < p < 1, got {self.p}")

    def support(self) -> tuple[float, float]:
        return (min(self.a, self.b), max(self.a, self.b))

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p, self.a, self.b)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        lo, hi = (self.a, self.b) if self.a < self.b else (self.b, self.a)
        p_lo = self.p if self.a < self.b else 1.0 - self.p
        return np.where(v < lo, 0.0, np.where(v < hi, p_lo, 1.0))

    def rescaled(self, lam):
        return BernoulliAtoms(lam * self.a, lam * self.b, self.p)


def rescale(dist: Distribution, lam: float) -> Distribution:
    """Pushforward of the law under multiplication by lam > 0."""
    if lam <= 0:
        raise ValueError(f"disorder scale must be > 0, got {lam}")
    return dist.rescaled(lam)


def density_eval(dist: Distribution, v) -> np.ndarray:
    """Density value(s) at v; NoDensityError for atomic laws."""
    return dist.density(v)


def support(dist: Distribution) -> tuple[float, float]:
    """Closed hull of the support."""
    return dist.support()


def require_density(dist: Distribution, what: str = "this operation") -> None:
    if not dist.has_density:
        raise NoDensityError(
            f"{what} requires a bounded single-site density; "
            f"{type(dist).__name__} has none"
        )


@dataclass(frozen=True)
class DisorderField:
    """One sampled realization of the i.i.d. potential on a box."""

    box: Box
    values: np.ndarray
    seed: SeedSpec

    def __post_init__(self):
        if self.values.shape != (self.box.n_sites,):
            raise ValueError("need exactly one value per box site")


def sample_field(box: Box, dist: Distribution, seed: SeedSpec) -> DisorderField:
    """i.i.d. field on the box, bit-reproducible from (box, dist, seed)."""
    rng = seed.generator()
    values = dist.sample(rng, box.n_sites)
    return DisorderField(box=box, values=np.asarray(values, dtype=float), seed=seed)
