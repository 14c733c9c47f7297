"""Finite-box geometry of Z^d.

A box is the cube of all integer sites n with |n_j| <= L in every
coordinate, indexed row-major in a fixed axis order (first coordinate
slowest).  The order is frozen: CSV output and disorder sampling both
rely on it.  Distances are graph distances |n| = |n_1| + ... + |n_d|,
and boundary pair sets collect the nearest-neighbour edges that cross a
given inner cube, in both orientations.  Boxes are immutable after
construction and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Site = tuple[int, ...]


def graph_norm(n: Site) -> int:
    """|n| = sum of |n_j|, the graph distance from the origin."""
    return int(sum(abs(c) for c in n))


def graph_distance(n: Site, m: Site) -> int:
    return int(sum(abs(a - b) for a, b in zip(n, m)))


@dataclass(frozen=True)
class Box:
    """Cube [-L, L]^d in Z^d with a frozen site <-> index bijection."""

    d: int
    L: int
    _edge_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.L < 0:
            raise ValueError(f"half-side must be >= 0, got {self.L}")

    @property
    def side(self) -> int:
        return 2 * self.L + 1

    @property
    def n_sites(self) -> int:
        return self.side ** self.d

    def contains(self, n: Site) -> bool:
        return len(n) == self.d and all(abs(c) <= self.L for c in n)

    def index_of(self, n: Site) -> int:
        """Row-major index of a site; first coordinate varies slowest."""
        if not self.contains(n):
            raise ValueError(f"site {n} not in box (d={self.d}, L={self.L})")
        i = 0
        for c in n:
            i = i * self.side + (c + self.L)
        return i

    def site_of(self, i: int) -> Site:
        if not (0 <= i < self.n_sites):
            raise ValueError(f"index {i} out of range for {self.n_sites} sites")
        coords = []
        for _ in range(self.d):
            coords.append(i % self.side - self.L)
            i //= self.side
        return tuple(reversed(coords))

    def sites(self) -> np.ndarray:
        """All site coordinates as an (n_sites, d) integer array, in index order."""
        axes = [np.arange(-self.L, self.L + 1)] * self.d
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)

    def graph_norms(self) -> np.ndarray:
        """|n| for every site, in index order."""
        return np.abs(self.sites()).sum(axis=1)

    def sup_norms(self) -> np.ndarray:
        """max_j |n_j| for every site, in index order."""
        return np.abs(self.sites()).max(axis=1)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs (i, j), i < j, of all nearest-neighbour bonds."""
        if not self._edge_cache:
            rows, cols = [], []
            strides = [self.side ** (self.d - 1 - a) for a in range(self.d)]
            coords = self.sites()
            idx = np.arange(self.n_sites)
            for a in range(self.d):
                keep = coords[:, a] < self.L
                rows.append(idx[keep])
                cols.append(idx[keep] + strides[a])
            self._edge_cache.append(
                (np.concatenate(rows), np.concatenate(cols))
            )
        return self._edge_cache[0]


def build_box(d: int, L: int) -> Box:
    """Cube of half-side L in dimension d; rejects d < 1 or L < 0."""
    return Box(d=d, L=L)


def neighbors(box: Box, n: Site) -> list[Site]:
    """All sites of the box at graph distance 1 from n (Dirichlet cut:
    neighbours outside the box are simply dropped)."""
    if not box.contains(n):
        raise ValueError(f"site {n} not in box")
    out = []
    for a in range(box.d):
        for delta in (-1, 1):
            m = list(n)
            m[a] += delta
            if abs(m[a]) <= box.L:
                out.append(tuple(m))
    return out


@dataclass(frozen=True)
class BoundaryPairSet:
    """Ordered site pairs (u, u') at graph distance 1 crossing an inner
    cube boundary, with both orientations present."""

    inner_L: int
    pairs: tuple[tuple[Site, Site], ...]

    def __len__(self) -> int:
        return len(self.pairs)


def boundary_pairs(outer: Box, inner_L: int) -> BoundaryPairSet:
    """All edges of the outer box with one endpoint inside the cube of
    half-side inner_L and the other outside, in both orientations."""
    if inner_L >= outer.L:
        raise ValueError(
            f"inner half-side {inner_L} must be < outer half-side {outer.L}"
        )
    if inner_L < 0:
        raise ValueError(f"inner half-side must be >= 0, got {inner_L}")
    rows, cols = outer.edges()
    sup = outer.sup_norms()
    crossing = (sup[rows] <= inner_L) != (sup[cols] <= inner_L)
    pairs = []
    for i, j in zip(rows[crossing], cols[crossing]):
        u, v = outer.site_of(int(i)), outer.site_of(int(j))
        pairs.append((u, v))
        pairs.append((v, u))
    return BoundaryPairSet(inner_L=inner_L, pairs=tuple(pairs))
