"""Finite-volume Anderson Hamiltonians and the depleted/hopping split.

The Hamiltonian on a box acts by (H u)(n) = -sum_{|m-n|=1, m in box} u(m)
+ lam * omega_n u(n): hopping entries are exactly -1 on box edges, the
diagonal carries the scaled potential, and there is no +2d shift.
Storage is CSR; dense conversion is provided for boxes small enough to
eigendecompose (<= 4096 sites).

Depletion removes every matrix element crossing the boundary pair set
of an inner cube, producing the exact additive split
H = depleted + hopping used by the geometric resolvent identities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .disorder import DisorderField, SeedSpec
from .lattice import Box, boundary_pairs

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class Hamiltonian:
    """Sparse real-symmetric h = h_0^box + lam * diag(field)."""

    box: Box
    lam: float
    field: np.ndarray
    matrix: sp.csr_matrix

    @property
    def n_sites(self) -> int:
        return self.box.n_sites

    def dense(self) -> np.ndarray:
        if self.n_sites > DENSE_LIMIT:
            raise ValueError(
                f"{self.n_sites} sites exceeds the dense-conversion limit "
                f"({DENSE_LIMIT})"
            )
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.lam * self.field

    def is_path_graph(self) -> bool:
        """True when the box is one-dimensional, so the matrix is
        tridiagonal in index order."""
        return self.box.d == 1


def assemble(box: Box, field: DisorderField, lam: float) -> Hamiltonian:
    """Hamiltonian of one disorder realization; lam = 0 gives the free
    hopping operator on the box."""
    if field.box != box:
        raise ValueError("field was sampled on a different box")
    if lam < 0:
        raise ValueError(f"disorder strength must be >= 0, got {lam}")
    n = box.n_sites
    rows, cols = box.edges()
    data = np.concatenate(
        [-np.ones(2 * rows.size), lam * field.values]
    )
    rr = np.concatenate([rows, cols, np.arange(n)])
    cc = np.concatenate([cols, rows, np.arange(n)])
    matrix = sp.csr_matrix((data, (rr, cc)), shape=(n, n))
    return Hamiltonian(box=box, lam=lam, field=field.values.copy(), matrix=matrix)


def free_hamiltonian(box: Box) -> Hamiltonian:
    """Hopping operator alone (all potentials zero)."""
    zero = DisorderField(box=box, values=np.zeros(box.n_sites), seed=SeedSpec(0, 0))
    return assemble(box, zero, 0.0)


def apply(H: Hamiltonian, u: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product H @ u."""
    u = np.asarray(u)
    if u.shape[0] != H.n_sites:
        raise ValueError(f"vector length {u.shape[0]} != {H.n_sites} sites")
    return H.matrix @ u


@dataclass(frozen=True)
class DepletedPair:
    """Exact split H = depleted + hopping, where hopping is -1 exactly
    on the boundary pair set of the inner cube and zero elsewhere."""

    inner_L: int
    depleted: sp.csr_matrix
    hopping: sp.csr_matrix


def hopping_matrix(box: Box, inner_L: int) -> sp.csr_matrix:
    """The matrix with -1 on every ordered boundary pair of the inner cube."""
    gamma = boundary_pairs(box, inner_L)
    n = box.n_sites
    if not gamma.pairs:
        return sp.csr_matrix((n, n))
    rr = [box.index_of(u) for u, _ in gamma.pairs]
    cc = [box.index_of(v) for _, v in gamma.pairs]
    return sp.csr_matrix((-np.ones(len(rr)), (rr, cc)), shape=(n, n))


def deplete(H: Hamiltonian, inner_L: int) -> DepletedPair:
    """Remove every matrix element crossing the inner cube boundary."""
    if inner_L >= H.box.L:
        raise ValueError(
            f"inner half-side {inner_L} must be < box half-side {H.box.L}"
        )
    T = hopping_matrix(H.box, inner_L)
    depleted = (H.matrix - T).tocsr()
    depleted.eliminate_zeros()
    return DepletedPair(inner_L=inner_L, depleted=depleted, hopping=T)


def save_coo(H: Hamiltonian, path) -> None:
    """Debug export: one 'row col value' line per stored entry."""
    coo = H.matrix.tocoo()
    with open(path, "w") as fh:
        fh.write("# row col value\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
