import numpy as np
import pytest

from andersonlab.disorder import DisorderField, SeedSpec, UniformDensity, sample_field
from andersonlab.lattice import build_box
from andersonlab.operator import (
    apply,
    assemble,
    deplete,
    free_hamiltonian,
    save_coo,
)


def field_from(box, values):
    return DisorderField(box=box, values=np.asarray(values, dtype=float), seed=SeedSpec(0))


def test_free_1d_three_sites_matrix():
    box = build_box(1, 1)
    H = free_hamiltonian(box)
    expected = np.array([[0, -1, 0], [-1, 0, -1], [0, -1, 0]], dtype=float)
    assert np.array_equal(H.dense(), expected)


def test_free_1d_three_sites_eigenvalues():
    H = free_hamiltonian(build_box(1, 1))
    w = np.linalg.eigvalsh(H.dense())
    assert np.allclose(w, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_potential_is_additive_on_diagonal():
    box = build_box(1, 1)
    H = assemble(box, field_from(box, [1.0, 2.0, 3.0]), 2.0)
    dense = H.dense()
    assert np.allclose(np.diag(dense), [2.0, 4.0, 6.0])
    off = dense - np.diag(np.diag(dense))
    assert np.array_equal(off, free_hamiltonian(box).dense())


def test_assemble_rejects_mismatched_box():
    box, other = build_box(1, 2), build_box(1, 3)
    with pytest.raises(ValueError):
        assemble(other, sample_field(box, UniformDensity(0, 1), SeedSpec(1)), 1.0)


def test_apply_row_sums_free():
    H = free_hamiltonian(build_box(1, 1))
    assert np.allclose(apply(H, np.ones(3)), [-1.0, -2.0, -1.0])


def test_apply_isolated_site():
    box = build_box(1, 0)
    H = assemble(box, field_from(box, [4.0]), 3.0)
    assert np.allclose(apply(H, np.array([1.0])), [12.0])


def test_apply_matches_dense_oracle():
    rng = np.random.default_rng(11)
    box = build_box(2, 3)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(3)), 1.7)
    dense = H.dense()
    for _ in range(5):
        u = rng.standard_normal(box.n_sites)
        assert np.abs(apply(H, u) - dense @ u).max() < 1e-13


def test_apply_rejects_wrong_length():
    H = free_hamiltonian(build_box(1, 2))
    with pytest.raises(ValueError):
        apply(H, np.ones(4))


def test_symmetry_bilinear_form():
    rng = np.random.default_rng(5)
    box = build_box(2, 2)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(9)), 2.5)
    for _ in range(10):
        u = rng.standard_normal(box.n_sites)
        v = rng.standard_normal(box.n_sites)
        a, b = u @ apply(H, v), apply(H, u) @ v
        assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


def test_eigenvalues_inside_predicted_interval():
    box = build_box(2, 2)
    lam = 3.0
    for seed in range(3):
        H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(seed)), lam)
        w = np.linalg.eigvalsh(H.dense())
        assert w.min() >= -4.0 + lam * 0.0 - 1e-12
        assert w.max() <= 4.0 + lam * 1.0 + 1e-12


def test_free_path_graph_closed_form():
    L = 10
    box = build_box(1, L)
    n = box.n_sites
    w = np.sort(np.linalg.eigvalsh(free_hamiltonian(box).dense()))
    k = np.arange(1, n + 1)
    expected = np.sort(-2.0 * np.cos(k * np.pi / (n + 1)))
    assert np.abs(w - expected).max() < 1e-10


def test_deplete_1d_hopping_structure():
    box = build_box(1, 2)
    H = free_hamiltonian(box)
    pair = deplete(H, 0)
    T = pair.hopping.toarray()
    i0 = box.index_of((0,))
    expected = np.zeros((5, 5))
    for j in (box.index_of((-1,)), box.index_of((1,))):
        expected[i0, j] = -1.0
        expected[j, i0] = -1.0
    assert np.array_equal(T, expected)
    assert pair.hopping.nnz == 4


def test_deplete_reconstructs_exactly():
    box = build_box(2, 3)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(4)), 1.3)
    pair = deplete(H, 1)
    diff = (pair.depleted + pair.hopping - H.matrix).toarray()
    assert np.array_equal(diff, np.zeros_like(diff))


def test_deplete_rejects_inner_too_large():
    H = free_hamiltonian(build_box(1, 2))
    with pytest.raises(ValueError):
        deplete(H, 2)


def test_depleted_acts_like_full_on_deep_interior_vectors():
    box = build_box(1, 6)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(12)), 2.0)
    pair = deplete(H, 3)
    u = np.zeros(box.n_sites)
    for site in [(-2,), (-1,), (0,), (1,), (2,)]:  # margin 1 inside inner box
        u[box.index_of(site)] = 1.0
    assert np.allclose(pair.depleted @ u, apply(H, u))


def test_save_coo_roundtrip(tmp_path):
    box = build_box(1, 1)
    H = assemble(box, field_from(box, [1.0, 0.5, 0.25]), 2.0)
    path = tmp_path / "h.coo"
    save_coo(H, path)
    dense = np.zeros((3, 3))
    for line in path.read_text().splitlines()[1:]:
        r, c, v = line.split()
        dense[int(r), int(c)] = float(v)
    assert np.array_equal(dense, H.dense())


def test_free_3d_box_tensor_sum_spectrum():
    # the free box spectrum in d dimensions is the set of sums of 1d
    # path-graph eigenvalues, by the tensor structure of the hopping
    H = free_hamiltonian(build_box(3, 1))
    w = np.sort(np.linalg.eigvalsh(H.dense()))
    path = -2.0 * np.cos(np.arange(1, 4) * np.pi / 4.0)
    sums = np.sort([a + b + c for a in path for b in path for c in path])
    assert np.abs(w - sums).max() < 1e-10
