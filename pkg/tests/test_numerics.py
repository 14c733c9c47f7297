import numpy as np
import pytest

from andersonlab.disorder import DisorderField, SeedSpec, UniformDensity, sample_field
from andersonlab.errors import QuadratureError, SingularShiftError
from andersonlab.lattice import build_box
from andersonlab.numerics import (
    ComplexEnergy,
    adaptive_quadrature,
    eig_sym,
    eigensystem,
    eigenvalues_only,
    solve_shifted,
)
from andersonlab.operator import assemble, free_hamiltonian


def random_symmetric(rng, n):
    M = rng.standard_normal((n, n))
    return 0.5 * (M + M.T)


def test_eig_sym_diagonal_matrix():
    es = eig_sym(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(es.eigenvalues, [1.0, 2.0, 3.0])
    # eigenvectors are a signed permutation of the standard basis
    assert np.allclose(np.abs(es.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_eig_sym_free_path():
    es = eig_sym(free_hamiltonian(build_box(1, 1)).dense())
    assert np.allclose(es.eigenvalues, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_eig_sym_rejects_asymmetric():
    with pytest.raises(ValueError):
        eig_sym(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_eig_sym_contract_on_random_matrices():
    rng = np.random.default_rng(42)
    for _ in range(100):
        M = random_symmetric(rng, 50)
        es = eig_sym(M)
        scale = np.linalg.norm(M, 2)
        resid = M @ es.eigenvectors - es.eigenvectors * es.eigenvalues
        assert np.abs(resid).max() <= 1e-10 * max(scale, 1.0)
        gram = es.eigenvectors.T @ es.eigenvectors
        assert np.abs(gram - np.eye(50)).max() <= 1e-10
        recon = (es.eigenvectors * es.eigenvalues) @ es.eigenvectors.T
        assert np.linalg.norm(recon - M) <= 1e-9 * np.linalg.norm(M)


def test_eigensystem_tridiagonal_path_matches_dense():
    box = build_box(1, 20)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(3)), 2.0)
    es = eigensystem(H)
    dense = np.linalg.eigvalsh(H.dense())
    assert np.abs(es.eigenvalues - dense).max() < 1e-10
    resid = H.dense() @ es.eigenvectors - es.eigenvectors * es.eigenvalues
    assert np.abs(resid).max() < 1e-10


def test_eigenvalues_only_min_max():
    box = build_box(1, 30)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(8)), 1.5)
    w = eigenvalues_only(H, "all")
    assert eigenvalues_only(H, "min")[0] == pytest.approx(w.min(), abs=1e-12)
    assert eigenvalues_only(H, "max")[0] == pytest.approx(w.max(), abs=1e-12)


def test_solve_shifted_scalar_case():
    box = build_box(1, 0)
    H = assemble(box, DisorderField(box, np.array([2.0]), SeedSpec(0)), 1.0)
    x = solve_shifted(H, ComplexEnergy(0.0, 1.0), np.array([1.0 + 0j]))
    assert x[0] == pytest.approx((2 + 1j) / 5)


def test_solve_shifted_residual_contract():
    box = build_box(2, 3)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(5)), 2.0)
    rng = np.random.default_rng(0)
    b = rng.standard_normal(box.n_sites) + 1j * rng.standard_normal(box.n_sites)
    z = ComplexEnergy(0.3, 1e-4)
    x = solve_shifted(H, z, b)
    r = b - (H.matrix @ x - z.z * x)
    assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(b)


def test_solve_shifted_resolvent_symmetry():
    box = build_box(1, 8)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(6)), 1.0)
    n = box.n_sites
    z = ComplexEnergy(0.2, 0.7)
    ex, ey = np.zeros(n, complex), np.zeros(n, complex)
    ex[2], ey[11] = 1.0, 1.0
    gx = solve_shifted(H, z, ex)
    gy = solve_shifted(H, z, ey)
    assert abs(gx[11] - gy[2]) < 1e-11


def test_solve_shifted_norm_bound_far_shift():
    box = build_box(2, 2)
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(7)), 1.0)
    b = np.zeros(box.n_sites, complex)
    b[0] = 1.0
    x = solve_shifted(H, ComplexEnergy(0.0, 100.0), b)
    assert np.linalg.norm(x) <= 1.0 / 100.0 + 1e-12


def test_solve_shifted_singular_shift_raises():
    box = build_box(1, 1)
    H = free_hamiltonian(box)  # eigenvalues -sqrt2, 0, sqrt2
    b = np.ones(3, dtype=complex)
    with pytest.raises(SingularShiftError):
        solve_shifted(H, ComplexEnergy(0.0, 0.0), b)


def test_solve_shifted_real_energy_off_spectrum_ok():
    box = build_box(1, 5)
    H = free_hamiltonian(box)
    b = np.zeros(box.n_sites, complex)
    b[5] = 1.0
    x = solve_shifted(H, ComplexEnergy(-3.0, 0.0), b)
    r = b - (H.matrix @ x + 3.0 * x)
    assert np.linalg.norm(r) <= 1e-10


def test_solve_matches_eigendecomposition_resolvent():
    box = build_box(2, 3)  # 49 sites
    H = assemble(box, sample_field(box, UniformDensity(0, 1), SeedSpec(10)), 1.2)
    es = eigensystem(H)
    z = ComplexEnergy(0.4, 0.05)
    b = np.zeros(box.n_sites, complex)
    b[3] = 1.0
    x = solve_shifted(H, z, b)
    for i in [0, 10, 25, 48]:
        assert abs(x[i] - es.resolvent_element(i, 3, z.z)) < 1e-9


def test_quadrature_endpoint_singularity():
    assert adaptive_quadrature(lambda v: v**-0.5, 0.0, 1.0, tol=1e-10) == pytest.approx(
        2.0, abs=1e-8
    )


def test_quadrature_constant():
    assert adaptive_quadrature(lambda v: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_quadrature_interior_singularity_split():
    val = adaptive_quadrature(
        lambda v: abs(v) ** -0.5, -1.0, 1.0, singular_points=(0.0,), tol=1e-10
    )
    assert val == pytest.approx(4.0, abs=1e-8)


def test_quadrature_error_decreases_with_tol():
    # integrable but nasty: |v - 1/3|^{-0.9}
    exact = (2 / 3) ** 0.1 / 0.1 + (1 / 3) ** 0.1 / 0.1
    errs = []
    for tol in (1e-4, 1e-8, 1e-12):
        val = adaptive_quadrature(
            lambda v: abs(v - 1 / 3) ** -0.9, 0.0, 1.0, singular_points=(1 / 3,), tol=tol
        )
        errs.append(abs(val - exact))
    assert errs[2] <= errs[0] + 1e-15
    assert errs[2] < 1e-9


def test_quadrature_nonconvergence_raises():
    # a genuinely non-integrable singularity cannot meet the tolerance
    with pytest.raises(QuadratureError):
        adaptive_quadrature(
            lambda v: 1.0 / abs(v - 0.5), 0.0, 1.0, singular_points=(0.5,), tol=1e-10
        )


def test_complex_energy_rejects_negative_eps():
    with pytest.raises(ValueError):
        ComplexEnergy(0.0, -1.0)
