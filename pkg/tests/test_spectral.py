import numpy as np
import pytest

from andersonlab.disorder import (
    BernoulliAtoms,
    PiecewiseConstantDensity,
    SeedSpec,
    UniformDensity,
    sample_field,
)
from andersonlab.fitting import fit_line
from andersonlab.lattice import build_box
from andersonlab.numerics import eigensystem
from andersonlab.operator import assemble
from andersonlab.spectral import (
    correlator,
    correlator_interpolation_check,
    free_ids_1d,
    ids_estimate,
    level_statistics,
    lifshitz_fit,
    lifshitz_tail,
    phase_aligned_supremum,
    predicted_spectrum_interval,
    spectral_measure,
    spectrum_support_scan,
)

UNIFORM = UniformDensity(0.0, 1.0)
FULL_LINE = (-np.inf, np.inf)


def random_hamiltonian(d, L, lam=1.0, seed=0, dist=UNIFORM):
    box = build_box(d, L)
    return assemble(box, sample_field(box, dist, SeedSpec(seed)), lam)


def test_scan_inclusion_is_exact():
    scan = spectrum_support_scan(1, UNIFORM, 2.5, [6, 10], n=5, seed=3)
    assert scan.all_inside()
    assert scan.predicted == predicted_spectrum_interval(1, UNIFORM, 2.5)


def test_scan_accepts_bernoulli():
    scan = spectrum_support_scan(1, BernoulliAtoms(0.0, 1.0, 0.5), 2.0, [8], n=4, seed=1)
    assert scan.all_inside()
    assert scan.predicted == (-2.0, 4.0)


def test_free_extremes_approach_band_edges():
    scan = spectrum_support_scan(1, UNIFORM, 0.0, [50, 200], n=1, seed=0)
    lo50, hi50 = scan.extremes(50)
    lo200, hi200 = scan.extremes(200)
    assert abs(lo200 + 2.0) < abs(lo50 + 2.0)  # closes in on -2
    assert abs(lo200 + 2.0) < 1e-3
    assert abs(hi200 - 2.0) < 1e-3


def test_correlator_full_line_r2_is_one():
    H = random_hamiltonian(1, 5, lam=2.0, seed=8)
    q = correlator(H, (2,), (2,), FULL_LINE, 2.0)
    assert q.value == pytest.approx(1.0, abs=1e-12)


def test_correlator_monotone_in_interval():
    H = random_hamiltonian(1, 4, lam=1.0, seed=2)
    small = correlator(H, (0,), (2,), (-0.5, 0.5), 1.0).value
    big = correlator(H, (0,), (2,), (-2.0, 2.0), 1.0).value
    assert small <= big + 1e-15


def test_correlator_rejects_bad_exponent():
    H = random_hamiltonian(1, 2, seed=0)
    with pytest.raises(ValueError):
        correlator(H, (0,), (1,), FULL_LINE, 2.5)


def test_correlator_equals_phase_aligned_supremum_3x3():
    # random 3-site instances: Q(x, y; R, 1) realizes the sup over |g| <= 1
    for seed in range(10):
        H = random_hamiltonian(1, 1, lam=2.0, seed=seed)
        eig = eigensystem(H)
        q = correlator(eig, (-1,), (1,), FULL_LINE, 1.0, box=H.box).value
        sup = phase_aligned_supremum(eig, H.box, (-1,), (1,), FULL_LINE)
        assert q == pytest.approx(sup, abs=1e-12)


def test_total_variation_equals_r1_correlator():
    H = random_hamiltonian(1, 6, lam=1.5, seed=4)
    eig = eigensystem(H)
    interval = (-1.0, 2.0)
    mu = spectral_measure(eig, H.box, (0,), (3,))
    q = correlator(eig, (0,), (3,), interval, 1.0, box=H.box).value
    assert mu.total_variation(interval) == pytest.approx(q, abs=1e-12)


def test_resolution_of_identity():
    H = random_hamiltonian(2, 2, lam=1.0, seed=6)
    eig = eigensystem(H)
    for x, y in [((0, 0), (0, 0)), ((0, 0), (1, -1)), ((2, 2), (2, 2))]:
        mu = spectral_measure(eig, H.box, x, y)
        total = sum(w for _, w in mu.atoms)
        assert total == pytest.approx(1.0 if x == y else 0.0, abs=1e-10)


def test_interpolation_check_passes():
    box = build_box(1, 6)
    out = correlator_interpolation_check(
        box, UNIFORM, 2.0, (0,), (3,), (-1.0, 1.0), 0.5, n=500, seed=12
    )
    assert out.passed


def test_interpolation_s_equal_one_is_equality():
    box = build_box(1, 4)
    out = correlator_interpolation_check(
        box, UNIFORM, 1.0, (0,), (2,), (-1.0, 1.0), 1.0, n=50, seed=3
    )
    assert out.lhs == pytest.approx(out.rhs, rel=1e-12)


def test_interpolation_single_atom_algebra():
    # one eigenvalue in I: the inequality reduces to
    # |psi(x)|^2 |psi(y)| <= (|psi(x)|^{2-s} |psi(y)|^s)^{1/(2-s)}
    H = random_hamiltonian(1, 3, lam=3.0, seed=9)
    eig = eigensystem(H)
    k = 3
    interval = (eig.eigenvalues[k] - 1e-9, eig.eigenvalues[k] + 1e-9)
    s = 0.5
    q1 = correlator(eig, (0,), (2,), interval, 1.0, box=H.box).value
    qs = correlator(eig, (0,), (2,), interval, s, box=H.box).value
    assert q1 <= qs ** (1.0 / (2.0 - s)) + 1e-15


def test_ids_free_closed_form():
    grid = np.linspace(-1.9, 1.9, 39)
    curve = ids_estimate(1, UNIFORM, 0.0, 300, 1, grid, seed=0)
    assert np.abs(curve.values - free_ids_1d(grid)).max() < 0.01


def test_ids_monotone_and_saturates():
    grid = np.linspace(-3.0, 4.0, 71)
    curve = ids_estimate(1, UNIFORM, 1.0, 50, 4, grid, seed=5)
    assert np.all(np.diff(curve.values) >= 0)
    assert curve.values[-1] == pytest.approx(1.0)
    assert curve.values[0] == 0.0


def test_lifshitz_probes_decrease_and_fit():
    probes = lifshitz_tail(1, UNIFORM, 0.35, 2.0 / 3.0, [4, 8, 16], n=400, seed=21)
    probs = [p.probability for p in probes]
    assert all(a >= b for a, b in zip(probs, probs[1:]))
    assert all(p.threshold == pytest.approx(-2.0 + p.L ** (-2.0 / 3.0)) for p in probes)
    slope, r2 = lifshitz_fit(probes)
    assert slope < 0


def test_lifshitz_requires_support_at_zero():
    with pytest.raises(ValueError):
        lifshitz_tail(1, UniformDensity(0.5, 1.0), 1.0, 0.5, [4], n=10, seed=0)


def test_lifshitz_zero_successes_reports_upper_bound():
    # enormous disorder: threshold unreachable, all probes miss
    probes = lifshitz_tail(1, UNIFORM, 50.0, 2.0 / 3.0, [8], n=50, seed=2)
    assert probes[0].successes == 0
    assert probes[0].probability == 0.0
    assert 0 < probes[0].upper_bound_95 < 1


def test_level_statistics_localized_does_not_reject():
    bimodal = PiecewiseConstantDensity((0.0, 0.1, 0.9, 1.0), (5.0, 0.0, 5.0))
    stats = level_statistics(1, bimodal, 5.0, 120, n=60, seed=31)
    assert not stats.reject
    assert stats.spacings.mean() == pytest.approx(1.0, abs=1e-12)


def test_level_statistics_free_rejects():
    stats = level_statistics(1, UNIFORM, 0.0, 200, n=1, seed=0)
    assert stats.reject
    assert stats.ks_distance > 0.3


def test_correlator_decay_at_large_disorder():
    box = build_box(1, 20)
    lam = 5.0
    dists = range(2, 15, 2)
    sums = {r: [] for r in dists}
    for i in range(60):
        H = assemble(box, sample_field(box, UNIFORM, SeedSpec(400 + i)), lam)
        eig = eigensystem(H)
        for r in dists:
            sums[r].append(correlator(eig, (0,), (r,), FULL_LINE, 1.0, box=box).value)
    means = [np.mean(sums[r]) for r in dists]
    slope, _, r2 = fit_line(list(dists), np.log(means))
    assert slope < -0.1
    assert r2 > 0.9


def test_ids_counting_equals_histogram_integral():
    # the counting IDS and the integrated level-density histogram agree
    # up to binning error
    d, lam, L, n = 1, 1.0, 40, 6
    edges = np.linspace(-3.0, 4.0, 141)
    curve = ids_estimate(d, UNIFORM, lam, L, n, edges, seed=44)
    box = build_box(d, L)
    pooled = []
    for i in range(n):
        H = assemble(box, sample_field(box, UNIFORM, SeedSpec(44, i)), lam)
        pooled.append(np.linalg.eigvalsh(H.dense()))
    pooled = np.concatenate(pooled)
    hist, _ = np.histogram(pooled, bins=edges)
    hist_ids = np.concatenate([[0.0], np.cumsum(hist)]) / (n * box.n_sites)
    assert np.abs(curve.values - hist_ids).max() <= 1.0 / (n * box.n_sites) + 1e-12


def test_level_statistics_explicit_window():
    stats = level_statistics(
        1, UNIFORM, 3.0, 60, n=20, seed=55, window=(0.0, 2.0)
    )
    assert stats.window == (0.0, 2.0)
    assert stats.n_levels > 0
    with pytest.raises(ValueError):
        level_statistics(1, UNIFORM, 3.0, 20, n=3, seed=55, window=(90.0, 91.0))


def test_ids_d2_monotone():
    grid = np.linspace(-5.0, 6.0, 45)
    curve = ids_estimate(2, UNIFORM, 1.0, 4, 3, grid, seed=6)
    assert np.all(np.diff(curve.values) >= 0)
    assert curve.values[-1] == pytest.approx(1.0)
