import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from weakvalue.ensemble import (
    DickeState,
    atomic_homodyne_distribution,
    binned_continuum,
    build_spin_ops,
    continuum_pointer,
    detect_photon,
    hp_creation,
    hp_quadratures,
    raman_scatter_first_order,
    tv_distance_to_continuum,
)
from weakvalue.errors import OracleScaleError, OutOfRegimeError, PostSelectionError, ValidationError
from weakvalue.product_space import ProductSpaceEnsemble, brute_force_oracle

PAULI = {
    "x": np.array([[0, 1], [1, 0]]),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]]),
}


def dense(m):
    return m.toarray()


def test_spin_half_matrices():
    ops = build_spin_ops(1)
    # J_x diagonal in the g/s basis; J_y, J_z follow cyclically
    np.testing.assert_array_equal(dense(ops.jx), PAULI["z"] / 2)
    np.testing.assert_array_equal(dense(ops.jy), PAULI["x"] / 2)
    np.testing.assert_array_equal(dense(ops.jz), PAULI["y"] / 2)


@pytest.mark.parametrize("n_atoms", list(range(1, 65)))
def test_commutation_relations(n_atoms):
    ops = build_spin_ops(n_atoms)
    jx, jy, jz = dense(ops.jx), dense(ops.jy), dense(ops.jz)
    assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() < 1e-12
    assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() < 1e-12
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-12


@pytest.mark.parametrize("n_atoms", [1, 4, 17])
def test_ground_state_is_top_jx_eigenvector(n_atoms):
    ops = build_spin_ops(n_atoms)
    g = DickeState.excitation(0, n_atoms).amps
    np.testing.assert_allclose(ops.jx @ g, n_atoms / 2 * g, atol=1e-15)
    assert np.max(np.linalg.eigvalsh(dense(ops.jx))) == n_atoms / 2


def test_lowering_coefficient():
    ops = build_spin_ops(4)
    out = ops.j_minus @ DickeState.excitation(0, 4).amps
    np.testing.assert_allclose(out, 2 * DickeState.excitation(1, 4).amps, atol=1e-15)


@pytest.mark.parametrize("n_atoms", [1, 2, 5, 50, 4096])
def test_hp_commutator(n_atoms):
    ops = build_spin_ops(n_atoms)
    x, p = hp_quadratures(ops)
    comm = x @ p - p @ x
    assert comm[0, 0] == pytest.approx(1j, abs=1e-12)
    assert comm[1, 1] == pytest.approx(1j * (1 - 2 / n_atoms), abs=1e-12)


@pytest.mark.parametrize("n_atoms", list(range(1, 65)) + [1000, 4096])
def test_hp_ladder_identity(n_atoms):
    ops = build_spin_ops(n_atoms)
    out = hp_creation(ops) @ DickeState.excitation(0, n_atoms).amps
    np.testing.assert_allclose(out, DickeState.excitation(1, n_atoms).amps, atol=1e-14)
    diff = hp_creation(ops) - ops.j_minus / np.sqrt(n_atoms)
    assert abs(diff).max() < 1e-12


def test_spin_ops_range():
    with pytest.raises(ValidationError):
        build_spin_ops(0)
    with pytest.raises(ValidationError):
        build_spin_ops(4097)


def test_raman_single_photon():
    s = raman_scatter_first_order(1, 5, 0.1)
    assert s.amps[1, 1] == pytest.approx(0.1, abs=1e-15)
    assert s.amps[0, 0] == 1
    assert np.count_nonzero(s.amps) == 2


@pytest.mark.parametrize("n_photons,expected", [(1, 0.1), (2, 0.1 * np.sqrt(2)), (4, 0.2)])
def test_raman_sqrt_n_enhancement(n_photons, expected):
    s = raman_scatter_first_order(n_photons, 8, 0.1)
    assert s.amps[1, 1] == pytest.approx(expected, abs=1e-12)
    assert np.all(s.total_photons() == n_photons)


def test_raman_zero_coupling():
    s = raman_scatter_first_order(3, 6, 0.0)
    assert s.amps[0, 0] == 1 and np.count_nonzero(s.amps) == 1


def test_raman_guard():
    with pytest.raises(OutOfRegimeError):
        raman_scatter_first_order(4, 6, 0.2)


def test_detect_photon_single():
    atomic, weight = detect_photon(raman_scatter_first_order(1, 6, 0.01), 0.1)
    expected = np.array([0.1, 0.01, 0, 0, 0, 0, 0]) / np.hypot(0.1, 0.01)
    np.testing.assert_allclose(atomic.amps, expected, atol=1e-15)
    assert weight == pytest.approx(0.0101, abs=1e-15)


def test_detected_state_independent_of_photon_number():
    ref = detect_photon(raman_scatter_first_order(1, 6, 0.01), 0.1).atomic
    for n in (2, 4, 9):
        atomic, weight = detect_photon(raman_scatter_first_order(n, 6, 0.01), 0.1)
        np.testing.assert_allclose(atomic.amps, ref.amps, atol=1e-12)
        assert weight == pytest.approx(n * 0.0101, rel=1e-12)


def test_stokes_projection_gives_single_excitation():
    atomic, _ = detect_photon(raman_scatter_first_order(3, 6, 0.05), 0.0)
    np.testing.assert_array_equal(atomic.amps, DickeState.excitation(1, 6).amps)


def test_detection_impossible():
    with pytest.raises(PostSelectionError):
        detect_photon(raman_scatter_first_order(1, 4, 0.0), 0.0)


def test_homodyne_ground_state_symmetric():
    dist = atomic_homodyne_distribution(DickeState.excitation(0, 12))
    assert dist.prob.sum() == pytest.approx(1, abs=1e-12)
    assert abs(dist.mean) < 1e-12
    np.testing.assert_allclose(dist.prob, dist.prob[::-1], atol=1e-12)


def test_homodyne_single_atom_excited():
    dist = atomic_homodyne_distribution(DickeState.excitation(1, 1))
    np.testing.assert_allclose(dist.x, [-1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(dist.prob, [0.5, 0.5], atol=1e-12)
    oracle = brute_force_oracle(1, "homodyne", amps=[0, 1])
    np.testing.assert_allclose(dist.prob, oracle.prob, atol=1e-12)


@pytest.mark.parametrize("n_atoms", [1, 2, 3, 8, 64, 500])
def test_homodyne_mean_exact(n_atoms):
    phi, kappa = 0.1, 0.02
    atomic = DickeState.from_amplitudes([phi, kappa], n_atoms=n_atoms)
    dist = atomic_homodyne_distribution(atomic)
    assert dist.mean == pytest.approx(np.sqrt(2) * phi * kappa / (phi**2 + kappa**2), abs=1e-12)
    assert dist.prob.sum() == pytest.approx(1, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(n_atoms=st.integers(1, 40), seed=st.integers(0, 2**32 - 1))
def test_pulse_readout_matches_direct_jy_statistics(n_atoms, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=n_atoms + 1) + 1j * rng.normal(size=n_atoms + 1)
    state = DickeState.from_amplitudes(amps)
    ops = build_spin_ops(n_atoms)
    evals, evecs = np.linalg.eigh(dense(ops.jy))
    direct = np.abs(evecs.conj().T @ state.amps) ** 2
    # eigenvalues ascend, matching x = J_y/sqrt(N/2) ascending
    dist = atomic_homodyne_distribution(state, ops)
    np.testing.assert_allclose(dist.x, evals / np.sqrt(n_atoms / 2), atol=1e-10)
    np.testing.assert_allclose(dist.prob, direct, atol=1e-10)


def continuum_cdf(x, phi, kappa):
    """CDF of |phi psi0 + kappa psi1|^2/(phi^2+kappa^2), w = 1, integrated by hand."""
    g = np.exp(-(x**2)) / np.sqrt(np.pi)
    c00 = 0.5 * (1 + erf(x))
    c01 = -np.sqrt(2) / 2 * g
    c11 = 0.5 * (1 + erf(x)) - x * g
    return (phi**2 * c00 + 2 * phi * kappa * c01 + kappa**2 * c11) / (phi**2 + kappa**2)


@pytest.mark.parametrize("n_atoms", [8, 64])
def test_binned_continuum_against_analytic_cdf(n_atoms):
    phi, kappa = 0.1, 0.02
    atomic = DickeState.from_amplitudes([phi, kappa], n_atoms=n_atoms)
    dist = atomic_homodyne_distribution(atomic)
    q = binned_continuum(dist, continuum_pointer(atomic))
    half = 0.5 * (dist.x[1] - dist.x[0])
    expected = continuum_cdf(dist.x + half, phi, kappa) - continuum_cdf(dist.x - half, phi, kappa)
    # linear interpolation of the grid CDF between nodes limits agreement
    np.testing.assert_allclose(q, expected, atol=2e-8)


def test_tv_distance_shrinks_with_ensemble_size():
    phi, kappa = 0.1, 0.02
    tvs = []
    for n in (8, 16, 32, 64):
        atomic = DickeState.from_amplitudes([phi, kappa], n_atoms=n)
        dist = atomic_homodyne_distribution(atomic)
        tvs.append(tv_distance_to_continuum(dist, continuum_pointer(atomic)))
    assert all(b <= a for a, b in zip(tvs, tvs[1:]))
    assert tvs[-1] < 0.05


def test_oracle_dicke_single_excitation():
    vec = brute_force_oracle(3, "dicke", excitations=1)
    expected = np.zeros(8)
    expected[[0b001, 0b010, 0b100]] = 1 / np.sqrt(3)
    np.testing.assert_allclose(vec, expected, atol=1e-15)


def test_oracle_lowering_matches_engine():
    out = brute_force_oracle(4, "lower", excitations=0)
    engine = build_spin_ops(4).j_minus @ DickeState.excitation(0, 4).amps
    np.testing.assert_allclose(out, engine, atol=1e-12)


@pytest.mark.parametrize("n_atoms", range(1, 8))
def test_oracle_collective_ops_match_engine(n_atoms):
    space = ProductSpaceEnsemble(n_atoms)
    full = space.collective()
    ops = build_spin_ops(n_atoms)
    basis = np.stack([space.dicke_vector(m) for m in range(n_atoms + 1)], axis=1)
    for f, e in zip(full, (ops.jx, ops.jy, ops.jz)):
        np.testing.assert_allclose(basis.conj().T @ f @ basis, dense(e), atol=1e-12)


def test_oracle_homodyne_n6():
    phi, kappa = 0.1, 0.02
    atomic, _ = detect_photon(raman_scatter_first_order(1, 6, kappa), phi)
    oracle = brute_force_oracle(6, "homodyne", amps=atomic.amps)
    engine = atomic_homodyne_distribution(atomic)
    np.testing.assert_allclose(engine.prob, oracle.prob, atol=1e-10)
    np.testing.assert_allclose(engine.x, oracle.x, atol=1e-15)


@pytest.mark.parametrize("n_photons", [1, 3])
def test_oracle_raman_detect(n_photons):
    engine = detect_photon(raman_scatter_first_order(n_photons, 5, 0.03), 0.08).atomic
    oracle = brute_force_oracle(5, "raman_detect", n_photons=n_photons, kappa=0.03, phi=0.08)
    np.testing.assert_allclose(engine.amps, oracle.amps, atol=1e-10)


def test_oracle_scale_limit():
    with pytest.raises(OracleScaleError):
        brute_force_oracle(11, "dicke", excitations=0)
