"""End-to-end acceptance checks, one test per criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; ``conftest.py``
prints a PASS/FAIL line per criterion at the end of the run.
"""
import time

import numpy as np
import pytest

from weakvalue.cli import main
from weakvalue.ensemble import (
    DickeState,
    atomic_homodyne_distribution,
    continuum_pointer,
    detect_photon,
    raman_scatter_first_order,
    tv_distance_to_continuum,
)
from weakvalue.estimation import sweep_phi
from weakvalue.pointer_fock import mean_position, position_grid
from weakvalue.product_space import ProductSpaceEnsemble, brute_force_oracle
from weakvalue.weak_protocol import (
    ProtocolParams,
    conditional_pdf,
    evolve_exact,
    evolve_first_order,
    evolve_matrix_exponential,
    exact_mean_position,
    post_select,
    weak_value,
)

KAPPA, PHI, W = 0.005, 0.05, 1.0


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def exact_post_selected_mean(kappa=KAPPA, phi=PHI, w=W):
    params = ProtocolParams(kappa, phi, w)
    return mean_position(post_select(evolve_exact(params), phi).pointer)


@pytest.mark.criterion(1, "amplified displacement")
def test_amplified_displacement():
    with Timer() as t:
        mean = exact_post_selected_mean()
    target = np.sqrt(2) * W * KAPPA / PHI
    assert target == pytest.approx(0.141421, abs=1e-6)
    assert abs(mean - target) <= 0.02 * target
    assert abs(mean - exact_mean_position(KAPPA, PHI, W)) <= 1e-10
    assert t.elapsed < 1


@pytest.mark.criterion(2, "weak value")
def test_weak_value_ratio():
    ratio = exact_post_selected_mean() / (np.sqrt(2) * W * KAPPA)
    assert weak_value(PHI) == pytest.approx(20)
    assert abs(ratio - 20) <= 0.02 * 20


@pytest.mark.criterion(3, "post-selection probability")
def test_post_selection_probability():
    params = ProtocolParams(KAPPA, PHI, W)
    first = post_select(evolve_first_order(params), PHI)
    assert first.prob_leading == PHI**2 + KAPPA**2
    assert PHI**2 + KAPPA**2 == pytest.approx(0.002525, abs=1e-15)
    exact = post_select(evolve_exact(params), PHI)
    assert abs(exact.prob - 0.002525) < KAPPA**2


@pytest.mark.criterion(4, "dark-port limit")
def test_dark_port_pdf():
    pointer = post_select(evolve_exact(ProtocolParams(0.02, 0.0)), 0.0).pointer
    x = position_grid(1.0, n_points=2**16 + 1)
    pdf = conditional_pdf(pointer, x)
    zero = np.argmin(np.abs(x))
    assert x[zero] == pytest.approx(0, abs=1e-12)
    assert pdf[zero] < 1e-12
    assert np.max(np.abs(pdf - pdf[::-1])) < 1e-12


@pytest.mark.criterion(5, "oracle equivalence")
def test_exact_vs_matrix_exponential():
    rng = np.random.default_rng(2024)
    with Timer() as t:
        for _ in range(20):
            params = ProtocolParams(rng.uniform(0, 0.2), rng.uniform(0, 0.9), rng.uniform(0.2, 5))
            diff = evolve_exact(params).vector() - evolve_matrix_exponential(params).vector()
            assert np.max(np.abs(diff)) < 1e-10
    assert t.elapsed < 10


@pytest.mark.criterion(6, "ensemble engine vs brute force")
def test_ensemble_vs_product_space():
    kappa, phi = 0.03, 0.08
    with Timer() as t:
        for n_atoms in range(2, 9):
            space = ProductSpaceEnsemble(n_atoms)
            for m in range(n_atoms + 1):
                vec = brute_force_oracle(n_atoms, "dicke", excitations=m)
                np.testing.assert_allclose(vec, space.dicke_vector(m), atol=1e-10)
                np.testing.assert_allclose(space.to_dicke_amplitudes(vec), DickeState.excitation(m, n_atoms).amps,
                                           atol=1e-10)
            for n_photons in (1, 2):
                engine = detect_photon(raman_scatter_first_order(n_photons, n_atoms, kappa), phi).atomic
                oracle = brute_force_oracle(n_atoms, "raman_detect", n_photons=n_photons, kappa=kappa, phi=phi)
                np.testing.assert_allclose(engine.amps, oracle.amps, atol=1e-10)
            dist = atomic_homodyne_distribution(engine)
            ref = brute_force_oracle(n_atoms, "homodyne", amps=engine.amps)
            np.testing.assert_allclose(dist.x, ref.x, atol=1e-10)
            np.testing.assert_allclose(dist.prob, ref.prob, atol=1e-10)
    assert t.elapsed < 30


@pytest.mark.criterion(7, "sqrt(N) enhancement")
def test_sqrt_n_enhancement():
    kappa, phi, n_atoms = 0.01, 0.1, 10
    states = []
    for n in (1, 2, 4):
        scattered = raman_scatter_first_order(n, n_atoms, kappa)
        assert abs(scattered.amps[1, 1] - kappa * np.sqrt(n)) < 1e-12
        states.append(detect_photon(scattered, phi).atomic.amps)
    for amps in states[1:]:
        assert np.max(np.abs(amps - states[0])) < 1e-12


@pytest.mark.criterion(8, "Holstein-Primakoff convergence")
def test_holstein_primakoff_convergence():
    kappa, phi = 0.02, 0.1
    with Timer() as t:
        tvs = []
        for n_atoms in (8, 16, 32, 64):
            atomic = detect_photon(raman_scatter_first_order(1, n_atoms, kappa), phi).atomic
            dist = atomic_homodyne_distribution(atomic)
            tvs.append(tv_distance_to_continuum(dist, continuum_pointer(atomic)))
            assert abs(dist.mean - np.sqrt(2) * phi * kappa / (phi**2 + kappa**2)) < 1e-12
    assert all(b <= a for a, b in zip(tvs, tvs[1:]))
    assert tvs[-1] < 0.05
    assert t.elapsed < 10


@pytest.mark.criterion(9, "noise-regime advantage")
def test_noise_regime_advantage():
    with Timer() as t:
        dark, weak = sweep_phi(0.003, 1e-4, [0.0, 0.03], 10**5, 42)
    assert dark.strategy == "dark_port" and weak.strategy == "weak_value"
    assert weak.rmse < dark.rmse
    assert t.elapsed < 60


DETERMINISM_RUNS = {
    "pointer": ["--kappa", "0.005", "--phi", "0.05"],
    "ensemble": ["--kappa", "0.02", "--phi", "0.1", "--n-atoms", "64", "--n-photons", "2"],
    "sweep": ["--kappa", "0.003", "--beta", "1e-4", "--phi-grid", "0,0.03,0.1,0.3", "--n-trials", "100000"],
    "estimate": ["--kappa", "0.003", "--phi", "0.03", "--beta", "1e-4", "--n-trials", "100000"],
}


@pytest.mark.criterion(10, "determinism")
@pytest.mark.parametrize("command", sorted(DETERMINISM_RUNS))
def test_cli_determinism(tmp_path, monkeypatch, command):
    monkeypatch.chdir(tmp_path)
    blobs = []
    for _ in range(2):
        assert main(["--command", command, *DETERMINISM_RUNS[command], "--seed", "42", "--out", f"run.{command}"]) == 0
        files = sorted(tmp_path.glob("run*"))
        assert files
        blobs.append({f.name: f.read_bytes() for f in files})
        for f in files:
            f.unlink()
    assert blobs[0] == blobs[1]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
