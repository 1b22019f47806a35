"""
Photon plus atomic-ensemble implementation in the symmetric (Dicke) subspace.

Atoms have levels g and s. The Dicke index ``m`` counts atoms in s, so the
all-ground state is index 0 and the symmetric single excitation is index 1.
Collective operators use the per-atom quasi-spin with
``sigma_x = |g><g| - |s><s|``; index ``m`` is the J_x eigenvector with
eigenvalue ``N_A/2 - m``.

Collective operators are kept sparse (they are at most tridiagonal), which
keeps ensembles of a few thousand atoms cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import InvalidStateError, OutOfRegimeError, PostSelectionError, ValidationError
from .pointer_fock import PointerState, _frozen, grid_cdf, position_grid, position_wavefunction

MAX_ATOMS = 4096
MAX_FIRST_ORDER_AMPLITUDE = 0.3
NORM_TOL = 1e-12


def _check_atoms(n_atoms: int) -> int:
    if int(n_atoms) != n_atoms or not 1 <= n_atoms <= MAX_ATOMS:
        raise ValidationError(f"n_atoms must be in 1..{MAX_ATOMS}, got {n_atoms}", "n_atoms")
    return int(n_atoms)


@dataclass(frozen=True, eq=False)
class DickeState:
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).ravel()
        _check_atoms(amps.size - 1)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"Dicke state must be normalized, got norm {norm:.15g}")
        object.__setattr__(self, "amps", _frozen(amps))

    @classmethod
    def from_amplitudes(cls, amps, n_atoms=None) -> "DickeState":
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        n_atoms = amps.size - 1 if n_atoms is None else _check_atoms(n_atoms)
        if amps.size > n_atoms + 1:
            raise ValidationError(f"{amps.size} amplitudes exceed {n_atoms} atoms", "n_atoms")
        padded = np.zeros(n_atoms + 1, dtype=np.complex128)
        padded[: amps.size] = amps
        norm = np.linalg.norm(padded)
        if norm == 0:
            raise InvalidStateError("cannot normalize the zero vector")
        return cls(padded / norm)

    @classmethod
    def excitation(cls, m: int, n_atoms: int) -> "DickeState":
        """Symmetric state with exactly ``m`` atoms in s."""
        n_atoms = _check_atoms(n_atoms)
        if not 0 <= m <= n_atoms:
            raise ValidationError(f"excitation number {m} outside 0..{n_atoms}")
        amps = np.zeros(n_atoms + 1, dtype=np.complex128)
        amps[m] = 1.0
        return cls(amps)

    @property
    def n_atoms(self) -> int:
        return self.amps.size - 1


@dataclass(frozen=True, eq=False)
class CollectiveSpinOps:
    n_atoms: int
    jx: sp.csr_matrix
    jy: sp.csr_matrix
    jz: sp.csr_matrix

    @property
    def j_minus(self) -> sp.csr_matrix:
        """``J_y - i J_z``; adds one atom to s."""
        return (self.jy - 1j * self.jz).tocsr()

    @property
    def j_plus(self) -> sp.csr_matrix:
        return (self.jy + 1j * self.jz).tocsr()


def build_spin_ops(n_atoms: int) -> CollectiveSpinOps:
    """Spin-``N_A/2`` matrices in the J_x eigenbasis, index = excitation number.

    Satisfies ``[J_y, J_z] = i J_x`` (and cyclic permutations).
    """
    n = _check_atoms(n_atoms)
    m = np.arange(n + 1, dtype=float)
    jx = sp.diags(n / 2 - m).astype(np.complex128)
    # <m+1| J_- |m> = sqrt((m+1)(N-m))
    coeff = np.sqrt((m[:-1] + 1) * (n - m[:-1]))
    lower = sp.diags(coeff, -1, shape=(n + 1, n + 1)).astype(np.complex128)
    raise_ = lower.T
    jy = 0.5 * (raise_ + lower)
    jz = -0.5j * (raise_ - lower)
    return CollectiveSpinOps(n, jx.tocsr(), jy.tocsr(), jz.tocsr())


def hp_quadratures(ops: CollectiveSpinOps) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Canonical variables ``X = J_y/sqrt(N_A/2)``, ``P = J_z/sqrt(N_A/2)``.

    ``[X, P] = i J_x / (N_A/2)``, which equals ``i`` on the index-0 state
    and ``i (1 - 2m/N_A)`` on index ``m``: canonical only near full
    polarization.
    """
    scale = 1.0 / np.sqrt(ops.n_atoms / 2)
    return (scale * ops.jy).tocsr(), (scale * ops.jz).tocsr()


def hp_creation(ops: CollectiveSpinOps) -> sp.csr_matrix:
    """``(X - iP)/sqrt(2)``, identical to ``J_-/sqrt(N_A)``."""
    x, p = hp_quadratures(ops)
    return ((x - 1j * p) / np.sqrt(2.0)).tocsr()


@dataclass(frozen=True, eq=False)
class PhotonEnsembleState:
    """Fixed-N photon sector times Dicke space.

    ``amps[k, m]``: ``k`` photons in the x- (Stokes) mode, ``N - k`` in x+,
    and ``m`` atomic excitations.
    """

    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[0] < 2:
            raise ValidationError(f"expected a (N+1, N_A+1) array, got shape {amps.shape}")
        _check_atoms(amps.shape[1] - 1)
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def n_photons(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def n_atoms(self) -> int:
        return self.amps.shape[1] - 1

    def total_photons(self) -> np.ndarray:
        """Photon number of every populated component (all equal ``N``)."""
        k = np.arange(self.n_photons + 1)
        populated = np.any(self.amps != 0, axis=1)
        return (k + (self.n_photons - k))[populated]


def scattering_operator(n_photons: int) -> np.ndarray:
    """``a_dag_{x-} a_{x+}`` on the fixed-N sector, indexed by x- photon count."""
    k = np.arange(n_photons, dtype=float)
    return np.diag(np.sqrt((n_photons - k) * (k + 1)), -1)


def raman_scatter_first_order(n_photons: int, n_atoms: int, kappa: float) -> PhotonEnsembleState:
    """First-order Raman scattering of an N-photon write beam.

    Applies ``1 + kappa (G - G_dag)`` with
    ``G = a_dag_{x-} a_{x+} J_-/sqrt(N_A)`` to ``|N,0>|0>``, giving
    ``|N,0>|0> + kappa sqrt(N) |N-1,1>|1>`` (unnormalized).
    """
    if int(n_photons) != n_photons or n_photons < 1:
        raise ValidationError(f"n_photons must be >= 1, got {n_photons}", "n_photons")
    n_atoms = _check_atoms(n_atoms)
    if kappa < 0:
        raise ValidationError("kappa must be >= 0", "kappa")
    if kappa * np.sqrt(n_photons) > MAX_FIRST_ORDER_AMPLITUDE:
        raise OutOfRegimeError(
            f"kappa*sqrt(N) = {kappa * np.sqrt(n_photons):.4g} exceeds {MAX_FIRST_ORDER_AMPLITUDE}; "
            "first-order scattering is not valid"
        )
    init = np.zeros((n_photons + 1, n_atoms + 1), dtype=np.complex128)
    init[0, 0] = 1.0
    photon = scattering_operator(n_photons)
    atom = build_spin_ops(n_atoms).j_minus / np.sqrt(n_atoms)
    # G psi = photon @ psi @ atom^T for psi[k, m]
    g_psi = photon @ (atom @ init.T).T
    g_dag_psi = photon.T @ (atom.conj().T @ init.T).T
    return PhotonEnsembleState(init + kappa * (g_psi - g_dag_psi), normalized=False)


class Detection(NamedTuple):
    atomic: DickeState
    prob_weight: float


def detect_photon(state: PhotonEnsembleState, phi: float) -> Detection:
    """Detect one forward photon with ``phi a_{x+} + a_{x-}``.

    The remaining N-1 photons are projected onto the configuration with no
    Stokes photon left (all in x+). For N > 1 this discards the branch in
    which a write photon was detected and the Stokes photon survives; its
    amplitude is second order (``phi kappa``). ``prob_weight`` is the
    squared norm of the atomic vector before normalization, relative to
    the (unnormalized) input.
    """
    if not 0 <= phi < 1:
        raise ValidationError("phi must be in [0, 1)", "phi")
    n = state.n_photons
    psi = state.amps
    # phi a_{x+} keeps k = 0 at amplitude sqrt(N); a_{x-} takes k = 1 to k = 0
    atomic = phi * np.sqrt(n) * psi[0] + psi[1]
    weight = float(np.sum(np.abs(atomic) ** 2))
    if weight < 1e-300:
        raise PostSelectionError("photon detection has zero weight (phi = kappa = 0)")
    return Detection(DickeState(atomic / np.sqrt(weight)), weight)


@dataclass(frozen=True, eq=False)
class HomodyneDistribution:
    """Discrete atomic-homodyne outcomes ``x`` (ascending) and probabilities."""

    x: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "prob", _frozen(np.asarray(self.prob, dtype=float)))

    def __iter__(self):
        return iter(zip(self.x.tolist(), self.prob.tolist()))

    def __len__(self):
        return self.x.size

    @property
    def mean(self) -> float:
        return float(np.dot(self.x, self.prob))


def pi_half_pulse(ops: CollectiveSpinOps, amps) -> np.ndarray:
    """Apply ``exp(-i (pi/2) J_z)``; maps J_y statistics onto ``-J_x``."""
    return expm_multiply(-0.5j * np.pi * ops.jz.tocsc(), np.asarray(amps, dtype=np.complex128))


def atomic_homodyne_distribution(atomic: DickeState, ops: CollectiveSpinOps | None = None) -> HomodyneDistribution:
    """Atomic homodyne: pi/2 pulse, then projective J_x readout.

    Outcome ``J_x = N_A/2 - m`` is reported as ``x = -(N_A/2 - m)/sqrt(N_A/2)``;
    the sign flip undoes the pulse so that ``x`` samples ``X = J_y/sqrt(N_A/2)``.
    """
    n = atomic.n_atoms
    ops = build_spin_ops(n) if ops is None else ops
    rotated = pi_half_pulse(ops, atomic.amps)
    prob = np.abs(rotated) ** 2
    x = -(n / 2 - np.arange(n + 1)) / np.sqrt(n / 2)
    return HomodyneDistribution(x, prob)


def continuum_pointer(atomic: DickeState) -> PointerState:
    """Oscillator state with the same amplitudes on ``|m>``, width 1."""
    amps = atomic.amps if atomic.amps.size >= 2 else np.append(atomic.amps, 0)
    return PointerState(amps, 1.0)


def binned_continuum(dist: HomodyneDistribution, pointer: PointerState) -> np.ndarray:
    """Continuum probability mass in cells centred on each discrete outcome."""
    x = dist.x
    if x.size > 1:
        half = 0.5 * np.diff(x)
        edges = np.concatenate(([x[0] - half[0]], x[:-1] + half, [x[-1] + half[-1]]))
    else:
        edges = np.array([x[0] - 0.5, x[0] + 0.5])
    grid = position_grid(pointer.width, (edges[0], edges[-1]))
    pdf = np.abs(position_wavefunction(pointer, grid)) ** 2
    cdf = grid_cdf(grid, pdf)
    return np.diff(np.interp(edges, grid, cdf))


def tv_distance_to_continuum(dist: HomodyneDistribution, pointer: PointerState) -> float:
    """Total-variation distance to the binned continuum pdf.

    Continuum mass falling outside every cell counts towards the distance.
    """
    q = binned_continuum(dist, pointer)
    return float(0.5 * (np.sum(np.abs(dist.prob - q)) + max(0.0, 1.0 - q.sum())))
