"""
Brute-force simulation of the ensemble on the full 2**N_A product space.

Every atom is an explicit qubit (index 0 = g, 1 = s), atom 1 being the most
significant bit. Nothing here reuses the Dicke-subspace engine; results are
projected onto the symmetric subspace only at the very end, so the two
paths can be compared element-wise.
"""
from __future__ import annotations

from math import comb

import numpy as np
from scipy.linalg import expm

from .ensemble import DickeState, HomodyneDistribution
from .errors import InvalidStateError, OracleScaleError, ValidationError

MAX_ORACLE_ATOMS = 10

# per-atom quasi-spin, sigma_x = |g><g| - |s><s|
SIGMA_X = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_Y = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
RAISE_S = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |s><g|


class ProductSpaceEnsemble:
    def __init__(self, n_atoms: int):
        if int(n_atoms) != n_atoms or n_atoms < 1:
            raise ValidationError(f"n_atoms must be >= 1, got {n_atoms}", "n_atoms")
        if n_atoms > MAX_ORACLE_ATOMS:
            raise OracleScaleError(f"brute-force oracle limited to {MAX_ORACLE_ATOMS} atoms, got {n_atoms}")
        self.n_atoms = int(n_atoms)
        self.dim = 2**self.n_atoms
        indices = np.arange(self.dim)
        self.popcount = np.array([bin(i).count("1") for i in indices])

    def single_atom_sum(self, op: np.ndarray) -> np.ndarray:
        """``sum_k op^(k)`` as a dense matrix on the full space."""
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        eye = np.eye(2, dtype=np.complex128)
        for k in range(self.n_atoms):
            term = np.ones((1, 1), dtype=np.complex128)
            for j in range(self.n_atoms):
                term = np.kron(term, op if j == k else eye)
            total += term
        return total

    def collective(self):
        """Full-space ``(J_x, J_y, J_z)``."""
        return tuple(0.5 * self.single_atom_sum(s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))

    def j_minus(self) -> np.ndarray:
        return self.single_atom_sum(RAISE_S)

    def dicke_vector(self, m: int) -> np.ndarray:
        """Equal superposition of all product states with ``m`` atoms in s."""
        vec = np.where(self.popcount == m, 1.0, 0.0).astype(np.complex128)
        return vec / np.sqrt(comb(self.n_atoms, m))

    def from_dicke_amplitudes(self, amps) -> np.ndarray:
        amps = np.asarray(amps, dtype=np.complex128)
        return sum(c * self.dicke_vector(m) for m, c in enumerate(amps))

    def to_dicke_amplitudes(self, vec, tol: float = 1e-10) -> np.ndarray:
        """Project onto the Dicke basis; refuse states with weight outside it."""
        vec = np.asarray(vec, dtype=np.complex128)
        amps = np.array([np.vdot(self.dicke_vector(m), vec) for m in range(self.n_atoms + 1)])
        residual = vec - self.from_dicke_amplitudes(amps)
        if np.linalg.norm(residual) > tol * max(1.0, np.linalg.norm(vec)):
            raise InvalidStateError("state has weight outside the symmetric subspace")
        return amps

    def rotate_each_atom(self, vec, unitary: np.ndarray) -> np.ndarray:
        """Apply the same 2x2 unitary to every atom."""
        psi = np.asarray(vec, dtype=np.complex128).reshape((2,) * self.n_atoms)
        for axis in range(self.n_atoms):
            psi = np.moveaxis(np.tensordot(unitary, psi, axes=([1], [axis])), 0, axis)
        return psi.reshape(self.dim)

    def homodyne(self, vec) -> HomodyneDistribution:
        """pi/2 pulse as a product of single-atom rotations, then J_x readout."""
        u = expm(-0.25j * np.pi * SIGMA_Z)  # exp(-i pi/2 J_z) factorizes per atom
        rotated = self.rotate_each_atom(vec, u)
        weights = np.abs(rotated) ** 2
        n = self.n_atoms
        prob = np.bincount(self.popcount, weights=weights, minlength=n + 1)
        # J_x eigenvalue (N - 2 popcount)/2, reported with the same sign flip as the engine
        x = -(n / 2 - np.arange(n + 1)) / np.sqrt(n / 2)
        return HomodyneDistribution(x, prob)

    def raman_detect(self, n_photons: int, kappa: float, phi: float) -> np.ndarray:
        """First-order scattering followed by ``phi a_{x+} + a_{x-}`` detection.

        Returns the unnormalized full-space atomic vector left with no Stokes
        photon in the remaining field.
        """
        n = n_photons
        psi = np.zeros((n + 1, self.dim), dtype=np.complex128)
        psi[0, 0] = 1.0
        photon = np.zeros((n + 1, n + 1))
        for k in range(n):
            photon[k + 1, k] = np.sqrt((n - k) * (k + 1))
        atom = self.j_minus() / np.sqrt(self.n_atoms)
        g = np.kron(photon, atom)
        flat = psi.reshape(-1)
        flat = flat + kappa * (g - g.conj().T) @ flat
        psi = flat.reshape(n + 1, self.dim)
        return phi * np.sqrt(n) * psi[0] + psi[1]


def brute_force_oracle(n_atoms: int, scenario: str, **kwargs):
    """Run one scenario on the full product space.

    Scenarios
    ---------
    ``"dicke"``
        ``excitations=m``; returns the full-space vector of index ``m``.
    ``"lower"``
        ``excitations=m``; applies the full-space ``J_-`` and returns the
        resulting (unnormalized) Dicke amplitudes.
    ``"raman_detect"``
        ``n_photons, kappa, phi``; returns the heralded :class:`DickeState`.
    ``"homodyne"``
        ``amps`` (Dicke amplitudes, normalized); returns the
        :class:`HomodyneDistribution`.
    """
    space = ProductSpaceEnsemble(n_atoms)
    if scenario == "dicke":
        return space.dicke_vector(kwargs["excitations"])
    if scenario == "lower":
        vec = space.j_minus() @ space.dicke_vector(kwargs["excitations"])
        return space.to_dicke_amplitudes(vec)
    if scenario == "raman_detect":
        vec = space.raman_detect(kwargs.get("n_photons", 1), kwargs["kappa"], kwargs["phi"])
        amps = space.to_dicke_amplitudes(vec)
        return DickeState(amps / np.linalg.norm(amps))
    if scenario == "homodyne":
        return space.homodyne(space.from_dicke_amplitudes(kwargs["amps"]))
    raise ValueError(f"unknown scenario {scenario!r}")
