"""
Truncated Fock-space model of the measurement pointer.

A Gaussian pointer of width ``w`` is the ground state of a fictional
harmonic oscillator with annihilation operator ``a = (X/w + i w P)/sqrt(2)``.
Pointer states are stored as amplitude vectors over ``|0>, ..., |D-1>``
and mapped back to position space through orthonormal Hermite functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidDimensionError, InvalidStateError, TruncationError

DEFAULT_DIM = 32
GRID_POINTS = 2**16
GRID_HALF_WIDTH = 10.0
LEAKAGE_TOL = 1e-10
NORM_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"fock dimension must be an integer >= 2, got {dim}", "fock_dim")
    return int(dim)


def _check_width(width: float) -> float:
    if not np.isfinite(width) or width <= 0:
        raise InvalidStateError(f"width must be > 0, got {width}", "width")
    return float(width)


@dataclass(frozen=True, eq=False)
class PointerState:
    """Pointer amplitudes over the truncated Fock basis, plus Gaussian width."""

    amps: np.ndarray
    width: float = 1.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).ravel()
        _check_dim(amps.size)
        object.__setattr__(self, "amps", _frozen(amps))
        object.__setattr__(self, "width", _check_width(self.width))

    @classmethod
    def from_amplitudes(cls, amps, width=1.0, dim=None) -> "PointerState":
        """Build a normalized state, zero-padding ``amps`` up to ``dim``."""
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        dim = amps.size if dim is None else _check_dim(dim)
        if amps.size > dim:
            raise InvalidDimensionError(f"{amps.size} amplitudes do not fit in dimension {dim}", "fock_dim")
        padded = np.zeros(dim, dtype=np.complex128)
        padded[: amps.size] = amps
        norm = np.linalg.norm(padded)
        if norm == 0:
            raise InvalidStateError("cannot normalize the zero vector")
        return cls(padded / norm, width)

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def leakage(self) -> float:
        return truncation_leakage(self.amps)

    def __eq__(self, other):
        if not isinstance(other, PointerState):
            return NotImplemented
        return self.width == other.width and np.array_equal(self.amps, other.amps)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """A ``dim x dim`` matrix acting on the truncated Fock space."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidDimensionError(f"operator must be square, got shape {entries.shape}")
        _check_dim(entries.shape[0])
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dag(self) -> "FockOperator":
        return FockOperator(self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.entries @ other.entries)
        if isinstance(other, PointerState):
            # result is generally unnormalized, so hand back the raw vector
            return self.entries @ other.amps
        return self.entries @ np.asarray(other)


def make_ladder(dim: int) -> tuple[FockOperator, FockOperator]:
    """Return the truncated annihilation and creation operators ``(a, a_dag)``.

    ``a`` has ``sqrt(n)`` at position ``(n-1, n)`` and zeros elsewhere.
    """
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(np.complex128)
    a_op = FockOperator(a)
    return a_op, a_op.dag


def fock_state(n: int, dim: int = DEFAULT_DIM, width: float = 1.0) -> PointerState:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock index {n} outside 0..{dim - 1}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[n] = 1.0
    return PointerState(amps, width)


def ground_state(dim: int = DEFAULT_DIM, width: float = 1.0) -> PointerState:
    """The undisplaced Gaussian pointer, ``|0>``."""
    return fock_state(0, dim, width)


def truncation_leakage(amps) -> float:
    """Probability weight sitting in the two highest Fock levels."""
    amps = np.asarray(amps)
    return float(np.sum(np.abs(amps[-2:]) ** 2))


def check_leakage(amps, tol: float = LEAKAGE_TOL) -> float:
    leak = truncation_leakage(amps)
    if leak > tol:
        raise TruncationError(
            f"leakage {leak:.3e} into the top two Fock levels exceeds {tol:.0e}; increase fock_dim"
        )
    return leak


def hermite_functions(n_max: int, xi) -> np.ndarray:
    """Orthonormal Hermite functions ``h_0..h_{n_max-1}`` evaluated at ``xi``.

    Uses the normalized three-term recurrence, so large orders never build
    the raw polynomials. Returns an array of shape ``(n_max,) + xi.shape``.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max,) + xi.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def position_wavefunction(state: PointerState, x):
    """Evaluate ``psi(x) = sum_n amps[n] h_n(x/w) / sqrt(w)``.

    ``x`` may be a scalar or an array; the return value matches its shape.
    """
    x_arr = np.asarray(x, dtype=float)
    # drop trailing zero amplitudes so the recurrence stays short
    nonzero = np.flatnonzero(state.amps)
    n_used = int(nonzero[-1]) + 1 if nonzero.size else 1
    h = hermite_functions(n_used, x_arr / state.width)
    psi = np.tensordot(state.amps[:n_used], h, axes=1) / np.sqrt(state.width)
    return complex(psi) if np.ndim(x) == 0 else psi


def displaced_gaussian_overlap(d1: float, d2: float, w: float) -> float:
    """Overlap of two width-``w`` ground-state Gaussians centred at ``d1`` and ``d2``."""
    w = _check_width(w)
    return float(np.exp(-((d1 - d2) ** 2) / (4.0 * w**2)))


def _require_normalized(state: PointerState):
    if abs(state.norm - 1.0) > NORM_TOL:
        raise InvalidStateError(f"state is not normalized (norm {state.norm:.12g})")


def mean_position(state: PointerState) -> float:
    """``<X>`` with ``X = w (a + a_dag) / sqrt(2)``."""
    _require_normalized(state)
    c = state.amps
    n = np.arange(1, state.dim)
    cross = np.sum(np.sqrt(n) * np.real(np.conj(c[:-1]) * c[1:]))
    return float(np.sqrt(2.0) * state.width * cross)


def position_grid(width: float = 1.0, displacements: Iterable[float] = (0.0,), n_points: int = GRID_POINTS):
    """Uniform grid spanning ``[-10w + min(d), 10w + max(d)]``.

    ``displacements`` lists the centres of the Gaussian components present
    in the state; the grid always contains the undisplaced range.
    """
    width = _check_width(width)
    d = np.asarray(list(displacements) or [0.0], dtype=float)
    lo = -GRID_HALF_WIDTH * width + min(d.min(), 0.0)
    hi = GRID_HALF_WIDTH * width + max(d.max(), 0.0)
    return np.linspace(lo, hi, n_points)


def grid_cdf(x: np.ndarray, pdf: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid of ``pdf`` on ``x``, rescaled to end at exactly 1."""
    steps = 0.5 * (pdf[1:] + pdf[:-1]) * np.diff(x)
    cdf = np.concatenate(([0.0], np.cumsum(steps)))
    return cdf / cdf[-1]


def expectation(op: FockOperator, state: PointerState) -> complex:
    return complex(np.vdot(state.amps, op.entries @ state.amps))

