"""
Qubit-plus-pointer weak measurement with post-selection.

The system qubit is stored in the sigma_x eigenbasis ``{|x+>, |x->}`` with
``sigma_z |x+> = |x->``. The coupling ``H = chi sigma_z P`` acts for time
``t``; everything is expressed through the dimensionless strength
``kappa = chi t / (sqrt(2) w)``, so ``-iHt = -kappa sigma_z (a - a_dag)``.

Sign convention: the ``sigma_z = +1`` branch is translated by ``+chi t``
(``exp(-i s P)`` shifts X by ``+s``), which makes ``<X> > 0`` after
post-selection whenever ``kappa, phi > 0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidStateError, PostSelectionError, UndefinedWeakValueError, ValidationError
from .pointer_fock import (
    DEFAULT_DIM,
    PointerState,
    _check_dim,
    _frozen,
    check_leakage,
    displaced_gaussian_overlap,
    make_ladder,
    position_grid,
    position_wavefunction,
    truncation_leakage,
)

NORM_TOL = 1e-12
MIN_POST_SELECTION_PROB = 1e-300

# "much smaller than" made concrete; keeps first-order corrections under 4%
WEAK_KAPPA_RATIO = 0.2
WEAK_PHI_MAX = 0.2


@dataclass(frozen=True)
class ProtocolParams:
    kappa: float
    phi: float
    width: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "phi"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be >= 0", name)
            if value >= 1:
                raise ValidationError(f"{name} must be < 1", name)
        if not np.isfinite(self.width) or self.width <= 0:
            raise ValidationError("width must be > 0", "width")
        if not 0 <= self.beta < 1:
            raise ValidationError("beta must be in [0, 1)", "beta")

    @property
    def displacement(self) -> float:
        """Pointer shift ``chi t = sqrt(2) w kappa`` of each sigma_z branch."""
        return np.sqrt(2.0) * self.width * self.kappa


@dataclass(frozen=True, eq=False)
class JointState:
    """System (x+/x-) times pointer amplitudes.

    ``normalized`` is False for intermediate states such as the first-order
    expansion, whose squared norm is ``1 + kappa**2``.
    """

    amps_plus: np.ndarray
    amps_minus: np.ndarray
    width: float = 1.0
    normalized: bool = True
    leakage: float = 0.0

    def __post_init__(self):
        plus = np.array(self.amps_plus, dtype=np.complex128).ravel()
        minus = np.array(self.amps_minus, dtype=np.complex128).ravel()
        if plus.size != minus.size:
            raise InvalidStateError("x+ and x- components must share one Fock dimension")
        _check_dim(plus.size)
        object.__setattr__(self, "amps_plus", _frozen(plus))
        object.__setattr__(self, "amps_minus", _frozen(minus))
        if self.normalized and abs(self.norm_squared - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state flagged normalized has norm^2 {self.norm_squared:.15g}")

    @property
    def dim(self) -> int:
        return self.amps_plus.size

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps_plus) ** 2) + np.sum(np.abs(self.amps_minus) ** 2))

    def vector(self) -> np.ndarray:
        """Flattened amplitudes, x+ block first."""
        return np.concatenate([self.amps_plus, self.amps_minus])

    def z_components(self) -> tuple[np.ndarray, np.ndarray]:
        """Pointer amplitudes on ``|z+>`` and ``|z->`` with ``|z+-> = (|x+> +- |x->)/sqrt(2)``."""
        s = 1 / np.sqrt(2.0)
        return s * (self.amps_plus + self.amps_minus), s * (self.amps_plus - self.amps_minus)


@dataclass(frozen=True)
class PostSelection:
    """Outcome of projecting the system onto ``phi|x+> + |x->``.

    ``prob`` is the Born probability with both the projector and the input
    state normalized. ``prob_leading`` is the squared norm of the pointer
    left by the *unnormalized* projector acting on the state as supplied;
    for the first-order state it equals ``phi**2 + kappa**2`` exactly.
    """

    pointer: PointerState
    prob: float
    prob_leading: float


class Regime(str, enum.Enum):
    WEAK_VALUE = "weak_value"
    DARK_PORT = "dark_port"
    BRIGHT_PORT = "bright_port"
    INVALID = "invalid"


def coherent_amplitudes(alpha: float, dim: int) -> np.ndarray:
    """Fock amplitudes of ``D(alpha)|0>``: ``exp(-alpha^2/2) alpha^n / sqrt(n!)``."""
    out = np.empty(dim, dtype=np.complex128)
    out[0] = np.exp(-0.5 * alpha**2)
    for n in range(1, dim):
        out[n] = out[n - 1] * alpha / np.sqrt(n)
    return out


def evolve_first_order(params: ProtocolParams, dim: int = DEFAULT_DIM) -> JointState:
    """``|x+>|0> + kappa |x->|1>``, left unnormalized."""
    dim = _check_dim(dim)
    plus = np.zeros(dim, dtype=np.complex128)
    minus = np.zeros(dim, dtype=np.complex128)
    plus[0] = 1.0
    minus[1] = params.kappa
    return JointState(plus, minus, params.width, normalized=False)


def evolve_exact(params: ProtocolParams, dim: int = DEFAULT_DIM) -> JointState:
    """Exact ``exp(-iHt)|x+>|0>`` as a pair of conditionally displaced pointers.

    The ``|z+>`` branch carries ``D(kappa)|0>`` and the ``|z->`` branch
    ``D(-kappa)|0>``. Raises :class:`TruncationError` if more than 1e-10 of
    the weight lands in the top two Fock levels.
    """
    dim = _check_dim(dim)
    up = coherent_amplitudes(params.kappa, dim)
    down = coherent_amplitudes(-params.kappa, dim)
    leak = max(check_leakage(up), check_leakage(down))
    plus = 0.5 * (up + down)
    minus = 0.5 * (up - down)
    # renormalize away the (sub-1e-10) truncated tail
    norm = np.sqrt(np.sum(np.abs(plus) ** 2) + np.sum(np.abs(minus) ** 2))
    return JointState(plus / norm, minus / norm, params.width, normalized=True, leakage=leak)


def truncated_hamiltonian(params: ProtocolParams, dim: int = DEFAULT_DIM) -> np.ndarray:
    """``H t`` on the truncated space, x+ block first: ``-i kappa sigma_z (a - a_dag)``."""
    a, a_dag = make_ladder(dim)
    sigma_z = np.array([[0.0, 1.0], [1.0, 0.0]])  # in the x+/x- basis
    return -1j * params.kappa * np.kron(sigma_z, a.entries - a_dag.entries)


def evolve_matrix_exponential(params: ProtocolParams, dim: int = DEFAULT_DIM) -> JointState:
    """Reference evolution by dense ``expm`` of the truncated Hamiltonian."""
    dim = _check_dim(dim)
    u = expm(-1j * truncated_hamiltonian(params, dim))
    psi0 = np.zeros(2 * dim, dtype=np.complex128)
    psi0[0] = 1.0
    psi = u @ psi0
    return JointState(psi[:dim], psi[dim:], params.width, normalized=False, leakage=truncation_leakage(psi[dim:]))


def post_select(state: JointState, phi: float) -> PostSelection:
    """Project the system onto ``(phi|x+> + |x->)/sqrt(1 + phi^2)``."""
    if not 0 <= phi < 1:
        raise ValidationError("phi must be in [0, 1)", "phi")
    raw = phi * state.amps_plus + state.amps_minus
    weight = float(np.sum(np.abs(raw) ** 2))
    prob = weight / ((1.0 + phi**2) * state.norm_squared)
    if prob < MIN_POST_SELECTION_PROB:
        raise PostSelectionError("post-selection has zero probability (phi = kappa = 0)")
    pointer = PointerState(raw / np.sqrt(weight), state.width)
    return PostSelection(pointer, prob, weight)


def weak_value(phi: float) -> float:
    """Weak value of sigma_z for pre-selection ``|x+>``: ``1/phi``."""
    if phi == 0:
        raise UndefinedWeakValueError("weak value is undefined for phi = 0")
    return 1.0 / phi


def classify_regime(params: ProtocolParams) -> Regime:
    """Label the operating point.

    bright_port for ``phi > 0.2``; dark_port for ``phi <= kappa``;
    weak_value for ``kappa <= phi/5``. The crossover band
    ``kappa < phi < 5 kappa`` belongs to none of them and is INVALID.
    """
    kappa, phi = params.kappa, params.phi
    if phi > WEAK_PHI_MAX:
        return Regime.BRIGHT_PORT
    if phi <= kappa:
        return Regime.DARK_PORT
    if kappa <= WEAK_KAPPA_RATIO * phi:
        return Regime.WEAK_VALUE
    return Regime.INVALID


def conditional_pdf(pointer: PointerState, x):
    return np.abs(position_wavefunction(pointer, x)) ** 2


def conditional_grid(pointer: PointerState, displacements=(0.0,)) -> tuple[np.ndarray, np.ndarray]:
    """The standard position grid and the pointer pdf sampled on it."""
    grid = position_grid(pointer.width, displacements)
    return grid, conditional_pdf(pointer, grid)


# Closed forms. These never touch the Fock engine and serve as oracles.


def first_order_mean_position(kappa: float, phi: float, width: float = 1.0) -> float:
    """``<X>`` of the normalized ``phi|0> + kappa|1>`` pointer."""
    return np.sqrt(2.0) * width * kappa * phi / (phi**2 + kappa**2)


def exact_mean_position(kappa: float, phi: float, width: float = 1.0) -> float:
    """``<X>`` after exact evolution and post-selection.

    The pointer is ``(1+phi) psi0(x-d) - (1-phi) psi0(x+d)`` with
    ``d = sqrt(2) w kappa``; cross terms have zero mean by symmetry.
    """
    d = np.sqrt(2.0) * width * kappa
    overlap = displaced_gaussian_overlap(-d, d, width)
    return 2 * d * phi / ((1 + phi**2) + (phi**2 - 1) * overlap)


def exact_post_selection_probability(kappa: float, phi: float, width: float = 1.0) -> float:
    d = np.sqrt(2.0) * width * kappa
    overlap = displaced_gaussian_overlap(-d, d, width)
    return ((1 + phi**2) - (1 - phi**2) * overlap) / (2 * (1 + phi**2))


def post_selected_pointer(params: ProtocolParams, dim: int = DEFAULT_DIM, model: str = "exact") -> PostSelection:
    """Evolve with the chosen model and post-select at ``params.phi``."""
    if model == "exact":
        state = evolve_exact(params, dim)
    elif model == "first_order":
        state = evolve_first_order(params, dim)
    else:
        raise ValueError(f"unknown model {model!r}")
    return post_select(state, params.phi)
