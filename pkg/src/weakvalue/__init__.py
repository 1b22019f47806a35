"""Weak-value measurements in the Fock-state picture.

Pointer physics lives in :mod:`weakvalue.pointer_fock` and
:mod:`weakvalue.weak_protocol`; the photon plus atomic-ensemble
implementation in :mod:`weakvalue.ensemble` (checked against the
brute-force :mod:`weakvalue.product_space`); Monte Carlo estimation in
:mod:`weakvalue.estimation`.
"""
from .ensemble import (
    CollectiveSpinOps,
    DickeState,
    PhotonEnsembleState,
    atomic_homodyne_distribution,
    build_spin_ops,
    detect_photon,
    hp_quadratures,
    raman_scatter_first_order,
)
from .estimation import SummaryStats, TrialRecord, estimate_dark_port, estimate_weak_value, run_trials, sweep_phi
from .pointer_fock import (
    FockOperator,
    PointerState,
    displaced_gaussian_overlap,
    ground_state,
    make_ladder,
    mean_position,
    position_wavefunction,
)
from .product_space import brute_force_oracle
from .weak_protocol import (
    JointState,
    ProtocolParams,
    Regime,
    classify_regime,
    conditional_pdf,
    evolve_exact,
    evolve_first_order,
    post_select,
    weak_value,
)

__version__ = "0.1.0"
