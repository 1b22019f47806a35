"""
Monte Carlo comparison of strategies for estimating the coupling kappa.

Each trial either post-selects successfully (probability ``p_true``), fires
a background click (probability ``beta``, homodyne sample drawn from the
undisplaced ground-state pdf), both, or neither. When both fire, the
background event is the one kept with probability ``beta/(p_true+beta)``.

Randomness is counter based: trial ``i`` draws its uniforms from
``splitmix64`` applied to ``(master_seed, i, stream)``, so any subset of
trials can be generated alone, in chunks, or in parallel and still match a
sequential run bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import InsufficientDataError, PostSelectionError, ValidationError
from .pointer_fock import (
    DEFAULT_DIM,
    PointerState,
    ground_state,
    grid_cdf,
    position_grid,
    position_wavefunction,
)
from .weak_protocol import ProtocolParams, post_selected_pointer

N_BOOTSTRAP = 1000
SNR_THRESHOLD = 2.0

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# uniform streams drawn per trial
_U_TRUE, _U_BACKGROUND, _U_CHOOSE, _U_SAMPLE = range(4)
N_STREAMS = 4


def splitmix64(z) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrap-around arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def trial_uniforms(master_seed: int, trial_indices, n_streams: int = N_STREAMS) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(len(trial_indices), n_streams)``.

    ``key_i = splitmix64(splitmix64(seed) + i * GAMMA)``;
    ``u_ij = top53(splitmix64(key_i + (j + 1) * GAMMA)) / 2**53``.
    """
    if not 0 <= master_seed <= _MASK64:
        raise ValidationError("master_seed must be a 64-bit unsigned integer", "master_seed")
    idx = np.asarray(trial_indices, dtype=np.uint64)
    seed_key = splitmix64(np.array([master_seed], dtype=np.uint64))
    streams = np.arange(1, n_streams + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        keys = splitmix64(seed_key + idx * _GAMMA)
        words = splitmix64(keys[:, None] + streams[None, :] * _GAMMA)
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


class InverseCdfSampler:
    """Inverse-CDF sampling of a pointer's position pdf on the standard grid."""

    def __init__(self, pointer: PointerState, displacements=(0.0,)):
        self.grid = position_grid(pointer.width, displacements)
        pdf = np.abs(position_wavefunction(pointer, self.grid)) ** 2
        self.cdf = grid_cdf(self.grid, pdf)

    def __call__(self, u) -> np.ndarray:
        return np.interp(u, self.cdf, self.grid)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    detected: bool
    is_background: bool  # bookkeeping only; estimators never read it
    homodyne_sample: float | None


class TrialBatch(Sequence):
    """Column store for a run of trials; indexes as :class:`TrialRecord`."""

    def __init__(self, trial_index, detected, is_background, samples, params=None, master_seed=None, p_true=None):
        self.trial_index = np.asarray(trial_index, dtype=np.int64)
        self.detected = np.asarray(detected, dtype=bool)
        self.is_background = np.asarray(is_background, dtype=bool)
        self.samples = np.where(self.detected, np.asarray(samples, dtype=float), np.nan)
        self.params = params
        self.master_seed = master_seed
        self.p_true = p_true

    def __len__(self):
        return self.trial_index.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        detected = bool(self.detected[i])
        return TrialRecord(
            int(self.trial_index[i]),
            detected,
            bool(self.is_background[i]),
            float(self.samples[i]) if detected else None,
        )

    def __iter__(self) -> Iterator[TrialRecord]:
        return (self[i] for i in range(len(self)))

    @property
    def n_detections(self) -> int:
        return int(self.detected.sum())

    @property
    def detection_fraction(self) -> float:
        return self.n_detections / len(self)

    def detected_samples(self) -> np.ndarray:
        return self.samples[self.detected]

    def background_samples(self) -> np.ndarray:
        return self.samples[self.detected & self.is_background]

    def identical_to(self, other: "TrialBatch") -> bool:
        return (
            np.array_equal(self.trial_index, other.trial_index)
            and np.array_equal(self.detected, other.detected)
            and np.array_equal(self.is_background, other.is_background)
            and np.array_equal(self.samples, other.samples, equal_nan=True)
        )


def _as_columns(records) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(records, TrialBatch):
        return records.detected, records.samples
    detected = np.array([r.detected for r in records], dtype=bool)
    samples = np.array([r.homodyne_sample if r.detected else np.nan for r in records], dtype=float)
    return detected, samples


def run_trials(
    params: ProtocolParams,
    n_trials: int,
    master_seed: int,
    dim: int = DEFAULT_DIM,
    chunk_size: int | None = None,
) -> TrialBatch:
    """Simulate ``n_trials`` independent post-selected homodyne trials.

    The conditional pointer comes from exact evolution. ``chunk_size``
    only bounds memory; the output does not depend on it.
    """
    if int(n_trials) != n_trials or n_trials < 1:
        raise ValidationError("n_trials must be >= 1", "n_trials")
    try:
        post = post_selected_pointer(params, dim)
        p_true = post.prob
        signal = InverseCdfSampler(post.pointer, (-params.displacement, params.displacement))
    except PostSelectionError:
        p_true, signal = 0.0, None
    background = InverseCdfSampler(ground_state(dim, params.width))
    beta = params.beta
    keep_bg = beta / (p_true + beta) if p_true + beta > 0 else 0.0

    chunk_size = n_trials if chunk_size is None else int(chunk_size)
    parts = []
    for start in range(0, n_trials, chunk_size):
        idx = np.arange(start, min(start + chunk_size, n_trials))
        u = trial_uniforms(master_seed, idx)
        true_hit = u[:, _U_TRUE] < p_true
        bg_hit = u[:, _U_BACKGROUND] < beta
        is_bg = bg_hit & (~true_hit | (u[:, _U_CHOOSE] < keep_bg))
        detected = true_hit | bg_hit
        samples = np.full(idx.size, np.nan)
        samples[is_bg] = background(u[is_bg, _U_SAMPLE])
        sig = detected & ~is_bg
        if sig.any():
            samples[sig] = signal(u[sig, _U_SAMPLE])
        parts.append((idx, detected, is_bg, samples))

    cols = [np.concatenate(c) for c in zip(*parts)]
    return TrialBatch(*cols, params=params, master_seed=master_seed, p_true=p_true)


@dataclass
class SummaryStats:
    strategy: str
    kappa_hat: float
    rmse: float
    stderr: float
    n_detections: int
    n_trials: int
    detection_rate: float
    warnings: tuple = ()
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["warnings"] = list(self.warnings)
        for key, value in out.items():
            if isinstance(value, float) and not math.isfinite(value):
                out[key] = None
        return out


def _bootstrap_errors(replicates: np.ndarray, estimate: float, reference: float | None) -> tuple[float, float]:
    """Return ``(rmse, stderr)`` from bootstrap replicates.

    RMSE is taken about ``reference`` (the true kappa, when the caller knows
    it) and otherwise about the point estimate.
    """
    ref = estimate if reference is None else reference
    rmse = float(np.sqrt(np.mean((replicates - ref) ** 2)))
    return rmse, float(np.std(replicates))


def estimate_weak_value(
    records,
    phi: float,
    width: float = 1.0,
    kappa_true: float | None = None,
    n_boot: int = N_BOOTSTRAP,
    seed: int = 0,
) -> SummaryStats:
    """``kappa_hat = mean(x | detected) * phi / (sqrt(2) w)``.

    Carries a bias of relative order ``(kappa/phi)**2`` from the
    first-order displacement law, and background clicks pull it towards 0.
    """
    if phi <= 0:
        raise ValidationError("weak-value estimator needs phi > 0", "phi")
    detected, samples = _as_columns(records)
    x = samples[detected]
    n_trials = detected.size
    if x.size == 0:
        raise InsufficientDataError("no detections; weak-value estimate undefined")
    scale = phi / (np.sqrt(2.0) * width)
    kappa_hat = float(x.mean() * scale)

    rng = np.random.default_rng(seed)
    reps = np.empty(n_boot)
    batch = max(1, 2_000_000 // x.size)
    for lo in range(0, n_boot, batch):
        hi = min(lo + batch, n_boot)
        idx = rng.integers(0, x.size, size=(hi - lo, x.size))
        reps[lo:hi] = x[idx].mean(axis=1) * scale
    rmse, stderr = _bootstrap_errors(reps, kappa_hat, kappa_true)

    warnings = []
    if x.size < 2:
        warnings.append("single-sample estimate")
    if abs(kappa_hat) < SNR_THRESHOLD * stderr or stderr == 0:
        warnings.append("low SNR: estimate not resolved from zero")
    return SummaryStats(
        "weak_value", kappa_hat, rmse, stderr, int(x.size), n_trials, x.size / n_trials,
        tuple(warnings), {"phi": phi, "width": width},
    )


def estimate_dark_port(
    records_at_phi0,
    n_trials: int | None = None,
    beta_known: float = 0.0,
    kappa_true: float | None = None,
    n_boot: int = N_BOOTSTRAP,
    seed: int = 0,
) -> SummaryStats:
    """Counting estimator at phi = 0: ``sqrt(max(0, rate - beta))``."""
    detected, _ = _as_columns(records_at_phi0)
    n_trials = detected.size if n_trials is None else int(n_trials)
    if n_trials < 1:
        raise ValidationError("n_trials must be >= 1", "n_trials")
    count = int(detected.sum())
    rate = count / n_trials
    kappa_hat = math.sqrt(max(0.0, rate - beta_known))

    # resampling n_trials records with replacement only changes the count
    rng = np.random.default_rng(seed)
    counts = rng.binomial(n_trials, rate, size=n_boot)
    reps = np.sqrt(np.maximum(0.0, counts / n_trials - beta_known))
    rmse, stderr = _bootstrap_errors(reps, kappa_hat, kappa_true)

    warnings = []
    if count == 0:
        warnings.append("insufficient data: no detections")
    elif count < 2:
        warnings.append("single-sample estimate")
    if rate <= beta_known:
        warnings.append("detection rate at or below background; estimate clamped to 0")
    return SummaryStats(
        "dark_port", kappa_hat, rmse, stderr, count, n_trials, rate,
        tuple(warnings), {"phi": 0.0, "beta_known": beta_known},
    )


def sweep_phi(
    kappa: float,
    beta: float,
    phi_grid,
    n_trials: int,
    master_seed: int,
    width: float = 1.0,
    dim: int = DEFAULT_DIM,
    n_boot: int = N_BOOTSTRAP,
) -> list[SummaryStats]:
    """One :class:`SummaryStats` per phi; phi = 0 uses the dark-port estimator.

    Every grid point reuses ``master_seed`` (common random numbers), and
    RMSE is measured against the true ``kappa``.
    """
    results = []
    for phi in phi_grid:
        params = ProtocolParams(kappa, phi, width, beta)
        batch = run_trials(params, n_trials, master_seed, dim)
        echo = {"kappa": kappa, "phi": phi, "beta": beta, "width": width, "n_trials": n_trials,
                "master_seed": master_seed}
        if phi == 0:
            stats = estimate_dark_port(batch, n_trials, beta, kappa_true=kappa, n_boot=n_boot)
        else:
            try:
                stats = estimate_weak_value(batch, phi, width, kappa_true=kappa, n_boot=n_boot)
            except InsufficientDataError as exc:
                stats = SummaryStats("weak_value", math.nan, math.nan, math.nan, 0, n_trials, 0.0,
                                     (f"insufficient data: {exc}",))
        stats.config = {**stats.config, **echo}
        results.append(stats)
    return results
