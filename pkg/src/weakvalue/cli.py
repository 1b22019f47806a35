"""Command-line front end.

    weakvalue --command pointer --kappa 0.01 --phi 0.1 --out pointer.csv
    weakvalue --config run.json --phi 0.05

A config file is a flat JSON object whose keys are the flag names without
the leading dashes (``n-atoms`` and ``n_atoms`` are both accepted). Flags
override file values.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import ensemble, estimation, weak_protocol
from .errors import ConfigParseError, ValidationError, WeakValueError
from .pointer_fock import mean_position
from .weak_protocol import ProtocolParams

COMMANDS = ("pointer", "ensemble", "sweep", "estimate")
MAX_SEED = 2**64 - 1

# flag name -> config field
FLAG_FIELDS = {
    "command": "command",
    "kappa": "kappa",
    "phi": "phi",
    "width": "width",
    "beta": "beta",
    "n-atoms": "n_atoms",
    "n-photons": "n_photons",
    "n-trials": "n_trials",
    "fock-dim": "fock_dim",
    "phi-grid": "phi_grid",
    "seed": "master_seed",
    "out": "output_path",
}
FIELD_FLAGS = {v: k for k, v in FLAG_FIELDS.items()}

REQUIRED = {
    "pointer": ("kappa", "phi"),
    "ensemble": ("kappa", "phi", "n_atoms"),
    "sweep": ("kappa", "phi_grid", "n_trials"),
    "estimate": ("kappa", "phi", "n_trials"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    kappa: float | None = None
    phi: float | None = None
    width: float = 1.0
    beta: float = 0.0
    n_atoms: int | None = None
    n_photons: int = 1
    n_trials: int | None = None
    fock_dim: int = 32
    phi_grid: tuple | None = None
    master_seed: int = 42
    output_path: str | None = None

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        """Flag-keyed mapping; ``parse_config`` reads it back unchanged."""
        out = {}
        for key, value in asdict(self).items():
            if value is None:
                continue
            out[FIELD_FLAGS[key]] = list(value) if key == "phi_grid" else value
        return out

    @property
    def default_output(self) -> str:
        return f"weakvalue_{self.command}.{'json' if self.command == 'estimate' else 'csv'}"


def _bound(cond, field, message):
    if not cond:
        raise ValidationError(f"{field} {message}", field)


def validate(cfg: ExperimentConfig):
    _bound(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    for name in ("kappa", "phi"):
        value = getattr(cfg, name)
        if value is not None:
            _bound(value >= 0, name, "must be >= 0")
            _bound(value < 1, name, "must be < 1")
    _bound(cfg.width > 0, "width", "must be > 0")
    _bound(0 <= cfg.beta < 1, "beta", "must be in [0, 1)")
    if cfg.n_atoms is not None:
        _bound(1 <= cfg.n_atoms <= ensemble.MAX_ATOMS, "n_atoms", f"must be in 1..{ensemble.MAX_ATOMS}")
    _bound(cfg.n_photons >= 1, "n_photons", "must be >= 1")
    if cfg.n_trials is not None:
        _bound(cfg.n_trials >= 1, "n_trials", "must be >= 1")
    _bound(cfg.fock_dim >= 2, "fock_dim", "must be >= 2")
    if cfg.phi_grid is not None:
        _bound(len(cfg.phi_grid) > 0, "phi_grid", "must not be empty")
        for v in cfg.phi_grid:
            _bound(0 <= v < 1, "phi_grid", "values must be in [0, 1)")
    _bound(0 <= cfg.master_seed <= MAX_SEED, "master_seed", "must be a 64-bit unsigned integer")
    for name in REQUIRED[cfg.command]:
        _bound(getattr(cfg, name) is not None, name, f"is required for command '{cfg.command}'")


def _coerce(field: str, value, source: str):
    """Convert a raw file/flag value to the field's type."""
    where = f"{source}: field '{FIELD_FLAGS.get(field, field)}'"
    if field in ("command", "output_path"):
        if not isinstance(value, str):
            raise ConfigParseError(f"{where} must be a string", field)
        return value
    if field == "phi_grid":
        if isinstance(value, str):
            try:
                return tuple(float(v) for v in value.split(",") if v.strip())
            except ValueError:
                raise ConfigParseError(f"{where} must be a comma-separated list of numbers", field) from None
        if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return tuple(float(v) for v in value)
        raise ConfigParseError(f"{where} must be a list of numbers", field)
    if field in ("n_atoms", "n_photons", "n_trials", "fock_dim", "master_seed"):
        if isinstance(value, str):
            try:
                value = int(value)
            except ValueError:
                raise ConfigParseError(f"{where} must be an integer", field) from None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigParseError(f"{where} must be an integer", field)
        return value
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigParseError(f"{where} must be a number", field) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigParseError(f"{where} must be a finite number", field)
    return float(value)


def config_from_mapping(raw: dict, source: str = "config") -> dict:
    values = {}
    for key, value in raw.items():
        name = FLAG_FIELDS.get(key) or FLAG_FIELDS.get(key.replace("_", "-"))
        if name is None and key in FIELD_FLAGS:
            name = key
        if name is None:
            raise ConfigParseError(f"{source}: unknown field '{key}'", key)
        values[name] = _coerce(name, value, source)
    return values


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read config file ({exc.strerror})", "config") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", "config") from None
    if not isinstance(raw, dict):
        raise ConfigParseError(f"{path}: top level must be a JSON object", "config")
    return config_from_mapping(raw, path)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weakvalue", description="Weak-value measurement simulator.",
                argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="flat JSON config file; flags override its values")
    p.add_argument("--command", choices=COMMANDS)
    for flag in ("kappa", "phi", "width", "beta"):
        p.add_argument(f"--{flag}", type=str)
    for flag in ("n-atoms", "n-photons", "n-trials", "fock-dim", "seed"):
        p.add_argument(f"--{flag}", type=str)
    p.add_argument("--phi-grid", type=str, help="comma-separated list")
    p.add_argument("--out", type=str)
    return p


def parse_config(argv=None) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    path = args.pop("config", None)
    if path is not None:
        values.update(load_config_file(path))
    values.update(config_from_mapping(args, "flags"))
    if "command" not in values:
        raise ValidationError("command is required", "command")
    return ExperimentConfig(**values)


# --- output ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % value


def write_csv(path, header, rows, cfg: ExperimentConfig):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# config: " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _summary_path(path: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + "_summary" + (p.suffix or ".csv")))


def run_pointer(cfg: ExperimentConfig, out: str):
    params = ProtocolParams(cfg.kappa, cfg.phi, cfg.width, cfg.beta)
    post = weak_protocol.post_selected_pointer(params, cfg.fock_dim)
    first = weak_protocol.post_selected_pointer(params, cfg.fock_dim, model="first_order")
    grid, pdf = weak_protocol.conditional_grid(post.pointer, (-params.displacement, params.displacement))
    write_csv(out, ["x", "pdf"], zip(grid, pdf), cfg)
    wv = weak_protocol.weak_value(cfg.phi) if cfg.phi > 0 else None
    header = ["kappa", "phi", "width", "mean_x", "mean_x_first_order", "weak_value",
              "prob", "prob_leading", "prob_first_order", "regime"]
    row = [cfg.kappa, cfg.phi, cfg.width, mean_position(post.pointer), mean_position(first.pointer), wv,
           post.prob, post.prob_leading, first.prob_leading, weak_protocol.classify_regime(params).value]
    write_csv(_summary_path(out), header, [row], cfg)


def run_ensemble(cfg: ExperimentConfig, out: str):
    state = ensemble.raman_scatter_first_order(cfg.n_photons, cfg.n_atoms, cfg.kappa)
    atomic, weight = ensemble.detect_photon(state, cfg.phi)
    dist = ensemble.atomic_homodyne_distribution(atomic)
    continuum = ensemble.continuum_pointer(atomic)
    q = ensemble.binned_continuum(dist, continuum)
    write_csv(out, ["x", "probability", "continuum_probability"], zip(dist.x, dist.prob, q), cfg)
    header = ["n_atoms", "n_photons", "kappa", "phi", "mean_x", "mean_x_continuum", "tv_distance", "prob_weight"]
    row = [cfg.n_atoms, cfg.n_photons, cfg.kappa, cfg.phi, dist.mean, mean_position(continuum),
           ensemble.tv_distance_to_continuum(dist, continuum), weight]
    write_csv(_summary_path(out), header, [row], cfg)


def run_sweep(cfg: ExperimentConfig, out: str):
    stats = estimation.sweep_phi(cfg.kappa, cfg.beta, cfg.phi_grid, cfg.n_trials, cfg.master_seed,
                                 cfg.width, cfg.fock_dim)
    header = ["phi", "strategy", "kappa_hat", "rmse", "stderr", "detection_rate", "n_detections", "warnings"]
    rows = [[s.config["phi"], s.strategy, s.kappa_hat, s.rmse, s.stderr, s.detection_rate, s.n_detections,
             ";".join(s.warnings)] for s in stats]
    write_csv(out, header, rows, cfg)


def run_estimate(cfg: ExperimentConfig, out: str):
    params = ProtocolParams(cfg.kappa, cfg.phi, cfg.width, cfg.beta)
    batch = estimation.run_trials(params, cfg.n_trials, cfg.master_seed, cfg.fock_dim)
    if cfg.phi == 0:
        stats = estimation.estimate_dark_port(batch, cfg.n_trials, cfg.beta, kappa_true=cfg.kappa)
    else:
        stats = estimation.estimate_weak_value(batch, cfg.phi, cfg.width, kappa_true=cfg.kappa)
    stats.config = {**stats.config, **cfg.to_dict()}
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


RUNNERS = {"pointer": run_pointer, "ensemble": run_ensemble, "sweep": run_sweep, "estimate": run_estimate}


def run(cfg: ExperimentConfig) -> int:
    out = cfg.output_path or cfg.default_output
    RUNNERS[cfg.command](cfg, out)
    return 0


def _report(exc: WeakValueError) -> int:
    payload = {"error": {"code": exc.code, "message": str(exc), "field": getattr(exc, "field", None)}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return exc.exit_status


def main(argv=None) -> int:
    try:
        return run(parse_config(argv))
    except WeakValueError as exc:
        return _report(exc)


if __name__ == "__main__":
    sys.exit(main())
