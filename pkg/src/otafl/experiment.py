"""Seeded batch experiments and metrics files.

Configuration is layered: a named preset supplies defaults, an optional
YAML/JSON file overrides them, and explicit command-line flags override
both.  Every number in the emitted metrics is a pure function of the
resolved configuration.
"""

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from dataclasses import dataclass, fields

import numpy as np
import yaml

from . import seeding
from .aggregation import SCHEMES, LinkConfig
from .fl import Mlp, RoundMetrics, init_state, load_dataset, make_blobs, run_round

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PRESETS",
    "COLUMNS",
    "dbm_to_mw",
    "mw_to_dbm",
    "resolve_config",
    "run_experiment",
    "emit_metrics",
    "read_metrics",
    "main",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "desk"
    num_devices: int = 8
    radius_m: float = 100.0
    p_avg_dbm: float = 23.0
    p_inst_dbm: float = 26.0
    noise_psd_dbm_hz: float = -100.0
    bandwidth_hz: float = 60e3
    num_subcarriers: int = 32
    l_os: int = 4
    oob_threshold_dbm: float = -10.0
    icf_max_iters: int = 16
    num_taps: int = 4
    tap_decay: float = 1.0
    carrier_hz: float = 2.6e9
    rounds: int = 100
    scheme: str = "ofdm"
    clip: bool = True
    lr: float = 0.1
    batch_size: int = 32
    hidden: int = 100
    dataset: str = "synthetic"
    num_features: int = 16
    samples_per_device: int = 256
    test_samples: int = 2000
    separation: float = 2.0
    label_skew: bool = False
    seed: int = 0

    def validate(self):
        for name in ("num_devices", "num_subcarriers", "l_os", "icf_max_iters", "num_taps",
                     "batch_size", "hidden", "num_features", "samples_per_device", "test_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("rounds", "seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("radius_m", "bandwidth_hz", "carrier_hz", "lr", "tap_decay"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("p_avg_dbm", "p_inst_dbm", "noise_psd_dbm_hz", "oob_threshold_dbm", "separation"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite, got {getattr(self, name)}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.num_taps > self.num_subcarriers:
            raise ConfigError(f"num_taps ({self.num_taps}) must not exceed num_subcarriers ({self.num_subcarriers})")
        if self.batch_size > self.samples_per_device and self.dataset == "synthetic":
            raise ConfigError(f"batch_size ({self.batch_size}) exceeds samples_per_device ({self.samples_per_device})")
        if self.p_inst_dbm < self.p_avg_dbm:
            warnings.warn(f"p_inst_dbm ({self.p_inst_dbm}) is below p_avg_dbm ({self.p_avg_dbm}): negative headroom",
                          stacklevel=2)
        return self

    def link(self):
        psd = float(dbm_to_mw(self.noise_psd_dbm_hz))
        return LinkConfig(
            p_avg_mw=float(dbm_to_mw(self.p_avg_dbm)),
            p_inst_mw=float(dbm_to_mw(self.p_inst_dbm)),
            noise_var_sc=psd * self.bandwidth_hz,
            noise_var_ofdm=psd * self.bandwidth_hz,
            num_subcarriers=self.num_subcarriers,
            l_os=self.l_os,
            oob_threshold_dbm=self.oob_threshold_dbm,
            icf_max_iters=self.icf_max_iters,
            num_taps=self.num_taps,
            tap_decay=self.tap_decay,
            carrier_hz=self.carrier_hz,
        )


PRESETS = {
    "desk": {},
    "paper-iv": dict(
        scenario="paper-iv",
        num_devices=40,
        radius_m=100.0,
        p_avg_dbm=23.0,
        p_inst_dbm=26.0,
        noise_psd_dbm_hz=-110.0,
        bandwidth_hz=60e3,
        num_subcarriers=32,
        l_os=4,
        oob_threshold_dbm=-10.0,
        rounds=500,
        lr=1.0,
        batch_size=256,
        samples_per_device=512,
    ),
}

_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _coerce(name, value):
    kind = _FIELDS[name].type
    try:
        if kind == "bool" or kind is bool:
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered in ("on", "true", "yes", "1"):
                    return True
                if lowered in ("off", "false", "no", "0"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind == "int" or kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "float" or kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {kind}") from None


def _merge(base, overrides, source):
    out = dict(base)
    for key, value in overrides.items():
        if key not in _FIELDS:
            raise ConfigError(f"{key}: unknown configuration field (from {source})")
        out[key] = _coerce(key, value)
    return out


def resolve_config(preset="desk", file_values=None, overrides=None):
    """Layer preset < file < explicit overrides and validate the result."""
    if preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    values = _merge(dataclasses.asdict(ExperimentConfig()), PRESETS[preset], f"preset {preset}")
    values = _merge(values, file_values or {}, "config file")
    values = _merge(values, {k: v for k, v in (overrides or {}).items() if v is not None}, "command line")
    return ExperimentConfig(**values).validate()


def load_config_file(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: {path} is not valid YAML/JSON: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path} must hold a mapping of field names to values")
    return data


def _dataset(cfg):
    if cfg.dataset == "synthetic":
        n_train = cfg.num_devices * cfg.samples_per_device
        x, y = make_blobs(n_train + cfg.test_samples, cfg.num_features,
                          seeding.stream(cfg.seed, seeding.DATA, 1), separation=cfg.separation)
        return x[:n_train], y[:n_train], x[n_train:], y[n_train:]
    x, y = load_dataset(cfg.dataset)
    idx = seeding.stream(cfg.seed, seeding.DATA, 1).permutation(len(y))
    n_test = min(cfg.test_samples, len(y) // 5) or 1
    test, train = idx[:n_test], idx[n_test:]
    return x[train], y[train], x[test], y[test]


COLUMNS = ["scenario", "seed"] + [f.name for f in fields(RoundMetrics)]


def run_experiment(cfg):
    """Run ``cfg.rounds`` rounds and return one record (dict) per round."""
    cfg.validate()
    if cfg.rounds == 0:
        return []
    x, y, x_test, y_test = _dataset(cfg)
    classes = int(max(y.max(), y_test.max())) + 1
    model = Mlp(x.shape[1], cfg.hidden, max(classes, 2))
    state = init_state(model, x, y, x_test, y_test, cfg.num_devices, cfg.seed, cfg.link(),
                       radius=cfg.radius_m, lr=cfg.lr, batch_size=cfg.batch_size,
                       label_skew=cfg.label_skew)
    records = []
    for _ in range(cfg.rounds):
        m = run_round(state, cfg.scheme, cfg.clip)
        records.append({"scenario": cfg.scenario, "seed": cfg.seed, **dataclasses.asdict(m)})
        log.debug("round %d tse=%.3e acc=%.4f", m.round, m.tse, m.accuracy)
    return records


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "on" if value else "off"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def emit_metrics(records, path, fmt="csv"):
    """Write records as CSV (header + one row each) or JSON lines."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown metrics format {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(COLUMNS)
                for rec in records:
                    writer.writerow([_fmt(rec[c]) for c in COLUMNS])
            else:
                for rec in records:
                    fh.write(json.dumps({c: rec[c] for c in COLUMNS}, default=float) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write metrics to {path}: {exc.strerror}") from None


def read_metrics(path):
    """Parse a CSV written by :func:`emit_metrics` back into typed records."""
    ints = {"seed", "round"}
    text = {"scenario", "scheme"}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for key, value in row.items():
                if key in text:
                    rec[key] = value
                elif key == "clip":
                    rec[key] = value == "on"
                elif key in ints:
                    rec[key] = int(value)
                else:
                    rec[key] = float(value)
            out.append(rec)
    return out


def _parser():
    p = argparse.ArgumentParser(prog="otafl", description="Run a seeded over-the-air FL experiment.")
    p.add_argument("--config", help="YAML or JSON file of configuration fields")
    p.add_argument("--preset", default="desk", help=f"defaults to start from ({', '.join(PRESETS)})")
    p.add_argument("--seed", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--clip", choices=("on", "off"))
    p.add_argument("--noise-psd", type=float, dest="noise_psd_dbm_hz", help="noise PSD in dBm/Hz")
    p.add_argument("--out", required=True, help="metrics output path")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = dict(seed=args.seed, rounds=args.rounds, scheme=args.scheme, clip=args.clip,
                     noise_psd_dbm_hz=args.noise_psd_dbm_hz)
    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.preset, file_values, overrides)
        records = run_experiment(cfg)
        emit_metrics(records, args.out, args.format)
    except (ConfigError, OSError) as exc:
        print(f"otafl: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
