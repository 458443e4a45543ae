"""Scenario configuration and the synthesize -> measure -> recover roundtrip.

Configs are INI files with the sections ``signal``, ``grid``, ``frame``,
``pipeline``, ``noise``, ``reconstruction`` and ``tolerances``; every key
is optional and falls back to :data:`DEFAULTS`.
"""
import configparser
import copy
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as pio
from .frames import canonical_frame_k2
from .grids import covering_block_range, shannon_grid, shift_imaginary
from .measurement import (
    ModulatorBank,
    add_noise,
    certify_imaginary_shift,
    measure,
    measure_augmented,
)
from .recovery import RecoveryOptions, phase_aligned_error, recover, recover_augmented
from .signal_model import (
    L1BoundedSignal,
    TimeLimitedSignal,
    l1_norm,
    random_signal,
    with_transform_zeros,
)

__all__ = ["DEFAULTS", "SWEEP_PARAMETERS", "Scenario", "load_config", "bundled", "run_roundtrip", "sweep"]

DEFAULTS = {
    "signal": {"kind": "random", "T": 1.0, "J": 8, "seed": 0, "coefficients": None,
               "transform_zeros": None},
    "grid": {"T_prime": 1.0, "K": 2, "a": 1, "n_min": "auto", "n_max": "auto",
             "anchor_shift": 0.0, "eta": None, "imag_shift": None},
    "frame": {"kind": "auto", "path": None},
    "pipeline": {"kind": "plain", "l1_margin": 1.5, "start_block": None, "zero_tol": 1e-8,
                 "fallback_threshold": 1e-9, "quadrature_nodes": 4001},
    "noise": {"sigma": 0.0, "seed": 0},
    "reconstruction": {"backend": "least_squares", "radius": None, "cond_threshold": 1e-10},
    "tolerances": {"error": 1e-8},
}

SWEEP_PARAMETERS = ("noise_sigma", "a", "K", "T_ratio", "J")

_INT_KEYS = {"J", "seed", "K", "a", "start_block", "quadrature_nodes"}
_LIST_KEYS = {"transform_zeros", "eta"}


def bundled(name):
    """Path of a file shipped in the package's ``data`` directory."""
    return resources.files("pwretrieval").joinpath("data", name)


def _coerce(key, raw):
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    if key == "coefficients":
        return [[c.real, c.imag] for c in pio.parse_complex_list(raw)]
    if key in _LIST_KEYS:
        return [float(tok) for tok in raw.replace(",", " ").split()]
    if key in ("n_min", "n_max", "imag_shift") and raw.lower() == "auto":
        return "auto"
    if key in _INT_KEYS or key in ("n_min", "n_max"):
        return int(raw)
    try:
        return float(raw)
    except ValueError:
        return raw


def load_config(path_or_text):
    """Parse an INI config (path or text) into a fully resolved nested dict.

    Raises:
        ValueError: unknown sections/keys or inconsistent settings.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    text = str(path_or_text)
    if "\n" not in text and "[" not in text:
        p = Path(text)
        if not p.exists() and bundled(text).is_file():
            p = bundled(text)
        text = p.read_text()
    cp.read_string(text)
    cfg = copy.deepcopy(DEFAULTS)
    for section in cp.sections():
        if section not in cfg:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in cp[section].items():
            if key not in cfg[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            cfg[section][key] = _coerce(key, raw)
    Scenario(cfg)  # validates
    return cfg


@dataclass
class Scenario:
    """Builds the signal, frame and grid that a resolved config describes."""

    cfg: dict

    def __post_init__(self):
        s, g, p = self.cfg["signal"], self.cfg["grid"], self.cfg["pipeline"]
        if s["kind"] not in ("random", "inline"):
            raise ValueError(f"unknown signal kind {s['kind']!r}")
        if s["kind"] == "inline" and not s["coefficients"]:
            raise ValueError("inline signal needs coefficients")
        if p["kind"] not in ("plain", "augmented"):
            raise ValueError(f"unknown pipeline kind {p['kind']!r}")
        if p["kind"] == "augmented" and not g["T_prime"] > s["T"]:
            raise ValueError("augmented pipeline needs T_prime > T")
        if not 1 <= g["a"] < g["K"]:
            raise ValueError(f"invalid overlap a={g['a']} for K={g['K']}")

    @property
    def T(self):
        return float(self.cfg["signal"]["T"])

    @property
    def J(self):
        return int(self.cfg["signal"]["J"])

    @property
    def augmented(self):
        return self.cfg["pipeline"]["kind"] == "augmented"

    def signal(self):
        s = self.cfg["signal"]
        if s["kind"] == "inline":
            x = TimeLimitedSignal(self.T, pio._complex(s["coefficients"]))
        else:
            x = random_signal(self.J, self.T, s["seed"])
        if s["transform_zeros"]:
            x = with_transform_zeros(x, s["transform_zeros"])
        return x

    def frame(self):
        f, K = self.cfg["frame"], self.cfg["grid"]["K"]
        kind = f["kind"]
        if kind == "auto":
            kind = {2: "canonical_k2", 3: "hesse_k3"}.get(K)
            if kind is None:
                raise ValueError(f"no bundled frame for K={K}; give [frame] kind = file")
        if kind == "canonical_k2":
            frame = canonical_frame_k2()
        elif kind == "hesse_k3":
            frame = pio.frame_from_text(bundled("hesse_k3.frame").read_text())
        elif kind == "file":
            frame = pio.frame_from_text(Path(f["path"]).read_text())
        else:
            raise ValueError(f"unknown frame kind {kind!r}")
        if frame.dim != K:
            raise ValueError(f"frame dimension {frame.dim} != K={K}")
        return frame

    def base_grid(self):
        g = self.cfg["grid"]
        T_prime, K, a = float(g["T_prime"]), int(g["K"]), int(g["a"])
        n_min, n_max = g["n_min"], g["n_max"]
        if "auto" in (n_min, n_max):
            delta = 2 * np.pi / T_prime
            offsets = delta * np.arange(1, K + 1) + g["anchor_shift"]
            reach = self.J + (2 if self.augmented else 0)
            lo, hi = covering_block_range(offsets, (K - a) * delta,
                                          -2 * np.pi * reach / self.T, 2 * np.pi * reach / self.T)
            n_min = lo if n_min == "auto" else n_min
            n_max = hi if n_max == "auto" else n_max
        grid = shannon_grid(T_prime, K, a, n_min, n_max, g["anchor_shift"])
        if g["eta"] is not None:
            grid = shift_imaginary(grid, g["eta"])
        return grid

    def bounded_signal(self, x):
        nodes = self.cfg["pipeline"]["quadrature_nodes"]
        bound = self.cfg["pipeline"]["l1_margin"] * l1_norm(x, nodes)
        return L1BoundedSignal(x, bound if bound > 0 else 1.0, nodes)

    def grid_for(self, x):
        grid = self.base_grid()
        h = self.cfg["grid"]["imag_shift"]
        if not self.augmented or h is None:
            return grid
        if h == "auto":
            grid, _ = certify_imaginary_shift(self.bounded_signal(x), grid, self.cfg["grid"]["T_prime"])
            return grid
        return shift_imaginary(grid, np.full(grid.K, float(h)))

    def measurements(self, x, grid=None):
        grid = grid or self.grid_for(x)
        bank = ModulatorBank(self.frame(), grid)
        if self.augmented:
            ms = measure_augmented(self.bounded_signal(x), bank, self.cfg["grid"]["T_prime"])
        else:
            ms = measure(x, bank)
        noise = self.cfg["noise"]
        if noise["sigma"]:
            ms = add_noise(ms, noise["sigma"], noise["seed"])
        return ms

    def options(self):
        p, r = self.cfg["pipeline"], self.cfg["reconstruction"]
        return RecoveryOptions(backend=r["backend"], zero_tol=p["zero_tol"],
                               start_block=p["start_block"], radius=r["radius"],
                               cond_threshold=r["cond_threshold"],
                               fallback_threshold=p["fallback_threshold"])


def run_roundtrip(cfg):
    """Run one scenario; returns ``(result, error, truth, measurements)``.

    ``error`` is the phase-aligned relative error, or ``None`` if recovery
    did not produce a signal.
    """
    sc = Scenario(cfg)
    x = sc.signal()
    ms = sc.measurements(x)
    rec = recover_augmented if sc.augmented else recover
    result = rec(ms, sc.T, sc.J, sc.options())
    error = phase_aligned_error(result.signal, x) if result.signal is not None else None
    return result, error, x, ms


def _with_value(cfg, parameter, value):
    cfg = copy.deepcopy(cfg)
    if parameter == "noise_sigma":
        cfg["noise"]["sigma"] = float(value)
    elif parameter in ("a", "K"):
        cfg["grid"][parameter] = int(value)
    elif parameter == "T_ratio":
        cfg["grid"]["T_prime"] = float(value) * cfg["signal"]["T"]
    elif parameter == "J":
        cfg["signal"]["J"] = int(value)
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
    return cfg


def sweep(cfg, parameter, values, seeds=(None,)):
    """Repeat the roundtrip for each value (and seed); rows ordered by input.

    For a ``J`` sweep the block window of the base config is held fixed so
    that models larger than the grid show up as ``insufficient_points``.
    Each seed replaces both the signal seed and the noise seed.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
    base = copy.deepcopy(cfg)
    if parameter == "J":
        grid = Scenario(base).base_grid()
        base["grid"]["n_min"], base["grid"]["n_max"] = grid.n_min, grid.n_max
    rows = []
    for value in values:
        for seed in seeds:
            run_cfg = _with_value(base, parameter, value)
            if seed is not None:
                run_cfg["signal"]["seed"] = int(seed)
                run_cfg["noise"]["seed"] = int(seed)
            start = time.perf_counter()
            result, error, _, _ = run_roundtrip(run_cfg)
            elapsed = (time.perf_counter() - start) * 1e3
            rows.append({"value": value, "seed": run_cfg["signal"]["seed"],
                         "status": result.status, "phase_aligned_error": error,
                         "runtime_ms": elapsed})
    return rows
