"""Simulated acquisition: modulate, Fourier transform, sample intensities.

Branch ``m`` multiplies the signal by

    p_m(t) = sum_k conj(alpha_mk) exp(i lambda_k t)

and records ``c_nm = |yhat_m(n beta)|**2 = |<xhat_n, alpha_m>|**2`` where
``xhat_n`` collects the transform on block ``n`` of the grid.  Branch numbers
``m`` run from 1 to ``M`` as in the acquisition diagram; the ``samples``
array stores branch ``m`` in column ``m - 1``.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson

from .grids import shift_imaginary
from .signal_model import L1BoundedSignal, evaluate_time, fourier_transform

__all__ = [
    "ModulatorBank",
    "MeasurementSet",
    "modulator_eval",
    "measure",
    "measure_via_modulation_oracle",
    "add_noise",
    "measure_augmented",
    "augmented_transform",
    "certify_imaginary_shift",
]


@dataclass(frozen=True)
class ModulatorBank:
    frame: object
    grid: object

    def __post_init__(self):
        if self.frame.dim != self.grid.K:
            raise ValueError(
                f"frame dimension {self.frame.dim} does not match grid K={self.grid.K}"
            )

    @property
    def M(self):
        return self.frame.count


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Intensity samples ``c_nm`` with the grid and frame that produced them.

    ``samples[n - grid.n_min, m - 1]`` holds ``c_nm``.  ``noise`` is ``None``
    or ``{"sigma": ..., "seed": ...}``; ``augmented`` is ``None`` or
    ``{"l1_bound": ..., "T_prime": ...}``.
    """

    samples: np.ndarray
    grid: object
    frame: object
    noise: dict = None
    augmented: dict = None
    interval_length: float = field(default=None)

    def __post_init__(self):
        c = np.array(self.samples, dtype=float)
        nb = self.grid.n_max - self.grid.n_min + 1
        if c.shape != (nb, self.frame.count):
            raise ValueError(f"samples shape {c.shape} != ({nb}, {self.frame.count})")
        if self.noise is None and np.any(c < 0):
            raise ValueError("noiseless intensities must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "samples", c)

    def block(self, n):
        return self.samples[n - self.grid.n_min]


def modulator_eval(bank, m, t):
    if not 1 <= m <= bank.M:
        raise IndexError(f"branch {m} outside 1..{bank.M}")
    t = np.asarray(t, dtype=float)
    alpha = bank.frame.vectors[m - 1]
    out = np.exp(1j * np.multiply.outer(t, bank.grid.offsets)) @ alpha.conj()
    return out[()] if out.ndim == 0 else out


def _block_values(values, grid):
    return np.stack([values[grid.block_indices(n)] for n in grid.blocks])


def _intensities_from_transform(values, bank):
    blocks = _block_values(values, bank.grid)
    return np.abs(blocks @ bank.frame.vectors.conj().T) ** 2


def measure(x, bank):
    """All ``c_nm`` over the grid window, from the closed-form transform."""
    values = fourier_transform(x, bank.grid.points())
    c = _intensities_from_transform(values, bank)
    return MeasurementSet(c, bank.grid, bank.frame, interval_length=x.interval_length)


def measure_via_modulation_oracle(x, bank, n, m, nodes):
    """One sample computed the long way: modulate in time, then integrate."""
    T = x.interval_length
    t = np.linspace(-T / 2, T / 2, nodes)
    y = modulator_eval(bank, m, t) * evaluate_time(x, t)
    yhat = simpson(y * np.exp(1j * t * n * bank.grid.block_spacing), x=t)
    return float(np.abs(yhat) ** 2)


def add_noise(ms, sigma, seed):
    """Additive Gaussian noise on the intensities, clamped at zero."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return replace(ms, noise={"sigma": 0.0, "seed": int(seed)})
    rng = np.random.default_rng(seed)
    noisy = np.maximum(ms.samples + sigma * rng.standard_normal(ms.samples.shape), 0.0)
    return replace(ms, samples=noisy, noise={"sigma": float(sigma), "seed": int(seed)})


def augmented_transform(xb, T_prime, z):
    """``yhat(z) = l1_bound * cos(T' z / 2) - xhat(z)``."""
    z = np.asarray(z, dtype=complex)
    return xb.l1_bound * np.cos(T_prime * z / 2) - fourier_transform(xb.signal, z)


def measure_augmented(xb, bank, T_prime):
    """Intensities of the cosine-augmented transform on the bank's grid."""
    if not isinstance(xb, L1BoundedSignal):
        raise TypeError("augmented measurement needs an L1BoundedSignal")
    T = xb.signal.interval_length
    if not T_prime > T:
        raise ValueError(f"T_prime={T_prime} must exceed the support length T={T}")
    values = augmented_transform(xb, T_prime, bank.grid.points())
    c = _intensities_from_transform(values, bank)
    return MeasurementSet(
        c,
        bank.grid,
        bank.frame,
        augmented={"l1_bound": float(xb.l1_bound), "T_prime": float(T_prime)},
        interval_length=T,
    )


def certify_imaginary_shift(xb, grid, T_prime, rel_tol=1e-8, h0=1.0, cap=64.0):
    """Lift the grid off the real axis until the augmented transform has no near-zeros.

    Tries ``h = h0, 2*h0, 4*h0, ...`` up to ``cap`` and returns the first
    shifted grid on which every window point satisfies
    ``|yhat| > 10 * rel_tol * max|yhat|``, together with ``h``.

    Raises:
        RuntimeError: no height up to ``cap`` certifies the grid.
    """
    h = h0
    while h <= cap:
        shifted = shift_imaginary(grid, np.full(grid.K, h))
        mag = np.abs(augmented_transform(xb, T_prime, shifted.points()))
        if mag.min() > 10 * rel_tol * mag.max():
            return shifted, h
        h *= 2
    raise RuntimeError(f"no imaginary shift up to {cap} certifies the grid")
