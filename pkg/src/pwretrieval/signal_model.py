"""Time-limited signals and their Paley-Wiener transforms.

A signal on ``[-T/2, T/2]`` is modelled as a finite Fourier series

    x(t) = sum_j c_j exp(-2j*pi*j*t/T),    j = -J..J,

and vanishes outside the interval. Its transform uses the kernel
``exp(+i t z)``, so that ``xhat(2*pi*j/T) = T * c_j`` and ``xhat`` is an
entire function of exponential type ``T/2``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "TimeLimitedSignal",
    "L1BoundedSignal",
    "cardinal_sine",
    "evaluate_time",
    "fourier_transform",
    "fourier_transform_quadrature",
    "l1_norm",
    "random_signal",
    "with_transform_zeros",
]

_SINC_SERIES_RADIUS = 1e-4


@dataclass(frozen=True, eq=False)
class TimeLimitedSignal:
    """Finite Fourier series supported on ``[-T/2, T/2]``.

    Attributes:
        interval_length (float): support length ``T``.
        coefficients (ndarray): complex ``c_j`` ordered ``j = -J..J``.
    """

    interval_length: float
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        if not self.interval_length > 0:
            raise ValueError("interval_length must be positive")
        if c.size % 2 != 1:
            raise ValueError("need an odd number of coefficients (j = -J..J)")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "interval_length", float(self.interval_length))
        object.__setattr__(self, "coefficients", c)

    @property
    def J(self):
        return (self.coefficients.size - 1) // 2

    @property
    def indices(self):
        return np.arange(-self.J, self.J + 1)

    @property
    def frequencies(self):
        """Centres ``2*pi*j/T`` of the sinc atoms making up the transform."""
        return 2 * np.pi * self.indices / self.interval_length

    def energy(self):
        return self.interval_length * float(np.sum(np.abs(self.coefficients) ** 2))

    def coefficient(self, j):
        if abs(j) > self.J:
            return 0j
        return complex(self.coefficients[j + self.J])

    def scaled(self, factor):
        return TimeLimitedSignal(self.interval_length, factor * self.coefficients)

    def __add__(self, other):
        if not isinstance(other, TimeLimitedSignal):
            return NotImplemented
        if other.interval_length != self.interval_length:
            raise ValueError("signals live on different intervals")
        J = max(self.J, other.J)
        return TimeLimitedSignal(self.interval_length, _pad(self, J) + _pad(other, J))

    def __repr__(self):
        return f"TimeLimitedSignal(T={self.interval_length!r}, J={self.J})"


def _pad(x, J):
    out = np.zeros(2 * J + 1, dtype=complex)
    out[J - x.J : J + x.J + 1] = x.coefficients
    return out


@dataclass(frozen=True, eq=False)
class L1BoundedSignal:
    """A signal together with a certified bound on its L1 norm.

    The bound is checked by quadrature at construction; it is the amplitude
    of the cosine added by the augmented measurement chain.
    """

    signal: TimeLimitedSignal
    l1_bound: float
    nodes: int = 4001

    def __post_init__(self):
        if not self.l1_bound > 0:
            raise ValueError("l1_bound must be positive")
        norm = l1_norm(self.signal, self.nodes)
        if norm > self.l1_bound:
            raise ValueError(f"L1 norm {norm:.6g} exceeds bound {self.l1_bound:.6g}")


def cardinal_sine(z):
    """Unnormalised sinc ``sin(z)/z`` for complex arguments.

    Uses ``1 - z**2/6`` near the origin, where the quotient loses accuracy.
    """
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SINC_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1 - z * z / 6, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def evaluate_time(x, t):
    """Evaluate ``x(t)``; exactly zero outside the support."""
    t = np.asarray(t, dtype=float)
    T = x.interval_length
    phase = np.exp(-2j * np.pi * np.multiply.outer(t, x.indices) / T)
    out = phase @ x.coefficients
    out = np.where(np.abs(t) <= T / 2, out, 0)
    return out[()] if out.ndim == 0 else out


def fourier_transform(x, z):
    """Closed-form ``xhat(z) = sum_j c_j T sinc(T/2 (z - 2 pi j / T))``.

    ``z`` may be a scalar or an array of complex points.
    """
    z = np.asarray(z, dtype=complex)
    T = x.interval_length
    atoms = T * cardinal_sine(T / 2 * np.subtract.outer(z, x.frequencies))
    out = atoms @ x.coefficients
    return out[()] if out.ndim == 0 else out


def _time_nodes(T, nodes):
    if nodes < 2:
        raise ValueError("need at least two quadrature nodes")
    return np.linspace(-T / 2, T / 2, nodes)


def fourier_transform_quadrature(x, z, nodes):
    """Composite-Simpson evaluation of ``int x(t) exp(i t z) dt`` over the support.

    Serves as an independent check of :func:`fourier_transform`.
    """
    t = _time_nodes(x.interval_length, nodes)
    z = np.asarray(z, dtype=complex)
    integrand = evaluate_time(x, t) * np.exp(1j * np.multiply.outer(z, t))
    out = simpson(integrand, x=t, axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def l1_norm(x, nodes):
    t = _time_nodes(x.interval_length, nodes)
    return float(simpson(np.abs(evaluate_time(x, t)), x=t))


def random_signal(J, T, seed):
    """Complex Gaussian coefficients with unit-variance real and imaginary parts."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    rng = np.random.default_rng(seed)
    n = 2 * J + 1
    return TimeLimitedSignal(T, rng.standard_normal(n) + 1j * rng.standard_normal(n))


def with_transform_zeros(x, points):
    """Project ``x`` so that its transform vanishes at the given points.

    The orthogonal projection of the coefficient vector onto the null space
    of the evaluation functionals is used, so the result stays as close to
    ``x`` as possible.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    T = x.interval_length
    A = T * cardinal_sine(T / 2 * np.subtract.outer(points, x.frequencies))
    c = x.coefficients - np.linalg.pinv(A) @ (A @ x.coefficients)
    return TimeLimitedSignal(T, c)
