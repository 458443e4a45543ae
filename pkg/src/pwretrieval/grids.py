"""Block-structured interpolation grids, generating functions and sampling rates.

Block ``n`` of a grid holds the ``K`` points ``n*beta + lambda_k``.  When the
offsets satisfy ``lambda_{K-a+i} = lambda_i + beta`` (``i = 1..a``) the last
``a`` points of block ``n`` coincide with the first ``a`` points of block
``n+1``, so every block after the first contributes ``K - a`` new points.
"""
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "InterpolationGrid",
    "OverlapReport",
    "RateFigure",
    "shannon_grid",
    "shift_imaginary",
    "block_points",
    "overlap_points",
    "validate_overlap_condition",
    "generating_function",
    "generating_function_derivative",
    "dual_basis_ft",
    "sampling_rate",
    "covering_block_range",
]

OVERLAP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InterpolationGrid:
    """Offsets ``lambda_1..lambda_K``, spacing ``beta``, overlap ``a`` and a block window.

    The overlap condition is not enforced here; use
    :func:`validate_overlap_condition` to check a hand-built grid.
    """

    offsets: np.ndarray
    block_spacing: float
    overlap: int
    n_min: int
    n_max: int

    def __post_init__(self):
        lam = np.array(self.offsets, dtype=complex).reshape(-1)
        K = lam.size
        if K < 2:
            raise ValueError("need at least two offsets")
        if not 1 <= self.overlap < K:
            raise ValueError(f"overlap must satisfy 1 <= a < K={K}, got {self.overlap}")
        if not self.block_spacing > 0:
            raise ValueError("block spacing must be positive")
        if np.any(np.diff(lam.real) <= 0):
            raise ValueError("offsets must be strictly increasing in real part")
        if self.n_max < self.n_min:
            raise ValueError("empty block range")
        lam.setflags(write=False)
        object.__setattr__(self, "offsets", lam)
        object.__setattr__(self, "block_spacing", float(self.block_spacing))
        object.__setattr__(self, "n_min", int(self.n_min))
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def K(self):
        return self.offsets.size

    @property
    def blocks(self):
        return range(self.n_min, self.n_max + 1)

    @property
    def new_per_block(self):
        return self.K - self.overlap

    @property
    def num_points(self):
        return (self.n_max - self.n_min) * self.new_per_block + self.K

    def point_index(self, n, k):
        """Position of block ``n``, entry ``k`` (0-based) in :meth:`points`."""
        return (n - self.n_min) * self.new_per_block + k

    def block_indices(self, n):
        return self.point_index(n, 0) + np.arange(self.K)

    def points(self):
        """The union of all blocks in the window, ordered by block then entry."""
        out = np.empty(self.num_points, dtype=complex)
        for n in self.blocks:
            out[self.block_indices(n)] = n * self.block_spacing + self.offsets
        return out

    def __repr__(self):
        return (
            f"InterpolationGrid(K={self.K}, a={self.overlap}, beta={self.block_spacing!r}, "
            f"blocks=[{self.n_min}, {self.n_max}])"
        )


@dataclass(frozen=True)
class OverlapReport:
    ok: bool
    worst_violation: float


@dataclass(frozen=True)
class RateFigure:
    K: int
    a: int
    T_prime: float
    T: float
    rate: float
    nyquist_multiple: float


def shannon_grid(T_prime, K, a, n_min, n_max, anchor_shift=0.0):
    """Grid on the zeros of ``sin(T' z / 2)``: ``lambda_k = k*delta + shift``, ``beta = (K-a)*delta``."""
    if not T_prime > 0:
        raise ValueError("T_prime must be positive")
    if K < 2 or not 1 <= a < K:
        raise ValueError(f"invalid (K, a) = ({K}, {a})")
    delta = 2 * np.pi / T_prime
    offsets = delta * np.arange(1, K + 1) + anchor_shift
    return InterpolationGrid(offsets, (K - a) * delta, a, n_min, n_max)


def _eta_consistent(eta, K, a):
    return np.allclose(eta[K - a :], eta[:a], rtol=0, atol=OVERLAP_TOL)


def shift_imaginary(grid, eta):
    """Add ``1j*eta_k`` to each offset; ``eta`` must repeat on the overlap positions."""
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (grid.K,))
    if not _eta_consistent(eta, grid.K, grid.overlap):
        raise ValueError("imaginary shifts must satisfy eta[K-a+i] == eta[i] for i < a")
    return replace(grid, offsets=grid.offsets + 1j * eta)


def _check_block(grid, n):
    if not grid.n_min <= n <= grid.n_max:
        raise IndexError(f"block {n} outside window [{grid.n_min}, {grid.n_max}]")


def block_points(grid, n):
    _check_block(grid, n)
    return n * grid.block_spacing + grid.offsets


def overlap_points(grid, n):
    """Points shared by blocks ``n`` and ``n+1``.

    Returns ``(points, positions_in_n, positions_in_next)`` with 0-based
    positions ``K-a..K-1`` and ``0..a-1``.
    """
    _check_block(grid, n)
    _check_block(grid, n + 1)
    K, a = grid.K, grid.overlap
    pos_n = np.arange(K - a, K)
    pos_next = np.arange(a)
    return block_points(grid, n + 1)[pos_next], pos_n, pos_next


def validate_overlap_condition(grid, tol=OVERLAP_TOL):
    K, a = grid.K, grid.overlap
    lam = grid.offsets
    viol = np.abs(lam[K - a :] - lam[:a] - grid.block_spacing)
    worst = float(viol.max())
    return OverlapReport(worst <= tol, worst)


def _inside(points, radius):
    if not radius > 0:
        raise ValueError("radius must be positive")
    points = np.asarray(points, dtype=complex).reshape(-1)
    return points[np.abs(points) < radius]


def generating_function(points, z, radius):
    """Truncated ``S(z) = z**delta * prod_{0 < |lambda| < R} (1 - z/lambda)``.

    Factors are multiplied in ascending order of ``(|lambda|, Re, Im)`` so the
    result does not depend on how ``points`` is ordered.
    """
    lam = _inside(points, radius)
    if lam.size == 0:
        raise ValueError("no grid points inside the truncation radius")
    lam = _canonical_order(lam)
    z = np.asarray(z, dtype=complex)
    has_zero = np.any(lam == 0)
    nz = lam[lam != 0]
    out = _factor_product(z, nz)
    if has_zero:
        out = z * out
    return out[()] if np.ndim(out) == 0 else out


def _canonical_order(lam):
    return lam[np.lexsort((lam.imag, lam.real, np.abs(lam)))]


def _factor_product(z, nz):
    """``prod (1 - z/lambda)`` written as ``(lambda - z)/lambda`` so grid points give exact zeros."""
    return np.prod(np.subtract.outer(-z, -nz) / nz, axis=-1)


def _remaining_factors(points, n, radius):
    """``lambda_n`` and the other in-radius points, split into zero / nonzero."""
    lam = np.asarray(points, dtype=complex).reshape(-1)
    lam_n = lam[n]
    if not abs(lam_n) < radius:
        raise ValueError("lambda_n lies outside the truncation radius")
    rest = _inside(np.delete(lam, n), radius)
    if np.any(rest == lam_n):
        raise ValueError("repeated grid point")
    rest = _canonical_order(rest)
    return lam_n, bool(np.any(rest == 0)), rest[rest != 0]


def generating_function_derivative(points, n, radius):
    """``S'(lambda_n)`` from the product over the remaining factors."""
    lam_n, has_zero, nz = _remaining_factors(points, n, radius)
    if lam_n == 0:
        return 1 + 0j
    rest = _factor_product(lam_n, nz) * (lam_n if has_zero else 1)
    # the factor (1 - z/lambda_n) has derivative -1/lambda_n
    return complex(-rest / lam_n)


def dual_basis_ft(points, n, z, radius):
    """``psi_n(z) = S(z) / (S'(lambda_n) (z - lambda_n))`` for the truncated product.

    ``S(z)/(z - lambda_n)`` is formed without the vanishing factor, so the
    value at ``z = lambda_n`` is exact.
    """
    lam_n, has_zero, nz = _remaining_factors(points, n, radius)
    z = np.asarray(z, dtype=complex)
    quotient = _factor_product(z, nz)
    if has_zero:
        quotient = z * quotient
    if lam_n != 0:
        quotient = -quotient / lam_n
    out = quotient / generating_function_derivative(points, n, radius)
    return out[()] if np.ndim(out) == 0 else out


def sampling_rate(K, a, T_prime, T):
    """Average sampling rate ``K**2 / (K - a) * T' / (2 pi)`` and its Nyquist multiple."""
    if K < 2 or not 1 <= a < K:
        raise ValueError(f"invalid (K, a) = ({K}, {a})")
    if not (T > 0 and T_prime >= T):
        raise ValueError("need T_prime >= T > 0")
    factor = K * K / (K - a)
    return RateFigure(K, a, T_prime, T, factor * T_prime / (2 * np.pi), factor * T_prime / T)


def covering_block_range(offsets, beta, lo, hi):
    """Smallest block window whose points' real parts cover ``[lo, hi]``."""
    re = np.asarray(offsets, dtype=complex).real
    n_min = int(np.floor((lo - re[0]) / beta + 1e-9))
    n_max = int(np.ceil((hi - re[-1]) / beta - 1e-9))
    return n_min, max(n_min, n_max)
