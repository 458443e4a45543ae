"""Measurement frames and the linear rank-one recovery formula.

For a 2-uniform ``M/K``-tight frame of ``M = K**2`` unit vectors in
``C^K`` the outer product ``v v*`` is a linear function of the intensities
``|<v, alpha_m>|**2``:

    Q = (K+1)/K * sum_m c_m alpha_m alpha_m^*  -  (1/K) * sum_m c_m * I
"""
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameFamily",
    "GramMatrix",
    "TightnessReport",
    "UniformityReport",
    "canonical_frame_k2",
    "verify_tight",
    "verify_two_uniform",
    "rank_one_recover",
    "outer_product",
    "intensities",
]


@dataclass(frozen=True, eq=False)
class FrameFamily:
    """``M`` vectors of ``C^K`` stored row-wise in ``vectors`` (shape ``(M, K)``)."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("frame vectors must form a non-empty (M, K) array")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def count(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f"FrameFamily(dim={self.dim}, count={self.count})"


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray

    @property
    def dim(self):
        return self.entries.shape[0]

    def eigenvalues(self):
        """Ascending real eigenvalues of the Hermitian part."""
        Q = self.entries
        return np.linalg.eigvalsh((Q + Q.conj().T) / 2)

    def rank1_residual(self, eps=1e-300):
        """Second-largest over largest eigenvalue magnitude; 0 for a zero matrix."""
        w = np.abs(self.eigenvalues())
        if w.size < 2 or w[-1] <= eps:
            return 0.0
        w = np.sort(w)
        return float(w[-2] / w[-1])

    def is_hermitian(self, tol=1e-12):
        Q = self.entries
        return bool(np.max(np.abs(Q - Q.conj().T), initial=0.0) <= tol)


@dataclass(frozen=True)
class TightnessReport:
    ok: bool
    max_deviation: float
    bound: float


@dataclass(frozen=True)
class UniformityReport:
    ok: bool
    common_value: float
    max_spread: float


def canonical_frame_k2():
    """The four-vector 2-uniform 2-tight frame of ``C^2``."""
    a = np.sqrt(0.5 * (1 - 1 / np.sqrt(3)))
    b = np.exp(1j * 5 * np.pi / 4) * np.sqrt(0.5 * (1 + 1 / np.sqrt(3)))
    frame = FrameFamily(np.array([[a, b], [b, a], [a, -b], [-b, a]]))
    norms = np.linalg.norm(frame.vectors, axis=1)
    assert np.allclose(norms, 1.0, rtol=0, atol=1e-12)
    return frame


def verify_tight(frame, tol):
    """Check ``sum_m alpha_m alpha_m^* = (M/K) I`` entrywise."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    V = frame.vectors
    S = V.T @ V.conj()
    bound = frame.count / frame.dim
    dev = float(np.max(np.abs(S - bound * np.eye(frame.dim))))
    return TightnessReport(dev <= tol, dev, bound)


def verify_two_uniform(frame, tol):
    """Check that ``|<alpha_m, alpha_m'>|**2`` is the same for every pair ``m != m'``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    V = frame.vectors
    G = np.abs(V.conj() @ V.T) ** 2
    off = G[~np.eye(frame.count, dtype=bool)]
    if off.size == 0:
        return UniformityReport(True, 0.0, 0.0)
    spread = float(off.max() - off.min())
    return UniformityReport(spread <= tol, float(off.mean()), spread)


def intensities(v, frame):
    """``|<v, alpha_m>|**2`` for every frame vector, with ``<x, y> = y^* x``."""
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != frame.dim:
        raise ValueError(f"vector length {v.shape[-1]} != frame dimension {frame.dim}")
    return np.abs(v @ frame.vectors.conj().T) ** 2


def rank_one_recover(c, frame):
    """Gram matrix ``v v^*`` from the ``M`` intensities of ``v`` against ``frame``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (frame.count,):
        raise ValueError(f"expected {frame.count} intensities, got shape {c.shape}")
    if np.any(c < 0):
        raise ValueError("intensities must be nonnegative")
    K = frame.dim
    V = frame.vectors
    Q = (K + 1) / K * np.einsum("m,mi,mj->ij", c, V, V.conj())
    Q -= c.sum() / K * np.eye(K)
    # symmetrise away rounding so downstream consumers see an exact Hermitian matrix
    return GramMatrix((Q + Q.conj().T) / 2)


def outer_product(v):
    v = np.asarray(v, dtype=complex)
    return GramMatrix(np.outer(v, v.conj()))
