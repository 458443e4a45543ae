"""Inversion of the measurement chain.

Each block's intensities give the Gram matrix ``Q_n = xhat_n xhat_n^*``.  A
Gram matrix fixes its vector only up to a unimodular factor; one entry of
known phase ``phi`` at position ``i`` removes the ambiguity via

    xhat_k = sqrt(Q_kk) * exp(i (phi - arg Q_ik)).

Neighbouring blocks share grid points, so the phase found for block ``n``
fixes block ``n + 1`` as long as some shared value is nonzero.  Walking the
chain in both directions from a start block yields ``xhat`` on the whole
grid times one unknown global phase, and the signal follows by
interpolation.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .frames import GramMatrix, rank_one_recover
from .grids import validate_overlap_condition, dual_basis_ft
from .signal_model import TimeLimitedSignal, cardinal_sine

__all__ = [
    "RecoveryError",
    "AnchorTooSmall",
    "PhaseLinkBreak",
    "ZeroBlock",
    "IllConditioned",
    "InsufficientPoints",
    "BlockEstimate",
    "Propagation",
    "RecoveryOptions",
    "ReconstructionResult",
    "recover_block_gram",
    "anchor_block_vector",
    "propagate_phases",
    "sinc_design_matrix",
    "reconstruct_signal",
    "recover",
    "recover_augmented",
    "phase_aligned_error",
]

log = logging.getLogger(__name__)

BACKENDS = ("shannon_closed_form", "least_squares", "generating_function_series")


class RecoveryError(Exception):
    pass


class AnchorTooSmall(RecoveryError):
    pass


class PhaseLinkBreak(RecoveryError):
    """No usable shared value between ``block`` and its already-resolved neighbour."""

    def __init__(self, block, partial=None):
        super().__init__(f"phase link broken at block {block}")
        self.block = block
        self.partial = partial


class ZeroBlock(RecoveryError):
    def __init__(self, block):
        super().__init__(f"start block {block} is below the zero tolerance")
        self.block = block


class IllConditioned(RecoveryError):
    pass


class InsufficientPoints(RecoveryError):
    pass


@dataclass(frozen=True, eq=False)
class BlockEstimate:
    """Gram matrix of one block and, once anchored, its vector.

    ``anchor`` is ``None`` before anchoring, ``"initial"`` for the start
    block, ``"null"`` for an all-zero block, or ``(position, phase)``.
    """

    block_index: int
    gram: GramMatrix
    rank1_residual: float
    vector: np.ndarray = None
    anchor: object = None
    method: str = None

    def trace(self):
        return float(np.real(np.trace(self.gram.entries)))

    def magnitudes(self):
        return np.sqrt(np.maximum(np.real(np.diag(self.gram.entries)), 0.0))


def recover_block_gram(c_n, frame, block_index=0):
    gram = rank_one_recover(c_n, frame)
    return BlockEstimate(block_index, gram, gram.rank1_residual())


def anchor_block_vector(est, anchor_index, anchor_phase, zero_tol, fallback_threshold=None):
    """Factor the block's Gram matrix with entry ``anchor_index`` at phase ``anchor_phase``.

    The closed-form row read-off is used unless ``fallback_threshold`` is
    given and the block's rank-one residual exceeds it, in which case the
    leading eigenvector is used and rotated onto the anchor phase.
    """
    Q = est.gram.entries
    i = anchor_index
    if np.real(Q[i, i]) <= zero_tol**2:
        raise AnchorTooSmall(
            f"block {est.block_index}: anchor entry {i} has |value|^2 = {np.real(Q[i, i]):.3g}"
        )
    if fallback_threshold is not None and est.rank1_residual > fallback_threshold:
        w, V = np.linalg.eigh(Q)
        v = np.sqrt(max(w[-1], 0.0)) * V[:, -1]
        v = v * np.exp(1j * (anchor_phase - np.angle(v[i])))
        method = "eigenvector"
    else:
        v = est.magnitudes() * np.exp(1j * (anchor_phase - np.angle(Q[i, :])))
        v[i] = np.sqrt(np.real(Q[i, i])) * np.exp(1j * anchor_phase)
        method = "row"
    return replace(est, vector=v, anchor=(int(i), float(anchor_phase)), method=method)


@dataclass(frozen=True, eq=False)
class Propagation:
    """Merged transform values on ``grid.points()`` (times one global phase)."""

    values: np.ndarray
    blocks: dict
    start_block: int
    links: list
    max_overlap_disagreement: float


def _is_null(est, zero_tol):
    return est.magnitudes().max(initial=0.0) <= zero_tol


def _link(est, known, positions, zero_tol, fallback_threshold):
    """Anchor ``est`` on the largest already-known shared value."""
    usable = [
        (abs(val), pos, val)
        for pos, val in zip(positions, known)
        if abs(val) > zero_tol and est.magnitudes()[pos] > zero_tol
    ]
    if not usable:
        return None
    _, pos, val = max(usable, key=lambda u: u[0])
    return anchor_block_vector(est, pos, np.angle(val), zero_tol, fallback_threshold)


def propagate_phases(blocks, grid, zero_tol, start_block=None, fallback_threshold=None, restart=True):
    """Resolve every block's phase from a start block outwards.

    ``blocks`` maps block index to :class:`BlockEstimate` (or is a sequence
    ordered over ``grid.blocks``).  The start block defaults to the one with
    the largest Gram trace; a start block below ``zero_tol`` is replaced by
    that default when ``restart`` is true and raises :class:`ZeroBlock`
    otherwise.

    Raises:
        PhaseLinkBreak: a non-null block has no shared point with a resolved
            neighbour whose value exceeds ``zero_tol``.  The exception's
            ``partial`` attribute holds the blocks resolved so far.
    """
    if not isinstance(blocks, dict):
        blocks = dict(zip(grid.blocks, blocks))
    K, a = grid.K, grid.overlap
    links = []
    by_trace = sorted(grid.blocks, key=lambda n: -blocks[n].trace())

    n0 = by_trace[0] if start_block is None else start_block
    if _is_null(blocks[n0], zero_tol):
        if not restart:
            raise ZeroBlock(n0)
        if start_block is not None:
            links.append({"block": n0, "event": "restart", "to": by_trace[0]})
        n0 = by_trace[0]

    resolved = {}
    if _is_null(blocks[n0], zero_tol):
        # every block is null: the transform vanishes on the whole window
        for n in grid.blocks:
            resolved[n] = replace(blocks[n], vector=np.zeros(K, complex), anchor="null")
    else:
        est = blocks[n0]
        i0 = int(np.argmax(est.magnitudes()))
        first = anchor_block_vector(est, i0, 0.0, zero_tol, fallback_threshold)
        resolved[n0] = replace(first, anchor="initial")
        links.append({"block": n0, "event": "initial", "position": i0})

        tail, head = np.arange(K - a, K), np.arange(a)
        walks = (
            (range(n0 + 1, grid.n_max + 1), -1, tail, head),
            (range(n0 - 1, grid.n_min - 1, -1), +1, head, tail),
        )
        for steps, back, known_pos, own_pos in walks:
            for n in steps:
                est = blocks[n]
                if _is_null(est, zero_tol):
                    resolved[n] = replace(est, vector=np.zeros(K, complex), anchor="null")
                    links.append({"block": n, "event": "null"})
                    continue
                known = resolved[n + back].vector[known_pos]
                linked = _link(est, known, own_pos, zero_tol, fallback_threshold)
                if linked is None:
                    links.append({"block": n, "event": "break"})
                    raise PhaseLinkBreak(n, partial=Propagation(
                        None, resolved, n0, links, float("nan")))
                resolved[n] = linked
                links.append({"block": n, "event": "linked", "position": linked.anchor[0]})

    values, spread = _merge(resolved, grid)
    return Propagation(values, resolved, n0, links, spread)


def _merge(resolved, grid):
    acc = np.zeros(grid.num_points, complex)
    count = np.zeros(grid.num_points)
    first = np.full(grid.num_points, np.nan, complex)
    spread = 0.0
    for n in grid.blocks:
        idx = grid.block_indices(n)
        v = resolved[n].vector
        seen = count[idx] > 0
        if np.any(seen):
            spread = max(spread, float(np.max(np.abs(v[seen] - first[idx][seen]))))
        first[idx[~seen]] = v[~seen]
        acc[idx] += v
        count[idx] += 1
    return acc / count, spread


def sinc_design_matrix(points, T, J):
    """``A[p, j] = T sinc(T/2 (lambda_p - 2 pi j / T))`` for ``j = -J..J``."""
    freqs = 2 * np.pi * np.arange(-J, J + 1) / T
    return T * cardinal_sine(T / 2 * np.subtract.outer(np.asarray(points, complex), freqs))


def _least_squares(A, b, cond_threshold):
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    diag = {"sigma_min": float(s[-1]), "sigma_max": float(s[0]),
            "relative_sigma_min": float(s[-1] / s[0]) if s[0] > 0 else 0.0}
    if diag["relative_sigma_min"] < cond_threshold:
        raise IllConditioned(
            f"relative smallest singular value {diag['relative_sigma_min']:.3g} < {cond_threshold:g}")
    x = Vh.conj().T @ ((U.conj().T @ b) / s)
    diag["residual"] = float(np.linalg.norm(A @ x - b))
    return x, diag


def reconstruct_signal(points, values, T, J, backend="least_squares", radius=None,
                       cond_threshold=1e-10):
    """Coefficients of the ``J``-term model from transform values on ``points``.

    Backends:
        ``shannon_closed_form``: ``c_j = xhat(2 pi j / T) / T``; the points must
            include every ``2 pi j / T``, ``|j| <= J``.
        ``least_squares``: fit the sinc expansion over all points.
        ``generating_function_series``: interpolate ``xhat`` at ``2 pi j / T``
            with the truncated dual-basis functions (needs ``radius``).

    Returns:
        ``(signal, diagnostics)``.
    """
    points = np.asarray(points, complex)
    values = np.asarray(values, complex)
    n_coef = 2 * J + 1
    if points.size < n_coef:
        raise InsufficientPoints(f"{points.size} points for {n_coef} coefficients")
    freqs = 2 * np.pi * np.arange(-J, J + 1) / T
    diag = {"backend": backend}

    if backend == "shannon_closed_form":
        tol = 1e-9 * (1 + np.abs(freqs))
        c = np.empty(n_coef, complex)
        for j, f in enumerate(freqs):
            hit = np.flatnonzero(np.abs(points - f) <= tol[j])
            if hit.size == 0:
                raise InsufficientPoints(f"grid lacks the point 2*pi*{j - J}/T")
            c[j] = values[hit[0]] / T
    elif backend == "least_squares":
        c, lsq = _least_squares(sinc_design_matrix(points, T, J), values, cond_threshold)
        diag.update(lsq)
    elif backend == "generating_function_series":
        if radius is None:
            raise ValueError("generating_function_series needs a truncation radius")
        inside = np.flatnonzero(np.abs(points) < radius)
        xhat = np.zeros(n_coef, complex)
        for p in inside:
            xhat += values[p] * dual_basis_ft(points, p, freqs, radius)
        c = xhat / T
        diag["terms"] = int(inside.size)
    else:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    return TimeLimitedSignal(T, c), diag


@dataclass(frozen=True)
class RecoveryOptions:
    """Tuning knobs for :func:`recover`.

    ``zero_tol`` is relative to the largest recovered block magnitude.
    """

    backend: str = "least_squares"
    zero_tol: float = 1e-8
    start_block: int = None
    radius: float = None
    cond_threshold: float = 1e-10
    fallback_threshold: float = 1e-9


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Outcome of a recovery run.

    ``fourier_values`` are ``xhat`` on ``points`` times an unknown global
    phase, which is never estimated.
    """

    status: str
    points: np.ndarray
    fourier_values: np.ndarray = None
    signal: TimeLimitedSignal = None
    failed_block: int = None
    diagnostics: dict = field(default_factory=dict)
    global_phase_note: bool = True

    @property
    def ok(self):
        return self.status == "success"


def _gram_stage(ms, options):
    if not validate_overlap_condition(ms.grid).ok:
        raise ValueError("grid violates the overlap condition")
    blocks = {n: recover_block_gram(ms.block(n), ms.frame, n) for n in ms.grid.blocks}
    scale = max(est.magnitudes().max() for est in blocks.values())
    zero_tol = options.zero_tol * scale
    diag = {
        "rank1_residuals": {n: est.rank1_residual for n, est in blocks.items()},
        "zero_tol": zero_tol,
    }
    return blocks, zero_tol, diag


def _propagate(ms, blocks, zero_tol, options, diag):
    prop = propagate_phases(blocks, ms.grid, zero_tol, options.start_block,
                            options.fallback_threshold)
    diag.update({
        "start_block": prop.start_block,
        "links": prop.links,
        "max_overlap_disagreement": prop.max_overlap_disagreement,
        "factorization": {n: b.method for n, b in prop.blocks.items()},
    })
    return prop


def recover(ms, T, J, options=None):
    """Recover the signal from ``ms`` up to a global phase.

    Failures of the phase chain or of the interpolation step are reported
    through ``status`` rather than raised; the diagnostics keep whatever was
    computed before the failure.
    """
    options = options or RecoveryOptions()
    points = ms.grid.points()
    blocks, zero_tol, diag = _gram_stage(ms, options)
    if zero_tol == 0:
        return ReconstructionResult("success", points, np.zeros(points.size, complex),
                                    TimeLimitedSignal(T, np.zeros(2 * J + 1)), diagnostics=diag)
    try:
        prop = _propagate(ms, blocks, zero_tol, options, diag)
    except PhaseLinkBreak as err:
        diag["links"] = err.partial.links
        log.info("recovery stopped: %s", err)
        return ReconstructionResult("phase_link_break", points, failed_block=err.block,
                                    diagnostics=diag)
    return _finish(points, prop.values, T, J, options, diag)


def _finish(points, values, T, J, options, diag, fit=None):
    try:
        if fit is None:
            signal, fit_diag = reconstruct_signal(points, values, T, J, options.backend,
                                                  options.radius, options.cond_threshold)
        else:
            signal, fit_diag = fit()
    except IllConditioned as err:
        diag["reconstruction_error"] = str(err)
        return ReconstructionResult("ill_conditioned", points, values, diagnostics=diag)
    except InsufficientPoints as err:
        diag["reconstruction_error"] = str(err)
        return ReconstructionResult("insufficient_points", points, values, diagnostics=diag)
    diag["reconstruction"] = fit_diag
    return ReconstructionResult("success", points, values, signal, diagnostics=diag)


def recover_augmented(ms, T, J, options=None, consistency_tol=1e-6):
    """Recovery for measurements of ``l1_bound*cos(T' z/2) - xhat(z)``.

    The augmented transform is recovered up to a phase ``theta``; then
    ``l1_bound*cos(T' z/2) - yhat(z) e^{i theta}`` equals
    ``xhat(z) e^{i theta} + gamma cos(T' z/2)`` with
    ``gamma = l1_bound (1 - e^{i theta})``, and both the coefficients and
    ``gamma`` are fitted jointly by least squares.
    """
    if not ms.augmented:
        raise ValueError("measurement set is not augmented")
    options = options or RecoveryOptions()
    l1_bound = ms.augmented["l1_bound"]
    T_prime = ms.augmented["T_prime"]
    points = ms.grid.points()
    blocks, zero_tol, diag = _gram_stage(ms, options)

    K, a = ms.grid.K, ms.grid.overlap
    shared = [blocks[n].magnitudes()[:a] for n in ms.grid.blocks if n > ms.grid.n_min]
    shared += [blocks[n].magnitudes()[K - a:] for n in ms.grid.blocks if n < ms.grid.n_max]
    diag["min_overlap_magnitude"] = float(np.min(shared)) if shared else float("nan")
    diag["certified"] = bool(not shared or diag["min_overlap_magnitude"] > 10 * zero_tol)

    try:
        prop = _propagate(ms, blocks, zero_tol, options, diag)
    except PhaseLinkBreak as err:
        diag["links"] = err.partial.links
        return ReconstructionResult("phase_link_break", points, failed_block=err.block,
                                    diagnostics=diag)

    cos_col = np.cos(T_prime * points / 2)
    shifted = l1_bound * cos_col - prop.values

    def fit():
        if points.size < 2 * J + 2:
            raise InsufficientPoints(f"{points.size} points for {2 * J + 2} unknowns")
        A = np.column_stack([sinc_design_matrix(points, T, J), cos_col])
        sol, lsq = _least_squares(A, shifted, options.cond_threshold)
        gamma = complex(sol[-1])
        gap = abs(abs(1 - gamma / l1_bound) - 1)
        lsq.update({"backend": "augmented_least_squares", "gamma_re": gamma.real,
                    "gamma_im": gamma.imag, "gamma_consistency_gap": gap,
                    "gamma_consistent": bool(gap <= consistency_tol)})
        return TimeLimitedSignal(T, sol[:-1]), lsq

    return _finish(points, shifted, T, J, options, diag, fit=fit)


def phase_aligned_error(recovered, truth):
    """Relative L2 error after the best global phase rotation of ``recovered``.

    Falls back to the absolute error when ``truth`` is zero.
    """
    if recovered.interval_length != truth.interval_length:
        raise ValueError("signals live on different intervals")
    J = max(recovered.J, truth.J)
    r = np.zeros(2 * J + 1, complex)
    t = np.zeros(2 * J + 1, complex)
    r[J - recovered.J: J + recovered.J + 1] = recovered.coefficients
    t[J - truth.J: J + truth.J + 1] = truth.coefficients
    inner = np.vdot(r, t)  # sum conj(r) t
    rotation = np.exp(1j * np.angle(inner)) if inner != 0 else 1.0
    err = np.linalg.norm(rotation * r - t)
    norm_t = np.linalg.norm(t)
    return float(err / norm_t) if norm_t > 0 else float(err * np.sqrt(truth.interval_length))
