import numpy as np
import pytest

from pwretrieval.frames import canonical_frame_k2, intensities, outer_product
from pwretrieval.grids import shannon_grid, shift_imaginary, covering_block_range
from pwretrieval.measurement import (
    ModulatorBank,
    add_noise,
    certify_imaginary_shift,
    measure,
    measure_augmented,
)
from pwretrieval.recovery import (
    AnchorTooSmall,
    PhaseLinkBreak,
    RecoveryOptions,
    ZeroBlock,
    anchor_block_vector,
    phase_aligned_error,
    propagate_phases,
    reconstruct_signal,
    recover,
    recover_augmented,
    recover_block_gram,
)
from pwretrieval.scenario import bundled
from pwretrieval.io import frame_from_text
from pwretrieval.signal_model import (
    L1BoundedSignal,
    TimeLimitedSignal,
    fourier_transform,
    l1_norm,
    random_signal,
    with_transform_zeros,
)

TWO_PI = 2 * np.pi


def hesse_frame():
    return frame_from_text(bundled("hesse_k3.frame").read_text())


def blocks_of(ms):
    return {n: recover_block_gram(ms.block(n), ms.frame, n) for n in ms.grid.blocks}


def aligned_max_dev(values, truth):
    """Max entrywise deviation after the best global phase."""
    rot = np.exp(1j * np.angle(np.vdot(values, truth)))
    return np.max(np.abs(rot * values - truth))


def test_recover_block_gram_examples(frame2):
    v = np.array([1, 1j]) / np.sqrt(2)
    assert recover_block_gram(intensities(v, frame2), frame2).rank1_residual <= 1e-10
    est = recover_block_gram(np.zeros(4), frame2)
    assert est.rank1_residual == 0 and np.all(est.gram.entries == 0)


def test_noisy_gram_residual_scale(frame2):
    v = np.array([0.8, -0.3 + 0.5j])
    rng = np.random.default_rng(0)
    res = [recover_block_gram(np.maximum(intensities(v, frame2) + 1e-3 * rng.standard_normal(4), 0), frame2)
           .rank1_residual for _ in range(50)]
    assert 1e-5 < np.median(res) < 1e-2


def test_anchor_examples():
    est = recover_block_gram(np.zeros(4), canonical_frame_k2())
    est1 = type(est)(0, outer_product([1, 0]), 0.0)
    np.testing.assert_allclose(anchor_block_vector(est1, 0, 0.0, 1e-8).vector, [1, 0], atol=1e-15)

    v = np.array([1, 1]) / np.sqrt(2)
    est2 = type(est)(0, outer_product(v), 0.0)
    got = anchor_block_vector(est2, 0, np.pi / 3, 1e-8).vector
    np.testing.assert_allclose(got, np.exp(1j * np.pi / 3) * v, atol=1e-12)

    est3 = type(est)(0, outer_product([0, 1]), 0.0)
    with pytest.raises(AnchorTooSmall):
        anchor_block_vector(est3, 0, 0.0, 1e-8)


def test_anchor_reproduces_true_block_up_to_phase(frame2, rng):
    for _ in range(200):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        est = recover_block_gram(intensities(v, frame2), frame2)
        got = anchor_block_vector(est, 0, np.angle(v[0]), 1e-12).vector
        assert np.max(np.abs(got - v)) <= 1e-10
        Q = est.gram.entries
        assert np.max(np.abs(outer_product(got).entries - Q)) <= max(1e-10, est.rank1_residual * np.trace(Q).real)


def test_eigenvector_fallback_on_noisy_gram(frame2):
    v = np.array([0.8, -0.3 + 0.5j])
    c = intensities(v, frame2) + np.array([1e-4, -2e-4, 3e-4, 0])
    est = recover_block_gram(c, frame2)
    got = anchor_block_vector(est, 0, np.angle(v[0]), 1e-8, fallback_threshold=1e-9)
    assert got.method == "eigenvector"
    assert np.angle(got.vector[0]) == pytest.approx(np.angle(v[0]), abs=1e-12)
    assert np.max(np.abs(got.vector - v)) < 1e-3


def test_propagation_end_to_end(bank_j8):
    x = random_signal(6, 1.0, 1)
    ms = measure(x, bank_j8)
    prop = propagate_phases(blocks_of(ms), bank_j8.grid, 1e-10)
    truth = fourier_transform(x, bank_j8.grid.points())
    assert aligned_max_dev(prop.values, truth) <= 1e-9 * np.max(np.abs(truth))
    assert prop.max_overlap_disagreement <= 1e-9


def test_propagation_accepts_sequence(bank_j8):
    ms = measure(random_signal(8, 1.0, 2), bank_j8)
    seq = [recover_block_gram(ms.block(n), ms.frame, n) for n in ms.grid.blocks]
    prop = propagate_phases(seq, bank_j8.grid, 1e-10, start_block=0)
    assert prop.start_block == 0


def test_phase_link_break_on_overlap_zero(bank_j8):
    # block 0 = (2 pi, 4 pi), block 1 = (4 pi, 6 pi); they share 4 pi
    x = with_transform_zeros(random_signal(8, 1.0, 0), [2 * TWO_PI])
    ms = measure(x, bank_j8)
    with pytest.raises(PhaseLinkBreak) as err:
        propagate_phases(blocks_of(ms), bank_j8.grid, 1e-8, start_block=0)
    assert err.value.block == 1
    result = recover(ms, 1.0, 8, RecoveryOptions(start_block=0))
    assert result.status == "phase_link_break" and result.failed_block == 1
    assert result.signal is None and result.global_phase_note


def test_larger_overlap_survives_single_zero():
    grid = shannon_grid(1.0, 3, 2, -9, 5)  # blocks 2 pi (n+1, n+2, n+3)
    assert np.allclose(grid.points()[[0, -1]], [-8 * TWO_PI, 8 * TWO_PI])
    bank = ModulatorBank(hesse_frame(), grid)
    x = with_transform_zeros(random_signal(8, 1.0, 0), [2 * TWO_PI])
    ms = measure(x, bank)
    prop = propagate_phases(blocks_of(ms), grid, 1e-8, start_block=0)
    truth = fourier_transform(x, grid.points())
    assert aligned_max_dev(prop.values, truth) <= 1e-9 * np.max(np.abs(truth))
    result = recover(ms, 1.0, 8, RecoveryOptions(start_block=0))
    assert result.ok and phase_aligned_error(result.signal, x) <= 1e-9


def test_zero_start_block_restarts(bank_j8):
    x = random_signal(3, 1.0, 0)  # transform vanishes on 2 pi j, |j| > 3
    ms = measure(x, bank_j8)
    blocks = blocks_of(ms)
    prop = propagate_phases(blocks, bank_j8.grid, 1e-10, start_block=-9)
    assert prop.links[0]["event"] == "restart" and prop.start_block != -9
    with pytest.raises(ZeroBlock):
        propagate_phases(blocks, bank_j8.grid, 1e-10, start_block=-9, restart=False)
    result = recover(ms, 1.0, 3)
    assert result.ok and phase_aligned_error(result.signal, x) <= 1e-12


def test_recover_roundtrip(bank_j8):
    x = random_signal(8, 1.0, 7)
    result = recover(measure(x, bank_j8), 1.0, 8)
    assert result.ok and phase_aligned_error(result.signal, x) <= 1e-8
    d = result.diagnostics
    assert d["max_overlap_disagreement"] <= 1e-9
    assert d["reconstruction"]["relative_sigma_min"] > 0.5
    assert all(r <= 1e-10 for r in d["rank1_residuals"].values())


def test_recover_noisy_degrades_gracefully(bank_j8):
    x = random_signal(8, 1.0, 7)
    ms = add_noise(measure(x, bank_j8), 1e-6, 3)
    result = recover(ms, 1.0, 8)
    err = phase_aligned_error(result.signal, x)
    assert result.ok and 1e-9 < err <= 1e-3
    assert "eigenvector" in result.diagnostics["factorization"].values()


def test_recover_zero_signal(bank_j8):
    zero = TimeLimitedSignal(1.0, np.zeros(17))
    result = recover(measure(zero, bank_j8), 1.0, 8)
    assert result.ok and np.all(result.signal.coefficients == 0)


def test_backends_agree(bank_j8):
    x = random_signal(8, 1.0, 9)
    values = fourier_transform(x, bank_j8.grid.points())
    a, _ = reconstruct_signal(bank_j8.grid.points(), values, 1.0, 8, "shannon_closed_form")
    b, _ = reconstruct_signal(bank_j8.grid.points(), values, 1.0, 8, "least_squares")
    c, _ = reconstruct_signal(bank_j8.grid.points(), values, 1.0, 8, "generating_function_series",
                              radius=100)
    np.testing.assert_allclose(a.coefficients, x.coefficients, atol=1e-12)
    assert np.max(np.abs(a.coefficients - b.coefficients)) <= 1e-9
    assert np.max(np.abs(a.coefficients - c.coefficients)) <= 1e-9


def test_reconstruct_keeps_global_phase(bank_j8):
    x = random_signal(8, 1.0, 10)
    pts = bank_j8.grid.points()
    rec, _ = reconstruct_signal(pts, np.exp(0.7j) * fourier_transform(x, pts), 1.0, 8, "shannon_closed_form")
    np.testing.assert_allclose(rec.coefficients, np.exp(0.7j) * x.coefficients, atol=1e-12)


def test_least_squares_on_oversampled_k3_grid():
    T, Tp, J = 1.0, 1.25, 8
    d = TWO_PI / Tp
    lo, hi = covering_block_range(d * np.arange(1, 4), 2 * d, -TWO_PI * J, TWO_PI * J)
    grid = shannon_grid(Tp, 3, 1, lo, hi)
    x = random_signal(J, T, 4)
    pts = grid.points()
    rec, diag = reconstruct_signal(pts, np.exp(-1.1j) * fourier_transform(x, pts), T, J, "least_squares")
    assert phase_aligned_error(rec, x) <= 1e-8
    assert diag["sigma_min"] > 0


def test_reconstruct_errors(bank_j8):
    from pwretrieval.recovery import IllConditioned, InsufficientPoints

    pts = bank_j8.grid.points()
    with pytest.raises(InsufficientPoints):
        reconstruct_signal(pts, pts, 1.0, 9, "least_squares")
    with pytest.raises(InsufficientPoints):
        reconstruct_signal(pts + 1.0, pts, 1.0, 8, "shannon_closed_form")
    with pytest.raises(IllConditioned):
        reconstruct_signal(np.full(17, 0.1 + 0j), np.ones(17), 1.0, 8, "least_squares")
    with pytest.raises(ValueError):
        reconstruct_signal(pts, pts, 1.0, 8, "generating_function_series")
    with pytest.raises(ValueError):
        reconstruct_signal(pts, pts, 1.0, 8, "magic")


def test_recover_reports_insufficient_points(bank_j8):
    result = recover(measure(random_signal(8, 1.0, 0), bank_j8), 1.0, 9)
    assert result.status == "insufficient_points" and result.fourier_values is not None


def augmented_setup(x, T_prime=1.25, margin=1.5, J=None):
    J = x.J if J is None else J
    d = TWO_PI / T_prime
    lo, hi = covering_block_range(d * np.arange(1, 3), d, -TWO_PI * (J + 2), TWO_PI * (J + 2))
    grid = shannon_grid(T_prime, 2, 1, lo, hi)
    norm = l1_norm(x, 4001)
    xb = L1BoundedSignal(x, margin * norm if norm > 0 else 1.0)
    shifted, h = certify_imaginary_shift(xb, grid, T_prime)
    return xb, ModulatorBank(canonical_frame_k2(), shifted)


def test_augmented_rescues_overlap_zero(bank_j8):
    x = with_transform_zeros(random_signal(8, 1.0, 0), [2 * TWO_PI])
    assert recover(measure(x, bank_j8), 1.0, 8, RecoveryOptions(start_block=0)).status == "phase_link_break"
    xb, bank = augmented_setup(x)
    result = recover_augmented(measure_augmented(xb, bank, 1.25), 1.0, 8)
    assert result.ok and phase_aligned_error(result.signal, x) <= 1e-6
    assert result.diagnostics["certified"]
    assert result.diagnostics["reconstruction"]["gamma_consistent"]


def test_augmented_unshifted_grid_with_cosine_zero_fails():
    # a real grid through a zero of cos(T' z/2) that is also a transform zero
    Tp = 1.25
    lam = np.pi / Tp
    x = with_transform_zeros(random_signal(4, 1.0, 0), [lam])
    xb = L1BoundedSignal(x, 1.5 * l1_norm(x, 4001))
    grid = shannon_grid(Tp, 2, 1, -1, 4, anchor_shift=lam - TWO_PI / Tp)
    ms = measure_augmented(xb, ModulatorBank(canonical_frame_k2(), grid), Tp)
    n_at = [n for n in grid.blocks if np.isclose(grid.points()[grid.block_indices(n)][-1], lam)][0]
    result = recover_augmented(ms, 1.0, 4, RecoveryOptions(start_block=n_at))
    assert result.status == "phase_link_break"
    assert not result.diagnostics["certified"]


def test_augmented_zero_signal():
    zero = TimeLimitedSignal(1.0, np.zeros(9))
    xb, bank = augmented_setup(zero)
    assert xb.l1_bound == 1.0
    result = recover_augmented(measure_augmented(xb, bank, 1.25), 1.0, 4)
    assert result.ok and np.max(np.abs(result.signal.coefficients)) <= 1e-10
    assert result.diagnostics["reconstruction"]["gamma_consistency_gap"] <= 1e-10


def test_augmented_start_block_only_changes_global_phase():
    x = random_signal(6, 1.0, 12)
    xb, bank = augmented_setup(x)
    ms = measure_augmented(xb, bank, 1.25)
    blocks = list(bank.grid.blocks)
    r1 = recover_augmented(ms, 1.0, 6, RecoveryOptions(start_block=blocks[1]))
    r2 = recover_augmented(ms, 1.0, 6, RecoveryOptions(start_block=blocks[-2]))
    assert r1.ok and r2.ok
    assert phase_aligned_error(r1.signal, r2.signal) <= 1e-9
    assert phase_aligned_error(r1.signal, x) <= 1e-6


def test_augmented_requires_flag(bank_j8):
    with pytest.raises(ValueError):
        recover_augmented(measure(random_signal(8, 1.0, 0), bank_j8), 1.0, 8)


def test_augmented_random_suite_with_adversarial_members():
    rng = np.random.default_rng(5)
    failures = []
    for s in range(100):
        J = int(rng.integers(2, 9))
        x = random_signal(J, 1.0, 1000 + s)
        if s % 4 == 0:
            # transform zero at a real point of the unshifted grid
            x = with_transform_zeros(x, [TWO_PI / 1.25 * int(rng.integers(-J, J + 1))])
        xb, bank = augmented_setup(x)
        result = recover_augmented(measure_augmented(xb, bank, 1.25), 1.0, J)
        if not (result.ok and phase_aligned_error(result.signal, x) <= 1e-6):
            failures.append(s)
    assert failures == []


def test_phase_aligned_error_examples():
    x = random_signal(5, 1.0, 0)
    assert phase_aligned_error(x.scaled(np.exp(1.2j)), x) <= 1e-14
    c = np.array(x.coefficients)
    c[5] += 1e-6
    bound = 1e-6 / np.linalg.norm(x.coefficients)  # attained at zero rotation
    assert 0.9 * bound < phase_aligned_error(TimeLimitedSignal(1.0, c), x) <= bound
    assert phase_aligned_error(x.scaled(0), x) == pytest.approx(1.0)
    zero = TimeLimitedSignal(1.0, [0])
    assert phase_aligned_error(zero, zero) == 0


def test_phase_aligned_error_brute_force():
    a, b = random_signal(3, 1.0, 1), random_signal(3, 1.0, 2)
    thetas = np.linspace(-np.pi, np.pi, 200_001)
    brute = np.min(np.linalg.norm(np.exp(1j * thetas)[:, None] * a.coefficients - b.coefficients, axis=1))
    assert phase_aligned_error(a, b) == pytest.approx(brute / np.linalg.norm(b.coefficients), rel=1e-8)
