"""
When a shared point is a zero
=============================

Phase information travels from block to block through shared grid points.
If the transform vanishes at one of those points the chain breaks.  Adding a
known cosine to the transform and sampling slightly off the real axis fixes
this.
"""

import numpy as np

from pwretrieval import (
    L1BoundedSignal,
    ModulatorBank,
    RecoveryOptions,
    canonical_frame_k2,
    certify_imaginary_shift,
    fourier_transform,
    l1_norm,
    measure,
    measure_augmented,
    phase_aligned_error,
    random_signal,
    recover,
    recover_augmented,
    shannon_grid,
    with_transform_zeros,
)
from pwretrieval.grids import covering_block_range

# Force a zero at 4 pi, the point shared by blocks 0 and 1
x = with_transform_zeros(random_signal(8, 1.0, seed=0), [4 * np.pi])
print("|xhat(4 pi)| =", abs(fourier_transform(x, 4 * np.pi)))

###############################################################################
# Starting at block 0 the propagation cannot cross into block 1
grid = shannon_grid(1.0, 2, 1, -9, 6)
ms = measure(x, ModulatorBank(canonical_frame_k2(), grid))
plain = recover(ms, 1.0, 8, RecoveryOptions(start_block=0))
print("plain pipeline:", plain.status, "at block", plain.failed_block)

###############################################################################
# The augmented route needs a slightly longer period T' > T and a bound on
# the L1 norm of x.  The grid is lifted to Im z = h until no sample is tiny.
T_prime = 1.25
delta = 2 * np.pi / T_prime
lo, hi = covering_block_range(delta * np.arange(1, 3), delta, -20 * np.pi, 20 * np.pi)
xb = L1BoundedSignal(x, 1.5 * l1_norm(x, 4001))
lifted, h = certify_imaginary_shift(xb, shannon_grid(T_prime, 2, 1, lo, hi), T_prime)
print("certified height h =", h, "points:", lifted.num_points)

###############################################################################
ms_aug = measure_augmented(xb, ModulatorBank(canonical_frame_k2(), lifted), T_prime)
rescued = recover_augmented(ms_aug, 1.0, 8)
print("augmented pipeline:", rescued.status, "error:", phase_aligned_error(rescued.signal, x))
print("cosine amplitude check:", rescued.diagnostics["reconstruction"]["gamma_consistency_gap"])
