"""
How many samples per Nyquist interval
=====================================

K-point blocks with overlap a, spaced (K - a) grid steps apart, give
K^2 / (K - a) * (T'/T) samples per Nyquist interval.
"""

from pwretrieval.cli import rate_table

rows = rate_table([2, 3, 4, 6], [1, 2, 3], [1.0, 1.25, 1.5])
print(f"{'K':>2} {'a':>2} {'ratio':>5} {'x Nyquist':>10}")
for K, a, r, mult in rows:
    print(f"{K:>2} {a:>2} {r:>5.2f} {mult:>10.3f}")

###############################################################################
# The cheapest configuration
K, a, r, mult = min(rows, key=lambda row: row[3])
print("minimum:", mult, "at K =", K, "a =", a, "T'/T =", r)

###############################################################################
# More overlap buys robustness: with a = 2 and K = 3 a single zero at a
# shared point no longer breaks the chain.
import numpy as np

from pwretrieval import (
    ModulatorBank,
    RecoveryOptions,
    measure,
    phase_aligned_error,
    random_signal,
    recover,
    shannon_grid,
    with_transform_zeros,
)
from pwretrieval.io import frame_from_text
from pwretrieval.scenario import bundled

frame3 = frame_from_text(bundled("hesse_k3.frame").read_text())
x = with_transform_zeros(random_signal(8, 1.0, seed=0), [4 * np.pi])
ms = measure(x, ModulatorBank(frame3, shannon_grid(1.0, 3, 2, -9, 5)))
res = recover(ms, 1.0, 8, RecoveryOptions(start_block=0))
print("K=3, a=2:", res.status, phase_aligned_error(res.signal, x))
