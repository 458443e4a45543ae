"""
Truncated generating function on the Shannon grid
=================================================

On 2 pi Z the generating function is 2 sin(z/2).  Cutting the product at a
finite radius R leaves out factors 1 - (z/2)^2/(n pi)^2 with n pi > R/2, a
relative error near z^2 / (2 pi R) that halves each time R doubles.
"""

import numpy as np

from pwretrieval import dual_basis_ft, generating_function, shannon_grid

pts = shannon_grid(1.0, 2, 1, -3301, 3298).points()
z = np.linspace(-10, 10, 201)
for R in 200 * np.pi * 2.0 ** np.arange(6):
    err = np.max(np.abs(generating_function(pts, z, R) / 2 - np.sin(z / 2)))
    print(f"R = {R / np.pi:6.0f} pi   max error on |z| <= 10: {err:.2e}")

###############################################################################
# The cardinal functions still interpolate exactly on the grid
inside = np.flatnonzero(np.abs(pts) < 200 * np.pi)
psi = dual_basis_ft(pts, inside[50], pts[inside], 200 * np.pi)
print("psi at its own node:", psi[50].real, " elsewhere max:", np.abs(np.delete(psi, 50)).max())
