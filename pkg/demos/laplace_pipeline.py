"""Chromatic expansion of a Laplace transform around x0 and the kernel expansion residual."""

import numpy as np

from chromax import chromatic as ch
from chromax import kernels, orthopoly

basis = ch.build_basis(kernels.laplace(), orthopoly.laguerre(0.0), 1.0, 16)
fhat = lambda y: np.exp(-y) / (1 + y)
c = ch.chromatic_coefficients(basis, fhat)
x = np.linspace(0.0, 4.0, 9)
exact, _ = kernels.transform(kernels.laplace(), fhat, x)

print(f"{'N':>3} {'partial':>12} {'dvp':>12}")
for N in (2, 4, 8):
    e_p = np.max(np.abs(ch.reconstruct(basis, c, x, N) - exact))
    e_v = np.max(np.abs(ch.reconstruct(basis, c, x, N, "dvp") - exact))
    print(f"{N:3d} {e_p:12.3e} {e_v:12.3e}")

print("kernel residual at x=2.5, y=2:")
for N in (2, 4, 8, 16):
    print(f"  N={N:2d} {ch.kernel_expansion_residual(basis, 2.5, 2.0, N):.3e}")
