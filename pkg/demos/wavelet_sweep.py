"""Partial sums of the wavelet-domain chromatic expansion of exp(-y) on y > 0."""

import numpy as np

from chromax import chromatic as ch
from chromax import wavelet

x0, probe = (1.0, 0.0), (2.0, 1.0)
f = lambda y: np.where(np.asarray(y) > 0, np.exp(-np.asarray(y, dtype=float)), 0.0)
basis = wavelet.split_basis(1, x0, 16)
c = ch.chromatic_coefficients(basis, f, breakpoints=(0.0,))
pts, wts = wavelet.default_window(1, x0).grid()
Wf, _ = wavelet.wavelet_transform(f, 1, pts, breakpoints=(0.0,))
Wp, _ = wavelet.wavelet_transform(f, 1, np.array([probe]), breakpoints=(0.0,))

print("admissibility n=1..3:", [round(wavelet.admissibility_numeric(n), 6) for n in (1, 2, 3)])
for N in (2, 4, 8, 16):
    S = wavelet.wavelet_partial_sum(basis, c, pts, N)
    Sp = wavelet.wavelet_partial_sum(basis, c, np.array([probe]), N)
    print(f"N={N:2d} window norm {wavelet.wavelet_domain_norm(Wf - S, 1, wts):.4e}"
          f"  probe error {abs(Wp[0] - Sp[0]):.4e}")
