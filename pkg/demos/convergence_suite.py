"""Runs every shipped convergence sweep and prints the error and ratio columns."""

import time

from chromax import approx

t0 = time.perf_counter()
for cfg in approx.shipped_suite():
    rep = approx.convergence_experiment(cfg)
    label = f"{cfg.name} p={cfg.p:g} q={cfg.q:g} {cfg.meta.get('a', '')} {cfg.meta.get('b', '')}"
    print(label)
    for r in rep.rows:
        print(f"  n={r.n:2d} lhs={r.lhs_norm:.4e} E_n={r.en_proxy:.4e} ratio={r.ratio:.3f}")
print(f"total {time.perf_counter() - t0:.1f}s")
