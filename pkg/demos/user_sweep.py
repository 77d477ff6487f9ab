"""Sum rate, CRLB and per-iteration cost as the number of users grows."""

import numpy as np

from isac_beamopt.experiment import parse_config, run_experiment

spec = parse_config(mode="sweep-k", overrides=["k_grid=2:12:2", "realizations=5"])
rows = run_experiment(spec)

print(" K  rate[bit]  crlb_theta   outer  ms/outer")
for k in spec.k_grid:
    sel = [r for r in rows if r.k == k]
    rate = np.mean([r.sum_rate_bits for r in sel])
    crlb = np.mean([r.crlb_theta for r in sel])
    outer = np.mean([r.outer_iters for r in sel])
    per_outer = np.median([r.runtime_ms / r.outer_iters for r in sel])
    print(f"{k:2d}  {rate:8.3f}  {crlb:.3e}  {outer:5.1f}  {per_outer:7.3f}")
