"""Rate / CRLB tradeoff as delta moves from sensing-only to rate-only."""

import numpy as np

from isac_beamopt.experiment import parse_config, run_experiment

# Same channel draws at every delta (seed = base + realization)
spec = parse_config(mode="sweep-delta", overrides=["realizations=5", "seed=0"])
rows = run_experiment(spec)

n_real = spec.realizations
rate = np.array([r.sum_rate_bits for r in rows]).reshape(-1, n_real)
crlb = np.array([r.crlb_theta for r in rows]).reshape(-1, n_real)

print(" delta        rate [bit/s/Hz]  crlb_theta")
for d, rr, cc in zip(spec.delta_grid, rate.mean(axis=1), crlb.mean(axis=1)):
    print(f"{d:9.2e}   {rr:10.4f}      {cc:.4e}")

# Both columns should rise together: more rate costs sensing accuracy
print("rate non-decreasing:", np.mean(np.diff(rate, axis=0) >= -1e-6))
print("crlb non-decreasing:", np.mean(np.diff(crlb, axis=0) >= -1e-6))
