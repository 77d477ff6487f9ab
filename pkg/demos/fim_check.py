"""Closed-form Fisher information against the brute-force echo-signal version."""

import numpy as np

from isac_beamopt import SystemConfig, assemble_fim, build_scene, derive_sensing
from isac_beamopt.model import complex_normal
from isac_beamopt.oracle import compare, numeric_fim
from isac_beamopt.sgpi import project_power

cfg = SystemConfig()
scene = build_scene(cfg)
rng = np.random.default_rng(7)

w = project_power(complex_normal(rng, (cfg.n_tx, cfg.n_users)), cfg.p_tx)
fim = assemble_fim(w, scene)
brute = numeric_fim(w, cfg.theta, cfg.alpha, cfg.n_rx, cfg.n_slots, cfg.sigma_s_sq)

np.set_printoptions(precision=4)
print(fim.f)
print(brute)
print(compare("FIM", fim.f, brute).line)

sens = derive_sensing(fim)
print("tr(F^-1) =", sens.trace_f_inv, " crlb_theta =", sens.crlb_theta)

# The alpha block is kappa ||G W||^2 I: equal diagonal, zero off-diagonal
print(fim.f_alpha_alpha)
