import dataclasses

import numpy as np
import pytest

from conftest import random_feasible, random_hermitian
from isac_beamopt.errors import InvalidInputError, ZeroProjectionError
from isac_beamopt.fim import FisherInfo
from isac_beamopt.model import SystemConfig, build_scene, complex_normal, generate_channels
from isac_beamopt.oracle import numeric_fim, oracle_objective
from isac_beamopt.rates import compute_rates
from isac_beamopt.sgpi import (build_surrogate, dominant_eigenvalue, eval_objective,
                               project_power, sca_surrogate_direct, sgpi_inner, solve)


# -- dominant_eigenvalue ------------------------------------------------------

def test_eig_diagonal():
    assert dominant_eigenvalue(np.diag([1.0, 5.0, 2.0]).astype(complex)) == pytest.approx(5.0, rel=1e-6)


def test_eig_identity():
    assert dominant_eigenvalue(np.eye(16)) == pytest.approx(1.0, rel=1e-12)


def test_eig_zero_and_negative_definite():
    assert dominant_eigenvalue(np.zeros((4, 4))) == 0.0
    assert dominant_eigenvalue(np.diag([-1.0, -3.0, -2.0])) == pytest.approx(-1.0, rel=1e-6)


def test_eig_random_hermitian(rng):
    for _ in range(20):
        m = random_hermitian(rng, 16)
        exact = np.linalg.eigvalsh(m)[-1]
        assert dominant_eigenvalue(m) == pytest.approx(exact, rel=1e-6)


def test_eig_rejects_non_hermitian(rng):
    with pytest.raises(InvalidInputError):
        dominant_eigenvalue(complex_normal(rng, (4, 4)))


def test_eig_falls_back_to_frobenius_bound():
    m = np.diag([1.0, 1.0 - 1e-7, -0.5])
    value = dominant_eigenvalue(m, max_iter=1)
    assert value == pytest.approx(np.linalg.norm(m))
    assert value >= 1.0


# -- project_power ------------------------------------------------------------

def test_projection_keeps_feasible_point(rng):
    w = random_feasible(rng, (16, 4), 10.0)
    np.testing.assert_allclose(project_power(w, 10.0), w, rtol=1e-15)


def test_projection_halves():
    p = np.full((2, 2), 1.0 + 0j)  # tr(PP^H) = 4 = 4 * Pt with Pt = 1
    np.testing.assert_allclose(project_power(p, 1.0), p / 2, rtol=1e-15)


def test_projection_random(rng):
    for _ in range(100):
        p = complex_normal(rng, (16, 4)) * 10.0 ** rng.uniform(-5, 5)
        w = project_power(p, 10.0)
        assert np.vdot(w, w).real == pytest.approx(10.0, rel=1e-12)
        ratio = w / p
        np.testing.assert_allclose(ratio, ratio.flat[0].real, rtol=1e-12)


def test_projection_rejects_zero():
    with pytest.raises(ZeroProjectionError):
        project_power(np.zeros((3, 2)), 1.0)


# -- objective -----------------------------------------------------------------

def test_objective_sensing_only(channels, scene, rng):
    cfg = SystemConfig(delta=0.0)
    w = random_feasible(rng, (16, 4), cfg.p_tx)
    obj = eval_objective(w, channels, scene, cfg)
    assert obj.objective == pytest.approx(-obj.trace_f_inv, rel=1e-15)


def test_objective_with_identity_fim(monkeypatch, channels, scene, rng):
    import isac_beamopt.sgpi as sgpi
    monkeypatch.setattr(sgpi, "assemble_fim", lambda w, s: FisherInfo(np.eye(3)))
    cfg = SystemConfig(delta=0.3)
    w = random_feasible(rng, (16, 4), cfg.p_tx)
    obj = sgpi.eval_objective(w, channels, scene, cfg)
    assert obj.objective == pytest.approx(0.3 * obj.sum_rate - 3.0, rel=1e-14)


def test_objective_matches_oracle(cfg, channels, scene, rng):
    for _ in range(10):
        w = random_feasible(rng, (16, 4), cfg.p_tx)
        expected = oracle_objective(w, cfg, channels)
        assert eval_objective(w, channels, scene, cfg).objective == pytest.approx(expected, rel=1e-6)


# -- surrogate -----------------------------------------------------------------

@pytest.mark.parametrize("delta", [0.0, 0.01, 1.0])
def test_surrogate_invariants(delta, channels, scene, rng):
    cfg = SystemConfig(delta=delta)
    w_t = random_feasible(rng, (16, 4), cfg.p_tx)
    state = build_surrogate(w_t, channels, scene, cfg)

    m = delta * (channels.h * state.sigma2) @ channels.h.conj().T - 0.5 * (state.q + state.q.conj().T)
    expected_a = state.lambda_shift * np.eye(16) - m
    np.testing.assert_allclose(state.a, expected_a, rtol=1e-10, atol=1e-10 * np.abs(expected_a).max())
    assert np.linalg.eigvalsh(state.a).min() >= -1e-8 * state.lambda_shift
    np.testing.assert_allclose(state.sigma1, state.comm_aux.eta)
    if delta == 0.0:
        np.testing.assert_array_equal(state.linear, 0)


def test_surrogate_offset_is_constant(cfg, channels, scene, rng):
    state = build_surrogate(random_feasible(rng, (16, 4), cfg.p_tx), channels, scene, cfg)
    gaps = []
    for _ in range(10):
        w = random_feasible(rng, (16, 4), cfg.p_tx)
        gaps.append(state.subproblem_value(w) - sca_surrogate_direct(w, state, channels, scene, cfg))
    assert np.ptp(gaps) <= 1e-8 * abs(np.mean(gaps))
    assert np.mean(gaps) == pytest.approx(-state.const_offset, rel=1e-8)


def test_surrogate_tight_at_expansion(cfg, channels, scene, rng):
    w_t = random_feasible(rng, (16, 4), cfg.p_tx)
    state = build_surrogate(w_t, channels, scene, cfg)
    truth = eval_objective(w_t, channels, scene, cfg).objective
    assert state.surrogate_value(w_t) == pytest.approx(truth, rel=1e-8)
    assert sca_surrogate_direct(w_t, state, channels, scene, cfg) == pytest.approx(truth, rel=1e-8)


# -- inner loop -----------------------------------------------------------------

def test_inner_identity_fixed_point(cfg, channels, scene, rng):
    state = build_surrogate(random_feasible(rng, (16, 4), cfg.p_tx), channels, scene, cfg)
    state = dataclasses.replace(state, a=np.eye(16), linear=np.zeros((16, 4)))
    w0 = random_feasible(rng, (16, 4), cfg.p_tx)
    w, values = sgpi_inner(w0, state, channels, cfg)
    np.testing.assert_allclose(w, w0, rtol=1e-14)
    assert len(values) == 2


def test_inner_fixed_point_input(cfg, channels, scene):
    w0 = project_power(channels.h, cfg.p_tx)
    state = build_surrogate(w0, channels, scene, cfg)
    long_cfg = dataclasses.replace(cfg, inner_iters=5000)
    w_star, _ = sgpi_inner(w0, state, channels, long_cfg)
    # Polish to a numerical fixed point.
    for _ in range(2000):
        w_star = project_power(state.linear + state.a @ w_star, cfg.p_tx)
    w, values = sgpi_inner(w_star, state, channels, cfg)
    np.testing.assert_allclose(w, w_star, atol=1e-9)
    assert np.ptp(values) <= 1e-9 * abs(values[0])


def test_inner_ascent(cfg, channels, scene, rng):
    for _ in range(5):
        w0 = random_feasible(rng, (16, 4), cfg.p_tx)
        state = build_surrogate(w0, channels, scene, cfg)
        w, values = sgpi_inner(w0, state, channels, cfg)
        assert np.all(np.diff(values) >= -1e-9)
        assert np.vdot(w, w).real == pytest.approx(cfg.p_tx, rel=1e-9)


def test_inner_zero_update_raises(cfg, channels, scene, rng):
    state = build_surrogate(random_feasible(rng, (16, 4), cfg.p_tx), channels, scene, cfg)
    state = dataclasses.replace(state, a=np.zeros((16, 16)), linear=np.zeros((16, 4)))
    with pytest.raises(ZeroProjectionError):
        sgpi_inner(random_feasible(rng, (16, 4), cfg.p_tx), state, channels, cfg)


def test_inner_small_instance_near_global(rng):
    from isac_beamopt.oracle import random_search_sphere
    cfg = SystemConfig(n_tx=2, n_users=1, seed=3, inner_iters=200)
    h = generate_channels(cfg)
    scene = build_scene(cfg)
    w0 = project_power(h.h, cfg.p_tx)
    state = build_surrogate(w0, h, scene, cfg)
    w, values = sgpi_inner(w0, state, h, cfg)

    def batch(ws):
        lin = 2 * np.einsum("snk,nk->s", ws.conj(), state.linear).real
        quad = np.einsum("snk,nm,smk->s", ws.conj(), state.a, ws).real
        return quad + lin

    best, _ = random_search_sphere(batch, 2, 1, cfg.p_tx, 10**5, seed=0, vectorized=True)
    assert values[-1] >= best - 1e-2


# -- full solve -------------------------------------------------------------------

def test_solve_default_settings(cfg, channels, scene):
    w, trace = solve(cfg, channels, scene)
    assert trace.converged and trace.outer_count <= 30
    assert np.vdot(w, w).real == pytest.approx(cfg.p_tx, rel=1e-9)
    assert trace.max_power_error <= 1e-9
    assert len(trace.outer_objectives) == trace.outer_count + 1 == len(trace.sum_rates)
    assert abs(trace.outer_objectives[-1] - trace.outer_objectives[-2]) < cfg.outer_tol
    assert trace.outer_objectives[-1] > trace.outer_objectives[0]


def test_solve_is_deterministic(cfg, channels, scene):
    w1, t1 = solve(cfg, channels, scene)
    w2, t2 = solve(cfg, channels, scene)
    np.testing.assert_array_equal(w1, w2)
    assert t1.outer_objectives == t2.outer_objectives
    assert t1.inner_objectives == t2.inner_objectives


def test_sensing_only_has_lower_rate(channels, scene):
    w0, _ = solve(SystemConfig(delta=0.0), channels, scene)
    w10, _ = solve(SystemConfig(delta=10.0), channels, scene)
    r0 = compute_rates(w0, channels, SystemConfig().sigma_c_sq)[1]
    r10 = compute_rates(w10, channels, SystemConfig().sigma_c_sq)[1]
    assert r0 <= r10


def test_solve_random_init(channels, scene):
    cfg = SystemConfig(init="random")
    w, trace = solve(cfg, channels, scene)
    assert trace.converged
    w2, _ = solve(cfg, channels, scene)
    np.testing.assert_array_equal(w, w2)


def test_solve_respects_max_outer(channels, scene):
    cfg = SystemConfig(outer_tol=1e-14, max_outer=3)
    _, trace = solve(cfg, channels, scene)
    assert not trace.converged
    assert trace.outer_count == 3


def test_numeric_fim_symmetric(cfg, rng):
    f = numeric_fim(random_feasible(rng, (16, 4), 10.0), 0.2, cfg.alpha, 20, 30, 1.0)
    np.testing.assert_allclose(f, f.T, rtol=1e-8)
