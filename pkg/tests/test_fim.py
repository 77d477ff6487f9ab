import numpy as np
import pytest

from conftest import random_feasible
from isac_beamopt.errors import SingularFIMError
from isac_beamopt.fim import FisherInfo, assemble_fim, assemble_q, derive_sensing
from isac_beamopt.model import SystemConfig, build_scene
from isac_beamopt.oracle import numeric_fim


def random_pd(rng, scale=1.0):
    x = rng.standard_normal((3, 3))
    return scale * (x @ x.T + 0.5 * np.eye(3))


def random_symmetric(rng):
    x = rng.standard_normal((3, 3))
    return x + x.T


def test_zero_beamformer_zero_fim(scene):
    np.testing.assert_array_equal(assemble_fim(np.zeros((16, 4)), scene).f, np.zeros((3, 3)))


def test_alpha_block_is_scaled_identity(scene, rng):
    fim = assemble_fim(random_feasible(rng, (16, 4), 10.0), scene)
    block = fim.f_alpha_alpha
    assert block[0, 1] == 0.0 and block[1, 0] == 0.0
    assert block[0, 0] == block[1, 1] > 0
    np.testing.assert_array_equal(fim.f, fim.f.T)
    assert fim.f_theta_alpha.shape == (1, 2)


@pytest.mark.parametrize("theta", [0.0, 0.4, -1.1])
def test_matches_numeric_oracle(theta, rng):
    cfg = SystemConfig(theta=theta)
    scene = build_scene(cfg)
    for _ in range(5):
        w = random_feasible(rng, (16, 4), cfg.p_tx)
        oracle = numeric_fim(w, cfg.theta, cfg.alpha, cfg.n_rx, cfg.n_slots, cfg.sigma_s_sq)
        f = assemble_fim(w, scene).f
        assert np.linalg.norm(f - oracle) / np.linalg.norm(oracle) <= 1e-5


def test_fim_is_psd(scene, rng):
    for _ in range(50):
        f = assemble_fim(random_feasible(rng, (16, 4), 10.0), scene).f
        assert np.linalg.eigvalsh(f).min() >= -1e-9 * np.trace(f)


def test_derive_identity():
    out = derive_sensing(FisherInfo(np.eye(3)))
    assert out.trace_f_inv == pytest.approx(3.0)
    assert out.crlb_theta == pytest.approx(1.0)
    np.testing.assert_allclose(out.phi, np.eye(3), atol=1e-15)


def test_derive_diagonal():
    out = derive_sensing(np.diag([2.0, 4.0, 4.0]))
    assert out.trace_f_inv == pytest.approx(1.0)
    assert out.crlb_theta == pytest.approx(0.5)
    np.testing.assert_allclose(out.phi, np.diag([0.25, 0.0625, 0.0625]), atol=1e-15)


def test_derive_matches_linear_solve(rng):
    for _ in range(20):
        f = random_pd(rng, scale=10.0 ** rng.uniform(-3, 5))
        out = derive_sensing(f)
        expected = np.linalg.solve(f, np.eye(3))
        np.testing.assert_allclose(out.f_inv, expected, rtol=1e-9, atol=1e-9 * np.abs(expected).max())
        np.testing.assert_allclose(f @ out.f_inv, np.eye(3), atol=1e-9)
        np.testing.assert_allclose(out.phi, expected @ expected, rtol=1e-9,
                                   atol=1e-9 * np.abs(expected @ expected).max())
        assert out.crlb_theta <= out.trace_f_inv


def test_singular_fim_raises(scene):
    with pytest.raises(SingularFIMError):
        derive_sensing(np.zeros((3, 3)))
    with pytest.raises(SingularFIMError):
        derive_sensing(np.diag([1.0, 1.0, 0.0]))
    # Beam orthogonal to the target direction carries no echo energy.
    w = np.zeros((16, 4), complex)
    w[0, 0], w[1, 0] = 1.0, -1.0
    with pytest.raises(SingularFIMError):
        derive_sensing(assemble_fim(w, scene))


def test_q_zero_phi(scene):
    np.testing.assert_array_equal(assemble_q(np.zeros((3, 3)), scene), 0)


def test_q_identity_phi_real_alpha():
    scene = build_scene(SystemConfig(alpha=0.2, theta=0.3))
    g, gd = scene.g, scene.g_dot
    # phi12 = phi13 = 0 removes the cross term entirely.
    expected = scene.kappa * (0.04 * gd.conj().T @ gd + 2 * g.conj().T @ g)
    np.testing.assert_allclose(assemble_q(np.eye(3), scene), expected, rtol=1e-12)


def test_q_cross_term_real_alpha():
    scene = build_scene(SystemConfig(alpha=0.2, theta=0.3))
    phi = np.zeros((3, 3))
    phi[0, 1] = phi[1, 0] = 1.0
    expected = scene.kappa * 2 * 0.2 * scene.g_dot.conj().T @ scene.g
    np.testing.assert_allclose(assemble_q(phi, scene), expected, rtol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.7])
def test_quadratic_form_identity(theta, rng):
    scene = build_scene(SystemConfig(theta=theta))
    for _ in range(50):
        w = random_feasible(rng, (16, 4), 10.0)
        phi = random_symmetric(rng)
        q = assemble_q(phi, scene)
        lhs = np.trace(w @ w.conj().T @ q).real
        rhs = np.sum(assemble_fim(w, scene).f * phi)
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8 * np.abs(q).max())


def test_trace_inverse_tangent_is_lower_bound(rng):
    for _ in range(200):
        f_t = random_pd(rng)
        d_t = derive_sensing(f_t)
        tangent_at_t = 2 * d_t.trace_f_inv - np.sum(f_t * d_t.phi)
        assert tangent_at_t == pytest.approx(d_t.trace_f_inv, rel=1e-8)
        f = random_pd(rng)
        assert 2 * d_t.trace_f_inv - np.sum(f * d_t.phi) <= derive_sensing(f).trace_f_inv + 1e-12
