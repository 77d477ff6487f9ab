"""
Brute-force and finite-difference oracles.

Nothing in here is used by the solver. These routines recompute the same
quantities along independent paths (explicit echo signal, generic matrix
inverse, random search, central differences) so that tests can check the
closed-form machinery against them.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OracleProbeError, SingularFIMError
from .sgpi import eval_objective

FD_STEP = 1e-6


@dataclass(frozen=True)
class OracleReport:
    name: str
    primary: object
    oracle: object
    rel_error: float

    @property
    def line(self):
        return f"{self.name}: rel err {self.rel_error:.3e}"


def compare(name, primary, oracle):
    primary = np.asarray(primary)
    oracle = np.asarray(oracle)
    err = np.linalg.norm(primary - oracle) / max(np.linalg.norm(oracle), 1e-30)
    return OracleReport(name, primary, oracle, float(err))


def _ula(theta, n):
    # Written out independently of model.steering_vector on purpose.
    m = np.arange(n)
    return np.exp(1j * np.pi * (m - (n - 1) / 2.0) * np.sin(theta))


def _two_way(theta, n_tx, n_rx):
    return np.outer(_ula(theta, n_rx), _ula(theta, n_tx).conj())


def orthogonal_symbols(k, n_slots):
    """K x L' symbol block with S S^H = n_slots * I (rows of a DFT matrix)."""
    length = max(n_slots, k)
    rows = np.exp(-2j * np.pi * np.outer(np.arange(k), np.arange(length)) / length)
    return rows * np.sqrt(n_slots / length)


def numeric_fim(w, theta, alpha, n_rx, n_slots, sigma_s_sq, step=FD_STEP):
    """FIM of (theta, Re alpha, Im alpha) from the noiseless echo x = vec(alpha G W S).

    The theta-derivative of x is a central difference with the given step;
    the alpha-derivatives are exact. ``w`` may carry leading batch axes.
    """
    w = np.asarray(w, dtype=complex)
    n_tx, k = w.shape[-2:]
    s = orthogonal_symbols(k, n_slots)
    g = _two_way(theta, n_tx, n_rx)
    g_dot = (_two_way(theta + step, n_tx, n_rx) - _two_way(theta - step, n_tx, n_rx)) / (2 * step)

    x_unit = (g @ w @ s).reshape(w.shape[:-2] + (-1,))
    d_theta = alpha * (g_dot @ w @ s).reshape(x_unit.shape)
    jac = np.stack([d_theta, x_unit, 1j * x_unit], axis=-1)
    gram = np.swapaxes(jac.conj(), -1, -2) @ jac
    return 2.0 / sigma_s_sq * gram.real


def oracle_objective(ws, cfg, h):
    """delta * sum rate - tr(F^{-1}) evaluated for a batch of beamformers.

    Rates are built user by user from received powers; the FIM comes from
    :func:`numeric_fim` and is inverted with a generic solver.
    """
    ws = np.asarray(ws, dtype=complex)
    h = np.asarray(getattr(h, "h", h))
    sum_rate = np.zeros(ws.shape[:-2])
    for k in range(h.shape[1]):
        rx = np.einsum("n,...nj->...j", h[:, k].conj(), ws)
        power = np.abs(rx) ** 2
        signal = power[..., k]
        interference = power.sum(axis=-1) - signal
        sum_rate = sum_rate + np.log(1.0 + signal / (interference + cfg.sigma_c_sq[k]))
    f = numeric_fim(ws, cfg.theta, cfg.alpha, cfg.n_rx, cfg.n_slots, cfg.sigma_s_sq)
    trace_inv = np.trace(np.linalg.inv(f), axis1=-2, axis2=-1)
    return cfg.delta * sum_rate - trace_inv


def random_search_sphere(objective, n_tx, k, p_tx, samples, seed, vectorized=False, chunk=1024):
    """Best objective over ``samples`` random points of the sphere tr(W W^H) = p_tx.

    Directions are complex Gaussian, then scaled onto the sphere. With
    ``vectorized=True`` the objective receives stacks of shape (m, n_tx, k)
    and must return m values. Ties go to the lowest sample index.
    """
    rng = np.random.default_rng(seed)
    best_value = -np.inf
    best_w = None
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        z = (rng.standard_normal((m, n_tx, k)) + 1j * rng.standard_normal((m, n_tx, k))) / np.sqrt(2)
        z *= np.sqrt(p_tx) / np.linalg.norm(z, axis=(1, 2), keepdims=True)
        if vectorized:
            values = np.asarray(objective(z), dtype=float)
        else:
            values = np.array([objective(wi) for wi in z], dtype=float)
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value = float(values[idx])
            best_w = z[idx].copy()
        done += m
    return best_value, best_w


def fd_objective_gradient(w, cfg, h, scene, step=FD_STEP, func=None):
    """Central-difference gradient dF/dRe(W) + 1j dF/dIm(W).

    ``func`` replaces the ISAC objective with any real function of W.
    """
    w = np.asarray(w, dtype=complex)
    if func is None:
        def func(x):
            return eval_objective(x, h, scene, cfg).objective

    grad = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        parts = []
        for direction in (1.0, 1j):
            plus = w.copy()
            minus = w.copy()
            plus[idx] += direction * step
            minus[idx] -= direction * step
            try:
                parts.append((func(plus) - func(minus)) / (2 * step))
            except SingularFIMError as exc:
                raise OracleProbeError(f"objective undefined near entry {idx}: {exc}") from exc
        grad[idx] = parts[0] + 1j * parts[1]
    return grad


def tangent_residual(grad, w):
    """Norm of the sphere-tangent part of ``grad`` relative to its full norm."""
    radial = np.vdot(w, grad).real / np.vdot(w, w).real
    tangent = grad - radial * w
    return float(np.linalg.norm(tangent) / (np.linalg.norm(grad) + 1e-12))
