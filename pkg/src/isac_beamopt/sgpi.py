"""
SCA outer loop with a shifted generalized power iteration (SGPI) inner solver.

Each outer iteration replaces the rate terms by their concave minorants and
the trace-inverse sensing term by its tangent in F, giving the quadratic
subproblem

    maximize  tr(W^H A W) + 2 Re tr(W^H B)   s.t.  tr(W W^H) = Pt

with A = lambda I + (Q + Q^H)/2 - delta H diag(beta) H^H made PSD by the
shift lambda, and B = delta H diag(conj(eta)). The inner loop iterates
W <- Pi(B + A W), a minorize-maximize scheme whose objective never decreases.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, ZeroProjectionError
from .fim import assemble_fim, assemble_q, derive_sensing
from .model import channel_matrix, complex_normal
from .rates import CommAuxiliaries, compute_rates, eval_comm_surrogate, update_comm_auxiliaries

logger = logging.getLogger(__name__)

LAMBDA_REL_MARGIN = 1e-3
LAMBDA_ABS_MARGIN = 1e-9
INNER_REL_TOL = 1e-8


@dataclass(frozen=True)
class SurrogateState:
    comm_aux: CommAuxiliaries
    phi: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    q: np.ndarray
    a: np.ndarray
    lambda_shift: float
    const_offset: float
    trace_f_inv_t: float
    linear: np.ndarray

    def subproblem_value(self, w):
        """Quadratic subproblem objective tr(W^H A W) + 2 Re tr(W^H B)."""
        return float(np.vdot(w, self.a @ w).real + 2.0 * np.vdot(w, self.linear).real)

    def surrogate_value(self, w):
        """Surrogate of the true objective; exact for feasible ``w``."""
        return self.subproblem_value(w) + self.const_offset


@dataclass
class IterationTrace:
    outer_objectives: list = field(default_factory=list)
    inner_objectives: list = field(default_factory=list)
    sum_rates: list = field(default_factory=list)
    trace_crlbs: list = field(default_factory=list)
    crlb_thetas: list = field(default_factory=list)
    outer_times_ms: list = field(default_factory=list)
    converged: bool = False
    max_power_error: float = 0.0
    wall_time: float = 0.0

    @property
    def outer_count(self):
        return len(self.inner_objectives)

    @property
    def inner_counts(self):
        return [len(v) - 1 for v in self.inner_objectives]


class Objective(NamedTuple):
    objective: float
    sum_rate: float
    trace_f_inv: float
    crlb_theta: float


def dominant_eigenvalue(m, tol=1e-9, max_iter=200, seed=0, radius_iters=30, squarings=4):
    """Largest eigenvalue of a Hermitian matrix by shifted power iteration.

    A short power run estimates the spectral radius r, and the iteration then
    runs on B = (m + 1.05 r I)^(2^squarings), whose dominant eigenvector is
    that of the algebraically largest eigenvalue of ``m``. Raising to a power
    only sharpens the eigenvalue ratios. The returned value is the Rayleigh
    quotient of ``m``; if it has not settled to ``tol`` after ``max_iter``
    steps, the Frobenius norm (a guaranteed upper bound) is returned instead.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    norm = np.linalg.norm(m)
    if not np.isfinite(norm):
        raise InvalidInputError("matrix contains non-finite entries")
    if np.linalg.norm(m - m.conj().T) > 1e-10 * max(norm, 1e-300):
        raise InvalidInputError("matrix is not Hermitian")
    if norm == 0.0:
        return 0.0

    rng = np.random.default_rng(seed)
    start = complex_normal(rng, m.shape[0])
    start /= np.linalg.norm(start)

    v = start
    radius = 0.0
    for _ in range(radius_iters):
        u = m @ v
        radius = np.linalg.norm(u)
        if radius == 0.0:
            break
        v = u / radius
    shift = min(1.05 * radius, norm) if radius > 0 else norm

    b = m + shift * np.eye(m.shape[0])
    for _ in range(squarings):
        b = b @ b
        b = 0.5 * (b + b.conj().T) / np.linalg.norm(b)

    v = start
    rho = np.inf
    for _ in range(max_iter):
        u = b @ v
        length = np.linalg.norm(u)
        if length == 0.0:
            break
        v = u / length
        rho_new = np.vdot(v, m @ v).real
        if abs(rho_new - rho) <= tol * max(abs(rho_new), 1e-5 * shift):
            return float(rho_new)
        rho = rho_new
    logger.debug("power iteration unconverged after %d steps; using Frobenius bound", max_iter)
    return float(norm)


def project_power(p, p_tx):
    """Scale ``p`` onto the sphere tr(P P^H) = p_tx."""
    p = np.asarray(p)
    norm = np.linalg.norm(p)
    if norm < 1e-30:
        raise ZeroProjectionError("cannot project a zero matrix onto the power sphere")
    return p * (np.sqrt(p_tx) / norm)


def mrt_beamformer(h, p_tx):
    return project_power(channel_matrix(h), p_tx)


def random_beamformer(shape, p_tx, seed):
    rng = np.random.default_rng([seed, 1])
    return project_power(complex_normal(rng, shape), p_tx)


def eval_objective(w, h, scene, cfg):
    """delta * sum rate - tr(F^{-1}) together with its two ingredients."""
    _, sum_rate = compute_rates(w, h, cfg.sigma_c_sq)
    sensing = derive_sensing(assemble_fim(w, scene))
    return Objective(cfg.delta * sum_rate - sensing.trace_f_inv, sum_rate,
                     sensing.trace_f_inv, sensing.crlb_theta)


def sca_surrogate_direct(w, state, h, scene, cfg):
    """Evaluate the outer surrogate term by term (no quadratic-form shortcut).

    delta * sum_k f_k(W) + tr(F(W) Phi) - 2 tr(F_t^{-1}); the last constant makes
    it coincide with the true objective at the expansion point.
    """
    _, f_sum = eval_comm_surrogate(w, state.comm_aux, h, cfg.sigma_c_sq)
    f = assemble_fim(w, scene).f
    return cfg.delta * f_sum + float(np.sum(f * state.phi)) - 2.0 * state.trace_f_inv_t


def build_surrogate(w_t, h, scene, cfg):
    hm = channel_matrix(h)
    aux = update_comm_auxiliaries(w_t, hm, cfg.sigma_c_sq)
    sensing = derive_sensing(assemble_fim(w_t, scene))
    phi = sensing.phi
    q = assemble_q(phi, scene)

    delta = cfg.delta
    comm = delta * (hm * aux.beta) @ hm.conj().T
    m = comm - 0.5 * (q + q.conj().T)
    m = 0.5 * (m + m.conj().T)
    lam = max(0.0, dominant_eigenvalue(m)) * (1.0 + LAMBDA_REL_MARGIN) + LAMBDA_ABS_MARGIN
    a = lam * np.eye(m.shape[0]) - m

    sigma = cfg.sigma_c_array
    const = (delta * float(np.sum(np.log1p(aux.xi) - aux.beta * sigma - aux.xi))
             - 2.0 * sensing.trace_f_inv - lam * cfg.p_tx)
    return SurrogateState(comm_aux=aux, phi=phi, sigma1=aux.eta, sigma2=aux.beta,
                          q=q, a=a, lambda_shift=lam, const_offset=const,
                          trace_f_inv_t=sensing.trace_f_inv,
                          linear=delta * hm * np.conj(aux.eta))


def sgpi_inner(w0, state, h, cfg):
    """Run up to ``cfg.inner_iters`` projected power steps W <- Pi(B + A W).

    Stops early once the subproblem objective changes by less than 1e-8
    relative. Returns the last iterate and the objective after every step
    (entry 0 is the starting value).
    """
    w = np.asarray(w0)
    value = state.subproblem_value(w)
    values = [value]
    for _ in range(cfg.inner_iters):
        w = project_power(state.linear + state.a @ w, cfg.p_tx)
        new_value = state.subproblem_value(w)
        values.append(new_value)
        done = abs(new_value - value) <= INNER_REL_TOL * abs(value)
        value = new_value
        if done:
            break
    return w, values


def _power_error(w, p_tx):
    return abs(np.vdot(w, w).real - p_tx) / p_tx


def solve(cfg, h, scene, w_init=None):
    """Alternate surrogate construction and SGPI until the objective settles.

    Returns the final beamformer and an :class:`IterationTrace`. Hitting
    ``cfg.max_outer`` is not an error; ``trace.converged`` reports it.
    """
    hm = channel_matrix(h)
    if w_init is not None:
        w = project_power(w_init, cfg.p_tx)
    elif cfg.init == "random":
        w = random_beamformer(hm.shape, cfg.p_tx, cfg.seed)
    else:
        w = mrt_beamformer(hm, cfg.p_tx)

    trace = IterationTrace()
    start = time.perf_counter()
    current = eval_objective(w, hm, scene, cfg)
    trace.outer_objectives.append(current.objective)
    trace.sum_rates.append(current.sum_rate)
    trace.trace_crlbs.append(current.trace_f_inv)
    trace.crlb_thetas.append(current.crlb_theta)
    trace.max_power_error = _power_error(w, cfg.p_tx)

    for it in range(1, cfg.max_outer + 1):
        tick = time.perf_counter()
        state = build_surrogate(w, hm, scene, cfg)
        w, inner = sgpi_inner(w, state, hm, cfg)
        new = eval_objective(w, hm, scene, cfg)
        trace.outer_times_ms.append((time.perf_counter() - tick) * 1e3)

        trace.inner_objectives.append(inner)
        trace.outer_objectives.append(new.objective)
        trace.sum_rates.append(new.sum_rate)
        trace.trace_crlbs.append(new.trace_f_inv)
        trace.crlb_thetas.append(new.crlb_theta)
        trace.max_power_error = max(trace.max_power_error, _power_error(w, cfg.p_tx))

        change = new.objective - current.objective
        if change < -1e-6:
            logger.warning("outer objective decreased by %.3e at iteration %d", -change, it)
        current = new
        if abs(change) < cfg.outer_tol:
            trace.converged = True
            break

    trace.wall_time = (time.perf_counter() - start) * 1e3
    return w, trace
