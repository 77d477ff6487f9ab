"""Downlink rates and the concave rate surrogate used by the outer SCA loop."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBeamError, InvalidInputError
from .model import channel_matrix


@dataclass(frozen=True)
class CommAuxiliaries:
    """Expansion-point quantities of the rate minorant.

    ``xi`` is the SINR, ``eta = xi / (h_k^H w_k)`` and
    ``beta = xi / (total received power + noise)``, all evaluated at the
    beamformer the surrogate is built around.
    """

    xi: np.ndarray
    eta: np.ndarray
    beta: np.ndarray


def _gains(w, h, sigma_c_sq):
    w = np.asarray(w)
    h = channel_matrix(h)
    sigma = np.broadcast_to(np.asarray(sigma_c_sq, dtype=float), (h.shape[1],))
    if w.ndim != 2 or h.ndim != 2 or w.shape != h.shape:
        raise InvalidInputError(
            f"beamformer shape {w.shape} does not match channel shape {h.shape}")
    # cross[k, j] = h_k^H w_j
    cross = h.conj().T @ w
    return cross, sigma


def sinr(w, h, sigma_c_sq):
    cross, sigma = _gains(w, h, sigma_c_sq)
    power = np.abs(cross) ** 2
    desired = np.diag(power)
    interference = power.sum(axis=1) - desired
    return desired / (interference + sigma)


def compute_rates(w, h, sigma_c_sq):
    """Per-user achievable rates in nats/s/Hz and their sum.

    Returns
    -------
    rates : ndarray, shape (K,)
    sum_rate : float
    """
    rates = np.log1p(sinr(w, h, sigma_c_sq))
    return rates, float(rates.sum())


def update_comm_auxiliaries(w, h, sigma_c_sq):
    cross, sigma = _gains(w, h, sigma_c_sq)
    power = np.abs(cross) ** 2
    z = np.diag(cross)
    total = power.sum(axis=1) + sigma
    for k, zk in enumerate(z):
        if abs(zk) < 1e-30:
            raise DegenerateBeamError(k, abs(zk))
    xi = np.abs(z) ** 2 / (total - np.abs(z) ** 2)
    return CommAuxiliaries(xi=xi, eta=xi / z, beta=xi / total)


def eval_comm_surrogate(w, aux, h, sigma_c_sq):
    """Evaluate the rate minorant f_k at ``w`` for auxiliaries built elsewhere.

    Returns per-user values and their sum. Equal to the true rates at the
    expansion point and below them everywhere else.
    """
    cross, sigma = _gains(w, h, sigma_c_sq)
    total = (np.abs(cross) ** 2).sum(axis=1) + sigma
    z = np.diag(cross)
    f = (np.log1p(aux.xi) + 2.0 * np.real(z * aux.eta)
         - aux.beta * total - aux.xi)
    return f, float(f.sum())
