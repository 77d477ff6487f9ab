"""
Physical model of the monostatic ISAC base station.

Half-wavelength ULAs for transmit and radar receive, the rank-one two-way
sensing channel G(theta) = a_r a_t^H together with its angle derivative, and
seeded i.i.d. Rayleigh downlink channels.

Antenna m of an n-element array (m = 0..n-1) carries the phase
pi * ((2m - n + 1) / 2) * sin(theta), so the broadside vector is all ones.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

#: Identity of the generator used for channel draws (recorded in CSV output).
GENERATOR_ID = "numpy.random.Generator(PCG64)/standard_normal(ziggurat), CN(0,1)=(x+jy)/sqrt(2)"

DEFAULT_ALPHA = 0.1 * (math.sqrt(2 / 3) + 1j * math.sqrt(1 / 3))


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters, all powers in linear mW.

    Defaults reproduce the numerical setup of the reference experiments:
    Nt=16, Nr=20, K=4, L=30, Pt=10 dBm, noise 0 dBm, I2=20, tolerance 1e-4.
    ``sigma_c_sq=None`` expands to ``[1.0] * n_users``.
    """

    n_tx: int = 16
    n_rx: int = 20
    n_users: int = 4
    n_slots: int = 30
    p_tx: float = 10.0
    sigma_c_sq: tuple = None
    sigma_s_sq: float = 1.0
    delta: float = 0.01
    alpha: complex = DEFAULT_ALPHA
    theta: float = 0.0
    outer_tol: float = 1e-4
    inner_iters: int = 20
    max_outer: int = 500
    seed: int = 0
    init: str = "mrt"

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_users", "n_slots", "inner_iters", "max_outer"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

        sigma_c = self.sigma_c_sq
        if sigma_c is None:
            sigma_c = (1.0,) * self.n_users
        elif np.isscalar(sigma_c):
            sigma_c = (float(sigma_c),) * self.n_users
        sigma_c = tuple(float(s) for s in sigma_c)
        if len(sigma_c) != self.n_users:
            raise InvalidInputError(
                f"sigma_c_sq has {len(sigma_c)} entries, expected n_users={self.n_users}")
        object.__setattr__(self, "sigma_c_sq", sigma_c)

        positives = {"p_tx": self.p_tx, "sigma_s_sq": self.sigma_s_sq,
                     "outer_tol": self.outer_tol}
        positives.update({f"sigma_c_sq[{k}]": s for k, s in enumerate(sigma_c)})
        for name, value in positives.items():
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise InvalidInputError(f"delta must be finite and >= 0, got {self.delta!r}")
        if not (np.isfinite(self.theta) and abs(self.theta) <= math.pi / 2):
            raise InvalidInputError(f"theta must lie in [-pi/2, pi/2], got {self.theta!r}")
        if not np.isfinite(complex(self.alpha)):
            raise InvalidInputError(f"alpha must be finite, got {self.alpha!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.init not in ("mrt", "random"):
            raise InvalidInputError(f"init must be 'mrt' or 'random', got {self.init!r}")

    @property
    def kappa(self):
        """FIM scale 2L / sigma_s^2."""
        return 2.0 * self.n_slots / self.sigma_s_sq

    @property
    def sigma_c_array(self):
        return np.asarray(self.sigma_c_sq, dtype=float)


@dataclass(frozen=True)
class SensingScene:
    a_tx: np.ndarray
    a_rx: np.ndarray
    a_tx_dot: np.ndarray
    a_rx_dot: np.ndarray
    g: np.ndarray
    g_dot: np.ndarray
    alpha: complex
    kappa: float
    theta: float = 0.0

    @property
    def n_tx(self):
        return self.a_tx.shape[0]

    @property
    def n_rx(self):
        return self.a_rx.shape[0]


@dataclass(frozen=True)
class ChannelSet:
    """Downlink channels; column k of ``h`` is h_k."""

    h: np.ndarray
    seed_used: int = field(default=0)


def _check_angle(theta, n):
    if not np.isfinite(theta):
        raise InvalidInputError(f"theta must be finite, got {theta!r}")
    if abs(theta) > math.pi / 2 + 1e-12:
        raise InvalidInputError(f"theta must lie in [-pi/2, pi/2], got {theta!r}")
    if int(n) != n or n < 1:
        raise InvalidInputError(f"array size must be a positive integer, got {n!r}")


def _element_offsets(n):
    return (2 * np.arange(n) - n + 1) / 2.0


def steering_vector(theta, n):
    """ULA response of ``n`` half-wavelength-spaced elements toward ``theta``."""
    _check_angle(theta, n)
    return np.exp(1j * np.pi * _element_offsets(int(n)) * np.sin(theta))


def steering_derivative(theta, n):
    """Derivative of :func:`steering_vector` with respect to ``theta``."""
    _check_angle(theta, n)
    offsets = _element_offsets(int(n))
    return 1j * np.pi * offsets * np.cos(theta) * steering_vector(theta, n)


def build_scene(cfg):
    a_tx = steering_vector(cfg.theta, cfg.n_tx)
    a_rx = steering_vector(cfg.theta, cfg.n_rx)
    a_tx_dot = steering_derivative(cfg.theta, cfg.n_tx)
    a_rx_dot = steering_derivative(cfg.theta, cfg.n_rx)
    g = np.outer(a_rx, a_tx.conj())
    g_dot = np.outer(a_rx_dot, a_tx.conj()) + np.outer(a_rx, a_tx_dot.conj())
    return SensingScene(a_tx=a_tx, a_rx=a_rx, a_tx_dot=a_tx_dot, a_rx_dot=a_rx_dot,
                        g=g, g_dot=g_dot, alpha=cfg.alpha, kappa=cfg.kappa,
                        theta=cfg.theta)


def complex_normal(rng, shape):
    """Draw CN(0, 1) samples: real and imaginary parts each N(0, 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def generate_channels(cfg):
    """Draw the Nt x K Rayleigh channel matrix from ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    return ChannelSet(h=complex_normal(rng, (cfg.n_tx, cfg.n_users)), seed_used=cfg.seed)


def channel_matrix(h):
    """Accept either a :class:`ChannelSet` or a raw Nt x K array."""
    if isinstance(h, ChannelSet):
        return h.h
    return np.asarray(h)
