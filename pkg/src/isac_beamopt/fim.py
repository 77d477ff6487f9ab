"""
Fisher information for the single-target echo model.

Parameters are ordered (theta, Re alpha, Im alpha). With R_x = W W^H and
kappa = 2L / sigma_s^2 the blocks are

    F_tt = kappa |alpha|^2 tr(Gd R_x Gd^H)
    F_ta = kappa Re{conj(alpha) tr(G R_x Gd^H) [1, j]}
    F_aa = kappa tr(G R_x G^H) I_2

where Gd is the angle derivative of the two-way channel G.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SingularFIMError


@dataclass(frozen=True)
class FisherInfo:
    f: np.ndarray

    @property
    def f_theta_theta(self):
        return float(self.f[0, 0])

    @property
    def f_theta_alpha(self):
        return self.f[0:1, 1:3]

    @property
    def f_alpha_alpha(self):
        return self.f[1:3, 1:3]


@dataclass(frozen=True)
class SensingDerived:
    f_inv: np.ndarray
    trace_f_inv: float
    crlb_theta: float
    phi: np.ndarray


def assemble_fim(w, scene):
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != scene.n_tx:
        raise InvalidInputError(
            f"beamformer shape {w.shape} incompatible with Nt={scene.n_tx}")
    gw = scene.g @ w
    gdw = scene.g_dot @ w
    alpha = scene.alpha
    kappa = scene.kappa
    # Frobenius forms keep the Hermitian traces exactly real.
    t_dd = np.vdot(gdw, gdw).real
    t_gg = np.vdot(gw, gw).real
    t_gd = np.vdot(gdw, gw)  # tr(G R_x Gd^H)

    cross = np.conj(alpha) * t_gd
    f = np.empty((3, 3))
    f[0, 0] = kappa * abs(alpha) ** 2 * t_dd
    f[0, 1] = f[1, 0] = kappa * cross.real
    f[0, 2] = f[2, 0] = kappa * (1j * cross).real
    f[1, 1] = f[2, 2] = kappa * t_gg
    f[1, 2] = f[2, 1] = 0.0
    return FisherInfo(f=f)


def inverse_3x3(f):
    """Closed-form adjugate inverse of a symmetric 3x3 matrix.

    Raises SingularFIMError when det(F) <= 1e-12 * (tr F / 3)^3.
    """
    f = np.asarray(f, dtype=float)
    a, b, c = f[0]
    _, d, e = f[1]
    _, _, g = f[2]
    c00 = d * g - e * e
    c01 = c * e - b * g
    c02 = b * e - c * d
    c11 = a * g - c * c
    c12 = b * c - a * e
    c22 = a * d - b * b
    det = a * c00 + b * c01 + c * c02
    scale = np.trace(f) / 3.0
    if not np.isfinite(det) or det <= 1e-12 * max(scale, 0.0) ** 3 or scale <= 0:
        raise SingularFIMError(
            f"FIM is singular (det={det:.3e}, tr/3={scale:.3e}); "
            "the beamformer carries no energy toward the target")
    adj = np.array([[c00, c01, c02],
                    [c01, c11, c12],
                    [c02, c12, c22]])
    return adj / det


def derive_sensing(fim):
    f = fim.f if isinstance(fim, FisherInfo) else np.asarray(fim, dtype=float)
    f_inv = inverse_3x3(f)
    return SensingDerived(f_inv=f_inv, trace_f_inv=float(np.trace(f_inv)),
                          crlb_theta=float(f_inv[0, 0]), phi=f_inv @ f_inv)


def assemble_q(phi, scene):
    """Matrix Q with Re tr(W W^H Q) = tr(F(W) phi) for symmetric ``phi``.

    Q is in general not Hermitian; only its Hermitian part enters the
    quadratic subproblem.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (3, 3):
        raise InvalidInputError(f"phi must be 3x3, got {phi.shape}")
    g, gd, alpha = scene.g, scene.g_dot, scene.alpha
    gd_h = gd.conj().T
    q = (phi[0, 0] * abs(alpha) ** 2 * (gd_h @ gd)
         + 2.0 * (phi[0, 1] + 1j * phi[0, 2]) * np.conj(alpha) * (gd_h @ g)
         + (phi[1, 1] + phi[2, 2]) * (g.conj().T @ g))
    return scene.kappa * q
