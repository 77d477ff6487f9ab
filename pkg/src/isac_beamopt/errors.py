"""Exception types raised by the beamforming toolkit."""


class BeamoptError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(BeamoptError, ValueError):
    """Malformed or out-of-range numerical input (shapes, NaNs, ranges)."""


class DegenerateBeamError(BeamoptError):
    """A user's effective channel gain h_k^H w_k vanished at an expansion point."""

    def __init__(self, user, gain):
        self.user = user
        self.gain = gain
        super().__init__(
            f"|h_k^H w_k| = {gain:.3e} for user k={user}; "
            "auxiliary eta_k is undefined at this beamformer")


class SingularFIMError(BeamoptError):
    """The 3x3 Fisher information matrix is (numerically) singular."""


class ZeroProjectionError(BeamoptError):
    """Projection onto the power sphere requested for a zero matrix."""


class OracleProbeError(BeamoptError):
    """A finite-difference probe hit a point where the objective is undefined."""


class ConfigError(BeamoptError, ValueError):
    """Invalid experiment configuration (unknown key, bad value, out of range)."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
