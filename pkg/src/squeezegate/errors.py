"""Exception hierarchy.  Every error carries a stable machine-readable ``code``."""


class SqueezeGateError(Exception):
    code = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ConfigError(SqueezeGateError, ValueError):
    code = "invalid_config"


class BranchCompatibilityError(SqueezeGateError, ValueError):
    """The branch engine cannot represent an op; use the Fock oracle."""

    code = "branch_incompatible"


class OpenLoopError(SqueezeGateError):
    """Some x-basis branch leaves the phonon mode displaced or squeezed."""

    code = "open_loop"


class TruncationError(SqueezeGateError):
    """Fock population reached the top of the truncated space."""

    code = "truncation_leak"


class NormDriftError(SqueezeGateError):
    code = "norm_drift"


class InfeasibleWaveformError(SqueezeGateError):
    code = "infeasible_waveform"


class AmplitudeCapError(SqueezeGateError):
    code = "amplitude_cap"

    def __init__(self, message: str, required: float):
        super().__init__(message)
        self.required = required


class FitError(SqueezeGateError, ValueError):
    code = "fit_error"


class CalibrationError(SqueezeGateError, ValueError):
    code = "calibration_error"
