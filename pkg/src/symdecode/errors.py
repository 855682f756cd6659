"""Exception types shared across the package."""


class SymdecodeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SymdecodeError):
    """Invalid configuration value or combination."""


class FilterError(SymdecodeError):
    """Numerical failure inside the Kalman filter/smoother (e.g. a
    non-positive innovation variance after an update)."""


class EMError(SymdecodeError):
    """EM loop failure: non-finite log-likelihood or a degenerate latent
    sequence that cannot be rescaled into the active space."""


class DegenerateInputError(SymdecodeError):
    """An estimator denominator vanished; the message names the sum."""


class OutOfSubspaceError(SymdecodeError):
    """A position fell outside the (tolerance-extended) subspace bounds."""

    def __init__(self, z: float, z_min: float, z_max: float, detail: str = ""):
        self.z = z
        self.z_min = z_min
        self.z_max = z_max
        self.detail = detail
        msg = f"position {z!r} outside subspace [{z_min!r}, {z_max!r}]"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UndefinedMetricError(SymdecodeError):
    """A metric is mathematically undefined for the given input
    (e.g. constant truth for R^2, constant sequence for PCC)."""


class CsvFormatError(SymdecodeError):
    """Malformed interchange CSV; message carries file and line number."""


class PipelineStageError(SymdecodeError):
    """Wraps an error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
