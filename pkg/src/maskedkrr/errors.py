"""Exception types shared across the package."""


class MaskedKrrError(Exception):
    """Base class for all library errors."""


class ShapeError(MaskedKrrError):
    """Operands have incompatible dimensions."""


class ParseError(MaskedKrrError):
    """CSV content could not be parsed; message carries row/column context."""


class LabelCardinalityError(MaskedKrrError):
    """Label column does not contain exactly two usable values."""


class DegenerateSplitError(MaskedKrrError):
    """No train/test partition satisfying the class constraint was found."""


class EmptyClassError(MaskedKrrError):
    """An operation required at least one sample of a class that has none."""


class PhaseMisuseError(MaskedKrrError):
    """A training-phase-only quantity was requested without class info."""


class ParameterError(MaskedKrrError):
    """A parameter is outside its documented range."""


class DegenerateTargetError(MaskedKrrError):
    """Fitting requires both target classes to be present."""


class SolverError(MaskedKrrError):
    """A linear system could not be solved to the required residual."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class BiasDegeneracyError(MaskedKrrError):
    """The bias denominator of the dual solution vanished."""


class ConfigError(MaskedKrrError):
    """Experiment, kernel, or model configuration is invalid."""


class ComparisonError(MaskedKrrError):
    """Reports cannot be compared (mismatched rate/mode axes)."""
