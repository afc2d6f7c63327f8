"""Exception types shared across the package."""


class GlucotwinError(Exception):
    """Base class for all package errors."""


class ParseError(GlucotwinError):
    """Malformed input document. Carries a byte offset when known."""

    def __init__(self, message, *, offset=None, line=None):
        self.offset = offset
        self.line = line
        where = []
        if offset is not None:
            where.append(f"byte {offset}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class RecordError(GlucotwinError):
    """A single record could not be parsed. Carries its line or row index."""

    def __init__(self, message, *, line=None, row=None):
        self.line = line
        self.row = row
        where = []
        if line is not None:
            where.append(f"line {line}")
        if row is not None:
            where.append(f"row {row}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class FormatError(GlucotwinError):
    """Input has the wrong shape (missing header, wrong column count, ...)."""


class ImputationError(GlucotwinError):
    """A gap-filling policy cannot be applied to the series."""


class TrainingError(GlucotwinError):
    """Model training failed (degenerate input, divergence, ...)."""


class LayoutMismatchError(GlucotwinError):
    """A model was asked to score feature vectors it was not trained on."""


class CalibrationError(GlucotwinError):
    """Response-curve calibration could not meet the target tolerances."""

    def __init__(self, message, *, residual=None):
        self.residual = residual
        super().__init__(message)


class ScenarioValidationError(GlucotwinError):
    """An intervention scenario violates the causal graph or feasible ranges."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
