import sys


def error_message_detail(error, error_detail: sys):
    _, _, exc_tb = error_detail.exc_info()
    file_name = exc_tb.tb_frame.f_code.co_filename
    error_message = "Error occurred in Python script name [{0}] line number [{1}] error message [{2}]".format(
        file_name, exc_tb.tb_lineno, str(error)
    )
    return error_message


class customException(Exception):
    def __init__(self, error_message, error_detail: sys):
        super().__init__(error_message)
        self.error_message = error_message_detail(error_message, error_detail=error_detail)

    def __str__(self):
        return self.error_message


class ToolkitError(Exception):
    """Base class for domain errors. Never wrapped in customException."""

    code = "toolkit-error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DomainOverflow(ToolkitError):
    """A dilation or construction does not fit inside the grid."""
    code = "domain-overflow"


class ConventionViolation(ToolkitError):
    """Exponents break the p = inf => q = inf convention or a space's range."""
    code = "convention-violation"


class GridMismatch(ToolkitError):
    """Inputs live on different grids."""
    code = "grid-mismatch"


class ExponentMismatch(ToolkitError):
    """Exponent relation required by an operation does not hold."""
    code = "exponent-mismatch"


class GridTooCoarse(ToolkitError):
    """The grid resolves fewer dyadic annuli than a family needs."""
    code = "grid-too-coarse"


class PartitionDefect(ToolkitError):
    """A multiplier family failed its partition-of-unity check."""
    code = "partition-defect"


class BandOutOfRange(ToolkitError):
    """Requested band index outside the family's j_range."""
    code = "band-out-of-range"


class UnresolvedTail(ToolkitError):
    """Spectral content escapes the resolved bands."""
    code = "unresolved-tail"

    def __init__(self, message, leakage):
        super().__init__(message)
        self.leakage = leakage

    def to_dict(self):
        payload = super().to_dict()
        payload["leakage"] = self.leakage
        return payload


class MeanModeViolation(ToolkitError):
    """Negative-order Riesz potential applied to a function with nonzero mean."""
    code = "mean-mode-violation"


class UnknownTheorem(ToolkitError):
    code = "unknown-theorem"


class InconsistencyFound(ToolkitError):
    """The theorem catalog contradicts itself on a tuple."""
    code = "inconsistency-found"

    def __init__(self, message, tuple_json=None, detail=None):
        super().__init__(message)
        self.tuple_json = tuple_json
        self.detail = detail

    def to_dict(self):
        payload = super().to_dict()
        payload["tuple"] = self.tuple_json
        payload["detail"] = self.detail
        return payload


class DegenerateInput(ToolkitError):
    """A norm in a ratio denominator vanished or its defects are too large."""
    code = "degenerate-input"


class EqualSmoothness(ToolkitError):
    code = "equal-smoothness"


class NotBandLimited(ToolkitError):
    """Spectral support reaches the Nyquist strip, so no diameter is measurable."""
    code = "not-band-limited"
