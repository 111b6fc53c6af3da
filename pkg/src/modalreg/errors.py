"""Exception hierarchy shared across the package."""


class ModalRegressionError(Exception):
    """Base class for all errors raised by this package."""

    code = "E_MODALREG"


class DegenerateWindow(ModalRegressionError):
    """Every kernel product vanished: no observation carries weight at the
    evaluation point.  Usually means the predictor bandwidth is too small."""

    code = "E_DEGENERATE_WINDOW"


class SingularDesign(ModalRegressionError):
    """The weighted design matrix is numerically rank deficient even after
    ridge stabilization."""

    code = "E_SINGULAR_DESIGN"


class NonconcaveAtZero(ModalRegressionError):
    """The estimated error density is not concave at its center, so the
    plug-in bandwidth machinery cannot proceed."""

    code = "E_NONCONCAVE"


class ZeroCurvature(ModalRegressionError):
    """Degenerate plug-in quantities: the bandwidth ratio is undefined."""

    code = "E_ZERO_CURVATURE"


class InvalidPlugin(ModalRegressionError):
    """Plug-in quantities violate the preconditions of the closed-form
    optimal bandwidth."""

    code = "E_INVALID_PLUGIN"


class OutOfRange(ModalRegressionError):
    """Requested evaluation point lies outside the fitted grid."""

    code = "E_OUT_OF_RANGE"


class RateViolation(ModalRegressionError):
    """Supplied bandwidth schedule grossly violates the asymptotic rate
    conditions the check relies on."""

    code = "E_RATE_VIOLATION"


class AllFitsFailed(ModalRegressionError):
    """Every cross-validation candidate failed on some fold."""

    code = "E_ALL_FITS_FAILED"


class ParseError(ModalRegressionError):
    """Input file could not be parsed."""

    code = "E_PARSE"


class DimensionError(ModalRegressionError):
    """Ragged or inconsistently shaped input."""

    code = "E_DIMENSION"


class NonFiniteError(ModalRegressionError):
    """Input contains NaN or infinite values."""

    code = "E_NON_FINITE"
