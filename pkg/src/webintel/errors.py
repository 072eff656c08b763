"""Exception types shared across the package."""


class WebintelError(Exception):
    """Base class for all package-specific errors."""


class UnparsableUrl(WebintelError):
    """No hostname could be isolated from the input string."""


class UnknownLabel(WebintelError):
    """Raw label has no entry in the label mapping table."""

    def __init__(self, raw: str):
        super().__init__(f"no mapping for raw label {raw!r}")
        self.raw = raw


class SchemaMismatch(WebintelError):
    """CSV header does not match the expected feature schema."""

    def __init__(self, expected, found):
        super().__init__(
            f"header mismatch: expected {list(expected)!r}, found {list(found)!r}"
        )
        self.expected = list(expected)
        self.found = list(found)


class InvalidK(WebintelError):
    """Fold count is out of range for the given data."""


class BadHeader(WebintelError):
    """Embedding CSV header is not of the form url,e0,...,e{d-1}."""


class DuplicateUrl(WebintelError):
    """Embedding CSV contains the same URL twice."""


class NonFiniteValue(WebintelError):
    """Embedding CSV contains NaN or infinity."""


class EmptyVector(WebintelError):
    """An operation received a zero-length vector."""


class SingularScatter(WebintelError):
    """Within-class scatter matrix is singular even after ridge damping."""


class TooFewSamples(WebintelError):
    """Not enough rows to fit the requested model."""


class NegativeInput(WebintelError):
    """Chi-squared selection requires nonnegative inputs."""


class KTooLarge(WebintelError):
    """Requested more columns than the matrix has."""


class NonFiniteInput(WebintelError):
    """Model input contains NaN or infinity."""


class EmptyData(WebintelError):
    """Model fit received zero rows."""


class InvalidConfig(WebintelError):
    """Model or pipeline configuration failed validation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ShapeMismatch(WebintelError):
    """Prediction and truth arrays disagree in shape."""


class UnfittedModel(WebintelError):
    """Operation requires a fitted model."""


class IntelError(WebintelError):
    """Base class for threat-intelligence client failures."""


class RateLimited(IntelError):
    """Provider returned a rate-limit response."""

    def __init__(self, retry_after: float = 0.0):
        super().__init__(f"rate limited (retry after {retry_after:g}s)")
        self.retry_after = retry_after


class AuthFailure(IntelError):
    """Provider rejected the configured credentials."""


class ProviderUnavailable(IntelError):
    """Provider is unreachable or returned a server error."""
