"""Exception types shared across the package."""


class CogmeshError(Exception):
    """Base class for all package-specific errors."""


class InstanceFormatError(CogmeshError):
    """Instance text is not well-formed (bad JSON, wrong shape)."""


class InstanceValidationError(CogmeshError):
    """Parsed instance data violates a model invariant."""


class AssignmentInvariantError(CogmeshError):
    """A channel assignment breaks a structural invariant."""


class SearchSpaceError(CogmeshError):
    """Brute-force search space exceeds the configured guard."""


class EnumerationCapError(CogmeshError):
    """Exact enumeration would visit more states than the configured cap."""


class WindowSearchError(CogmeshError):
    """No contention window within the scan limit meets the target."""


class OverheadError(CogmeshError):
    """MAC overhead consumes the entire cycle (delta >= 1)."""
