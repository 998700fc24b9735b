"""Exception hierarchy and the CLI exit-code contract."""

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_SPEC_ERROR = 2
EXIT_DOMAIN_ERROR = 3


class MaxDepError(Exception):
    """Base class for all toolkit errors."""


class SpecError(MaxDepError, ValueError):
    """Malformed model spec document or invalid family/generator parameters."""


class DomainError(MaxDepError, ValueError):
    """Argument outside the domain of an operation."""


class ConstraintError(DomainError):
    """Spectral, indicator-law or standardization constraint violated."""


class CheckFailure(MaxDepError):
    """One or more verification checks failed."""

    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__(f"{len(self.failed)} check(s) failed: {', '.join(self.failed)}")


def exit_code(exc: BaseException) -> int:
    """Map a MaxDepError (or stray ValueError) onto the documented exit codes."""
    if isinstance(exc, CheckFailure):
        return EXIT_CHECK_FAILURE
    if isinstance(exc, SpecError):
        return EXIT_SPEC_ERROR
    return EXIT_DOMAIN_ERROR
