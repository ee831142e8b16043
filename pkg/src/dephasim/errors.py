"""Exception hierarchy shared by every dephasim module."""


class DephasimError(Exception):
    """Base class for all errors raised by dephasim."""


class ConfigurationError(DephasimError, ValueError):
    """Invalid grid, config file, seed or other user-supplied setup."""


class DomainError(DephasimError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(DephasimError, ArithmeticError):
    """A numerical routine failed to reach its tolerance.

    ``best_estimate`` and ``diagnostics`` carry whatever the routine had
    computed when it gave up.
    """

    def __init__(self, message, best_estimate=None, diagnostics=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class ClassificationError(DephasimError):
    """A decoherence profile cannot be assigned a regime."""
