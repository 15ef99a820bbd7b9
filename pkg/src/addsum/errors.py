"""Exception types shared across the package."""


class SizeGuardError(ValueError):
    """An input exceeds the configured size guard of an engine."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula or its hypotheses."""


class RegimeError(ValueError):
    """The requested coefficient does not belong to the regime of the parameters."""
