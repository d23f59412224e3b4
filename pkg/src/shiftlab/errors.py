"""Error types named for the failure they signal."""


class InvalidDimensionError(ValueError):
    """Dimension must be a positive integer."""


class InvalidConstantError(ValueError):
    """Tempering constant must exceed 1."""


class IncompatibleWindowsError(ValueError):
    """Two pattern distributions live on different windows."""


class InvalidFamilyError(ValueError):
    """Marginal family is not nested/consistent."""


class IncompatibleMiddleError(ValueError):
    """Middle marginals of two couplings disagree."""


class StageExhaustedError(ValueError):
    """Substitution stage has no word at the requested level."""
