"""Exception types shared across the package."""


class LatticefoldError(Exception):
    """Base class for all package errors."""


class BadCharacter(LatticefoldError):
    """Layout text contains a symbol outside the pin alphabet."""


class BadShape(LatticefoldError):
    """Layout text does not form a 17x17 character grid."""


class GtMismatch(LatticefoldError):
    """Guide-tube cells in the text disagree with the fixed pattern."""


class NonFinite(LatticefoldError):
    """A numeric input was NaN or infinite."""


class InventoryOutOfRange(LatticefoldError):
    """Requested Gd inventory exceeds the available fuel positions."""


class InventoryUnrepresentable(LatticefoldError):
    """No combination of symmetry orbits sums to the requested inventory."""


class DegenerateMaterial(LatticefoldError):
    """Cross sections make the eigenvalue problem singular."""


class NoConvergence(LatticefoldError):
    """Power iteration exceeded the iteration limit."""


class ZeroVariance(LatticefoldError):
    """A statistics column is constant, so its correlation is undefined."""


class UnknownAxis(LatticefoldError):
    """Requested scatter axis is not a record field."""


class ConfigError(LatticefoldError):
    """Config file could not be parsed or contains unknown keys."""


class EvaluatorError(LatticefoldError):
    """An external evaluator process failed or replied with garbage."""
