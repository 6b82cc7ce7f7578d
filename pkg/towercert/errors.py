class TowerCertError(Exception):
    """Base class for every error raised by towercert."""


# --- Field arithmetic ---
class DegenerateParameters(TowerCertError):
    """Some lambda is zero or two lambdas coincide, so the curve is singular."""


class DivisionByZero(TowerCertError, ZeroDivisionError):
    pass


class MixedFieldSpecs(TowerCertError):
    pass


# --- Polynomials ---
class RingMismatch(TowerCertError):
    pass


class ArityMismatch(TowerCertError):
    pass


class MissingImage(TowerCertError):
    pass


class UnknownVariable(TowerCertError):
    pass


class PolySyntaxError(TowerCertError, ValueError):
    """Polynomial text could not be parsed.

    Attributes:
        position: Offset into the input where parsing stopped.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# --- Computation ---
class BudgetExceeded(TowerCertError):
    def __init__(self, limit: int):
        super().__init__(f"reduction step budget of {limit} exhausted")
        self.limit = limit


# --- Geometry ---
class CompatibilityFailure(TowerCertError):
    """A map into X1 does not cover the expected map to A1."""


class ZeroParameter(TowerCertError):
    pass


class PointNotOnVariety(TowerCertError):
    pass


class ConfigError(TowerCertError):
    pass


class IllDefinedMap(TowerCertError):
    """A ring map does not send the source ideal into the target ideal."""
