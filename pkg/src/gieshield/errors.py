"""Exception hierarchy. CLI maps ConfigError to exit code 2, NumericError to 3."""


class GieError(Exception):
    pass


class ConfigError(GieError, ValueError):
    pass


class DomainError(GieError, ValueError):
    pass


class GeometryError(DomainError):
    pass


class UnsupportedMaterialError(DomainError):
    pass


class CompositionError(GieError, ValueError):
    pass


class StateError(GieError, ValueError):
    pass


class NumericError(GieError, ArithmeticError):
    pass


class TruncationError(NumericError):
    def __init__(self, msg: str, suggested_n: int | None = None):
        super().__init__(msg)
        self.suggested_n = suggested_n
