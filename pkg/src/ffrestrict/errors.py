"""Exception types raised across the package."""


class FFRestrictError(Exception):
    """Base class for all library errors."""


class NonPrime(FFRestrictError, ValueError):
    pass


class EvenCharacteristic(FFRestrictError, ValueError):
    pass


class TooLarge(FFRestrictError, ValueError):
    pass


class NoIrreducibleFound(FFRestrictError, RuntimeError):
    pass


class DivisionByZero(FFRestrictError, ZeroDivisionError):
    pass


class MinusOneIsSquare(FFRestrictError, ValueError):
    """An operation that needs -1 to be a non-square got a field where it is a square."""


class InputTooLarge(FFRestrictError, ValueError):
    pass


class EmptySet(FFRestrictError, ValueError):
    pass


class ZeroFunction(FFRestrictError, ValueError):
    pass


class NotASlice(FFRestrictError, ValueError):
    pass


class NotRegular(FFRestrictError, ValueError):
    pass


class ClassMismatch(FFRestrictError, ValueError):
    pass


class InfeasibleSpec(FFRestrictError, ValueError):
    pass


class Infeasible(FFRestrictError, ValueError):
    pass


class ParallelTerms(FFRestrictError, ValueError):
    pass


class TableMismatch(FFRestrictError, AssertionError):
    pass


class SchemaError(FFRestrictError, ValueError):
    pass


class SizeMismatch(FFRestrictError, ValueError):
    """Two sets whose sizes are not within the required factor of each other."""
