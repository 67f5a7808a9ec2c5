"""Exception hierarchy for paulikron."""


class PauliKronError(Exception):
    """Base class for all errors raised by this package."""


class LengthMismatch(PauliKronError, ValueError):
    pass


class InvalidLetter(PauliKronError, ValueError):
    def __init__(self, text, position):
        self.text = text
        self.position = position
        super().__init__(
            f"invalid Pauli letter {text[position]!r} at position {position} in {text!r}"
        )


class QubitCountMismatch(PauliKronError, ValueError):
    pass


class InvalidCut(PauliKronError, ValueError):
    pass


class DimensionMismatch(PauliKronError, ValueError):
    pass


class ZeroMatrix(PauliKronError, ArithmeticError):
    pass


class RankOutOfRange(PauliKronError, IndexError):
    pass


class GuardExceeded(PauliKronError):
    def __init__(self, limit, value, bound):
        self.limit = limit
        self.value = value
        self.bound = bound
        super().__init__(f"{limit} guard exceeded: {value} > {bound}")


class NumericalFailure(PauliKronError, ArithmeticError):
    pass


class NotHermitian(PauliKronError, ValueError):
    pass


class DomainError(PauliKronError, ValueError):
    pass


class ZeroBound(PauliKronError, ArithmeticError):
    pass


class UnnormalizedState(PauliKronError, ValueError):
    pass


class BudgetExhausted(PauliKronError):
    pass


class NotCertified(PauliKronError):
    def __init__(self, trace):
        self.trace = trace
        last = trace.per_rank[-1].bound_chem if trace.per_rank else float("nan")
        super().__init__(
            f"not certified within {len(trace.per_rank)} ranks (last bound {last:.3e})"
        )


class StorageOverflow(PauliKronError, OverflowError):
    pass


class ParseError(PauliKronError, ValueError):
    def __init__(self, line, reason, path=None):
        self.line = line
        self.reason = reason
        self.path = path
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {reason}")


class EmptySystem(PauliKronError, ValueError):
    pass
