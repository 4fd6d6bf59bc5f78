"""Exception hierarchy.

Errors are split by what went wrong so the CLI can map them to exit codes:
bad input (2), a well-formed query with no answer (3), and a failed
internal consistency check (4).
"""


class ContextAlgError(Exception):
    exit_code = 1


class InputError(ContextAlgError, ValueError):
    exit_code = 2


class DomainError(ContextAlgError, ArithmeticError):
    exit_code = 3


class ConsistencyError(ContextAlgError, AssertionError):
    exit_code = 4


class FormulaSyntaxError(InputError):
    def __init__(self, offset: int, expected: str, found: str = ""):
        self.offset = offset
        self.expected = expected
        self.found = found
        found_msg = f", found {found!r}" if found else ", found end of input"
        super().__init__(f"syntax error at offset {offset}: expected {expected}{found_msg}")


class UnknownAtomError(InputError):
    pass


class AtomLimitError(InputError):
    pass


class UniverseError(InputError):
    pass


class CapExceededError(InputError):
    def __init__(self, cap: int, count: int):
        self.cap = cap
        self.count = count
        super().__init__(f"closure would generate {count} formulas, cap is {cap}")


class UniverseMismatchError(InputError):
    pass


class ForeignSymbolError(InputError):
    pass


class NamespaceError(InputError):
    pass


class NotInSpanError(DomainError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"vector is not in the span of the basis (residual {residual:.3g})")


class NoLogicalContentError(DomainError):
    pass


class EstimationError(DomainError):
    pass
