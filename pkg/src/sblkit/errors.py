"""Exception hierarchy shared across the package.

The CLI maps :class:`InputError` to exit code 2 and :class:`NumericError`
to exit code 3.
"""


class SblkitError(Exception):
    pass


class InputError(SblkitError):
    """Malformed user input (expression text, model or candidate files)."""


class NumericError(SblkitError):
    """A numerical procedure could not produce a trustworthy result."""


class ExprSyntaxError(InputError):
    def __init__(self, offset, message):
        self.offset = offset
        self.message = message
        super().__init__(f"syntax error at byte {offset}: {message}")


class UnknownFunction(ExprSyntaxError):
    def __init__(self, offset, name):
        self.name = name
        super().__init__(offset, f"unknown function {name!r}")


class UnboundVariable(InputError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no binding for variable {name!r}")

    def __str__(self):
        return self.args[0]


class DomainError(NumericError, ArithmeticError):
    def __init__(self, node, value):
        self.node = node
        self.value = value
        super().__init__(f"{value!r} outside the domain of {node}")


class SingularJacobian(NumericError):
    pass


class NonConvergence(NumericError):
    pass


class SingularHessian(NumericError):
    pass


class SingularEpsMatrix(NumericError):
    pass


class DimensionMismatch(InputError, ValueError):
    pass


class NotHyperbolic(NumericError):
    pass


class NotClosed(NumericError):
    def __init__(self, max_residual):
        self.max_residual = max_residual
        super().__init__(f"defining residual {max_residual:.3e} along the path exceeds tolerance")


class PathDisagreement(NumericError):
    def __init__(self, difference):
        self.difference = difference
        super().__init__(f"flux reconstructions along two paths differ by {difference:.3e}")


class DegenerateLambda0(NumericError):
    pass


class InvalidSpec(InputError):
    """A model specification violates a stated constraint (e.g. monotonicity)."""
