"""Customized diagorbit exceptions."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Generator, Sequence


class InputValueError(Exception):
    """Exception raised for invalid input.

    Parameters
    ----------
    inp : str
        Name of the input parameter
    valid_inputs : tuple
        List of valid inputs
    given : str, optional
        The given input, defaults to None.
    """

    def __init__(
        self,
        inp: str,
        valid_inputs: Sequence[str | int] | Generator[str | int, None, None],
        given: str | int | None = None,
    ) -> None:
        if given is None:
            self.message = f"Given {inp} is invalid. Valid options are:\n"
        else:
            self.message = f"Given {inp} ({given}) is invalid. Valid options are:\n"
        self.message += "\n".join(str(i) for i in valid_inputs)
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class InputTypeError(TypeError):
    """Exception raised when a function argument type is invalid.

    Parameters
    ----------
    arg : str
        Name of the function argument
    valid_type : str
        The valid type of the argument
    example : str, optional
        An example of a valid form of the argument, defaults to None.
    """

    def __init__(self, arg: str, valid_type: str, example: str | None = None) -> None:
        self.message = f"The {arg} argument should be of type {valid_type}"
        if example is not None:
            self.message += f":\n{example}"
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class InputRangeError(ValueError):
    """Exception raised when a function argument is not in the valid range.

    Parameters
    ----------
    variable : str
        Variable with invalid value
    valid_range : str
        Valid range
    """

    def __init__(self, variable: str, valid_range: str) -> None:
        self.message = f"Valid range for {variable} is {valid_range}."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class DimensionMismatchError(ValueError):
    """Exception raised when operands have incompatible shapes.

    Parameters
    ----------
    what : str
        The offending operand.
    expected : str
        The expected shape or length.
    given : str
        The received shape or length.
    """

    def __init__(self, what: str, expected: Any, given: Any) -> None:
        self.message = f"Dimension mismatch for {what}: expected {expected}, got {given}."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class FieldMismatchError(TypeError):
    """Exception raised when an operation does not support the tensor's field.

    Parameters
    ----------
    operation : str
        Name of the operation.
    supported : str
        The supported field(s).
    given : str
        The field of the given input.
    """

    def __init__(self, operation: str, supported: str, given: str) -> None:
        self.message = f"{operation} requires a {supported} input, got a {given} one."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class TensorParseError(ValueError):
    """Exception raised when a tensor or counts document cannot be parsed.

    Parameters
    ----------
    reason : str
        What went wrong.
    source : str, optional
        Where the document came from, defaults to None.
    """

    def __init__(self, reason: str, source: str | None = None) -> None:
        self.message = "Failed to parse the input document"
        if source is not None:
            self.message += f" ({source})"
        self.message += f":\n{reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class UnsupportedDimensionError(ValueError):
    """Exception raised when an operation is only defined for some ``n``.

    Parameters
    ----------
    operation : str
        Name of the operation.
    supported : str
        Description of the supported dimensions.
    n : int
        The given dimension.
    """

    def __init__(self, operation: str, supported: str, n: int) -> None:
        self.message = f"{operation} is only available for {supported}, got n={n}."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class SingularEvaluationError(ArithmeticError):
    """Exception raised when a rational function is evaluated at a pole.

    Parameters
    ----------
    point : sequence
        The evaluation point.
    """

    def __init__(self, point: Sequence[Any]) -> None:
        pt = ", ".join(str(p) for p in point)
        self.message = f"h vanishes at x0 = ({pt}); retry at another point."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class SliceSingularError(ValueError):
    """Exception raised when no combination of slices along an axis is invertible.

    Parameters
    ----------
    axis : int
        The axis.
    """

    def __init__(self, axis: int) -> None:
        self.axis = axis
        self.message = f"The tensor is {axis}-slice-singular: h_{axis} is the zero polynomial."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class IndeterminateError(ArithmeticError):
    """Exception raised when a numerical decision falls in the indeterminate band.

    Parameters
    ----------
    what : str
        The undecided quantity.
    residual : float
        The offending residual.
    """

    def __init__(self, what: str, residual: float) -> None:
        self.residual = residual
        self.message = f"Could not decide {what} reliably (residual {residual:.3e})."
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class NotInOrbitError(ValueError):
    """Exception raised when an operation requires a tensor in the dense orbit.

    Parameters
    ----------
    report : MembershipReport
        The membership report that led to the rejection.
    """

    def __init__(self, report: Any) -> None:
        self.report = report
        self.message = (
            f"The tensor is not in the orbit of the unit tensor (verdict: {report.verdict})."
        )
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class InvalidParametersError(ValueError):
    """Exception raised when model parameters violate their constraints.

    Parameters
    ----------
    violations : list of str
        Description of each violated constraint.
    """

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        self.message = "The model parameters violate the following constraints:\n"
        self.message += "\n".join(violations)
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message


class InconsistentModelError(ValueError):
    """Exception raised when parameters cannot be recovered from a tensor.

    Parameters
    ----------
    reason : str
        The inconsistency found.
    """

    def __init__(self, reason: str) -> None:
        self.message = f"Inconsistent model tensor: {reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the error message."""
        return self.message
