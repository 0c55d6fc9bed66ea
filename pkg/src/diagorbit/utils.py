"""Utility functions for the diagorbit package."""

from __future__ import annotations

import logging
from fractions import Fraction
from logging import Logger
from typing import TYPE_CHECKING, Any

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from .exceptions import InputTypeError

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .diagorbit import Tolerances

__all__ = [
    "SCHEMA_VERSION",
    "as_fraction",
    "exact_array",
    "get_logger",
    "get_rng",
    "is_exact",
    "resolve_tolerances",
    "tri_state",
]

SCHEMA_VERSION = "1.0"


def get_logger() -> Logger:
    """Set up Rich Logger and return it."""
    logging.basicConfig(
        level="INFO",
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, console=Console(stderr=True))],
    )

    return logging.getLogger("diagorbit")


def get_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a numpy generator, reusing ``seed`` when it already is one."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_fraction(value: Any) -> Fraction:
    """Convert an exact scalar to :class:`~fractions.Fraction`.

    Strings of the form ``"p/q"`` or ``"p"``, integers, fractions, sympy
    rationals and finite floats (converted exactly) are accepted.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise InputTypeError("value", "rational", "'3/4'")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as ex:
            raise InputTypeError("value", "rational string", "'3/4'") from ex
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise InputTypeError("value", "finite number")
        return Fraction(float(value))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise InputTypeError("value", "rational", "'3/4'")


def exact_array(values: Any) -> NDArray[np.object_]:
    """Return an object array of :class:`~fractions.Fraction` entries."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = as_fraction(v)
    return out


def is_exact(arr: NDArray[Any]) -> bool:
    """Check whether an array holds exact scalars."""
    return arr.dtype == object


def tri_state(value: float, tol: float, band: float, pass_below: bool = True) -> str:
    """Three-way decision of ``value`` against ``tol`` with a multiplicative band.

    Values below ``tol / band`` and above ``tol * band`` are decided, anything
    in between is ``"indeterminate"``. With ``pass_below`` the small side is
    ``"pass"``, otherwise the large side is.
    """
    if value < tol / band:
        return "pass" if pass_below else "fail"
    if value > tol * band:
        return "fail" if pass_below else "pass"
    return "indeterminate"


def resolve_tolerances(tol: Tolerances | None) -> Tolerances:
    """Return ``tol`` or the default tolerances."""
    if tol is not None:
        return tol
    from .diagorbit import Tolerances

    return Tolerances()
