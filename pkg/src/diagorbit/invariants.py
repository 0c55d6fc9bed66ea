"""Covariants ``h_i``, ``f_i``, the rational invariant ``r_i`` and the tangles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Literal

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    FieldMismatchError,
    InputValueError,
    SingularEvaluationError,
    UnsupportedDimensionError,
)
from .kernels import tangle3_sum, tangle4_sum
from .scalar_poly import PolyMatrix, hessian, poly_det
from .tensor_core import AXES, Tensor3, contract, mat_det, mat_inv
from .utils import as_fraction, exact_array

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

__all__ = [
    "CovariantValue",
    "cayley_delta",
    "covariant_coefficients",
    "f",
    "f_eval",
    "h",
    "h_eval",
    "hessian_eval",
    "r_eval",
    "tangle",
    "tangle3",
    "tangle4",
    "tangle_covariant",
]

MAX_SYMBOLIC_F = 5


@dataclass(frozen=True)
class CovariantValue:
    """A covariant of a tensor as an exact polynomial in ``x1..xn``.

    Parameters
    ----------
    axis : int
        The axis ``i`` the covariant is attached to.
    poly : MultiPoly
        The polynomial.
    degrees : tuple of int
        ``(deg_P, deg_x)``: degree in the tensor entries and in ``x``.
    kind : {"h", "f", "G"}
        Which covariant this is.
    """

    axis: int
    poly: MultiPoly
    degrees: tuple[int, int]
    kind: Literal["h", "f", "G"]

    @property
    def is_zero(self) -> bool:
        """Whether the covariant is the zero polynomial."""
        return self.poly.is_zero

    def to_text(self) -> str:
        """Canonical text of the polynomial."""
        return self.poly.to_text()


def _check(p: Tensor3, i: int, operation: str) -> None:
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    if not p.is_exact:
        raise FieldMismatchError(operation, "rational", p.field)


def h(p: Tensor3, i: int) -> CovariantValue:
    """``h_i(P; x) = det(P *_i x)`` as an exact polynomial.

    Parameters
    ----------
    p : Tensor3
        A rational tensor.
    i : int
        Axis in ``{1, 2, 3}``.

    Returns
    -------
    CovariantValue
        Degrees ``(n, n)``; the zero polynomial exactly when ``P`` is
        ``i``-slice-singular.

    Examples
    --------
    >>> str(do.h(do.unit_tensor(3), 3).poly)
    '1*x1*x2*x3'
    """
    _check(p, i, "h")
    pencil = PolyMatrix.from_pencil(p.slices(i))
    return CovariantValue(i, poly_det(pencil), (p.n, p.n), "h")


def _point(x0: Sequence[Any], n: int) -> tuple[NDArray[Any], bool]:
    if len(x0) != n:
        raise DimensionMismatchError("point", n, len(x0))
    if any(isinstance(v, (float, complex, np.floating, np.complexfloating)) for v in x0):
        dtype = complex if any(isinstance(v, complex) for v in x0) else float
        return np.asarray(x0, dtype=dtype), False
    return exact_array(list(x0)), True


def _pencil_at(
    p: Tensor3, i: int, x0: Sequence[Any]
) -> tuple[NDArray[Any], list[NDArray[Any]], bool]:
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    if p.field == "symbolic":
        raise FieldMismatchError("pointwise evaluation", "numeric", p.field)
    pt, exact_pt = _point(x0, p.n)
    exact = exact_pt and p.is_exact
    q = p if exact else p.to_float()
    if not exact:
        pt = pt.astype(complex if np.iscomplexobj(pt) or q.field == "complex" else float)
    return contract(q, i, pt), q.slices(i), exact


def h_eval(p: Tensor3, i: int, x0: Sequence[Any]) -> Any:
    """Evaluate ``h_i(P; x0)``.

    Exact (a :class:`~fractions.Fraction`) when both ``P`` and ``x0`` are exact,
    a float or complex number otherwise.
    """
    a, _, _ = _pencil_at(p, i, x0)
    return mat_det(a)


def hessian_eval(p: Tensor3, i: int, x0: Sequence[Any]) -> tuple[NDArray[Any], Any]:
    """Hessian of ``h_i`` at ``x0`` together with ``h_i(P; x0)``."""
    a, slices, exact = _pencil_at(p, i, x0)
    det = mat_det(a)
    n = p.n
    if det == 0:
        if not exact:
            raise SingularEvaluationError(x0)
        values = hessian(h(p, i).poly).evaluate([as_fraction(v) for v in x0])
        return values, det
    # Jacobi: d2 det(A)/dx_a dx_b = det(A) (t_a t_b - tr(A^-1 S_a A^-1 S_b)), t_a = tr(A^-1 S_a)
    a_inv = mat_inv(a)
    prods = [a_inv @ s for s in slices]
    traces = [np.trace(t) for t in prods]
    hess = np.empty((n, n), dtype=object if exact else np.result_type(a, float))
    for r in range(n):
        for c in range(r, n):
            hess[r, c] = hess[c, r] = det * (traces[r] * traces[c] - np.trace(prods[r] @ prods[c]))
    return hess, det


def f_eval(p: Tensor3, i: int, x0: Sequence[Any]) -> Any:
    """Evaluate ``f_i(P; x0) = (-1)^(n-1) det(Hessian of h_i at x0)``.

    The Hessian is built pointwise from Jacobi's formula for the second
    derivatives of a determinant; exact inputs at a point where ``h_i``
    vanishes use the exact second derivatives of ``h_i`` instead.
    """
    hess, _ = hessian_eval(p, i, x0)
    return (-1) ** (p.n - 1) * mat_det(hess)


def f(p: Tensor3, i: int) -> CovariantValue:
    """``f_i(P; x) = (-1)^(n-1) det(H_x(h_i(P; x)))`` as an exact polynomial.

    Parameters
    ----------
    p : Tensor3
        A rational tensor with ``n <= 5``.
    i : int
        Axis in ``{1, 2, 3}``.

    Returns
    -------
    CovariantValue
        Degrees ``(n^2, n(n-2))``; either zero or of exact ``x``-degree ``n(n-2)``.

    Examples
    --------
    >>> str(do.f(do.unit_tensor(3), 1).poly)
    '2*x1*x2*x3'
    """
    _check(p, i, "f")
    n = p.n
    if n > MAX_SYMBOLIC_F:
        raise UnsupportedDimensionError("symbolic f (use f_eval)", f"n <= {MAX_SYMBOLIC_F}", n)
    hess = hessian(h(p, i).poly)
    det = poly_det(hess)
    poly = det if n % 2 == 1 else -det
    return CovariantValue(i, poly, (n * n, n * (n - 2)), "f")


def r_eval(p: Tensor3, i: int, x0: Sequence[Any], tol: float = 1e-14) -> Any:
    """Evaluate ``r_i = f_i / ((n-1) h_i^(n-2))`` at ``x0``.

    Raises
    ------
    SingularEvaluationError
        If ``h_i(P; x0)`` is zero (exact) or below ``tol`` relative to
        ``(max|P| * max|x0|)^n`` (float).
    """
    n = p.n
    if n < 2:
        raise UnsupportedDimensionError("r_i", "n >= 2", n)
    hess, det = hessian_eval(p, i, x0)
    if isinstance(det, Fraction):
        if det == 0:
            raise SingularEvaluationError(x0)
    else:
        scale = (p.norm_max() * max(abs(complex(v)) for v in x0)) ** n
        if abs(det) <= tol * scale:
            raise SingularEvaluationError(x0)
    fval = (-1) ** (n - 1) * mat_det(hess)
    return fval / ((n - 1) * det ** (n - 2))


def _scaled_integers(p: Tensor3) -> tuple[NDArray[np.object_], int]:
    lcm = math.lcm(*(v.denominator for v in p.entries.ravel()))
    ints = np.empty(p.entries.shape, dtype=object)
    for idx, v in np.ndenumerate(p.entries):
        ints[idx] = int(v * lcm)
    return ints, lcm


def _tangle(p: Tensor3, n: int, degree: int, raw: Any) -> Any:
    if p.n != n:
        raise UnsupportedDimensionError(f"tau{n}", f"n = {n}", p.n)
    if p.field == "rational":
        ints, lcm = _scaled_integers(p)
        return Fraction(raw(ints), lcm**degree)
    if p.field == "symbolic":
        return raw(p.entries)
    value = raw(p.entries)
    if isinstance(value, complex) and p.is_real:
        return value.real
    return value


def tangle3(p: Tensor3) -> Any:
    """The degree-6 invariant ``τ3`` of a 3x3x3 tensor.

    ``τ3(D) = 6`` and ``τ3(P(g1, g2, g3)) = det(g1)^2 det(g2)^2 det(g3)^2 τ3(P)``.
    Exact for rational (and symbolic) tensors, float otherwise.

    Examples
    --------
    >>> do.tangle3(do.unit_tensor(3))
    Fraction(6, 1)
    """
    return _tangle(p, 3, 6, tangle3_sum)


def tangle4(p: Tensor3) -> Any:
    """The degree-8 invariant ``τ4`` of a 4x4x4 tensor, with ``τ4(D) = 24``.

    The eight tensor factors are contracted against six order-4 ε symbols
    on index groups ``(i1 j1 k1 l1)``, ``(m1 n1 r1 s1)``, ``(i2 l2 m2 s2)``,
    ``(j2 k2 n2 r2)``, ``(i3 j3 m3 n3)`` and ``(k3 l3 r3 s3)``, so every one
    of the 24 indices is summed exactly once.
    """
    return _tangle(p, 4, 8, tangle4_sum)


def cayley_delta(p: Tensor3) -> Any:
    """Cayley's hyperdeterminant of a 2x2x2 tensor.

    Examples
    --------
    >>> do.cayley_delta(do.unit_tensor(2))
    Fraction(1, 1)
    """
    if p.n != 2:
        raise UnsupportedDimensionError("Cayley's hyperdeterminant", "n = 2", p.n)
    if p.field == "symbolic":
        raise FieldMismatchError("cayley_delta", "numeric", p.field)
    e = p.entries
    p000, p001, p010, p011 = e[0, 0, 0], e[0, 0, 1], e[0, 1, 0], e[0, 1, 1]
    p100, p101, p110, p111 = e[1, 0, 0], e[1, 0, 1], e[1, 1, 0], e[1, 1, 1]
    squares = (p000 * p111) ** 2 + (p001 * p110) ** 2 + (p010 * p101) ** 2 + (p011 * p100) ** 2
    mixed = (
        p000 * p001 * p110 * p111
        + p000 * p010 * p101 * p111
        + p000 * p011 * p100 * p111
        + p001 * p010 * p101 * p110
        + p001 * p011 * p110 * p100
        + p010 * p011 * p101 * p100
    )
    quartic = p000 * p011 * p101 * p110 + p001 * p010 * p100 * p111
    return squares - 2 * mixed + 4 * quartic


def tangle(p: Tensor3) -> Any:
    """Weight-(2, 2, 2) invariant for ``n = 2, 3, 4``: Cayley's Δ, ``τ3`` or ``τ4``."""
    funcs = {2: cayley_delta, 3: tangle3, 4: tangle4}
    if p.n not in funcs:
        raise UnsupportedDimensionError("tangle", "n in {2, 3, 4}", p.n)
    return funcs[p.n](p)


def tangle_covariant(p: Tensor3, i: int) -> CovariantValue:
    """``G_i(P; x) = h_i(P; x)^(n-2) τ_n(P)`` for ``n = 3, 4``."""
    _check(p, i, "tangle_covariant")
    if p.n not in (3, 4):
        raise UnsupportedDimensionError("tangle_covariant", "n in {3, 4}", p.n)
    n = p.n
    tau = tangle3(p) if n == 3 else tangle4(p)
    poly = h(p, i).poly ** (n - 2) * tau
    return CovariantValue(i, poly, (n * n, n * (n - 2)), "G")


def covariant_coefficients(p: Tensor3, i: int = 3) -> dict[tuple[int, ...], Fraction]:
    """The coefficients ``p_α`` of ``f_i(P; x) = Σ_α p_α x^α``."""
    return {alpha: as_fraction(c) for alpha, c in f(p, i).poly.terms.items()}
