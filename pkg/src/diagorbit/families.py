"""Generators for explicit tensors on the boundary of the orbit of the unit tensor.

``K_n`` has rank ``2n - 1`` but is a limit of the in-orbit tensors
``K_{n,ε}``; ``K'_n`` is ``K_n`` with its second index reversed and has an
explicit decomposition into ``2n - 1`` terms over the roots of unity. ``W``
(the Werner tensor) is ``K_2``; ``L`` is a 3x3x3 boundary tensor of rank 4.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import numpy as np

from .exceptions import InputRangeError, InputValueError
from .scalar_poly import MultiPoly, PolyMatrix, poly_det
from .tensor_core import Tensor3, rank1_tensor
from .utils import as_fraction, exact_array

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

__all__ = [
    "FAMILIES",
    "Rank1Term",
    "certificate_holds",
    "gen_L",
    "gen_L_eps",
    "gen_Kn",
    "gen_Kn_eps",
    "gen_Kn_eps_symbolic",
    "gen_Kn_prime",
    "gen_W",
    "generate",
    "kn_lower_bound_certificate",
    "kn_prime_decomposition",
    "l_rank4_decomposition",
    "reconstruct",
]

FAMILIES = ("kn", "kn-eps", "kn-prime", "werner", "l", "l-eps")


@dataclass(frozen=True)
class Rank1Term:
    """``weight * (u ⊗ v ⊗ w)``."""

    u: NDArray[Any]
    v: NDArray[Any]
    w: NDArray[Any]
    weight: Any = 1

    def to_tensor(self) -> Tensor3:
        """The rank-one tensor."""
        return rank1_tensor(self.u, self.v, self.w, self.weight)


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise InputRangeError("n", ">= 2")


def _from_slice_matrices(slices: Sequence[NDArray[Any]]) -> Tensor3:
    return Tensor3(exact_array(np.stack(slices, axis=-1)), "rational")


def _shift(n: int) -> NDArray[Any]:
    return exact_array(np.eye(n, k=1, dtype=int))


def gen_Kn(n: int) -> Tensor3:  # noqa: N802
    """``K_n``: the ``j``-th 3-slice is ``N^(j-1)`` for the nilpotent shift ``N``.

    Examples
    --------
    >>> [str(v) for v in do.gen_Kn(2).slices(3)[1].ravel()]
    ['0', '1', '0', '0']
    """
    _check_n(n)
    return gen_Kn_eps(n, 0)


def gen_Kn_eps(n: int, eps: Any) -> Tensor3:  # noqa: N802
    """``K_{n,ε}`` with slices ``S_j = S_2^(j-1)`` and ``S_2 = N + ε diag(0, 1, ..., n-1)``.

    ``eps`` is exact (an integer, fraction or ``"p/q"`` string);
    ``gen_Kn_eps(n, 0)`` is ``K_n``.
    """
    _check_n(n)
    e = as_fraction(eps)
    s2 = _shift(n) + exact_array(np.diag([e * a for a in range(n)]))
    slices = [exact_array(np.eye(n, dtype=int))]
    for _ in range(1, n):
        slices.append(slices[-1].dot(s2))
    return _from_slice_matrices(slices)


def _poly_matmul(
    a: Sequence[Sequence[MultiPoly]], b: Sequence[Sequence[MultiPoly]]
) -> list[list[MultiPoly]]:
    n = len(a)
    zero = MultiPoly.zero(1)
    out = []
    for r in range(n):
        row = []
        for c in range(n):
            acc = zero
            for k in range(n):
                acc = acc + a[r][k] * b[k][c]
            row.append(acc)
        out.append(row)
    return out


def gen_Kn_eps_symbolic(n: int) -> Tensor3:  # noqa: N802
    """``K_{n,ε}`` with entries as polynomials in ``ε`` (printed as ``x1``).

    The constant terms of the entries form ``K_n``.
    """
    _check_n(n)
    eps = MultiPoly.variable(0, 1)
    zero, one = MultiPoly.zero(1), MultiPoly.one(1)
    s2 = [
        [eps * r if c == r else (one if c == r + 1 else zero) for c in range(n)] for r in range(n)
    ]
    current = [[one if c == r else zero for c in range(n)] for r in range(n)]
    slices = [current]
    for _ in range(1, n):
        current = _poly_matmul(current, s2)
        slices.append(current)
    entries = np.empty((n, n, n), dtype=object)
    for k, s in enumerate(slices):
        for r in range(n):
            for c in range(n):
                entries[r, c, k] = s[r][c]
    return Tensor3(entries, "symbolic")


def gen_Kn_prime(n: int) -> Tensor3:  # noqa: N802
    """``K'_n``: 1 at the positions with ``i + j + k = n + 2`` (1-based).

    The tensor is symmetric under every permutation of its indices.
    """
    _check_n(n)
    idx = np.arange(n)
    mask = (idx[:, None, None] + idx[None, :, None] + idx[None, None, :]) == n - 1
    return Tensor3(exact_array(mask.astype(int)), "rational")


def kn_prime_decomposition(n: int) -> list[Rank1Term]:
    """``2n - 1`` rank-one terms summing to ``K'_n``.

    With ``ζ`` a primitive ``(2n - 1)``-th root of unity, the ``l``-th term is
    ``ζ^(l(n-3)) / (2n - 1) · v_l ⊗ v_l ⊗ v_l`` for
    ``v_l = (ζ^l, ζ^(2l), ..., ζ^(nl))``. Computed in double precision.
    """
    _check_n(n)
    m = 2 * n - 1
    zeta = cmath.exp(2j * cmath.pi / m)
    terms = []
    for t in range(m):
        v = np.array([zeta ** (t * a) for a in range(1, n + 1)])
        terms.append(Rank1Term(v, v, v, zeta ** (t * (n - 3)) / m))
    return terms


def reconstruct(terms: Sequence[Rank1Term]) -> Tensor3:
    """Sum of rank-one terms."""
    if not terms:
        raise InputRangeError("terms", "a non-empty sequence")
    total = terms[0].to_tensor()
    for t in terms[1:]:
        total = total + t.to_tensor()
    return total


def kn_lower_bound_certificate(n: int) -> MultiPoly:
    """``det(K_n *_3 w)`` as a polynomial in ``w = (x1, ..., xn)``.

    The pencil is upper triangular with ``w_1`` on the diagonal, so the
    determinant is ``w_1^n``: every invertible combination of the slices has
    a nonzero first weight.

    Examples
    --------
    >>> do.kn_lower_bound_certificate(3).to_text()
    '1*x1^3'
    """
    _check_n(n)
    return poly_det(PolyMatrix.from_pencil(gen_Kn(n).slices(3)))


def certificate_holds(n: int) -> bool:
    """Whether :func:`kn_lower_bound_certificate` equals ``w_1^n`` exactly."""
    return kn_lower_bound_certificate(n) == MultiPoly.variable(0, n) ** n


def gen_W() -> Tensor3:  # noqa: N802
    """The Werner tensor, with 3-slices ``I`` and ``e12``; equal to ``K_2``."""
    return gen_Kn(2)


def _unit_matrix(r: int, c: int) -> NDArray[Any]:
    m = np.zeros((3, 3), dtype=int)
    m[r, c] = 1
    return m


def gen_L() -> Tensor3:  # noqa: N802
    """The 3x3x3 tensor with 3-slices ``I``, ``e12`` and ``e33``."""
    return gen_L_eps(0)


def gen_L_eps(eps: Any) -> Tensor3:  # noqa: N802
    """``L_ε`` with 3-slices ``I``, ``e12 + ε e22`` and ``e33``; ``L_0 = L``."""
    e = as_fraction(eps)
    second = exact_array(_unit_matrix(0, 1)) + exact_array(_unit_matrix(1, 1)) * e
    third = exact_array(_unit_matrix(2, 2))
    return _from_slice_matrices([exact_array(np.eye(3, dtype=int)), second, third])


def l_rank4_decomposition() -> list[Rank1Term]:
    """Four exact rank-one terms summing to ``L``.

    ``e1⊗e1⊗e1 + e2⊗e2⊗e1 + e1⊗e2⊗e2 + e3⊗e3⊗(e1 + e3)``: the third slice is
    folded into the first.
    """
    e1, e2, e3 = (exact_array(np.eye(3, dtype=int)[r]) for r in range(3))
    return [
        Rank1Term(e1, e1, e1),
        Rank1Term(e2, e2, e1),
        Rank1Term(e1, e2, e2),
        Rank1Term(e3, e3, e1 + e3),
    ]


def generate(family: str, n: int | None = None, eps: Any = None) -> Tensor3:
    """Generate a member of a named family.

    Parameters
    ----------
    family : {"kn", "kn-eps", "kn-prime", "werner", "l", "l-eps"}
        The family.
    n : int, optional
        Dimension for the ``kn`` families.
    eps : str or Fraction, optional
        Perturbation for ``kn-eps`` and ``l-eps``, defaults to 1.
    """
    if family not in FAMILIES:
        raise InputValueError("family", FAMILIES, family)
    if family.startswith("kn") and n is None:
        raise InputRangeError("n", ">= 2 for the kn families")
    e = Fraction(1) if eps is None else as_fraction(eps)
    builders = {
        "kn": lambda: gen_Kn(n),  # type: ignore[arg-type]
        "kn-eps": lambda: gen_Kn_eps(n, e),  # type: ignore[arg-type]
        "kn-prime": lambda: gen_Kn_prime(n),  # type: ignore[arg-type]
        "werner": gen_W,
        "l": gen_L,
        "l-eps": lambda: gen_L_eps(e),
    }
    return builders[family]()
