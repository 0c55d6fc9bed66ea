"""Exact sparse multivariate polynomials and polynomial matrices.

Polynomials live in ``QQ[x1, ..., xn]`` (or ``QQ_I[x1, ..., xn]`` for
Gaussian-rational coefficients) through sympy's sparse ``PolyRing``. The
wrappers below keep them immutable and give them a canonical text form.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Union

import numpy as np
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .exceptions import DimensionMismatchError, InputRangeError, TensorParseError
from .utils import as_fraction

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    from numpy.typing import NDArray

__all__ = [
    "GaussianRational",
    "MultiPoly",
    "PolyMatrix",
    "coefficient",
    "hessian",
    "poly_det",
    "substitute_linear",
]

_TERM = re.compile(r"^x(\d+)(?:\^(\d+))?$")
_GAUSS = re.compile(r"^\((-?[\d/]+)([+-])([\d/]+)i\)$")


@dataclass(frozen=True)
class GaussianRational:
    """An exact complex number ``real + imag*i`` with rational parts."""

    real: Fraction
    imag: Fraction

    def __complex__(self) -> complex:
        """Return the nearest complex float."""
        return complex(float(self.real), float(self.imag))

    def __str__(self) -> str:
        """Return ``(a+bi)``."""
        sign = "-" if self.imag < 0 else "+"
        return f"({self.real}{sign}{abs(self.imag)}i)"


Coefficient = Union[Fraction, GaussianRational]


@functools.cache
def poly_ring(nvars: int, gaussian: bool = False) -> PolyRing:
    """Return the ring ``QQ[x1..xn]`` (or ``QQ_I[x1..xn]``) in graded-lex order."""
    if nvars < 1:
        raise InputRangeError("nvars", ">= 1")
    symbols = [f"x{i}" for i in range(1, nvars + 1)]
    return PolyRing(symbols, QQ_I if gaussian else QQ, grlex)


def _is_gaussian(value: Any) -> bool:
    if isinstance(value, GaussianRational):
        return value.imag != 0
    if isinstance(value, (complex, np.complexfloating)):
        return value.imag != 0
    return False


def to_domain(value: Any, gaussian: bool) -> Any:
    """Convert a scalar into an element of ``QQ`` or ``QQ_I``."""
    if isinstance(value, GaussianRational):
        re_, im_ = value.real, value.imag
    elif isinstance(value, (complex, np.complexfloating)):
        re_, im_ = as_fraction(float(value.real)), as_fraction(float(value.imag))
    else:
        re_, im_ = as_fraction(value), Fraction(0)
    if gaussian:
        return QQ_I(QQ(re_.numerator, re_.denominator), QQ(im_.numerator, im_.denominator))
    if im_ != 0:
        raise DimensionMismatchError("coefficient domain", "rational", "Gaussian rational")
    return QQ(re_.numerator, re_.denominator)


def _q(c: Any) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def from_domain(c: Any, gaussian: bool) -> Coefficient:
    """Convert a ``QQ``/``QQ_I`` element to :class:`Fraction` or :class:`GaussianRational`."""
    if not gaussian:
        return _q(c)
    real, imag = _q(c.x), _q(c.y)
    if imag == 0:
        return real
    return GaussianRational(real, imag)


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Sparse polynomial in ``x1, ..., xn`` with exact coefficients.

    Parameters
    ----------
    rep : sympy.polys.rings.PolyElement
        The underlying sparse term map. It must not be mutated.
    """

    rep: PolyElement

    @classmethod
    def zero(cls, nvars: int, gaussian: bool = False) -> MultiPoly:
        """Return the zero polynomial."""
        return cls(poly_ring(nvars, gaussian).zero)

    @classmethod
    def one(cls, nvars: int, gaussian: bool = False) -> MultiPoly:
        """Return the constant polynomial 1."""
        return cls(poly_ring(nvars, gaussian).one)

    @classmethod
    def constant(cls, value: Any, nvars: int) -> MultiPoly:
        """Return a constant polynomial."""
        ring = poly_ring(nvars, _is_gaussian(value))
        return cls(ring.ground_new(to_domain(value, ring.domain == QQ_I)))

    @classmethod
    def variable(cls, index: int, nvars: int) -> MultiPoly:
        """Return the indeterminate ``x_{index+1}`` (``index`` is 0-based)."""
        if not 0 <= index < nvars:
            raise InputRangeError("index", f"[0, {nvars - 1}]")
        return cls(poly_ring(nvars).gens[index])

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, ...], Any], nvars: int) -> MultiPoly:
        """Build a polynomial from an exponent-to-coefficient mapping."""
        gaussian = any(_is_gaussian(c) for c in terms.values())
        ring = poly_ring(nvars, gaussian)
        data = {}
        for monom, c in terms.items():
            if len(monom) != nvars:
                raise DimensionMismatchError("exponent vector", nvars, len(monom))
            data[tuple(int(e) for e in monom)] = to_domain(c, gaussian)
        return cls(ring.from_dict(data))

    @classmethod
    def linear_form(cls, coeffs: Sequence[Any]) -> MultiPoly:
        """Return ``sum(coeffs[a] * x_{a+1})``."""
        nvars = len(coeffs)
        gaussian = any(_is_gaussian(c) for c in coeffs)
        ring = poly_ring(nvars, gaussian)
        data = {}
        for a, c in enumerate(coeffs):
            dc = to_domain(c, gaussian)
            if dc:
                data[tuple(int(a == b) for b in range(nvars))] = dc
        return cls(ring.from_dict(data))

    @classmethod
    def from_text(cls, text: str, nvars: int) -> MultiPoly:
        """Parse the canonical text form produced by :meth:`to_text`."""
        text = text.strip()
        if text == "0":
            return cls.zero(nvars)
        terms: dict[tuple[int, ...], Any] = {}
        for chunk in text.split(" + "):
            coeff_txt, *factors = chunk.strip().split("*")
            gm = _GAUSS.match(coeff_txt)
            try:
                if gm:
                    imag = Fraction(gm.group(3)) * (-1 if gm.group(2) == "-" else 1)
                    coeff: Any = GaussianRational(Fraction(gm.group(1)), imag)
                else:
                    coeff = Fraction(coeff_txt)
            except (ValueError, ZeroDivisionError) as ex:
                raise TensorParseError(f"bad coefficient {coeff_txt!r}") from ex
            monom = [0] * nvars
            for factor in factors:
                m = _TERM.match(factor)
                if m is None or not 1 <= int(m.group(1)) <= nvars:
                    raise TensorParseError(f"bad factor {factor!r}")
                monom[int(m.group(1)) - 1] += int(m.group(2) or 1)
            terms[tuple(monom)] = coeff
        return cls.from_terms(terms, nvars)

    @property
    def nvars(self) -> int:
        """Number of indeterminates."""
        return self.rep.ring.ngens

    @property
    def gaussian(self) -> bool:
        """Whether the coefficient domain is the Gaussian rationals."""
        return self.rep.ring.domain == QQ_I

    @property
    def terms(self) -> dict[tuple[int, ...], Coefficient]:
        """Exponent vector to nonzero coefficient."""
        return {m: from_domain(c, self.gaussian) for m, c in self.rep.items()}

    @property
    def is_zero(self) -> bool:
        """Whether this is the zero polynomial."""
        return not self.rep

    @property
    def degree(self) -> int:
        """Total degree, ``-1`` for the zero polynomial."""
        return max((sum(m) for m in self.rep), default=-1)

    @property
    def is_homogeneous(self) -> bool:
        """Whether all terms share the same total degree."""
        return len({sum(m) for m in self.rep}) <= 1

    def coefficient(self, alpha: Sequence[int]) -> Coefficient:
        """Return the coefficient of ``x^alpha`` (zero when absent)."""
        if len(alpha) != self.nvars:
            raise DimensionMismatchError("exponent vector", self.nvars, len(alpha))
        c = self.rep.get(tuple(int(a) for a in alpha))
        return Fraction(0) if c is None else from_domain(c, self.gaussian)

    def diff(self, var: int) -> MultiPoly:
        """Partial derivative with respect to ``x_{var+1}`` (``var`` is 0-based)."""
        return MultiPoly(self.rep.diff(self.rep.ring.gens[var]))

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Evaluate at a point.

        Exact points (integers, fractions, rational strings) give an exact
        :class:`~fractions.Fraction` (or :class:`GaussianRational`), float or
        complex points give a float or complex number.
        """
        if len(point) != self.nvars:
            raise DimensionMismatchError("point", self.nvars, len(point))
        inexact = any(
            isinstance(p, (float, complex, np.floating, np.complexfloating)) for p in point
        )
        if not inexact:
            if self.gaussian:
                vals = [to_domain(p, True) for p in point]
                return from_domain(self.rep(*vals), True)
            pts = [as_fraction(p) for p in point]
            total = Fraction(0)
            for monom, c in self.rep.items():
                term = _q(c)
                for x, e in zip(pts, monom):
                    if e:
                        term *= x**e
                total += term
            return total
        pts_c = np.asarray(point, dtype=complex)
        total_c = 0j
        for monom, c in self.rep.items():
            cc = complex(from_domain(c, self.gaussian))
            total_c += cc * np.prod(pts_c ** np.asarray(monom))
        if not self.gaussian and not np.iscomplexobj(np.asarray(point)):
            return float(total_c.real)
        return total_c

    def substitute_linear(self, g: Any) -> MultiPoly:
        """Replace ``x`` by ``g @ x``; see :func:`substitute_linear`."""
        return substitute_linear(self, g)

    def exquo(self, other: MultiPoly) -> MultiPoly:
        """Exact division; raises when ``other`` does not divide ``self``."""
        a, b = _unify(self, other)
        return MultiPoly(a.exquo(b))

    def to_rational(self) -> MultiPoly:
        """Drop to ``QQ`` coefficients; all imaginary parts must vanish."""
        if not self.gaussian:
            return self
        terms = self.terms
        if any(isinstance(c, GaussianRational) for c in terms.values()):
            raise DimensionMismatchError("coefficient domain", "rational", "Gaussian rational")
        return MultiPoly.from_terms(terms, self.nvars)

    def to_text(self) -> str:
        """Canonical text: terms in descending graded-lex order, e.g. ``2*x1*x2 + -1*x3^2``."""
        if self.is_zero:
            return "0"
        parts = []
        for monom in sorted(self.rep, key=lambda m: (sum(m), m), reverse=True):
            coeff = from_domain(self.rep[monom], self.gaussian)
            factors = [f"x{a + 1}" if e == 1 else f"x{a + 1}^{e}" for a, e in enumerate(monom) if e]
            parts.append("*".join([str(coeff), *factors]))
        return " + ".join(parts)

    def _coerce(self, other: Any) -> tuple[PolyElement, PolyElement] | None:
        if isinstance(other, MultiPoly):
            return _unify(self, other)
        if isinstance(other, (int, Fraction, GaussianRational, complex, np.integer)):
            gaussian = self.gaussian or _is_gaussian(other)
            ring = poly_ring(self.nvars, gaussian)
            mine = self.rep if self.gaussian == gaussian else _lift(self.rep, ring)
            return mine, ring.ground_new(to_domain(other, gaussian))
        return None

    def __add__(self, other: Any) -> MultiPoly:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return MultiPoly(pair[0] + pair[1])

    __radd__ = __add__

    def __sub__(self, other: Any) -> MultiPoly:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return MultiPoly(pair[0] - pair[1])

    def __rsub__(self, other: Any) -> MultiPoly:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return MultiPoly(pair[1] - pair[0])

    def __mul__(self, other: Any) -> MultiPoly:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return MultiPoly(pair[0] * pair[1])

    __rmul__ = __mul__

    def __neg__(self) -> MultiPoly:
        return MultiPoly(-self.rep)

    def __pow__(self, exponent: int) -> MultiPoly:
        if exponent < 0:
            raise InputRangeError("exponent", ">= 0")
        return MultiPoly(self.rep**exponent)

    def __eq__(self, other: object) -> bool:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return pair[0] == pair[1]

    def __hash__(self) -> int:
        return hash((self.nvars, self.to_text()))

    def __bool__(self) -> bool:
        return not self.is_zero

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_text()!r}, nvars={self.nvars})"


def _lift(rep: PolyElement, ring: PolyRing) -> PolyElement:
    gaussian = ring.domain == QQ_I
    return ring.from_dict({m: to_domain(_q(c), gaussian) for m, c in rep.items()})


def _unify(a: MultiPoly, b: MultiPoly) -> tuple[PolyElement, PolyElement]:
    if a.nvars != b.nvars:
        raise DimensionMismatchError("polynomial ring", a.nvars, b.nvars)
    if a.gaussian == b.gaussian:
        return a.rep, b.rep
    ring = poly_ring(a.nvars, True)
    left = a.rep if a.gaussian else _lift(a.rep, ring)
    right = b.rep if b.gaussian else _lift(b.rep, ring)
    return left, right


@dataclass(frozen=True)
class PolyMatrix:
    """Matrix of polynomials sharing the same indeterminates.

    Parameters
    ----------
    entries : tuple of tuple of MultiPoly
        Row-major entries.
    """

    entries: tuple[tuple[MultiPoly, ...], ...]

    def __post_init__(self) -> None:
        if not self.entries or not self.entries[0]:
            raise DimensionMismatchError("poly matrix", "at least 1x1", "empty")
        cols = len(self.entries[0])
        nvars = self.entries[0][0].nvars
        for row in self.entries:
            if len(row) != cols:
                raise DimensionMismatchError("poly matrix row", cols, len(row))
            for e in row:
                if e.nvars != nvars:
                    raise DimensionMismatchError("poly matrix entry ring", nvars, e.nvars)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[MultiPoly]]) -> PolyMatrix:
        """Build from nested iterables."""
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def from_pencil(cls, slices: Sequence[NDArray[Any]]) -> PolyMatrix:
        """Return ``sum_c x_{c+1} * slices[c]`` for exact square slices."""
        nvars = len(slices)
        rows, cols = np.shape(slices[0])
        return cls(
            tuple(
                tuple(MultiPoly.linear_form([s[r, c] for s in slices]) for c in range(cols))
                for r in range(rows)
            )
        )

    @property
    def rows(self) -> int:
        """Number of rows."""
        return len(self.entries)

    @property
    def cols(self) -> int:
        """Number of columns."""
        return len(self.entries[0])

    @property
    def nvars(self) -> int:
        """Number of indeterminates."""
        return self.entries[0][0].nvars

    def __getitem__(self, idx: tuple[int, int]) -> MultiPoly:
        r, c = idx
        return self.entries[r][c]

    @property
    def is_symmetric(self) -> bool:
        """Whether the matrix equals its transpose."""
        return self.rows == self.cols and all(
            self[r, c] == self[c, r] for r in range(self.rows) for c in range(r + 1, self.cols)
        )

    @property
    def is_zero(self) -> bool:
        """Whether every entry is the zero polynomial."""
        return all(e.is_zero for row in self.entries for e in row)

    def transpose(self) -> PolyMatrix:
        """Return the transpose."""
        return PolyMatrix(tuple(zip(*self.entries)))

    def evaluate(self, point: Sequence[Any]) -> NDArray[Any]:
        """Evaluate entrywise at a point."""
        vals = [[e.evaluate(point) for e in row] for row in self.entries]
        if all(isinstance(v, (Fraction, GaussianRational)) for row in vals for v in row):
            return np.array(vals, dtype=object)
        is_complex = any(isinstance(v, complex) for r in vals for v in r)
        return np.array(vals, dtype=complex if is_complex else float)

    def minor(self, row: int, col: int) -> PolyMatrix:
        """Return the matrix with ``row`` and ``col`` removed."""
        return PolyMatrix(
            tuple(
                tuple(e for c, e in enumerate(r) if c != col)
                for i, r in enumerate(self.entries)
                if i != row
            )
        )

    def adjugate(self) -> PolyMatrix:
        """Classical adjoint: ``adj(M)[a, b] = (-1)^(a+b) det(M without row b, col a)``."""
        n = self.rows
        if n != self.cols:
            raise DimensionMismatchError("adjugate input", "square", f"{n}x{self.cols}")
        if n == 1:
            return PolyMatrix(((MultiPoly.one(self.nvars),),))
        cof = [[poly_det(self.minor(b, a)) for b in range(n)] for a in range(n)]
        return PolyMatrix(
            tuple(
                tuple(cof[a][b] if (a + b) % 2 == 0 else -cof[a][b] for b in range(n))
                for a in range(n)
            )
        )

    def to_text(self) -> list[list[str]]:
        """Canonical text form of every entry."""
        return [[e.to_text() for e in row] for row in self.entries]


def _common_ring(m: PolyMatrix) -> tuple[PolyRing, list[list[PolyElement]]]:
    gaussian = any(e.gaussian for row in m.entries for e in row)
    ring = poly_ring(m.nvars, gaussian)
    reps = [
        [e.rep if e.gaussian == gaussian else _lift(e.rep, ring) for e in row] for row in m.entries
    ]
    return ring, reps


def _cofactor_det(a: list[list[PolyElement]], ring: PolyRing) -> PolyElement:
    n = len(a)

    @functools.cache
    def expand(row: int, cols: tuple[int, ...]) -> PolyElement:
        if row == n:
            return ring.one
        total = ring.zero
        for pos, c in enumerate(cols):
            entry = a[row][c]
            if not entry:
                continue
            sub = expand(row + 1, cols[:pos] + cols[pos + 1 :])
            if not sub:
                continue
            total = total - entry * sub if pos % 2 else total + entry * sub
        return total

    return expand(0, tuple(range(n)))


def _bareiss_det(a: list[list[PolyElement]], ring: PolyRing) -> PolyElement:
    m = [row[:] for row in a]
    n = len(m)
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return ring.zero
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]).exquo(prev)
        prev = m[k][k]
    return m[n - 1][n - 1] if sign == 1 else -m[n - 1][n - 1]


def poly_det(m: PolyMatrix) -> MultiPoly:
    """Determinant of a square polynomial matrix.

    Memoized cofactor expansion up to 4x4, fraction-free Bareiss elimination
    with exact division beyond that.

    Parameters
    ----------
    m : PolyMatrix
        A square matrix.

    Returns
    -------
    MultiPoly
        The exact determinant.
    """
    if m.rows != m.cols:
        raise DimensionMismatchError("determinant input", "square", f"{m.rows}x{m.cols}")
    ring, reps = _common_ring(m)
    if m.rows <= 4:
        return MultiPoly(_cofactor_det(reps, ring))
    return MultiPoly(_bareiss_det(reps, ring))


def hessian(p: MultiPoly) -> PolyMatrix:
    """Symmetric matrix of second partial derivatives of ``p``."""
    n = p.nvars
    first = [p.diff(a) for a in range(n)]
    second: dict[tuple[int, int], MultiPoly] = {}
    for a in range(n):
        for b in range(a, n):
            second[a, b] = second[b, a] = first[a].diff(b)
    return PolyMatrix(tuple(tuple(second[a, b] for b in range(n)) for a in range(n)))


def substitute_linear(p: MultiPoly, g: Any) -> MultiPoly:
    """Substitute ``x -> g @ x`` and expand exactly.

    Parameters
    ----------
    p : MultiPoly
        The polynomial.
    g : array_like
        An ``nvars x nvars`` matrix of exact (rational or Gaussian-rational) scalars.

    Returns
    -------
    MultiPoly
        ``p(g @ x)``.
    """
    g_arr = np.asarray(g, dtype=object)
    n = p.nvars
    if g_arr.shape != (n, n):
        raise DimensionMismatchError("substitution matrix", (n, n), g_arr.shape)
    forms = [MultiPoly.linear_form(list(g_arr[a])) for a in range(n)]
    gaussian = p.gaussian or any(f.gaussian for f in forms)
    ring = poly_ring(n, gaussian)
    base = p.rep if p.gaussian == gaussian else _lift(p.rep, ring)
    reps = [f.rep if f.gaussian == gaussian else _lift(f.rep, ring) for f in forms]
    return MultiPoly(base.compose(list(zip(ring.gens, reps))))


def coefficient(p: MultiPoly, alpha: Sequence[int]) -> Coefficient:
    """Coefficient of ``x^alpha`` in ``p`` (zero when absent)."""
    return p.coefficient(alpha)
