"""The n x n x n tensor type, slices, flattenings and the group action."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
import scipy.linalg as sla
from sympy import Poly, Symbol
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .exceptions import (
    DimensionMismatchError,
    FieldMismatchError,
    InputRangeError,
    InputValueError,
    TensorParseError,
)
from .scalar_poly import MultiPoly
from .utils import as_fraction, exact_array, get_rng, is_exact

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from numpy.typing import ArrayLike, NDArray

__all__ = [
    "GroupElement",
    "Tensor3",
    "act",
    "contract",
    "diag_tensor",
    "flatten",
    "mat_det",
    "mat_inv",
    "mat_nullspace",
    "mat_rank",
    "mat_rational_eigenvalues",
    "multilinear_rank",
    "random_group_element",
    "rank1_tensor",
    "unit_tensor",
]

Field = Literal["rational", "real", "complex", "symbolic"]
FIELDS = ("rational", "real", "complex", "symbolic")
AXES = (1, 2, 3)


def _check_axis(i: int) -> int:
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    return i


def _infer_field(arr: NDArray[Any]) -> Field:
    if arr.dtype == object:
        flat = arr.ravel()
        if any(isinstance(v, MultiPoly) for v in flat):
            return "symbolic"
        if any(isinstance(v, (float, complex)) for v in flat):
            return "complex" if any(isinstance(v, complex) for v in flat) else "real"
        return "rational"
    if np.iscomplexobj(arr):
        return "complex"
    if np.issubdtype(arr.dtype, np.integer):
        return "rational"
    return "real"


def _coerce_entries(values: Any, field: Field) -> NDArray[Any]:
    if field == "rational":
        return exact_array(values)
    if field == "symbolic":
        return np.asarray(values, dtype=object)
    if field == "real":
        return np.asarray(values, dtype=float)
    return np.asarray(values, dtype=complex)


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Dense n x n x n tensor tagged with its scalar field.

    Parameters
    ----------
    entries : numpy.ndarray
        Array of shape ``(n, n, n)`` with ``entries[i, j, k] = P(i+1, j+1, k+1)``.
        Exact tensors hold :class:`~fractions.Fraction` objects, ``symbolic``
        tensors hold :class:`~diagorbit.scalar_poly.MultiPoly` entries.
    field : {"rational", "real", "complex", "symbolic"}
        The scalar field.
    """

    entries: NDArray[Any]
    field: Field

    def __post_init__(self) -> None:
        arr = self.entries
        if arr.ndim != 3 or len(set(arr.shape)) != 1 or arr.shape[0] < 1:
            raise DimensionMismatchError("tensor entries", "(n, n, n) with n >= 1", arr.shape)
        if self.field not in FIELDS:
            raise InputValueError("field", FIELDS, self.field)
        if self.field in ("real", "complex") and not np.isfinite(arr).all():
            raise InputValueError("entries", ["finite numbers"], "NaN/Inf")
        arr.flags.writeable = False

    @classmethod
    def from_array(cls, values: ArrayLike, field: Field | None = None) -> Tensor3:
        """Build a tensor, inferring the field from the array when not given."""
        arr = np.asarray(values) if not isinstance(values, np.ndarray) else values
        fld = field or _infer_field(arr)
        return cls(_coerce_entries(values, fld), fld)

    @classmethod
    def from_slices(cls, slices: Sequence[ArrayLike], field: Field | None = None) -> Tensor3:
        """Build a tensor from its 3-slices ``P[:, :, k]``."""
        stacked = np.stack([np.asarray(s, dtype=object) for s in slices], axis=-1)
        if field is None:
            field = _infer_field(stacked)
        return cls(_coerce_entries(stacked, field), field)

    @property
    def n(self) -> int:
        """Dimension."""
        return self.entries.shape[0]

    @property
    def is_exact(self) -> bool:
        """Whether the entries are exact rationals."""
        return self.field == "rational"

    @property
    def is_real(self) -> bool:
        """Whether the entries are real."""
        if self.field in ("rational", "real"):
            return True
        if self.field == "complex":
            return bool(np.all(self.entries.imag == 0))
        return False

    def to_float(self) -> Tensor3:
        """Return a float copy (real when possible)."""
        if self.field == "symbolic":
            raise FieldMismatchError("to_float", "numeric", self.field)
        if self.field == "rational":
            return Tensor3(self.entries.astype(float), "real")
        return self

    def as_numeric(self) -> NDArray[Any]:
        """Entries as a float or complex array."""
        return self.to_float().entries

    def norm_max(self) -> float:
        """Largest absolute entry."""
        return float(np.max(np.abs(self.as_numeric())))

    def slices(self, axis: int = 3) -> list[NDArray[Any]]:
        """The ``axis``-slices ``contract(P, axis, e_j)`` for ``j = 1..n``."""
        _check_axis(axis)
        return [np.take(self.entries, j, axis=axis - 1) for j in range(self.n)]

    def permute(self, order: tuple[int, int, int]) -> Tensor3:
        """Return the tensor with ``entries.transpose(order)``."""
        return Tensor3(np.ascontiguousarray(self.entries.transpose(order)), self.field)

    def allclose(self, other: Tensor3, rtol: float = 1e-8) -> bool:
        """Compare with a tolerance relative to the largest entry."""
        a, b = self.as_numeric(), other.as_numeric()
        scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def _binary(self, other: Tensor3, op: Any) -> Tensor3:
        if other.n != self.n:
            raise DimensionMismatchError("tensor", self.n, other.n)
        if self.is_exact and other.is_exact:
            return Tensor3(op(self.entries, other.entries), "rational")
        return Tensor3.from_array(op(self.as_numeric(), other.as_numeric()))

    def __add__(self, other: Tensor3) -> Tensor3:
        return self._binary(other, np.add)

    def __sub__(self, other: Tensor3) -> Tensor3:
        return self._binary(other, np.subtract)

    def __mul__(self, scalar: Any) -> Tensor3:
        if self.is_exact and not isinstance(scalar, (float, complex)):
            return Tensor3(self.entries * as_fraction(scalar), "rational")
        return Tensor3.from_array(self.as_numeric() * scalar)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor3) or other.n != self.n:
            return False
        return bool(np.all(self.entries == other.entries))

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> dict[str, Any]:
        """Serialize to the JSON tensor document."""
        if self.field == "rational":
            entries: Any = [[[str(v) for v in row] for row in mat] for mat in self.entries]
        elif self.field == "real":
            entries = self.entries.tolist()
        elif self.field == "complex":
            entries = [
                [[[float(v.real), float(v.imag)] for v in row] for row in mat]
                for mat in self.entries
            ]
        else:
            entries = [[[v.to_text() for v in row] for row in mat] for mat in self.entries]
        doc: dict[str, Any] = {"n": self.n, "field": self.field, "entries": entries}
        if self.field == "symbolic":
            doc["indeterminates"] = ["eps"]
        return doc

    def dumps(self) -> str:
        """Serialize to a JSON string."""
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: Mapping[str, Any] | str, source: str | None = None) -> Tensor3:
        """Parse the JSON tensor document.

        Parameters
        ----------
        doc : dict or str
            Parsed document or its JSON text.
        source : str, optional
            Name of the source used in error messages.

        Returns
        -------
        Tensor3
            The tensor.
        """
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as ex:
                raise TensorParseError(str(ex), source) from ex
        if not isinstance(doc, dict) or not {"n", "field", "entries"} <= doc.keys():
            raise TensorParseError("expected an object with 'n', 'field' and 'entries'", source)
        n, field, raw = doc["n"], doc["field"], doc["entries"]
        if not isinstance(n, int) or n < 1:
            raise TensorParseError(f"'n' must be a positive integer, got {n!r}", source)
        if field not in FIELDS:
            raise TensorParseError(f"unknown field {field!r}", source)
        try:
            shape = np.shape(np.asarray(raw, dtype=object))
        except ValueError as ex:
            raise DimensionMismatchError("entries", (n, n, n), "ragged") from ex
        expected = (n, n, n, 2) if field == "complex" else (n, n, n)
        if shape != expected:
            if shape[:3] == (n, n, n):
                raise FieldMismatchError("a JSON tensor document", f"{field} entries", "different")
            raise DimensionMismatchError("entries", expected, shape)
        try:
            if field == "rational":
                if any(isinstance(v, float) for v in np.asarray(raw, dtype=object).ravel()):
                    raise FieldMismatchError("a rational document", "'p/q' string", "float")
                return cls(exact_array(raw), "rational")
            if field == "real":
                return cls(np.asarray(raw, dtype=float), "real")
            if field == "complex":
                arr = np.asarray(raw, dtype=float)
                return cls(arr[..., 0] + 1j * arr[..., 1], "complex")
            nvars = len(doc.get("indeterminates", ["eps"]))
            polys = np.empty((n, n, n), dtype=object)
            for idx, v in np.ndenumerate(np.asarray(raw, dtype=object)):
                polys[idx] = MultiPoly.from_text(str(v), nvars)
            return cls(polys, "symbolic")
        except (TypeError, ValueError) as ex:
            if isinstance(ex, (FieldMismatchError, TensorParseError)):
                raise
            raise TensorParseError(str(ex), source) from ex

    @classmethod
    def from_counts(cls, counts: ArrayLike, source: str | None = None) -> Tensor3:
        """Empirical frequencies of an n x n x n table of non-negative integer counts."""
        try:
            arr = np.asarray(counts, dtype=object)
        except ValueError as ex:
            raise TensorParseError("ragged counts table", source) from ex
        if arr.ndim != 3 or len(set(arr.shape)) != 1:
            raise DimensionMismatchError("counts", "(n, n, n)", arr.shape)
        if any(isinstance(c, bool) or not isinstance(c, (int, np.integer)) for c in arr.ravel()):
            raise TensorParseError("counts must be non-negative integers", source)
        if (arr < 0).any():
            raise TensorParseError("counts must be non-negative integers", source)
        total = int(sum(int(c) for c in arr.ravel()))
        if total == 0:
            raise TensorParseError("counts table is empty", source)
        freqs = [[[Fraction(int(c), total) for c in row] for row in mat] for mat in arr]
        return cls(exact_array(freqs), "rational")


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A triple of invertible n x n matrices acting on the three indices.

    Parameters
    ----------
    g1, g2, g3 : numpy.ndarray
        The factors. Object arrays of fractions for exact elements, float or
        complex arrays otherwise.
    tol : float, optional
        Float factors must satisfy ``|det| > tol * prod(row norms)``.
    """

    g1: NDArray[Any]
    g2: NDArray[Any]
    g3: NDArray[Any]
    tol: float = 1e-13

    def __post_init__(self) -> None:
        n = self.g1.shape[0]
        for name, g in zip(("g1", "g2", "g3"), self.factors):
            if g.shape != (n, n):
                raise DimensionMismatchError(name, (n, n), g.shape)
            if is_exact(g):
                if mat_det(g) == 0:
                    raise InputRangeError(f"det({name})", "nonzero")
            else:
                bound = float(np.prod(np.linalg.norm(g, axis=1)))
                if not abs(np.linalg.det(g)) > self.tol * bound:
                    raise InputRangeError(
                        f"|det({name})|", f"above {self.tol} relative to its rows"
                    )

    @classmethod
    def from_matrices(cls, g1: ArrayLike, g2: ArrayLike, g3: ArrayLike) -> GroupElement:
        """Build from array-likes, keeping exactness when all entries are exact."""
        return cls(*(_as_matrix(g) for g in (g1, g2, g3)))

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> GroupElement:
        """The identity element."""
        eye = exact_array(np.eye(n, dtype=int)) if exact else np.eye(n)
        return cls(eye, eye.copy(), eye.copy())

    @property
    def factors(self) -> tuple[NDArray[Any], NDArray[Any], NDArray[Any]]:
        """The three matrices."""
        return self.g1, self.g2, self.g3

    @property
    def n(self) -> int:
        """Dimension."""
        return self.g1.shape[0]

    @property
    def is_exact(self) -> bool:
        """Whether all factors are exact."""
        return all(is_exact(g) for g in self.factors)

    def dets(self) -> tuple[Any, Any, Any]:
        """Determinants of the three factors."""
        return mat_det(self.g1), mat_det(self.g2), mat_det(self.g3)

    def inverse(self) -> GroupElement:
        """Componentwise inverse."""
        return GroupElement(*(mat_inv(g) for g in self.factors))

    def __matmul__(self, other: GroupElement) -> GroupElement:
        """Componentwise product, ``act(act(P, a), b) == act(P, a @ b)``."""
        return GroupElement(*(_matmul(a, b) for a, b in zip(self.factors, other.factors)))


def _as_matrix(g: ArrayLike) -> NDArray[Any]:
    arr = np.asarray(g)
    if arr.dtype == object:
        if any(isinstance(v, (float, complex)) for v in arr.ravel()):
            is_complex = any(isinstance(v, complex) for v in arr.ravel())
            return arr.astype(complex if is_complex else float)
        return exact_array(arr)
    if np.issubdtype(arr.dtype, np.integer):
        return exact_array(arr)
    return arr


def _matmul(a: NDArray[Any], b: NDArray[Any]) -> NDArray[Any]:
    if is_exact(a) != is_exact(b):
        a, b = _numeric(a), _numeric(b)
    return np.dot(a, b)


def _numeric(a: NDArray[Any]) -> NDArray[Any]:
    if not is_exact(a):
        return a
    return a.astype(float)


def _to_dm(m: NDArray[Any]) -> DomainMatrix:
    rows = [[QQ(v.numerator, v.denominator) for v in map(as_fraction, row)] for row in m]
    return DomainMatrix(rows, m.shape, QQ)


def _from_dm(dm: DomainMatrix) -> NDArray[np.object_]:
    rows = [[Fraction(int(v.numerator), int(v.denominator)) for v in row] for row in dm.to_list()]
    out = np.empty(dm.shape, dtype=object)
    for r, row in enumerate(rows):
        for c, v in enumerate(row):
            out[r, c] = v
    return out


def mat_det(m: NDArray[Any]) -> Any:
    """Determinant: exact :class:`~fractions.Fraction` for exact input, float/complex otherwise."""
    if is_exact(m):
        d = _to_dm(m).det()
        return Fraction(int(d.numerator), int(d.denominator))
    return np.linalg.det(m)


def mat_inv(m: NDArray[Any]) -> NDArray[Any]:
    """Inverse, exact for exact input."""
    if is_exact(m):
        return _from_dm(_to_dm(m).inv())
    return sla.inv(m)


def mat_rank(m: NDArray[Any], tol: float = 0.0) -> int:
    """Rank by exact elimination (``tol == 0``) or singular-value thresholding."""
    if tol == 0:
        if not is_exact(m):
            raise FieldMismatchError("exact rank (tol=0)", "rational", "float")
        return int(_to_dm(m).rank())
    sv = sla.svdvals(_numeric(m))
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def mat_nullspace(m: NDArray[Any]) -> list[NDArray[Any]]:
    """Exact basis of the right null space."""
    basis = _to_dm(m).nullspace()
    return [row for row in _from_dm(basis)] if basis.shape[0] else []


def _promote(arr: NDArray[Any], other: NDArray[Any]) -> tuple[NDArray[Any], NDArray[Any]]:
    if is_exact(arr) and not is_exact(other):
        return arr.astype(float), other
    if is_exact(other) and not is_exact(arr):
        if any(isinstance(v, MultiPoly) for v in arr.ravel()):
            return arr, other
        return arr, other.astype(float)
    return arr, other


def _vector(v: ArrayLike, n: int) -> NDArray[Any]:
    arr = np.asarray(v)
    if arr.shape != (n,):
        raise DimensionMismatchError("vector", n, arr.shape)
    if arr.dtype == object or np.issubdtype(arr.dtype, np.integer):
        if not any(isinstance(x, (float, complex)) for x in arr.ravel()):
            return exact_array(arr)
    return arr


def contract(p: Tensor3, i: int, v: ArrayLike) -> NDArray[Any]:
    """Slice-weighted sum ``P *_i v``; ``(P *_3 v)[a, b] = sum_k P[a, b, k] v[k]``.

    Parameters
    ----------
    p : Tensor3
        The tensor.
    i : int
        Axis in ``{1, 2, 3}``.
    v : array_like
        Length-n vector.

    Returns
    -------
    numpy.ndarray
        The n x n matrix indexed by the two remaining indices in their order.
    """
    _check_axis(i)
    arr, vec = _promote(p.entries, _vector(v, p.n))
    return np.tensordot(arr, vec, axes=([i - 1], [0]))


def act(p: Tensor3, g: GroupElement) -> Tensor3:
    """Right action ``P(g1, g2, g3) = ((P *_1 g1) *_2 g2) *_3 g3``.

    ``(P *_3 g)[a, b, k] = sum_l P[a, b, l] g[l, k]``, and similarly for the
    other axes, so ``act(D, g)`` is the sum over ``r`` of the outer products
    of the ``r``-th rows of ``g1``, ``g2`` and ``g3``.
    """
    if g.n != p.n:
        raise DimensionMismatchError("group element", p.n, g.n)
    arr = p.entries
    for axis, m in enumerate(g.factors):
        arr, m = _promote(arr, m)
        arr = np.moveaxis(np.tensordot(arr, m, axes=([axis], [0])), -1, axis)
    if p.field == "symbolic" and g.is_exact:
        return Tensor3(arr, "symbolic")
    return Tensor3.from_array(arr)


def flatten(p: Tensor3, i: int) -> NDArray[Any]:
    """The ``n^2 x n`` flattening whose column ``v`` is ``vec(contract(P, i, e_v))``.

    Rows are ordered lexicographically in the two remaining indices.
    """
    _check_axis(i)
    n = p.n
    return np.moveaxis(p.entries, i - 1, -1).reshape(n * n, n)


def multilinear_rank(p: Tensor3, tol: float = 0.0) -> tuple[int, int, int]:
    """Ranks of the three flattenings.

    Parameters
    ----------
    p : Tensor3
        The tensor.
    tol : float, optional
        ``0`` for exact elimination (rational tensors only); otherwise singular
        values below ``tol * sigma_max`` count as zero.

    Returns
    -------
    tuple of int
        ``(r1, r2, r3)``.
    """
    if tol == 0 and not p.is_exact:
        raise FieldMismatchError("exact multilinear rank (tol=0)", "rational", p.field)
    r1, r2, r3 = (mat_rank(flatten(p, i), tol) for i in AXES)
    return r1, r2, r3


def diag_tensor(v: ArrayLike) -> Tensor3:
    """Diagonal tensor with ``(i, i, i)`` entry ``v[i]``."""
    vec = np.asarray(v)
    n = vec.shape[0]
    vec = _vector(vec, n)
    if is_exact(vec):
        arr = np.full((n, n, n), Fraction(0), dtype=object)
        for r in range(n):
            arr[r, r, r] = vec[r]
        return Tensor3(arr, "rational")
    arr_f = np.zeros((n, n, n), dtype=vec.dtype)
    for r in range(n):
        arr_f[r, r, r] = vec[r]
    return Tensor3.from_array(arr_f)


def unit_tensor(n: int) -> Tensor3:
    """The unit diagonal tensor ``D`` (exact)."""
    if n < 1:
        raise InputRangeError("n", ">= 1")
    return diag_tensor([1] * n)


def rank1_tensor(u: ArrayLike, v: ArrayLike, w: ArrayLike, weight: Any = 1) -> Tensor3:
    """``weight * (u ⊗ v ⊗ w)``."""
    uu, vv, ww = (np.asarray(x) for x in (u, v, w))
    n = uu.shape[0]
    uu, vv, ww = (_vector(x, n) for x in (uu, vv, ww))
    exact = all(is_exact(x) for x in (uu, vv, ww)) and not isinstance(weight, (float, complex))
    if exact:
        outer = np.multiply.outer(np.multiply.outer(uu, vv), ww)
        return Tensor3(outer * as_fraction(weight), "rational")
    uu, vv, ww = (_numeric(x) for x in (uu, vv, ww))
    return Tensor3.from_array(weight * np.einsum("i,j,k->ijk", uu, vv, ww))


def random_group_element(
    n: int,
    seed: int | np.random.Generator | None = 0,
    exact: bool = True,
    bound: int = 3,
    real: bool = True,
) -> GroupElement:
    """Draw a random invertible group element.

    Exact elements have integer entries in ``[-bound, bound]``; float elements
    have standard normal (real or complex) entries.
    """
    rng = get_rng(seed)
    factors = []
    while len(factors) < 3:
        if exact:
            g = exact_array(rng.integers(-bound, bound + 1, size=(n, n)))
            if mat_det(g) == 0:
                continue
        else:
            g = rng.standard_normal((n, n))
            if not real:
                g = g + 1j * rng.standard_normal((n, n))
        factors.append(g)
    return GroupElement(*factors)


def mat_rational_eigenvalues(m: NDArray[Any]) -> dict[Fraction, int]:
    """Rational eigenvalues of an exact matrix with their algebraic multiplicities.

    The multiplicities add up to ``n`` exactly when the whole spectrum is rational.
    """
    coeffs = _to_dm(m).charpoly()
    poly = Poly([QQ.to_sympy(c) for c in coeffs], Symbol("t"), domain=QQ)
    return {Fraction(int(r.p), int(r.q)): int(k) for r, k in poly.ground_roots().items()}
