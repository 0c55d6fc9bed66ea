"""Orbit membership, semi-canonical forms and explicit decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
import scipy.linalg as sla
from pydantic import BaseModel, Field

from .exceptions import (
    FieldMismatchError,
    IndeterminateError,
    InputValueError,
    NotInOrbitError,
    SingularEvaluationError,
    SliceSingularError,
)
from .invariants import f, f_eval, h, hessian_eval
from .scalar_poly import MultiPoly, PolyMatrix
from .tensor_core import (
    AXES,
    GroupElement,
    Tensor3,
    act,
    contract,
    mat_det,
    mat_inv,
    mat_nullspace,
    mat_rank,
    mat_rational_eigenvalues,
    unit_tensor,
)
from .utils import SCHEMA_VERSION, exact_array, get_logger, get_rng, resolve_tolerances, tri_state

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

    from .diagorbit import Tolerances

__all__ = [
    "CommutationReport",
    "Decomposition",
    "MembershipReport",
    "SemiCanonicalForm",
    "classify",
    "commutation_residuals",
    "decompose",
    "orbit_verdict",
    "resolve_backend",
    "semi_canonical",
    "slice_nonsingular",
]

logger = get_logger()

Backend = Literal["auto", "exact", "float"]
Status = Literal["pass", "fail", "indeterminate"]
Verdict = Literal["in_orbit", "boundary", "outside", "indeterminate"]

RANDOM_COMBINATIONS = 8
SCHUR_RETRIES = 3
NODE_REDRAWS = 5


def resolve_backend(p: Tensor3, backend: Backend) -> Literal["exact", "float"]:
    """Pick the arithmetic for ``p``: exact for rational tensors unless overridden."""
    if backend not in ("auto", "exact", "float"):
        raise InputValueError("backend", ("auto", "exact", "float"), backend)
    if backend == "auto":
        return "exact" if p.is_exact else "float"
    if backend == "exact" and not p.is_exact:
        raise FieldMismatchError("the exact backend", "rational", p.field)
    if backend == "float" and p.is_exact:
        logger.warning(
            "Float backend requested for a rational tensor; results are no longer exact."
        )
    return backend


def _eye(n: int, exact: bool) -> NDArray[Any]:
    return exact_array(np.eye(n, dtype=int)) if exact else np.eye(n)


def _normalized(p: Tensor3) -> Tensor3:
    q = p.to_float()
    scale = q.norm_max()
    return q if scale == 0 else Tensor3.from_array(q.entries / scale)


def _unit_samples(n: int, count: int, seed: int) -> list[NDArray[np.float64]]:
    rng = get_rng(seed)
    out = []
    for _ in range(count):
        v = rng.standard_normal(n)
        out.append(v / np.linalg.norm(v))
    return out


def _int_samples(n: int, count: int, seed: int, bound: int = 7) -> list[list[int]]:
    rng = get_rng(seed)
    return [[int(c) for c in rng.integers(-bound, bound + 1, size=n)] for _ in range(count)]


class CommutationWitness(BaseModel):
    """Location of the worst (float) or first (exact) violated relation.

    ``j`` and ``k`` are the 1-based slice indices of the pair, ``entry`` the
    1-based matrix position. Exact reports carry the leading monomial of the
    residual polynomial and its coefficient; float reports the sample ``v``
    and the normalized magnitude.
    """

    j: int
    k: int
    entry: tuple[int, int]
    monomial: str | None = None
    coefficient: str | None = None
    sample: list[float] | None = None
    value: float | None = None


class CommutationReport(BaseModel):
    """Outcome of the adjugate commutation relations along one axis."""

    axis: int
    backend: Literal["exact", "float"]
    status: Status
    identically_zero: bool | None = None
    max_residual: float | None = None
    witness: CommutationWitness | None = None

    @property
    def passed(self) -> bool:
        """Whether the relations hold."""
        return self.status == "pass"


def _poly_product(
    left: Sequence[Sequence[Any]], right: Sequence[Sequence[Any]], zero: MultiPoly
) -> list[list[MultiPoly]]:
    rows, inner, cols = len(left), len(right), len(right[0])
    out = []
    for a in range(rows):
        row = []
        for b in range(cols):
            acc = zero
            for c in range(inner):
                lhs, rhs = left[a][c], right[c][b]
                if lhs and rhs:
                    acc = acc + lhs * rhs
            row.append(acc)
        out.append(row)
    return out


def _exact_commutation(p: Tensor3, i: int) -> CommutationReport:
    n = p.n
    slices = p.slices(i)
    zero = MultiPoly.zero(n)
    adj = PolyMatrix.from_pencil(slices).adjugate().entries
    left = [_poly_product(s.tolist(), adj, zero) for s in slices]
    for j in range(n):
        for k in range(j + 1, n):
            lhs = _poly_product(left[j], slices[k].tolist(), zero)
            rhs = _poly_product(left[k], slices[j].tolist(), zero)
            for a in range(n):
                for b in range(n):
                    diff = lhs[a][b] - rhs[a][b]
                    if diff.is_zero:
                        continue
                    monom = max(diff.rep, key=lambda m: (sum(m), m))
                    lead = MultiPoly.from_terms({monom: 1}, n).to_text().removeprefix("1*")
                    witness = CommutationWitness(
                        j=j + 1,
                        k=k + 1,
                        entry=(a + 1, b + 1),
                        monomial=lead,
                        coefficient=str(diff.coefficient(monom)),
                    )
                    return CommutationReport(
                        axis=i,
                        backend="exact",
                        status="fail",
                        identically_zero=False,
                        witness=witness,
                    )
    return CommutationReport(axis=i, backend="exact", status="pass", identically_zero=True)


def _adjugate(a: NDArray[Any]) -> NDArray[Any]:
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=a.dtype)
    adj = np.empty_like(a)
    for r in range(n):
        for c in range(n):
            minor = np.delete(np.delete(a, c, axis=0), r, axis=1)
            adj[r, c] = (-1) ** (r + c) * np.linalg.det(minor)
    return adj


def _float_commutation(
    p: Tensor3, i: int, tol: Tolerances, seed: int, samples: int
) -> CommutationReport:
    q = _normalized(p)
    n = q.n
    slices = q.slices(i)
    worst, witness = 0.0, None
    for v in _unit_samples(n, samples, seed):
        adj = _adjugate(contract(q, i, v))
        left = [s @ adj for s in slices]
        for j in range(n):
            for k in range(j + 1, n):
                res = np.abs(left[j] @ slices[k] - left[k] @ slices[j])
                a, b = np.unravel_index(int(np.argmax(res)), res.shape)
                if res[a, b] > worst or witness is None:
                    worst = float(res[a, b])
                    witness = CommutationWitness(
                        j=j + 1,
                        k=k + 1,
                        entry=(int(a) + 1, int(b) + 1),
                        sample=v.tolist(),
                        value=worst,
                    )
    status = tri_state(worst, tol.commutation, tol.band)
    return CommutationReport(
        axis=i,
        backend="float",
        status=status,
        max_residual=worst,
        witness=witness if status != "pass" else None,
    )


def commutation_residuals(
    p: Tensor3,
    i: int,
    backend: Backend = "auto",
    tol: Tolerances | None = None,
    seed: int = 42,
    samples: int = 5,
) -> CommutationReport:
    """Check ``S_j adj(P *_i v) S_k = S_k adj(P *_i v) S_j`` for all slice pairs.

    Parameters
    ----------
    p : Tensor3
        The tensor.
    i : int
        Axis in ``{1, 2, 3}``.
    backend : {"auto", "exact", "float"}, optional
        The exact backend expands the relations as polynomials in ``v`` and
        reports whether they vanish identically. The float backend evaluates
        them at ``samples`` seeded unit vectors on the tensor scaled to unit
        max-norm and compares the largest entry with ``tol.commutation``.
    tol : Tolerances, optional
        Decision thresholds.
    seed : int, optional
        Seed for the sample vectors, defaults to 42.
    samples : int, optional
        Number of sample vectors (float backend), defaults to 5.

    Returns
    -------
    CommutationReport
        Status, residual and a witness of a violated relation.
    """
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    return _commutation(p, i, resolve_backend(p, backend), resolve_tolerances(tol), seed, samples)


def _commutation(
    p: Tensor3, i: int, mode: str, tol: Tolerances, seed: int, samples: int
) -> CommutationReport:
    if mode == "exact":
        return _exact_commutation(p, i)
    return _float_commutation(p, i, tol, seed, samples)


def slice_nonsingular(
    p: Tensor3,
    i: int,
    backend: Backend = "auto",
    tol: Tolerances | None = None,
    seed: int = 42,
    samples: int = 5,
) -> bool:
    """Whether some combination of the ``i``-slices is invertible.

    Exact: a nonzero ``h_i`` value at a basis vector or seeded point settles it,
    otherwise the symbolic ``h_i`` is checked. Float: the largest
    ``|det(P *_i x)|`` over seeded unit points of the max-normalized tensor is
    compared with ``tol.rank``.
    """
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    mode = resolve_backend(p, backend)
    return _slice_nonsingular(p, i, mode, resolve_tolerances(tol), seed, samples)


def _slice_nonsingular(
    p: Tensor3, i: int, mode: str, tol: Tolerances, seed: int, samples: int
) -> bool:
    if mode == "exact":
        return _exact_combination(p, i, seed) is not None or not h(p, i).is_zero
    q = _normalized(p)
    best = max(abs(mat_det(contract(q, i, x))) for x in _unit_samples(q.n, samples, seed))
    return bool(best > tol.rank)


def _exact_combination(p: Tensor3, i: int, seed: int) -> NDArray[Any] | None:
    n = p.n
    candidates = [exact_array(np.eye(n, dtype=int)[r]) for r in range(n)]
    candidates += [exact_array(v) for v in _int_samples(n, RANDOM_COMBINATIONS, seed)]
    for a in candidates:
        if any(a) and mat_det(contract(p, i, a)) != 0:
            return a
    return None


def _float_combination(p: Tensor3, i: int, seed: int, tol: float) -> NDArray[Any] | None:
    n = p.n
    candidates = [np.eye(n)[r] for r in range(n)]
    candidates += _unit_samples(n, RANDOM_COMBINATIONS, seed)
    for a in candidates:
        s = contract(p, i, a)
        bound = float(np.prod(np.linalg.norm(s, axis=1)))
        if bound > 0 and abs(mat_det(s)) > tol * bound:
            return a
    return None


def _to_axis3(p: Tensor3, i: int) -> Tensor3:
    order = {1: (1, 2, 0), 2: (0, 2, 1), 3: (0, 1, 2)}[i]
    return p.permute(order)


def _from_axis3(
    factors: Sequence[NDArray[Any]], i: int
) -> tuple[NDArray[Any], NDArray[Any], NDArray[Any]]:
    h1, h2, h3 = factors
    if i == 1:
        return h3, h1, h2
    if i == 2:
        return h1, h3, h2
    return h1, h2, h3


class _IrrationalSpectrum(Exception):
    pass


def _common_eigenvector(mats: Sequence[NDArray[Any]]) -> NDArray[Any]:
    n = mats[0].shape[0]
    basis = _eye(n, True)
    for t in mats:
        m = basis.shape[1]
        restricted = mat_inv(basis.T @ basis) @ basis.T @ t @ basis
        eigs = mat_rational_eigenvalues(restricted)
        if not eigs:
            raise _IrrationalSpectrum
        shifted = restricted - min(eigs) * _eye(m, True)
        kernel = mat_nullspace(shifted)
        basis = basis @ np.array(kernel, dtype=object).T
    return basis[:, 0]


def _flag_exact(mats: Sequence[NDArray[Any]]) -> NDArray[Any]:
    n = mats[0].shape[0]
    if n == 1:
        return _eye(1, True)
    v = _common_eigenvector(mats)
    pivot = next(r for r in range(n) if v[r] != 0)
    cols = [v] + [_eye(n, True)[:, r] for r in range(n) if r != pivot]
    b = np.stack(cols, axis=1)
    b_inv = mat_inv(b)
    sub = [(b_inv @ t @ b)[1:, 1:] for t in mats]
    block = _eye(n, True)
    block[1:, 1:] = _flag_exact(sub)
    return b @ block


def _flag_float(mats: Sequence[NDArray[Any]], seed: int, tol: float) -> NDArray[Any]:
    rng = get_rng(seed)
    err = np.inf
    scale = max(max(float(np.max(np.abs(t))) for t in mats), 1.0)
    for attempt in range(SCHUR_RETRIES):
        weights = rng.standard_normal(len(mats))
        combo = sum(w * t for w, t in zip(weights, mats))
        _, u = sla.schur(np.asarray(combo, dtype=complex), output="complex")
        err = max(float(np.max(np.abs(np.tril(u.conj().T @ t @ u, -1)))) for t in mats) / scale
        if err <= tol:
            return u
        logger.info(
            f"Joint triangularization attempt {attempt + 1} left residual {err:.2e}; retrying."
        )
    raise IndeterminateError("joint triangularization", err)


@dataclass(frozen=True)
class SemiCanonicalForm:
    """Orbit representative with upper-triangular ``axis``-slices.

    Parameters
    ----------
    tensor : Tensor3
        ``act(P, group)``; its ``axis``-slices are upper triangular and the
        first one is the identity.
    group : GroupElement
        The group element taking ``P`` to ``tensor``.
    z : numpy.ndarray
        ``z[a, b]`` is the ``a``-th diagonal entry of the ``b``-th slice.
    axis : int
        The axis.
    exact : bool
        Whether the form was computed in exact arithmetic.
    """

    tensor: Tensor3
    group: GroupElement
    z: NDArray[Any]
    axis: int
    exact: bool


def _semi_canonical_axis3(
    q: Tensor3, exact: bool, tol: Tolerances, seed: int
) -> tuple[Tensor3, tuple[NDArray[Any], NDArray[Any], NDArray[Any]], bool]:
    n = q.n
    if not exact and q.is_exact:
        q = q.to_float()
    a = _exact_combination(q, 3, seed) if exact else _float_combination(q, 3, seed, tol.rank)
    if a is None:
        if exact and not h(q, 3).is_zero:
            raise IndeterminateError("a nonsingular slice combination", 0.0)
        raise SliceSingularError(3)
    eye = _eye(n, exact)
    pivot = next(r for r in range(n) if a[r] != 0)
    c0 = np.stack([a] + [eye[:, r] for r in range(n) if r != pivot], axis=1)
    s_inv = mat_inv(contract(q, 3, a))
    start = GroupElement(eye, s_inv, c0, tol=0.0)
    t = act(q, start)
    mats = t.slices(3)
    if exact:
        try:
            u = _flag_exact(mats)
        except _IrrationalSpectrum:
            logger.warning("Slices have irrational eigenvalues; switching to floating point.")
            return _semi_canonical_axis3(q.to_float(), False, tol, seed)
    else:
        u = _flag_float(mats, seed, tol.reconstruction)
    step = GroupElement(mat_inv(u).T, u, eye, tol=0.0)
    return act(t, step), (start @ step).factors, exact


def semi_canonical(
    p: Tensor3,
    i: int = 3,
    backend: Backend = "auto",
    tol: Tolerances | None = None,
    seed: int = 42,
) -> SemiCanonicalForm:
    """Put the ``i``-slices of ``p`` in simultaneous upper-triangular form.

    A nonsingular slice combination ``S`` is moved to the first slice and
    turned into the identity; the remaining slices then commute and are
    triangularized together, exactly through a flag of common eigenvectors
    when their eigenvalues are rational, and otherwise by a complex Schur
    decomposition of a seeded random combination.

    Parameters
    ----------
    p : Tensor3
        An ``i``-slice-non-singular tensor whose ``i``-slices satisfy the
        commutation relations.
    i : int, optional
        The axis, defaults to 3.
    backend : {"auto", "exact", "float"}, optional
        Arithmetic, defaults to exact for rational tensors.
    tol : Tolerances, optional
        Decision thresholds.
    seed : int, optional
        Seed for the random combinations, defaults to 42.

    Returns
    -------
    SemiCanonicalForm
        The form, the group element and the matrix ``Z``.
    """
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    exact = resolve_backend(p, backend) == "exact"
    return _semi_canonical(p, i, exact, resolve_tolerances(tol), seed)


def _diagonal_rows(t: Tensor3) -> NDArray[Any]:
    """Rows ``t[a, a, :]``: the diagonal entries of the 3-slices."""
    rows = [[t.entries[a, a, b] for b in range(t.n)] for a in range(t.n)]
    return np.array(rows, dtype=t.entries.dtype)


def _semi_canonical(
    p: Tensor3, i: int, exact: bool, tol: Tolerances, seed: int
) -> SemiCanonicalForm:
    try:
        t3, factors, exact = _semi_canonical_axis3(_to_axis3(p, i), exact, tol, seed)
    except SliceSingularError as ex:
        raise SliceSingularError(i) from ex
    group = GroupElement(*_from_axis3(factors, i), tol=0.0)
    z = _diagonal_rows(t3)
    tensor = act(p.to_float() if not exact and p.is_exact else p, group)
    return SemiCanonicalForm(tensor, group, z, i, exact)


def _triangular_eigenvectors(s: NDArray[Any], exact: bool) -> NDArray[Any]:
    n = s.shape[0]
    v = exact_array(np.zeros((n, n), dtype=int)) if exact else np.zeros((n, n), dtype=complex)
    for a in range(n):
        lam = s[a, a]
        v[a, a] = 1
        for b in range(a - 1, -1, -1):
            acc = sum(s[b, c] * v[c, a] for c in range(b + 1, a + 1))
            v[b, a] = acc / (lam - s[b, b])
    return v


def _vandermonde(nodes: Sequence[Any], exact: bool) -> NDArray[Any]:
    n = len(nodes)
    rows = [[node**b for b in range(n)] for node in nodes]
    return exact_array(rows) if exact else np.array(rows, dtype=complex)


def _leading(row: NDArray[Any], exact: bool, rel: float) -> Any:
    if exact:
        return next(x for x in row if x != 0)
    cut = rel * float(np.max(np.abs(row)))
    return next(x for x in row if abs(x) > cut)


@dataclass(frozen=True)
class Decomposition:
    """``P = act(D, (g1, g2, g3))``: rank-one terms ``g1[r] ⊗ g2[r] ⊗ g3[r]``.

    Rows of ``g1`` and ``g2`` start with 1 (their first nonzero entry), the
    scales are carried by ``g3``, and terms are ordered lexicographically by
    the rows of ``g3`` (real parts, then imaginary parts).
    """

    g1: NDArray[Any]
    g2: NDArray[Any]
    g3: NDArray[Any]
    field: Literal["rational", "complex"]
    residual: float = 0.0
    normalization: str = "leading-one"

    @classmethod
    def from_factors(
        cls, g1: Any, g2: Any, g3: Any, residual: float = 0.0, rel: float = 1e-9
    ) -> Decomposition:
        """Normalize and order the terms of ``act(D, (g1, g2, g3))``."""
        group = GroupElement.from_matrices(g1, g2, g3)
        exact = group.is_exact
        rows1, rows2, rows3 = ([] for _ in range(3))
        for a, b, c in zip(*(np.array(g) for g in group.factors)):
            s1, s2 = _leading(a, exact, rel), _leading(b, exact, rel)
            rows1.append(a / s1)
            rows2.append(b / s2)
            rows3.append(c * (s1 * s2))
        order = sorted(range(len(rows3)), key=lambda r: _row_key(rows3[r], exact))
        g1, g2, g3 = (_stack_rows(rows, order, exact) for rows in (rows1, rows2, rows3))
        return cls(g1, g2, g3, "rational" if exact else "complex", residual)

    @property
    def n(self) -> int:
        """Number of terms."""
        return self.g1.shape[0]

    def components(self) -> list[tuple[NDArray[Any], NDArray[Any], NDArray[Any]]]:
        """The rank-one terms as ``(u, v, w)`` triples."""
        return [(self.g1[r], self.g2[r], self.g3[r]) for r in range(self.n)]

    def to_tensor(self) -> Tensor3:
        """Sum of the rank-one terms."""
        return act(unit_tensor(self.n), GroupElement(self.g1, self.g2, self.g3, tol=0.0))

    def to_json_dict(self) -> dict[str, Any]:
        """JSON representation with rationals as strings and complex numbers as ``[re, im]``."""

        def enc(m: NDArray[Any]) -> list[list[Any]]:
            if self.field == "rational":
                return [[str(x) for x in row] for row in m]
            return [[[float(x.real), float(x.imag)] for x in row] for row in m]

        return {
            "field": self.field,
            "normalization": self.normalization,
            "g1": enc(self.g1),
            "g2": enc(self.g2),
            "g3": enc(self.g3),
            "residual": self.residual,
        }


def _stack_rows(rows: Sequence[NDArray[Any]], order: Sequence[int], exact: bool) -> NDArray[Any]:
    return np.array([rows[r] for r in order], dtype=object if exact else complex)


def _row_key(row: NDArray[Any], exact: bool) -> tuple[Any, ...]:
    if exact:
        return tuple(row)
    return tuple(round(float(x.real), 6) for x in row) + tuple(round(float(x.imag), 6) for x in row)


def _relative_residual(p: Tensor3, q: Tensor3) -> float:
    if p.is_exact and q.is_exact:
        if p == q:
            return 0.0
    a, b = p.as_numeric(), q.as_numeric()
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(a))), 1e-300))


def _diagonalize(form: SemiCanonicalForm, tol: Tolerances, seed: int) -> tuple[NDArray[Any], ...]:
    """Finish a semi-canonical form (axis-3 convention) into decomposition factors."""
    t = _to_axis3(form.tensor, form.axis)
    n, exact = t.n, form.exact
    z = form.z
    if mat_rank(z, 0 if exact else tol.rank) < n:
        smallest = float(sla.svdvals(np.array([[complex(x) for x in row] for row in z]))[-1])
        raise IndeterminateError("nonsingularity of Z", smallest)
    rng = get_rng(seed)
    nodes: list[Any] = list(range(n))
    eye = _eye(n, exact)
    for attempt in range(NODE_REDRAWS):
        zp = _vandermonde([Fraction(x) for x in nodes] if exact else nodes, exact)
        c3 = mat_inv(z) @ zp
        t1 = act(t, GroupElement(eye, eye, c3, tol=0.0))
        b1_inv = mat_inv(t1.slices(3)[0])
        t2 = act(t1, GroupElement(eye, b1_inv, eye, tol=0.0))
        slice2 = t2.slices(3)[1] if n > 1 else t2.slices(3)[0]
        diag = np.array([slice2[a, a] for a in range(n)])
        gaps = [abs(complex(diag[a] - diag[b])) for a in range(n) for b in range(a)]
        spread = max([abs(complex(d)) for d in diag] + [1.0])
        if exact or not gaps or min(gaps) > 1e-8 * spread:
            break
        logger.info(
            f"Eigenvalues of the pencil collide (attempt {attempt + 1}); drawing new nodes."
        )
        nodes = sorted(rng.uniform(0, n, size=n).tolist())
    v = _triangular_eigenvectors(slice2, exact)
    step = GroupElement(mat_inv(v).T, v, eye, tol=0.0)
    final = act(t2, step)
    w = _diagonal_rows(final)
    total = GroupElement(*_to_axis3_group(form.group, form.axis), tol=0.0)
    total = (
        total @ GroupElement(eye, eye, c3, tol=0.0) @ GroupElement(eye, b1_inv, eye, tol=0.0) @ step
    )
    g1_inv, g2_inv, g3_inv = (mat_inv(g) for g in total.factors)
    return g1_inv, g2_inv, w @ g3_inv


def _to_axis3_group(group: GroupElement, i: int) -> tuple[NDArray[Any], NDArray[Any], NDArray[Any]]:
    g1, g2, g3 = group.factors
    if i == 1:
        return g2, g3, g1
    if i == 2:
        return g1, g3, g2
    return g1, g2, g3


def decompose(
    p: Tensor3,
    backend: Backend = "auto",
    tol: Tolerances | None = None,
    seed: int = 42,
    samples: int = 5,
    report: MembershipReport | None = None,
) -> Decomposition:
    """Write an in-orbit tensor as ``act(D, (g1, g2, g3))``.

    Parameters
    ----------
    p : Tensor3
        A tensor in the orbit of the unit tensor.
    backend : {"auto", "exact", "float"}, optional
        Arithmetic. Exact decompositions are returned when every eigenvalue
        met on the way is rational.
    tol : Tolerances, optional
        Decision thresholds.
    seed : int, optional
        Seed for every random choice, defaults to 42.
    samples : int, optional
        Number of sample points for the float membership checks.
    report : MembershipReport, optional
        A membership report of ``p`` to reuse instead of classifying again.

    Returns
    -------
    Decomposition
        Normalized and ordered rank-one terms with the relative
        reconstruction residual.

    Raises
    ------
    NotInOrbitError
        If ``p`` is not classified as in the orbit.
    """
    tol = resolve_tolerances(tol)
    report = report or classify(p, backend=backend, tol=tol, seed=seed, samples=samples)
    return _decompose(p, report, tol, seed)


def _decompose(p: Tensor3, report: MembershipReport, tol: Tolerances, seed: int) -> Decomposition:
    if report.verdict != "in_orbit":
        raise NotInOrbitError(report)
    axis = next(
        c.axis for c, fz in zip(report.commutation, report.f_nonzero) if c.passed and fz == "yes"
    )
    form = _semi_canonical(p, axis, report.backend == "exact", tol, seed)
    factors = _diagonalize(form, tol, seed)
    g1, g2, g3 = _from_axis3(factors, axis)
    rough = Decomposition.from_factors(g1, g2, g3, rel=tol.rank)
    residual = _relative_residual(p, rough.to_tensor())
    if residual > tol.reconstruction and not (form.exact and residual == 0):
        raise IndeterminateError("the decomposition", residual)
    return Decomposition(rough.g1, rough.g2, rough.g3, rough.field, residual)


class MembershipReport(BaseModel):
    """Membership verdict with the per-axis evidence.

    ``verdict`` is ``in_orbit`` when the commutation relations hold and
    ``f_i`` is nonzero on some axis, ``boundary`` when the relations hold but
    ``f_i`` vanishes on every passing axis, ``outside`` when the relations
    fail on every axis and ``indeterminate`` otherwise.
    ``notes`` flags evidence that is probabilistic rather than a proof.
    """

    schema_version: str = SCHEMA_VERSION
    n: int
    backend: Literal["exact", "float"]
    verdict: Verdict
    in_orbit: Literal["yes", "no", "indeterminate"]
    commutation: list[CommutationReport]
    slice_nonsingular: list[bool]
    f_nonzero: list[Literal["yes", "no", "indeterminate"]]
    f_method: list[Literal["pointwise", "symbolic", "sampled", "skipped"]]
    cross_axis_consistent: bool
    notes: list[str] = Field(default_factory=list)
    decomposition: dict[str, Any] | None = None
    residual: float | None = None

    @property
    def exit_code(self) -> int:
        """CLI exit code of the verdict."""
        return {"in_orbit": 0, "boundary": 2, "outside": 3, "indeterminate": 4}[self.verdict]


def _exact_f_status(p: Tensor3, i: int, seed: int, samples: int) -> tuple[str, str]:
    n = p.n
    if n == 1:
        return ("yes" if p.entries[0, 0, 0] != 0 else "no"), "pointwise"
    for x in _int_samples(n, samples, seed + i):
        if f_eval(p, i, x) != 0:
            return "yes", "pointwise"
    if n <= 5:
        return ("no" if f(p, i).is_zero else "yes"), "symbolic"
    return "no", "sampled"


def _float_f_status(
    p: Tensor3, i: int, tol: Tolerances, seed: int, samples: int
) -> tuple[str, str]:
    q = _normalized(p)
    n = q.n
    best = abs(complex(q.entries[0, 0, 0])) if n == 1 else 0.0
    for x in _unit_samples(n, samples, seed + i) if n > 1 else []:
        try:
            hess, _ = hessian_eval(q, i, list(x))
        except SingularEvaluationError:
            continue
        # inverse condition number, scale free
        sv = sla.svdvals(hess.astype(complex))
        if sv[0] > 0:
            best = max(best, float(sv[-1] / sv[0]))
    state = tri_state(best, tol.f_nonzero, tol.band, pass_below=False)
    return {"pass": "yes", "fail": "no"}.get(state, state), "pointwise"


def orbit_verdict(commutation: Sequence[str], f_nonzero: Sequence[str]) -> tuple[Verdict, bool]:
    """Combine the per-axis states into a verdict.

    Parameters
    ----------
    commutation : sequence of {"pass", "fail", "indeterminate"}
        Commutation status on axes 1, 2 and 3.
    f_nonzero : sequence of {"yes", "no", "indeterminate"}
        Whether ``f_i`` is nonzero on each axis.

    Returns
    -------
    str
        ``in_orbit`` when some passing axis has ``f_i != 0``, ``boundary``
        when every passing axis has ``f_i = 0``, ``outside`` when every axis
        fails and ``indeterminate`` otherwise.
    bool
        Whether ``f_nonzero`` agrees across the passing axes.

    Examples
    --------
    >>> do.orbit_verdict(["pass", "pass", "pass"], ["no", "no", "no"])
    ('boundary', True)
    """
    passing = [k for k, c in enumerate(commutation) if c == "pass"]
    if any(f_nonzero[k] == "yes" for k in passing):
        verdict: Verdict = "in_orbit"
    elif passing and all(f_nonzero[k] == "no" for k in passing):
        verdict = "boundary"
    elif all(c == "fail" for c in commutation):
        verdict = "outside"
    else:
        verdict = "indeterminate"
    return verdict, len({f_nonzero[k] for k in passing}) <= 1


def classify(
    p: Tensor3,
    tol: Tolerances | None = None,
    backend: Backend = "auto",
    seed: int = 42,
    samples: int = 5,
    with_decomposition: bool = False,
) -> MembershipReport:
    """Decide whether ``p`` lies in the orbit of the unit tensor.

    The commutation relations and the nonvanishing of ``f_i`` are checked on
    all three axes; the verdict needs both on one axis and records whether the
    axes agree.

    Parameters
    ----------
    p : Tensor3
        The tensor.
    tol : Tolerances, optional
        Decision thresholds; float decisions within a factor ``tol.band`` of
        a threshold are reported as indeterminate.
    backend : {"auto", "exact", "float"}, optional
        Arithmetic, defaults to exact for rational tensors.
    seed : int, optional
        Seed for all sample points, defaults to 42.
    samples : int, optional
        Number of sample points per check, defaults to 5.
    with_decomposition : bool, optional
        Attach the decomposition when the verdict is ``in_orbit``.

    Returns
    -------
    MembershipReport
        The verdict and its evidence.

    Notes
    -----
    For exact tensors with ``n > 5`` the symbolic ``f_i`` is not expanded:
    when ``f_i`` vanishes at all ``samples`` integer points it is taken to be
    identically zero (``f_method`` ``"sampled"``). Such a ``boundary``
    verdict holds with high probability only and is flagged in ``notes``.
    """
    tol = resolve_tolerances(tol)
    mode = resolve_backend(p, backend)
    comms, nonsing, f_status, f_methods = [], [], [], []
    for i in AXES:
        comms.append(_commutation(p, i, mode, tol, seed, samples))
        nonsing.append(_slice_nonsingular(p, i, mode, tol, seed, samples))
        if not nonsing[-1]:
            f_status.append("no")
            f_methods.append("skipped")
            continue
        if mode == "exact":
            state, method = _exact_f_status(p, i, seed, samples)
        else:
            state, method = _float_f_status(p, i, tol, seed, samples)
        f_status.append(state)
        f_methods.append(method)

    verdict, consistent = orbit_verdict([c.status for c in comms], f_status)
    in_orbit = {"in_orbit": "yes", "indeterminate": "indeterminate"}.get(verdict, "no")
    report = MembershipReport(
        n=p.n,
        backend=mode,
        verdict=verdict,
        in_orbit=in_orbit,
        commutation=comms,
        slice_nonsingular=nonsing,
        f_nonzero=f_status,
        f_method=f_methods,
        cross_axis_consistent=consistent,
    )
    sampled = [i for i, m in zip(AXES, f_methods) if m == "sampled"]
    if sampled:
        note = (
            f"f vanishes at {samples} integer sample points on axes {sampled}; "
            "taken as identically zero, which is probabilistic"
        )
        logger.warning(f"{note}.")
        report.notes.append(note)
    if with_decomposition and verdict == "in_orbit":
        dec = _decompose(p, report, tol, seed)
        report.decomposition = dec.to_json_dict()
        report.residual = dec.residual
    return report
