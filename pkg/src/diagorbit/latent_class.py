"""The n-state latent-class model on three observed variables.

A distribution of the model is ``P = Σ_l π_l M1[l] ⊗ M2[l] ⊗ M3[l]`` with a
positive probability vector ``π`` and nonsingular row-stochastic matrices
``M_i``. Membership is decided by five conditions on ``P``: non-negative
entries summing to one, orbit membership, nonsingular two-way marginals, a
positive definite matrix built from the marginals, and positive semidefinite
matrices built from the marginals and the slices.
"""

from __future__ import annotations

import itertools
from typing import TYPE_CHECKING, Any, Literal, cast

import numpy as np
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator
from typing_extensions import Self

from .exceptions import (
    DimensionMismatchError,
    FieldMismatchError,
    InconsistentModelError,
    InputValueError,
    InvalidParametersError,
    NotInOrbitError,
)
from .membership import Backend, Status, classify, decompose, resolve_backend
from .tensor_core import Tensor3, contract, mat_det, rank1_tensor
from .utils import SCHEMA_VERSION, exact_array, get_logger, is_exact, resolve_tolerances, tri_state

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .diagorbit import Tolerances

__all__ = [
    "ConditionResult",
    "MinorWitness",
    "ModelParams",
    "ModelReport",
    "check_membership",
    "counts_to_frequencies",
    "marginals",
    "minors",
    "parameterize",
    "recover_params",
]

logger = get_logger()

MIN_CELL_COUNT = 30
MAX_EXACT_MINORS = 6


def _param_array(value: Any) -> NDArray[Any]:
    arr = np.asarray(value, dtype=object)
    if any(isinstance(v, (float, np.floating)) for v in arr.ravel()):
        return arr.astype(float)
    return exact_array(arr)


def _encode(arr: NDArray[Any]) -> Any:
    if is_exact(arr):
        return np.vectorize(str, otypes=[object])(arr).tolist()
    return arr.tolist()


class ModelParams(BaseModel):
    """Parameters ``(π, M1, M2, M3)`` of the latent-class model.

    Entries are kept exact (fractions) when every given value is an integer,
    a fraction or a ``"p/q"`` string, and as floats otherwise. Shapes are
    validated here; the probability constraints are listed by
    :meth:`violations`.
    """

    model_config = ConfigDict(frozen=True)

    pi: Any
    M1: Any
    M2: Any
    M3: Any

    @field_validator("pi", "M1", "M2", "M3", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> NDArray[Any]:
        return _param_array(value)

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        n = self.pi.shape[0] if self.pi.ndim == 1 else -1
        if n < 1:
            raise DimensionMismatchError("pi", "(n,)", self.pi.shape)
        for name in ("M1", "M2", "M3"):
            shape = getattr(self, name).shape
            if shape != (n, n):
                raise DimensionMismatchError(name, (n, n), shape)
        return self

    @field_serializer("pi", "M1", "M2", "M3")
    def _serialize(self, value: NDArray[Any]) -> Any:
        return _encode(value)

    @property
    def n(self) -> int:
        """Number of states."""
        return self.pi.shape[0]

    @property
    def is_exact(self) -> bool:
        """Whether all parameters are exact."""
        return all(is_exact(a) for a in (self.pi, self.M1, self.M2, self.M3))

    @property
    def factors(self) -> tuple[NDArray[Any], NDArray[Any], NDArray[Any]]:
        """``(M1, M2, M3)``, promoted to float when any parameter is float."""
        mats = (self.M1, self.M2, self.M3)
        if self.is_exact:
            return mats
        return tuple(m.astype(float) for m in mats)  # type: ignore[return-value]

    def violations(self, tol: float = 1e-12) -> list[str]:
        """Every violated constraint; float checks use the absolute tolerance ``tol``."""
        out = []
        exact = self.is_exact
        slack = 0 if exact else tol
        pi = self.pi if exact else self.pi.astype(float)
        if any(v <= 0 for v in pi):
            out.append("pi has a non-positive entry")
        if abs(sum(pi) - 1) > slack:
            out.append(f"pi sums to {sum(pi)}, not 1")
        for name, m in zip(("M1", "M2", "M3"), self.factors):
            if any(v < -slack for v in m.ravel()):
                out.append(f"{name} has a negative entry")
            sums = [sum(row) for row in m]
            if any(abs(s - 1) > slack for s in sums):
                out.append(f"a row of {name} does not sum to 1")
            det = mat_det(m)
            if (det == 0) if exact else abs(det) <= tol:
                out.append(f"{name} is singular")
        return out


class MinorWitness(BaseModel):
    """A principal minor (1-based ``indices``) of the named matrix and its value."""

    matrix: str
    indices: list[int]
    value: str


class ConditionResult(BaseModel):
    """Outcome of one membership condition."""

    name: Literal["c1", "c2", "c3", "c4", "c5"]
    status: Status
    witness: MinorWitness | None = None
    detail: str | None = None


class ModelReport(BaseModel):
    """All five membership conditions, the verdict and the recovered parameters."""

    schema_version: str = SCHEMA_VERSION
    n: int
    backend: Literal["exact", "float"]
    strict: bool
    conditions: list[ConditionResult]
    verdict: Status
    recovered: ModelParams | None = None
    residual: float | None = None

    @property
    def passed(self) -> bool:
        """Whether every condition holds."""
        return self.verdict == "pass"

    @property
    def exit_code(self) -> int:
        """CLI exit code of the verdict."""
        return {"pass": 0, "fail": 3, "indeterminate": 4}[self.verdict]


def parameterize(params: ModelParams, check: bool = True) -> Tensor3:
    """The distribution ``Σ_l π_l M1[l] ⊗ M2[l] ⊗ M3[l]``.

    Parameters
    ----------
    params : ModelParams
        Model parameters.
    check : bool, optional
        Reject parameters violating the model constraints, defaults to
        ``True``. Disabling the check builds tensors just outside the model.

    Returns
    -------
    Tensor3
        Exact when all parameters are exact.

    Raises
    ------
    InvalidParametersError
        Listing every violated constraint.

    Examples
    --------
    >>> m = [["9/10", "1/10"], ["1/10", "9/10"]]
    >>> p = do.parameterize(do.ModelParams(pi=["1/2", "1/2"], M1=m, M2=m, M3=m))
    >>> p.entries[0, 0, 0]
    Fraction(73, 200)
    """
    if check and (bad := params.violations()):
        raise InvalidParametersError(bad)
    m1, m2, m3 = params.factors
    pi = params.pi if params.is_exact else params.pi.astype(float)
    terms = [rank1_tensor(m1[r], m2[r], m3[r], pi[r]) for r in range(params.n)]
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def _ones(n: int, exact: bool) -> NDArray[Any]:
    return exact_array([1] * n) if exact else np.ones(n)


def _unit(n: int, col: int, exact: bool) -> NDArray[Any]:
    v = [int(a == col) for a in range(n)]
    return exact_array(v) if exact else np.asarray(v, dtype=float)


def marginals(p: Tensor3) -> tuple[NDArray[Any], NDArray[Any], NDArray[Any]]:
    """The two-way marginals ``P *_i 1`` for ``i = 1, 2, 3``.

    ``P *_3 1`` is the joint table of the first two variables, and so on.
    For model distributions ``P *_3 1 = M1ᵀ diag(π) M2``.
    """
    ones = _ones(p.n, p.is_exact)
    return contract(p, 1, ones), contract(p, 2, ones), contract(p, 3, ones)


def counts_to_frequencies(counts: ArrayLike, source: str | None = None) -> Tensor3:
    """Normalize a table of counts to exact frequencies.

    A warning is logged when some cell holds fewer than 30 observations,
    since the membership conditions describe exact distributions.
    """
    p = Tensor3.from_counts(counts, source)
    small = sum(1 for c in np.asarray(counts, dtype=object).ravel() if c < MIN_CELL_COUNT)
    if small:
        logger.warning(
            f"{small} cells hold fewer than {MIN_CELL_COUNT} counts; frequencies are noisy."
        )
    return p


def minors(
    m: ArrayLike, mode: Literal["leading", "all"] = "leading"
) -> list[tuple[tuple[int, ...], Any]]:
    """Principal minors of a square matrix.

    Parameters
    ----------
    m : array_like
        A square matrix, exact or float.
    mode : {"leading", "all"}, optional
        The ``n`` leading principal minors, or all ``2^n - 1`` principal
        minors ordered by size and then lexicographically.

    Returns
    -------
    list of (tuple of int, scalar)
        1-based index sets with their minors.

    Examples
    --------
    >>> [str(v) for _, v in do.minors([[2, 1], [1, 2]])]
    ['2', '3']
    """
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError("matrix", "square", arr.shape)
    if mode not in ("leading", "all"):
        raise InputValueError("mode", ("leading", "all"), mode)
    if arr.dtype == object or np.issubdtype(arr.dtype, np.integer):
        has_float = any(isinstance(v, float) for v in arr.ravel())
        arr = arr.astype(float) if has_float else exact_array(arr)
    n = arr.shape[0]
    if mode == "leading":
        index_sets = [tuple(range(k)) for k in range(1, n + 1)]
    else:
        index_sets = [c for k in range(1, n + 1) for c in itertools.combinations(range(n), k)]
    return [(tuple(a + 1 for a in idx), mat_det(arr[np.ix_(idx, idx)])) for idx in index_sets]


def _adjugate(m: NDArray[Any]) -> NDArray[Any]:
    n = m.shape[0]
    adj = np.empty_like(m)
    if n == 1:
        adj[0, 0] = 1
        return adj
    for r in range(n):
        for c in range(n):
            minor = np.delete(np.delete(m, c, axis=0), r, axis=1)
            adj[r, c] = (-1) ** (r + c) * mat_det(minor)
    return adj


def _cond4_matrices(marg: tuple[NDArray[Any], ...]) -> dict[str, NDArray[Any]]:
    m1, m2, m3 = marg
    return {
        "A1": mat_det(m1) * (m2 @ _adjugate(m1) @ m3.T),
        "A2": mat_det(m2) * (m1 @ _adjugate(m2) @ m3),
        "A3": mat_det(m3) * (m1.T @ _adjugate(m3) @ m2),
    }


def _cond5_matrices(p: Tensor3, marg: tuple[NDArray[Any], ...]) -> dict[str, NDArray[Any]]:
    m1, m2, m3 = marg
    d1, d2 = mat_det(m1), mat_det(m2)
    adj1, adj2 = _adjugate(m1), _adjugate(m2)
    out = {}
    for col in range(p.n):
        e = _unit(p.n, col, p.is_exact)
        s1, s2, s3 = contract(p, 1, e), contract(p, 2, e), contract(p, 3, e)
        out[f"B1[{col + 1}]"] = d1 * (m2 @ adj1 @ s3.T)
        out[f"B2[{col + 1}]"] = d1 * (s2 @ adj1 @ m3.T)
        out[f"B3[{col + 1}]"] = d2 * (s1 @ adj2 @ m3)
    return out


def _normalized(a: NDArray[Any]) -> NDArray[np.float64]:
    f = np.asarray(a, dtype=float)
    scale = float(np.max(np.abs(f)))
    return f / scale if scale > 0 else f


def _witness(name: str, idx: tuple[int, ...], value: Any) -> MinorWitness:
    return MinorWitness(matrix=name, indices=list(idx), value=str(value))


def _combine(states: list[Status]) -> Status:
    if "fail" in states:
        return "fail"
    if "indeterminate" in states:
        return "indeterminate"
    return "pass"


def _positive_definite(
    name: str, a: NDArray[Any], exact: bool, tol: Tolerances
) -> tuple[Status, MinorWitness | None]:
    """Sylvester's criterion on the leading principal minors."""
    if exact:
        for idx, value in minors(a, "leading"):
            if value <= 0:
                return "fail", _witness(name, idx, value)
        return "pass", None
    state: Status = "pass"
    witness = None
    for idx, value in minors(_normalized(a), "leading"):
        s = tri_state(float(value), tol.psd, tol.band, pass_below=False)
        if s == "fail":
            return "fail", _witness(name, idx, value)
        if s == "indeterminate" and state == "pass":
            state, witness = "indeterminate", _witness(name, idx, value)
    return state, witness


def _semidefinite(
    name: str, a: NDArray[Any], exact: bool, tol: Tolerances
) -> tuple[Status, MinorWitness | None]:
    if exact and a.shape[0] <= MAX_EXACT_MINORS:
        for idx, value in minors(a, "all"):
            if value < 0:
                return "fail", _witness(name, idx, value)
        return "pass", None
    f = _normalized(a)
    eig = np.linalg.eigvalsh((f + f.T) / 2)
    lowest = float(eig[0])
    if lowest >= -tol.psd:
        return "pass", None
    idx = tuple(range(1, a.shape[0] + 1))
    status: Status = "fail" if lowest < -tol.psd * tol.band else "indeterminate"
    return status, _witness(f"{name} (lowest eigenvalue)", idx, lowest)


def _condition1(p: Tensor3, exact: bool, tol: Tolerances) -> ConditionResult:
    entries = p.entries if exact else p.entries.astype(float)
    slack = 0 if exact else tol.psd
    low = min(entries.ravel())
    total = sum(entries.ravel())
    if low < -slack:
        flat = int(np.argmin(np.asarray(entries, dtype=float)))
        where = [int(a) + 1 for a in np.unravel_index(flat, entries.shape)]
        return ConditionResult(name="c1", status="fail", witness=_witness("P", tuple(where), low))
    if abs(total - 1) > (0 if exact else tol.psd * p.n**3):
        return ConditionResult(name="c1", status="fail", detail=f"entries sum to {total}")
    return ConditionResult(name="c1", status="pass")


def _condition2(
    p: Tensor3, backend: Backend, tol: Tolerances, seed: int, samples: int
) -> tuple[ConditionResult, Any]:
    report = classify(p, tol=tol, backend=backend, seed=seed, samples=samples)
    status = cast(
        "Status", {"in_orbit": "pass", "indeterminate": "indeterminate"}.get(report.verdict, "fail")
    )
    detail = f"orbit verdict {report.verdict}"
    broken = next((c for c in report.commutation if c.witness is not None and not c.passed), None)
    if broken is not None and broken.witness is not None:
        w = broken.witness
        detail += (
            f"; S_{w.j} adj S_{w.k} relation fails on axis {broken.axis}"
            f" at entry ({w.entry[0]}, {w.entry[1]})"
        )
    return ConditionResult(name="c2", status=status, detail=detail), report


def _condition3(marg: tuple[NDArray[Any], ...], exact: bool, tol: Tolerances) -> ConditionResult:
    for i, m in enumerate(marg, start=1):
        det = mat_det(m)
        if exact:
            state: Status = "pass" if det != 0 else "fail"
        else:
            bound = float(np.prod(np.linalg.norm(m, axis=1)))
            ratio = abs(det) / bound if bound > 0 else 0.0
            state = cast("Status", tri_state(ratio, tol.rank, tol.band, pass_below=False))
        if state != "pass":
            return ConditionResult(
                name="c3",
                status=state,
                witness=_witness(f"P *_{i} 1", tuple(range(1, m.shape[0] + 1)), det),
            )
    return ConditionResult(name="c3", status="pass")


def _condition4(marg: tuple[NDArray[Any], ...], exact: bool, tol: Tolerances) -> ConditionResult:
    results = {
        name: _positive_definite(name, a, exact, tol) for name, a in _cond4_matrices(marg).items()
    }
    states = [s for s, _ in results.values()]
    status = _combine(states)
    witness = next((w for s, w in results.values() if s == status and w is not None), None)
    detail = None
    if len(set(states)) > 1:
        detail = "the three matrices disagree: " + ", ".join(
            f"{k}={s}" for k, (s, _) in results.items()
        )
        logger.warning(f"Positive definiteness differs between the marginal matrices: {detail}.")
    return ConditionResult(name="c4", status=status, witness=witness, detail=detail)


def _condition5(
    p: Tensor3, marg: tuple[NDArray[Any], ...], exact: bool, strict: bool, tol: Tolerances
) -> ConditionResult:
    states = []
    witness = None
    for name, a in _cond5_matrices(p, marg).items():
        check = _positive_definite if strict else _semidefinite
        state, w = check(name, a, exact, tol)
        states.append(state)
        if state == "fail":
            return ConditionResult(name="c5", status="fail", witness=w)
        if state == "indeterminate" and witness is None:
            witness = w
    return ConditionResult(name="c5", status=_combine(states), witness=witness)


def check_membership(
    p: Tensor3,
    strict: bool = False,
    tol: Tolerances | None = None,
    backend: Backend = "auto",
    seed: int = 42,
    samples: int = 5,
    recover: bool = True,
) -> ModelReport:
    """Decide whether ``p`` is a distribution of the latent-class model.

    Parameters
    ----------
    p : Tensor3
        A real tensor.
    strict : bool, optional
        Strictly positive mode: condition 5 requires positive leading
        principal minors instead of non-negative principal minors, which
        describes the parameters with all ``M_i`` entries positive.
    tol : Tolerances, optional
        Decision thresholds for float tensors.
    backend : {"auto", "exact", "float"}, optional
        Arithmetic, defaults to exact for rational tensors.
    seed : int, optional
        Seed for the sample points of the orbit check.
    samples : int, optional
        Number of sample points of the orbit check.
    recover : bool, optional
        Attach the recovered parameters when every condition passes.

    Returns
    -------
    ModelReport
        Per-condition results with witnesses.
    """
    if p.field not in ("rational", "real"):
        raise FieldMismatchError("check_membership", "real", p.field)
    tol = resolve_tolerances(tol)
    mode = resolve_backend(p, backend)
    exact = mode == "exact"
    q = p if exact or not p.is_exact else p.to_float()
    marg = marginals(q)
    c2, orbit = _condition2(q, mode, tol, seed, samples)
    conditions = [
        _condition1(q, exact, tol),
        c2,
        _condition3(marg, exact, tol),
        _condition4(marg, exact, tol),
        _condition5(q, marg, exact, strict, tol),
    ]
    verdict = _combine([c.status for c in conditions])
    report = ModelReport(n=p.n, backend=mode, strict=strict, conditions=conditions, verdict=verdict)
    if recover and verdict == "pass":
        params, residual = _recover(q, orbit, tol, seed)
        return report.model_copy(update={"recovered": params, "residual": residual})
    return report


def _real_rows(g: NDArray[Any], tol: Tolerances) -> NDArray[Any]:
    if is_exact(g):
        return g
    if float(np.max(np.abs(g.imag))) > tol.pairing * max(float(np.max(np.abs(g))), 1.0):
        raise InconsistentModelError("the decomposition has complex rows")
    return np.asarray(g.real, dtype=float)


def _recover(p: Tensor3, report: Any, tol: Tolerances, seed: int) -> tuple[ModelParams, float]:
    if report.verdict != "in_orbit":
        raise NotInOrbitError(report)
    dec = decompose(p, tol=tol, seed=seed, report=report)
    gs = [_real_rows(g, tol) for g in (dec.g1, dec.g2, dec.g3)]
    exact = all(is_exact(g) for g in gs)
    sums = [g @ _ones(p.n, exact) for g in gs]
    for i, s in enumerate(sums, start=1):
        scale = float(np.max(np.abs(np.asarray(gs[i - 1], dtype=float))))
        if any((v == 0) if exact else abs(v) <= tol.rank * scale for v in s):
            raise InconsistentModelError(f"a row of g{i} sums to zero")
    mats = [g / s[:, None] for s, g in zip(sums, gs)]
    pi = sums[0] * sums[1] * sums[2]
    order = sorted(range(p.n), key=lambda r: (-pi[r], tuple(mats[2][r])))
    params = ModelParams(
        pi=[pi[r] for r in order],
        M1=[mats[0][r] for r in order],
        M2=[mats[1][r] for r in order],
        M3=[mats[2][r] for r in order],
    )
    rebuilt = parameterize(params, check=False)
    a, b = p.as_numeric(), rebuilt.as_numeric()
    residual = float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(a))), 1e-300))
    return params, residual


def recover_params(
    p: Tensor3,
    tol: Tolerances | None = None,
    backend: Backend = "auto",
    seed: int = 42,
    samples: int = 5,
) -> ModelParams:
    """Model parameters of a distribution passing :func:`check_membership`.

    With ``P = act(D, (g1, g2, g3))`` and row sums ``s_i = g_i 1``, the
    parameters are ``M_i = diag(s_i)^-1 g_i`` and ``π = s1 * s2 * s3``.
    Hidden states are ordered by decreasing ``π``, ties broken by the rows
    of ``M3``.

    Raises
    ------
    InconsistentModelError
        If a row sum vanishes or the decomposition is not real.
    """
    tol = resolve_tolerances(tol)
    mode = resolve_backend(p, backend)
    q = p if mode == "exact" or not p.is_exact else p.to_float()
    report = classify(q, tol=tol, backend=mode, seed=seed, samples=samples)
    params, residual = _recover(q, report, tol, seed)
    if residual > tol.reconstruction and not (params.is_exact and residual == 0):
        raise InconsistentModelError(f"the recovered parameters reproduce P only to {residual:.2e}")
    return params

