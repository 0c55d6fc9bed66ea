"""Signatures and path components of real tensors in the orbit of the unit tensor.

A real tensor ``P = act(D, (g1, g2, g3))`` has a decomposition that is unique
up to the order of its terms, so the complex rows of every ``g_i`` come in
conjugate pairs. The number ``k`` of pairs gives the signature ``(n - 2k, k)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from pydantic import BaseModel

from .exceptions import (
    FieldMismatchError,
    IndeterminateError,
    InputRangeError,
    InputValueError,
    NotInOrbitError,
    SingularEvaluationError,
)
from .invariants import h, h_eval, r_eval, tangle3
from .membership import classify, decompose
from .scalar_poly import GaussianRational, MultiPoly
from .tensor_core import AXES, GroupElement, Tensor3, act, unit_tensor
from .utils import SCHEMA_VERSION, exact_array, get_rng, resolve_tolerances

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .diagorbit import Tolerances
    from .membership import Backend

__all__ = [
    "SignatureReport",
    "component_baseline",
    "component_descriptor",
    "component_representatives",
    "factorizes_over_reals",
    "gen_Jk",
    "signature",
]

SIGN_SAMPLES = 16
MIN_DECISIVE_SAMPLES = 8


class SignatureReport(BaseModel):
    """Signature ``(n - 2k, k)`` of a real in-orbit tensor.

    ``pairs`` lists the 1-based indices of the conjugate terms of the
    decomposition. ``component_descriptor`` is ``"real-rank-n"`` for
    ``k = 0``, ``"mixed(k)"`` for ``0 < 2k < n`` and the sign triple of
    ``(h_1, h_2, h_3)`` such as ``"(+,-,-)"`` for ``2k = n``.
    """

    schema_version: str = SCHEMA_VERSION
    n: int
    signature: tuple[int, int]
    r_sign: Literal["+", "-"]
    component_descriptor: str
    sign_triple: tuple[str, str, str] | None = None
    pairs: list[tuple[int, int]]
    tau3_positive: bool | None = None
    residual: float | None = None


def _check_real(p: Tensor3, operation: str) -> None:
    if p.field not in ("rational", "real"):
        raise FieldMismatchError(operation, "real", p.field)


def _complex_rows(g: NDArray[Any]) -> list[NDArray[np.complex128]]:
    return [np.array([complex(x) for x in row]) for row in g]


def _conjugate_pairs(g: NDArray[Any], rel: float) -> list[tuple[int, int]]:
    rows = _complex_rows(g)
    partner: dict[int, int] = {}
    for a, u in enumerate(rows):
        scale = float(np.linalg.norm(u))
        is_real = float(np.linalg.norm(u.imag)) < rel * scale
        dists = [(float(np.linalg.norm(u - v.conj())), b) for b, v in enumerate(rows) if b != a]
        matches = [b for d, b in dists if d < rel * scale]
        if is_real and not matches:
            continue
        if is_real or len(matches) != 1:
            closest = min((d for d, _ in dists), default=0.0)
            raise IndeterminateError(
                f"the conjugate partner of term {a + 1}", closest / max(scale, 1e-300)
            )
        partner[a] = matches[0]
    if any(partner.get(b) != a for a, b in partner.items()):
        raise IndeterminateError("the conjugate pairing", rel)
    return sorted({(min(a, b), max(a, b)) for a, b in partner.items()})


def _r_sign(p: Tensor3, seed: int, samples: int) -> Literal["+", "-"]:
    n = p.n
    if n == 1:
        return "+"
    rng = get_rng(seed)
    signs = set()
    for _ in range(samples + 5):
        if p.is_exact:
            x: list[Any] = [int(c) for c in rng.integers(-7, 8, size=n)]
        else:
            v = rng.standard_normal(n)
            x = (v / np.linalg.norm(v)).tolist()
        try:
            value = r_eval(p, 3, x)
        except SingularEvaluationError:
            continue
        signs.add("+" if complex(value).real > 0 else "-")
        if len(signs) > 1:
            raise IndeterminateError("the sign of r_3", 0.0)
    if not signs:
        raise IndeterminateError("the sign of r_3", 0.0)
    return signs.pop()


def _h_sign(p: Tensor3, i: int, tol: Tolerances, seed: int) -> str:
    n = p.n
    rng = get_rng(seed + i)
    cut = 0.0 if p.is_exact else tol.sign_sample * p.norm_max() ** n
    signs, decisive = set(), 0
    for _ in range(SIGN_SAMPLES):
        if p.is_exact:
            x: list[Any] = [int(c) for c in rng.integers(-7, 8, size=n)]
        else:
            v = rng.standard_normal(n)
            x = (v / np.linalg.norm(v)).tolist()
        value = complex(h_eval(p, i, x)).real
        if abs(value) > cut:
            decisive += 1
            signs.add("+" if value > 0 else "-")
    if decisive < MIN_DECISIVE_SAMPLES or len(signs) != 1:
        raise IndeterminateError(f"the constant sign of h_{i}", float(decisive))
    return signs.pop()


def _descriptor(
    p: Tensor3, k: int, tol: Tolerances, seed: int
) -> tuple[str, tuple[str, str, str] | None]:
    n = p.n
    if k == 0:
        return "real-rank-n", None
    if 2 * k < n:
        return f"mixed({k})", None
    triple = tuple(_h_sign(p, i, tol, seed) for i in AXES)
    return f"({','.join(triple)})", triple  # type: ignore[return-value]


def signature(
    p: Tensor3,
    tol: Tolerances | None = None,
    backend: Backend = "auto",
    seed: int = 42,
    samples: int = 5,
) -> SignatureReport:
    """Signature, sign of ``r_3`` and path-component descriptor of a real tensor.

    The tensor is decomposed, the rows of ``g3`` are paired with their
    complex conjugates and the pairing is cross-checked against ``g1`` and
    ``g2``. The sign of the invariant ``r_3`` must be ``+`` exactly when the
    number of pairs is even.

    Parameters
    ----------
    p : Tensor3
        A real (or rational) tensor in the orbit of the unit tensor.
    tol : Tolerances, optional
        Decision thresholds; ``tol.pairing`` is the relative distance under
        which two rows count as conjugate.
    backend : {"auto", "exact", "float"}, optional
        Arithmetic for the membership check and the decomposition.
    seed : int, optional
        Seed for all sample points, defaults to 42.
    samples : int, optional
        Number of sample points per check, defaults to 5.

    Returns
    -------
    SignatureReport
        The signature with its evidence.

    Raises
    ------
    NotInOrbitError
        If ``p`` is not in the orbit.
    IndeterminateError
        If the pairing is ambiguous, disagrees between the factors or
        contradicts the sign of ``r_3``.
    """
    _check_real(p, "signature")
    tol = resolve_tolerances(tol)
    report = classify(p, tol=tol, backend=backend, seed=seed, samples=samples)
    if report.verdict != "in_orbit":
        raise NotInOrbitError(report)
    dec = decompose(p, backend=backend, tol=tol, seed=seed, samples=samples, report=report)
    pairs = _conjugate_pairs(dec.g3, tol.pairing)
    for name, g in (("g1", dec.g1), ("g2", dec.g2)):
        if _conjugate_pairs(g, tol.pairing) != pairs:
            raise IndeterminateError(
                f"agreement of the conjugate pairs of {name} and g3", tol.pairing
            )
    n, k = p.n, len(pairs)
    r_sign = _r_sign(p, seed, samples)
    if (r_sign == "+") != (k % 2 == 0):
        raise IndeterminateError(f"the sign of r_3 against {k} conjugate pairs", dec.residual)
    descriptor, triple = _descriptor(p, k, tol, seed)
    tau3_positive = None
    if n == 3:
        tau = tangle3(p)
        tau3_positive = bool(complex(tau).real > 0)
    return SignatureReport(
        n=n,
        signature=(n - 2 * k, k),
        r_sign=r_sign,
        component_descriptor=descriptor,
        sign_triple=triple,
        pairs=[(a + 1, b + 1) for a, b in pairs],
        tau3_positive=tau3_positive,
        residual=dec.residual,
    )


def component_descriptor(
    p: Tensor3,
    report: SignatureReport | None = None,
    tol: Tolerances | None = None,
    seed: int = 42,
) -> str:
    """Path-component descriptor of a real in-orbit tensor.

    For signature ``(0, n/2)`` each ``h_i`` keeps a constant sign on the real
    points, and the triple of signs separates the components. Other
    signatures give ``"real-rank-n"`` or ``"mixed(k)"``.

    Parameters
    ----------
    p : Tensor3
        A real tensor in the orbit.
    report : SignatureReport, optional
        A signature report of ``p``; computed when not given.
    tol : Tolerances, optional
        Decision thresholds; float samples with ``|h_i|`` below
        ``tol.sign_sample * max|P|^n`` are ignored.
    seed : int, optional
        Seed for the sample points.
    """
    _check_real(p, "component_descriptor")
    tol = resolve_tolerances(tol)
    if report is None:
        return signature(p, tol=tol, seed=seed).component_descriptor
    return _descriptor(p, report.signature[1], tol, seed)[0]


def _j_matrix(n: int, k: int) -> NDArray[np.complex128]:
    if n < 1 or not 0 <= 2 * k <= n:
        raise InputRangeError("k", f"0 <= 2k <= n = {n}")
    j = np.eye(n, dtype=complex)
    for b in range(k):
        j[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = [[1, 1j], [1, -1j]]
    return j


def gen_Jk(n: int, k: int) -> tuple[GroupElement, Tensor3]:  # noqa: N802
    """The canonical real tensor ``act(D, (J_k, J_k, J_k))`` of signature ``(n - 2k, k)``.

    ``J_k`` is block diagonal with ``k`` blocks ``[[1, i], [1, -i]]`` followed
    by an identity block. The conjugate terms add up to a tensor with integer
    entries, returned as a rational tensor.

    Examples
    --------
    >>> _, p = do.gen_Jk(2, 1)
    >>> [str(v) for v in p.entries.ravel()]
    ['2', '0', '0', '-2', '0', '-2', '-2', '0']
    """
    j = _j_matrix(n, k)
    g = GroupElement(j, j, j)
    values = np.einsum("li,lj,lk->ijk", j, j, j)
    return g, Tensor3(exact_array(np.rint(values.real).astype(int)), "rational")


def component_representatives(n: int) -> list[Tensor3]:
    """The four tensors of signature ``(0, n/2)`` lying in distinct path components.

    With ``K = diag(1, ..., 1, -1)`` they are ``P``, ``act(P, (K, I, I))``,
    ``act(P, (I, K, I))`` and ``act(P, (I, I, K))`` for
    ``P = gen_Jk(n, n/2)``.
    """
    if n % 2:
        raise InputRangeError("n", "an even integer")
    _, p = gen_Jk(n, n // 2)
    eye = exact_array(np.eye(n, dtype=int))
    refl = eye.copy()
    refl[-1, -1] = -refl[-1, -1]
    flips = [
        GroupElement(refl, eye, eye),
        GroupElement(eye, refl, eye),
        GroupElement(eye, eye, refl),
    ]
    return [p] + [act(p, g) for g in flips]


def component_baseline(n: int, k: int) -> MultiPoly:
    """``h_3(act(D, (I, I, J_k)); x) = Π (x_{2b-1}^2 + x_{2b}^2) · Π x_c`` exactly.

    Examples
    --------
    >>> do.component_baseline(2, 1).to_text()
    '1*x1^2 + 1*x2^2'
    """
    j = _j_matrix(n, k)
    gauss = [
        [GaussianRational(Fraction(round(v.real)), Fraction(round(v.imag))) for v in row]
        for row in j
    ]
    return h(unit_tensor(n), 3).poly.substitute_linear(gauss).to_rational()


def factorizes_over_reals(
    p: Tensor3,
    i: int = 3,
    tol: Tolerances | None = None,
    seed: int = 42,
) -> bool:
    """Whether ``h_i(P; x)`` is a product of real linear forms.

    For an in-orbit tensor the linear factors of ``h_i`` are the rows of
    ``g_i`` in its decomposition, so they are all real exactly when the
    signature is ``(n, 0)``.
    """
    if i not in AXES:
        raise InputValueError("axis", AXES, i)
    return signature(p, tol=tol, seed=seed).signature[1] == 0
