"""Compiled loops for the ε-network contractions behind the tangles.

Each tangle is a signed sum over one permutation per ε factor. Assigning a
permutation to a factor fixes one index of several tensor entries; the loops
below are nested so that every entry is read as soon as all three of its
indices are fixed, and a whole subtree is skipped once an entry is zero.
The float kernels run under numba with the outermost loop in ``prange``;
exact tensors go through the same code uncompiled (``py_func``) on object
arrays of Python integers, which keeps the sum exact and independent of the
partitioning of the outer loop.
"""

from __future__ import annotations

import functools
import itertools
from typing import TYPE_CHECKING, Any

import numpy as np
from numba import njit, prange
from sympy.combinatorics import Permutation

if TYPE_CHECKING:
    from numpy.typing import NDArray

__all__ = ["levi_civita", "tangle3_sum", "tangle4_sum"]


@functools.cache
def levi_civita(n: int) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """Permutations of ``range(n)`` and their signatures.

    Returns
    -------
    perms : numpy.ndarray
        Array of shape ``(n!, n)``, rows in lexicographic order.
    signs : numpy.ndarray
        The ``±1`` signature of each row.
    """
    perms = list(itertools.permutations(range(n)))
    signs = [Permutation(list(p)).signature() for p in perms]
    perm_arr = np.array(perms, dtype=np.int64)
    sign_arr = np.array(signs, dtype=np.int64)
    perm_arr.flags.writeable = False
    sign_arr.flags.writeable = False
    return perm_arr, sign_arr


@njit(parallel=True, cache=True)
def _tangle3_kernel(p, perms, signs, partial):  # pragma: no cover
    # factors E1(i1 j1 k1) E2(j2 k2 l2) E3(k3 l3 m3) E4(l1 m1 n1) E5(m2 n2 i2) E6(n3 i3 j3)
    nperm = perms.shape[0]
    for a in prange(nperm):
        acc = partial[a]
        s1 = perms[a]
        for b5 in range(nperm):
            s5 = perms[b5]
            for b6 in range(nperm):
                s6 = perms[b6]
                pi = p[s1[0], s5[2], s6[1]]
                if pi == 0:
                    continue
                wi = signs[a] * signs[b5] * signs[b6] * pi
                for b2 in range(nperm):
                    s2 = perms[b2]
                    pj = p[s1[1], s2[0], s6[2]]
                    if pj == 0:
                        continue
                    wj = wi * signs[b2] * pj
                    for b3 in range(nperm):
                        s3 = perms[b3]
                        pk = p[s1[2], s2[1], s3[0]]
                        if pk == 0:
                            continue
                        wk = wj * signs[b3] * pk
                        for b4 in range(nperm):
                            s4 = perms[b4]
                            pl = p[s4[0], s2[2], s3[1]]
                            if pl == 0:
                                continue
                            tail = p[s4[1], s5[0], s3[2]] * p[s4[2], s5[1], s6[0]]
                            acc += wk * signs[b4] * pl * tail
        partial[a] = acc


@njit(parallel=True, cache=True)
def _tangle4_kernel(p, perms, signs, partial):  # pragma: no cover
    # factors E1(i1 j1 k1 l1) E2(m1 n1 r1 s1) E3(i2 l2 m2 s2)
    #         E4(j2 k2 n2 r2) E5(i3 j3 m3 n3) E6(k3 l3 r3 s3)
    nperm = perms.shape[0]
    for a in prange(nperm):
        acc = partial[a]
        s1 = perms[a]
        for b3 in range(nperm):
            s3 = perms[b3]
            for b5 in range(nperm):
                s5 = perms[b5]
                pi = p[s1[0], s3[0], s5[0]]
                if pi == 0:
                    continue
                wi = signs[a] * signs[b3] * signs[b5] * pi
                for b4 in range(nperm):
                    s4 = perms[b4]
                    pj = p[s1[1], s4[0], s5[1]]
                    if pj == 0:
                        continue
                    wj = wi * signs[b4] * pj
                    for b2 in range(nperm):
                        s2 = perms[b2]
                        pm = p[s2[0], s3[2], s5[2]]
                        if pm == 0:
                            continue
                        pn = p[s2[1], s4[2], s5[3]]
                        if pn == 0:
                            continue
                        wn = wj * signs[b2] * pm * pn
                        for b6 in range(nperm):
                            s6 = perms[b6]
                            pk = p[s1[2], s4[1], s6[0]]
                            if pk == 0:
                                continue
                            pl = p[s1[3], s3[1], s6[1]]
                            if pl == 0:
                                continue
                            acc += (
                                wn
                                * signs[b6]
                                * pk
                                * pl
                                * p[s2[2], s4[3], s6[2]]
                                * p[s2[3], s3[3], s6[3]]
                            )
        partial[a] = acc


def _float_sum(kernel: Any, p: NDArray[Any], n: int) -> Any:
    perms, signs = levi_civita(n)
    dtype = np.complex128 if np.iscomplexobj(p) else np.float64
    arr = np.ascontiguousarray(p, dtype=dtype)
    partial = np.zeros(perms.shape[0], dtype=dtype)
    kernel(arr, perms, signs.astype(dtype), partial)
    total = partial.sum()
    return complex(total) if dtype == np.complex128 else float(total)


def _object_partial(size: int) -> NDArray[np.object_]:
    partial = np.empty(size, dtype=object)
    partial[:] = [0] * size
    return partial


def tangle3_sum(p: NDArray[Any]) -> Any:
    """Raw six-factor ε sum for a 3x3x3 array.

    Float and complex arrays run compiled; object arrays (integers or
    polynomials) are summed exactly by the uncompiled loop.
    """
    if p.dtype != object:
        return _float_sum(_tangle3_kernel, p, 3)
    perms, signs = levi_civita(3)
    partial = _object_partial(perms.shape[0])
    _tangle3_kernel.py_func(p, perms, np.array([int(s) for s in signs], dtype=object), partial)
    return sum(partial.tolist())


def _ix(a: NDArray[Any], rows: NDArray[np.int64], cols: NDArray[np.int64]) -> NDArray[Any]:
    return a[np.ix_(rows, cols)]


def _tangle4_exact(p: NDArray[np.object_]) -> Any:
    # For fixed permutations on E1 and E2 the remaining four ε factors close a
    # 4-cycle E3-E5-E4-E6, so the inner sum is a trace of 24x24 products.
    perms, signs = levi_civita(4)
    sgn = np.array([int(s) for s in signs], dtype=object)
    c = [perms[:, t] for t in range(4)]
    nonzero = [bool(np.any(p[a] != 0)) for a in range(4)]
    total: Any = 0
    for s1, sg1 in zip(perms, sgn):
        a_i, a_j, a_k, a_l = (p[s1[t]] for t in range(4))
        if not all(nonzero[s1[t]] for t in range(4)):
            continue
        for s2, sg2 in zip(perms, sgn):
            if not all(nonzero[s2[t]] for t in range(4)):
                continue
            a_m, a_n, a_r, a_s = (p[s2[t]] for t in range(4))
            x = _ix(a_i, c[0], c[0]) * _ix(a_m, c[2], c[2]) * sgn[:, None] * sgn[None, :]
            y = _ix(a_l, c[1], c[1]) * _ix(a_s, c[3], c[3])
            u = _ix(a_j, c[0], c[1]) * _ix(a_n, c[2], c[3])
            v = _ix(a_k, c[1], c[0]) * _ix(a_r, c[3], c[2]) * sgn[:, None] * sgn[None, :]
            inner = np.sum((x @ u.T) * (y @ v.T))
            if inner:
                total += sg1 * sg2 * inner
    return total


def tangle4_sum(p: NDArray[Any]) -> Any:
    """Raw eight-factor ε sum for a 4x4x4 array.

    Float and complex arrays run the compiled loop; object arrays are summed
    exactly through a regrouping into 24x24 matrix products.
    """
    if p.dtype != object:
        return _float_sum(_tangle4_kernel, p, 4)
    return _tangle4_exact(p)
