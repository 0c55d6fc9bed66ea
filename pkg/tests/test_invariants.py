from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from diagorbit.exceptions import (
    FieldMismatchError,
    InputValueError,
    SingularEvaluationError,
    UnsupportedDimensionError,
)
from diagorbit.invariants import (
    cayley_delta,
    covariant_coefficients,
    f,
    f_eval,
    h,
    h_eval,
    hessian_eval,
    r_eval,
    tangle,
    tangle3,
    tangle4,
    tangle_covariant,
)
from diagorbit.kernels import levi_civita
from diagorbit.scalar_poly import MultiPoly
from diagorbit.tensor_core import (
    AXES,
    GroupElement,
    Tensor3,
    act,
    random_group_element,
    unit_tensor,
)


def _monomial_product(n: int, power: int) -> MultiPoly:
    out = MultiPoly.one(n)
    for a in range(n):
        out = out * MultiPoly.variable(a, n) ** power
    return out


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_covariants_of_unit_tensor(n: int) -> None:
    d = unit_tensor(n)
    for i in AXES:
        assert h(d, i).poly == _monomial_product(n, 1)
        assert f(d, i).poly == _monomial_product(n, n - 2) * (n - 1)
        assert r_eval(d, i, list(range(1, n + 1))) == 1


def test_worked_example(worked3: Tensor3) -> None:
    assert h(worked3, 3).to_text() == "1*x1*x2*x3 + -1*x3^3"
    assert f(worked3, 3).to_text() == "2*x1*x2*x3 + 6*x3^3"
    assert f(worked3, 3).degrees == (9, 3)


def test_worked_example_ratio(worked3: Tensor3) -> None:
    # r_3 = f_3 / (2 h_3)
    assert r_eval(worked3, 3, [2, 1, 1]) == 5
    assert r_eval(worked3, 3, [3, 1, 1]) == 3
    assert r_eval(worked3, 3, [1, 2, 1]) == 5
    with pytest.raises(SingularEvaluationError):
        r_eval(worked3, 3, [1, 1, 1])


def _law_pair(n: int, seed: int) -> tuple[Tensor3, GroupElement]:
    rng = np.random.default_rng(seed)
    p = Tensor3.from_array(rng.integers(-2, 3, size=(n, n, n)))
    return p, random_group_element(n, seed=seed + 200, bound=2)


def _other_axes(i: int) -> tuple[int, int]:
    j, k = (a for a in AXES if a != i)
    return j, k


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("seed", range(20))
def test_h_transformation_law(n: int, seed: int) -> None:
    p, g = _law_pair(n, seed)
    dets = g.dets()
    moved = act(p, g)
    for i in AXES:
        j, k = _other_axes(i)
        expected = h(p, i).poly.substitute_linear(g.factors[i - 1]) * (dets[j - 1] * dets[k - 1])
        assert h(moved, i).poly == expected


def _check_f_law(n: int, seed: int) -> None:
    p, g = _law_pair(n, seed)
    dets = g.dets()
    moved = act(p, g)
    for i in AXES:
        j, k = _other_axes(i)
        weight = (dets[j - 1] * dets[k - 1]) ** n * dets[i - 1] ** 2
        expected = f(p, i).poly.substitute_linear(g.factors[i - 1]) * weight
        assert f(moved, i).poly == expected


@pytest.mark.parametrize("seed", range(20))
def test_f_transformation_law(seed: int) -> None:
    _check_f_law(3, seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_f_transformation_law_n4(seed: int) -> None:
    _check_f_law(4, seed)


@pytest.mark.parametrize("seed", range(8))
def test_f_agrees_with_cayley_delta(seed: int) -> None:
    rng = np.random.default_rng(seed)
    p = Tensor3.from_array(rng.integers(-4, 5, size=(2, 2, 2)))
    delta = cayley_delta(p)
    for i in AXES:
        value = f(p, i).poly
        assert value.degree <= 0
        assert value.coefficient((0, 0)) == delta
    assert tangle(p) == delta


def test_cayley_delta_of_werner_tensor() -> None:
    w = Tensor3.from_slices([np.eye(2, dtype=int), np.eye(2, k=1, dtype=int)])
    assert cayley_delta(w) == 0
    assert cayley_delta(unit_tensor(2)) == 1


def test_tangle_values() -> None:
    assert tangle3(unit_tensor(3)) == 6
    assert tangle3(unit_tensor(3).to_float()) == pytest.approx(6.0)
    assert tangle_covariant(unit_tensor(3), 2).poly == _monomial_product(3, 1) * 6
    with pytest.raises(UnsupportedDimensionError):
        tangle3(unit_tensor(2))
    with pytest.raises(UnsupportedDimensionError):
        tangle(unit_tensor(5))


def test_tangle4_of_unit_tensor() -> None:
    assert tangle4(unit_tensor(4).to_float()) == pytest.approx(24.0)
    assert tangle4(unit_tensor(4)) == 24


@pytest.mark.parametrize("seed", range(20))
def test_tangle3_weight(seed: int, random3: Tensor3) -> None:
    g = random_group_element(3, seed=seed, bound=2)
    weight = np.prod([d**2 for d in g.dets()])
    assert tangle3(act(random3, g)) == weight * tangle3(random3)


@pytest.mark.parametrize("seed", range(6))
def test_cayley_delta_weight(seed: int) -> None:
    rng = np.random.default_rng(seed)
    p = Tensor3.from_array(rng.integers(-3, 4, size=(2, 2, 2)))
    g = random_group_element(2, seed=seed + 100)
    weight = np.prod([d**2 for d in g.dets()])
    assert cayley_delta(act(p, g)) == weight * cayley_delta(p)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
def test_tangle4_weight(seed: int) -> None:
    rng = np.random.default_rng(seed)
    p = Tensor3.from_array(rng.integers(-2, 3, size=(4, 4, 4)))
    g = random_group_element(4, seed=seed + 50, bound=1)
    weight = np.prod([d**2 for d in g.dets()])
    assert tangle4(act(p, g)) == weight * tangle4(p)


def test_pointwise_evaluation(orbit3: Tensor3) -> None:
    x0 = [1, 2, -1]
    assert h_eval(orbit3, 1, x0) == h(orbit3, 1).poly.evaluate(x0)
    assert f_eval(orbit3, 2, x0) == f(orbit3, 2).poly.evaluate(x0)
    x0f = [0.3, 1.7, -2.9]
    assert f_eval(orbit3, 2, x0f) == pytest.approx(f(orbit3, 2).poly.evaluate(x0f), rel=1e-8)
    hess, det = hessian_eval(unit_tensor(3), 3, [1, 1, 1])
    assert det == 1
    assert hess.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]


def test_r_is_constant_on_the_orbit(orbit3: Tensor3) -> None:
    # r_i is the product of the squared determinants, independent of x
    points = (["1/3", "5/7", "11/13"], ["2/5", "-3/11", "7/3"], ["1/2", "1/9", "-13/5"])
    values = {r_eval(orbit3, 3, x0) for x0 in points}
    assert len(values) == 1
    assert next(iter(values)) != 0


def test_coefficients(worked3: Tensor3) -> None:
    assert covariant_coefficients(worked3) == {(1, 1, 1): Fraction(2), (0, 0, 3): Fraction(6)}


def test_errors() -> None:
    d = unit_tensor(3)
    with pytest.raises(SingularEvaluationError):
        r_eval(d, 3, [1, 0, 1])
    with pytest.raises(FieldMismatchError):
        h(d.to_float(), 1)
    with pytest.raises(InputValueError):
        h(d, 0)
    with pytest.raises(UnsupportedDimensionError):
        f(unit_tensor(6), 1)


def test_levi_civita() -> None:
    perms, signs = levi_civita(3)
    assert perms.shape == (6, 3)
    assert signs.tolist() == [1, -1, -1, 1, 1, -1]
