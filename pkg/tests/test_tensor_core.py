from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from diagorbit.exceptions import (
    DimensionMismatchError,
    FieldMismatchError,
    InputRangeError,
    InputValueError,
    TensorParseError,
)
from diagorbit.tensor_core import (
    GroupElement,
    Tensor3,
    act,
    contract,
    diag_tensor,
    flatten,
    mat_det,
    mat_inv,
    mat_rank,
    mat_rational_eigenvalues,
    multilinear_rank,
    random_group_element,
    rank1_tensor,
    unit_tensor,
)


def test_unit_tensor() -> None:
    d = unit_tensor(3)
    assert d.field == "rational"
    assert d.entries[1, 1, 1] == 1
    assert d.entries[0, 1, 1] == 0
    assert multilinear_rank(d) == (3, 3, 3)
    with pytest.raises(InputRangeError):
        unit_tensor(0)


def test_from_array_infers_field() -> None:
    assert Tensor3.from_array(np.ones((2, 2, 2), dtype=int)).field == "rational"
    assert Tensor3.from_array(np.ones((2, 2, 2))).field == "real"
    assert Tensor3.from_array(np.ones((2, 2, 2)) * 1j).field == "complex"
    with pytest.raises(DimensionMismatchError):
        Tensor3.from_array(np.ones((2, 2, 3)))
    with pytest.raises(InputValueError):
        Tensor3.from_array(np.full((2, 2, 2), np.nan))


def test_json_documents() -> None:
    entries = [[["1/2", "0"], ["0", "0"]], [["0", "0"], ["0", "3"]]]
    doc = {"n": 2, "field": "rational", "entries": entries}
    p = Tensor3.from_json(json.dumps(doc))
    assert p.entries[0, 0, 0] == Fraction(1, 2)
    assert p.to_json() == doc
    c = Tensor3.from_json({"n": 1, "field": "complex", "entries": [[[[1.0, -2.0]]]]})
    assert c.entries[0, 0, 0] == 1 - 2j
    assert Tensor3.from_json(c.dumps()) == c


@pytest.mark.parametrize(
    ("doc", "error"),
    [
        ("{not json", TensorParseError),
        ({"n": 2, "entries": []}, TensorParseError),
        ({"n": 2, "field": "octonion", "entries": []}, TensorParseError),
        ({"n": 2, "field": "real", "entries": [[[1.0]]]}, DimensionMismatchError),
        ({"n": 1, "field": "rational", "entries": [[[0.5]]]}, FieldMismatchError),
        ({"n": 1, "field": "rational", "entries": [[["one"]]]}, TensorParseError),
    ],
)
def test_malformed_documents(doc, error) -> None:
    with pytest.raises(error):
        Tensor3.from_json(doc, "case.json")


def test_from_counts() -> None:
    p = Tensor3.from_counts([[[1, 1], [0, 0]], [[0, 0], [0, 2]]])
    assert p.entries[0, 0, 0] == Fraction(1, 4)
    assert p.entries[1, 1, 1] == Fraction(1, 2)
    with pytest.raises(TensorParseError):
        Tensor3.from_counts([[[0]]])
    with pytest.raises(TensorParseError):
        Tensor3.from_counts([[[-1]]])
    with pytest.raises(DimensionMismatchError):
        Tensor3.from_counts([[1, 2], [3, 4]])


def test_slices_and_contract() -> None:
    p = Tensor3.from_array(np.arange(8).reshape(2, 2, 2))
    assert p.slices(3)[1].tolist() == [[1, 3], [5, 7]]
    assert p.slices(1)[0].tolist() == [[0, 1], [2, 3]]
    assert contract(p, 3, [1, 1]).tolist() == [[1, 5], [9, 13]]
    assert contract(p, 1, [1, 0]).tolist() == p.slices(1)[0].tolist()
    with pytest.raises(InputValueError):
        p.slices(4)
    with pytest.raises(DimensionMismatchError):
        contract(p, 2, [1, 2, 3])


def test_flatten() -> None:
    p = Tensor3.from_array(np.arange(8).reshape(2, 2, 2))
    assert flatten(p, 3).shape == (4, 2)
    assert flatten(p, 3)[:, 1].tolist() == [1, 3, 5, 7]


def test_act_of_unit_tensor_is_sum_of_row_products() -> None:
    g = random_group_element(3, seed=7)
    p = act(unit_tensor(3), g)
    expected = rank1_tensor(g.g1[0], g.g2[0], g.g3[0])
    for r in (1, 2):
        expected = expected + rank1_tensor(g.g1[r], g.g2[r], g.g3[r])
    assert p == expected
    assert p.is_exact


def test_act_composes() -> None:
    p = Tensor3.from_array(np.arange(27).reshape(3, 3, 3) - 13)
    a = random_group_element(3, seed=1)
    b = random_group_element(3, seed=2)
    assert act(act(p, a), b) == act(p, a @ b)
    assert act(act(p, a), a.inverse()) == p


def test_act_float() -> None:
    g = random_group_element(3, seed=3, exact=False, real=False)
    p = act(unit_tensor(3), g)
    assert p.field == "complex"
    back = act(p, g.inverse())
    assert back.allclose(unit_tensor(3))


def test_group_element_rejects_singular() -> None:
    with pytest.raises(InputRangeError):
        eye = np.eye(2, dtype=int)
        GroupElement.from_matrices(eye, np.ones((2, 2), dtype=int), eye)
    with pytest.raises(DimensionMismatchError):
        GroupElement.from_matrices(np.eye(2), np.eye(3), np.eye(2))


def test_exact_linear_algebra() -> None:
    m = np.array([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]], dtype=object)
    assert mat_det(m) == 1
    assert mat_inv(m).tolist() == [[1, -1], [-1, 2]]
    assert mat_rank(m) == 2
    assert mat_rank(np.ones((2, 2)), tol=1e-9) == 1
    with pytest.raises(FieldMismatchError):
        mat_rank(np.ones((2, 2)))
    tri = np.array([[Fraction(2), Fraction(5)], [Fraction(0), Fraction(2)]], dtype=object)
    assert mat_rational_eigenvalues(tri) == {Fraction(2): 2}
    rot = np.array([[Fraction(0), Fraction(-1)], [Fraction(1), Fraction(0)]], dtype=object)
    assert mat_rational_eigenvalues(rot) == {}


def test_tensor_arithmetic() -> None:
    d = unit_tensor(2)
    assert (d + d) == d * 2
    assert (d - d).norm_max() == 0
    assert (d * 0.5).field == "real"
    assert diag_tensor([1, 2]).entries[1, 1, 1] == 2
    assert d.permute((2, 0, 1)) == d
