from __future__ import annotations

import logging
from fractions import Fraction

import numpy as np
import pytest

from diagorbit.exceptions import (
    DimensionMismatchError,
    FieldMismatchError,
    InputValueError,
    InvalidParametersError,
)
from diagorbit.latent_class import (
    ModelParams,
    check_membership,
    counts_to_frequencies,
    marginals,
    minors,
    parameterize,
    recover_params,
)
from diagorbit.tensor_core import Tensor3, act, random_group_element, rank1_tensor, unit_tensor
from diagorbit.utils import exact_array


@pytest.fixture
def params() -> ModelParams:
    return ModelParams(
        pi=["3/5", "2/5"],
        M1=[["4/5", "1/5"], ["1/10", "9/10"]],
        M2=[["7/10", "3/10"], ["1/5", "4/5"]],
        M3=[["9/10", "1/10"], ["3/10", "7/10"]],
    )


@pytest.fixture
def pure() -> Tensor3:
    """Two hidden states observed without error."""
    return Tensor3.from_counts([[[1, 0], [0, 0]], [[0, 0], [0, 1]]])


def test_parameterize(params: ModelParams) -> None:
    p = parameterize(params)
    assert p.field == "rational"
    assert sum(p.entries.ravel()) == 1
    first = Fraction(3, 5) * Fraction(4, 5) * Fraction(7, 10) * Fraction(9, 10)
    second = Fraction(2, 5) * Fraction(1, 10) * Fraction(1, 5) * Fraction(3, 10)
    assert p.entries[0, 0, 0] == first + second


def test_invalid_parameters() -> None:
    bad = ModelParams(
        pi=["1/2", "1/2"], M1=[[2, -1], [0, 1]], M2=[[1, 0], [1, 0]], M3=[[1, 0], [0, 1]]
    )
    problems = bad.violations()
    assert "M1 has a negative entry" in problems
    assert "M2 is singular" in problems
    with pytest.raises(InvalidParametersError):
        parameterize(bad)
    # pydantic wraps the shape error
    with pytest.raises(ValueError, match="Dimension mismatch for M1"):
        ModelParams(pi=[1], M1=[[1, 0], [0, 1]], M2=[[1]], M3=[[1]])


def test_marginals(params: ModelParams) -> None:
    p = parameterize(params)
    m1, m2, m3 = marginals(p)
    expected = params.M1.T @ np.diag(params.pi) @ params.M2
    assert m3.tolist() == expected.tolist()
    assert sum(m1.ravel()) == sum(m2.ravel()) == 1


def test_minors() -> None:
    assert [str(v) for _, v in minors([[2, 1], [1, 2]], "all")] == ["2", "2", "3"]
    assert [idx for idx, _ in minors(np.eye(3), "all")][-1] == (1, 2, 3)
    assert len(minors(np.eye(4), "all")) == 15
    with pytest.raises(DimensionMismatchError):
        minors([[1, 2, 3]])
    with pytest.raises(InputValueError):
        minors([[1]], "trailing")


def test_model_distribution_passes(params: ModelParams) -> None:
    report = check_membership(parameterize(params))
    assert report.verdict == "pass"
    assert report.exit_code == 0
    assert [c.name for c in report.conditions] == ["c1", "c2", "c3", "c4", "c5"]
    assert report.recovered is not None
    assert report.recovered.pi.tolist() == params.pi.tolist()
    for name in ("M1", "M2", "M3"):
        assert getattr(report.recovered, name).tolist() == getattr(params, name).tolist()
    assert report.residual == 0


def test_strict_mode(pure: Tensor3) -> None:
    assert check_membership(pure).verdict == "pass"
    report = check_membership(pure, strict=True)
    assert report.verdict == "fail"
    assert report.exit_code == 3
    c5 = report.conditions[4]
    assert c5.status == "fail"
    assert c5.witness is not None
    assert c5.witness.matrix.startswith("B")


def test_negative_entry_fails(pure: Tensor3) -> None:
    entries = pure.entries.copy()
    entries[0, 0, 1] = Fraction(-1, 8)
    entries[0, 1, 1] = Fraction(1, 8)
    report = check_membership(Tensor3(entries, "rational"))
    c1 = report.conditions[0]
    assert c1.status == "fail"
    assert c1.witness is not None
    assert c1.witness.indices == [1, 1, 2]
    assert report.recovered is None


def test_generic_distribution_is_outside(rng: np.random.Generator) -> None:
    p = Tensor3.from_counts(rng.integers(1, 10, size=(3, 3, 3)))
    report = check_membership(p)
    assert report.verdict == "fail"
    assert report.conditions[1].status == "fail"


def test_float_model() -> None:
    params = ModelParams(
        pi=[0.6, 0.4],
        M1=[[0.8, 0.2], [0.1, 0.9]],
        M2=[[0.7, 0.3], [0.2, 0.8]],
        M3=[[0.9, 0.1], [0.3, 0.7]],
    )
    assert not params.is_exact
    p = parameterize(params)
    report = check_membership(p)
    assert report.backend == "float"
    assert report.verdict == "pass"
    recovered = recover_params(p)
    np.testing.assert_allclose(recovered.pi, [0.6, 0.4], rtol=1e-8)
    np.testing.assert_allclose(recovered.M2, params.M2, rtol=1e-8)


def test_recover_params(params: ModelParams) -> None:
    recovered = recover_params(parameterize(params))
    assert recovered.model_dump()["pi"] == ["3/5", "2/5"]
    assert parameterize(recovered) == parameterize(params)


def test_counts_to_frequencies(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING):
        p = counts_to_frequencies([[[5, 0], [0, 0]], [[0, 0], [0, 5]]])
    assert p.entries[0, 0, 0] == Fraction(1, 2)
    assert "fewer than 30" in caplog.text


def test_rejects_complex_tensor() -> None:
    g = random_group_element(2, seed=4, exact=False, real=False)
    with pytest.raises(FieldMismatchError):
        check_membership(act(unit_tensor(2), g))


def test_exact_parameters_from_fractions() -> None:
    m = exact_array([[1, 0], [0, 1]])
    params = ModelParams(pi=[Fraction(1, 2), Fraction(1, 2)], M1=m, M2=m, M3=m)
    assert params.is_exact
    assert parameterize(params) == Tensor3.from_counts([[[1, 0], [0, 0]], [[0, 0], [0, 1]]])


def _draw_params(seed: int) -> ModelParams:
    rng = np.random.default_rng(seed)
    n = 2 + seed % 3
    while True:
        weights = rng.integers(1, 10, size=n)
        pi = [Fraction(int(w), int(weights.sum())) for w in weights]
        mats = []
        for _ in range(3):
            counts = rng.integers(1, 10, size=(n, n))
            mats.append([[Fraction(int(c), int(row.sum())) for c in row] for row in counts])
        params = ModelParams(pi=pi, M1=mats[0], M2=mats[1], M3=mats[2])
        if not params.violations():
            return params


def _states(params: ModelParams) -> set[tuple[Fraction, ...]]:
    return {
        (params.pi[r], *params.M1[r], *params.M2[r], *params.M3[r]) for r in range(params.n)
    }


def _check_valid_draw(seed: int) -> None:
    params = _draw_params(seed)
    p = parameterize(params)
    report = check_membership(p)
    assert report.verdict == "pass"
    assert report.recovered is not None
    recovered = recover_params(p)
    assert _states(recovered) == _states(params)
    assert parameterize(recovered) == p


@pytest.mark.parametrize("seed", range(12))
def test_valid_draws_pass(seed: int) -> None:
    _check_valid_draw(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(12, 200))
def test_valid_draws_pass_sweep(seed: int) -> None:
    _check_valid_draw(seed)


def test_negative_weight_fails(params: ModelParams) -> None:
    flipped = ModelParams(pi=["8/5", "-3/5"], M1=params.M1, M2=params.M2, M3=params.M3)
    assert "pi has a non-positive entry" in flipped.violations()
    with pytest.raises(InvalidParametersError):
        parameterize(flipped)
    report = check_membership(parameterize(flipped, check=False))
    c4 = report.conditions[3]
    assert c4.status == "fail"
    assert c4.witness is not None
    assert c4.witness.matrix.startswith("A")
    assert report.recovered is None


def test_negative_transition_entry_fails(params: ModelParams) -> None:
    m1 = [["11/10", "-1/10"], ["1/10", "9/10"]]
    bent = ModelParams(pi=params.pi, M1=m1, M2=params.M2, M3=params.M3)
    assert "M1 has a negative entry" in bent.violations()
    report = check_membership(parameterize(bent, check=False))
    c5 = report.conditions[4]
    assert c5.status == "fail"
    assert c5.witness is not None
    assert c5.witness.matrix.startswith("B")
    assert Fraction(c5.witness.value) < 0


def test_rank_deficient_distribution_fails() -> None:
    a = exact_array(["1/4", "1/4", "1/2"])
    p = rank1_tensor(a, a, a)
    assert sum(p.entries.ravel()) == 1
    report = check_membership(p)
    c3 = report.conditions[2]
    assert c3.status == "fail"
    assert c3.witness is not None
    assert c3.witness.matrix == "P *_1 1"
    assert c3.witness.indices == [1, 2, 3]
    assert c3.witness.value == "0"
    assert report.verdict == "fail"


def test_off_variety_perturbation_fails() -> None:
    params = _draw_params(1)
    assert params.n == 3
    p = parameterize(params)
    entries = p.entries.copy()
    step = min(entries.ravel()) / 2
    entries[0, 0, 0] += step
    entries[1, 2, 0] -= step
    moved = Tensor3(entries, "rational")
    report = check_membership(moved)
    assert report.conditions[0].status == "pass"
    c2 = report.conditions[1]
    assert c2.status == "fail"
    assert c2.detail is not None
    assert "relation fails on axis" in c2.detail
    assert report.verdict == "fail"
    assert report.recovered is None
