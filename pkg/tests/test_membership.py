from __future__ import annotations

import logging

import numpy as np
import pytest

from diagorbit.diagorbit import Tolerances
from diagorbit.exceptions import FieldMismatchError, NotInOrbitError, SliceSingularError
from diagorbit.families import gen_Kn, gen_W
from diagorbit.membership import (
    Decomposition,
    classify,
    commutation_residuals,
    decompose,
    orbit_verdict,
    resolve_backend,
    semi_canonical,
    slice_nonsingular,
)
from diagorbit.tensor_core import GroupElement, Tensor3, act, random_group_element, unit_tensor
from diagorbit.utils import exact_array


@pytest.fixture
def singular3() -> Tensor3:
    arr = np.zeros((3, 3, 3), dtype=int)
    arr[0] = np.arange(9).reshape(3, 3) + 1
    return Tensor3.from_array(arr)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_unit_tensor_is_in_orbit(n: int) -> None:
    report = classify(unit_tensor(n))
    assert report.verdict == "in_orbit"
    assert report.in_orbit == "yes"
    assert report.backend == "exact"
    assert report.exit_code == 0
    assert report.cross_axis_consistent
    assert all(c.passed for c in report.commutation)


def test_orbit_member(orbit3: Tensor3) -> None:
    report = classify(orbit3)
    assert report.verdict == "in_orbit"
    assert report.f_nonzero == ["yes", "yes", "yes"]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kn_is_on_the_boundary(n: int) -> None:
    report = classify(gen_Kn(n))
    assert report.verdict == "boundary"
    assert report.exit_code == 2
    moved = act(gen_Kn(n), random_group_element(n, seed=n))
    assert classify(moved).verdict == "boundary"


def test_generic_tensor_is_outside(random3: Tensor3) -> None:
    report = classify(random3)
    assert report.verdict == "outside"
    assert report.exit_code == 3
    assert all(c.status == "fail" for c in report.commutation)
    witness = report.commutation[0].witness
    assert witness is not None
    assert 1 <= witness.j < witness.k <= 3


def test_two_by_two_tensors() -> None:
    # every 2x2x2 tensor satisfies the relations; Cayley's Δ decides
    assert classify(gen_W()).verdict == "boundary"
    p = Tensor3.from_array(np.array([[[1, 2], [0, 1]], [[3, -1], [2, 2]]]))
    assert classify(p).verdict == "in_orbit"


def test_float_backend(orbit3: Tensor3, random3: Tensor3) -> None:
    assert classify(orbit3.to_float()).verdict == "in_orbit"
    assert classify(orbit3, backend="float").backend == "float"
    assert classify(random3.to_float()).verdict == "outside"
    assert classify(gen_Kn(3).to_float()).verdict == "boundary"
    g = random_group_element(3, seed=5, exact=False, real=False)
    complex_member = act(unit_tensor(3), g)
    assert classify(complex_member).verdict == "in_orbit"


def test_deterministic(orbit3: Tensor3) -> None:
    p = orbit3.to_float()
    assert classify(p, seed=3).model_dump() == classify(p, seed=3).model_dump()


def test_commutation_residuals(random3: Tensor3) -> None:
    passed = commutation_residuals(unit_tensor(3), 3)
    assert passed.passed
    assert passed.identically_zero
    failed = commutation_residuals(random3.to_float(), 2)
    assert failed.status == "fail"
    assert failed.max_residual is not None
    assert failed.max_residual > 1e-6


def test_slice_nonsingular(singular3: Tensor3) -> None:
    assert slice_nonsingular(unit_tensor(3), 1)
    assert not slice_nonsingular(singular3, 3)
    assert not slice_nonsingular(singular3.to_float(), 3)
    assert slice_nonsingular(singular3, 1)


def test_semi_canonical(orbit3: Tensor3) -> None:
    form = semi_canonical(orbit3, 3)
    assert form.exact
    assert act(orbit3, form.group) == form.tensor
    first, *rest = form.tensor.slices(3)
    assert first.tolist() == np.eye(3, dtype=int).tolist()
    for s in rest:
        assert all(s[a, b] == 0 for a in range(3) for b in range(a))
    assert form.z.shape == (3, 3)


def test_semi_canonical_other_axis(orbit3: Tensor3) -> None:
    form = semi_canonical(orbit3, 1)
    first, *rest = form.tensor.slices(1)
    assert first.tolist() == np.eye(3, dtype=int).tolist()
    for s in rest:
        assert all(s[a, b] == 0 for a in range(3) for b in range(a))


def test_semi_canonical_rejects_singular(singular3: Tensor3) -> None:
    with pytest.raises(SliceSingularError):
        semi_canonical(singular3, 3)


def test_exact_decomposition(orbit3: Tensor3) -> None:
    dec = decompose(orbit3)
    assert dec.field == "rational"
    assert dec.residual == 0
    assert dec.to_tensor() == orbit3
    for row in (*dec.g1, *dec.g2):
        assert next(x for x in row if x != 0) == 1
    keys = [tuple(r) for r in dec.g3]
    assert keys == sorted(keys)
    doc = dec.to_json_dict()
    assert doc["normalization"] == "leading-one"
    assert all(isinstance(x, str) for x in doc["g1"][0])


def test_float_decomposition() -> None:
    g = random_group_element(3, seed=9, exact=False, real=False)
    p = act(unit_tensor(3), g)
    dec = decompose(p)
    assert dec.field == "complex"
    assert dec.residual < 1e-8
    assert dec.to_tensor().allclose(p, rtol=1e-8)


def _check_orbit_sample(seed: int) -> None:
    n = 2 + seed % 3
    p = act(unit_tensor(n), random_group_element(n, seed=seed, bound=2))
    report = classify(p)
    assert report.verdict == "in_orbit"
    assert report.in_orbit == "yes"


@pytest.mark.parametrize("seed", range(10))
def test_orbit_samples_are_in_orbit(seed: int) -> None:
    _check_orbit_sample(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10, 100))
def test_orbit_samples_are_in_orbit_sweep(seed: int) -> None:
    _check_orbit_sample(seed)


def _random_rational(n: int, seed: int) -> Tensor3:
    rng = np.random.default_rng(seed)
    num = exact_array(rng.integers(-5, 6, size=(n, n, n)))
    den = exact_array(rng.integers(1, 4, size=(n, n, n)))
    return Tensor3.from_array(num / den)


@pytest.mark.parametrize("seed", range(10))
def test_random_rational_fails_commutation(seed: int) -> None:
    p = _random_rational(3, seed)
    assert p.field == "rational"
    assert commutation_residuals(p, 1).status == "fail"


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("seed", range(100))
def test_random_rational_fails_commutation_sweep(n: int, seed: int) -> None:
    assert commutation_residuals(_random_rational(n, seed), 1).status == "fail"


def _same_components(found: Decomposition, expected: Decomposition, rtol: float) -> bool:
    unmatched = expected.components()
    for comp in found.components():
        for m, other in enumerate(unmatched):
            scale = max(float(np.max(np.abs(np.asarray(v, dtype=complex)))) for v in other)
            if all(np.allclose(a, b, rtol=0, atol=rtol * scale) for a, b in zip(comp, other)):
                del unmatched[m]
                break
        else:
            return False
    return not unmatched


def _check_float_round_trip(seed: int) -> None:
    n = 3 + seed % 4
    g = random_group_element(n, seed=seed, exact=False)
    p = act(unit_tensor(n), g)
    dec = decompose(p)
    assert dec.residual < 1e-8
    assert dec.to_tensor().allclose(p, rtol=1e-8)
    assert _same_components(dec, Decomposition.from_factors(*g.factors), 1e-6)


@pytest.mark.parametrize("seed", range(8))
def test_float_decomposition_recovers_generators(seed: int) -> None:
    _check_float_round_trip(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(8, 50))
def test_float_decomposition_recovers_generators_sweep(seed: int) -> None:
    _check_float_round_trip(seed)


def test_decompose_boundary_tensor() -> None:
    with pytest.raises(NotInOrbitError) as exc:
        decompose(gen_Kn(3))
    assert exc.value.report.verdict == "boundary"


def test_with_decomposition(orbit3: Tensor3) -> None:
    report = classify(orbit3, with_decomposition=True)
    assert report.decomposition is not None
    assert report.residual == 0


def test_decomposition_normalizes_scales() -> None:
    g1 = np.array([[2, 0], [0, 3]])
    eye = np.eye(2, dtype=int)
    dec = Decomposition.from_factors(g1, eye, eye)
    # scales move into g3, terms are ordered by their g3 rows
    assert dec.g1.tolist() == [[0, 1], [1, 0]]
    assert dec.g3.tolist() == [[0, 3], [2, 0]]
    assert dec.to_tensor() == act(unit_tensor(2), GroupElement.from_matrices(g1, eye, eye))


def test_backend_resolution(orbit3: Tensor3) -> None:
    assert resolve_backend(orbit3, "auto") == "exact"
    assert resolve_backend(orbit3.to_float(), "auto") == "float"
    assert resolve_backend(orbit3, "float") == "float"
    with pytest.raises(FieldMismatchError):
        resolve_backend(orbit3.to_float(), "exact")


def test_tolerances_are_validated() -> None:
    with pytest.raises(ValueError, match="positive"):
        Tolerances(rank=0)
    with pytest.raises(ValueError, match="band"):
        Tolerances(band=0.5)


def test_orbit_verdict() -> None:
    assert orbit_verdict(["pass", "fail", "fail"], ["yes", "no", "no"]) == ("in_orbit", True)
    assert orbit_verdict(["pass", "pass", "pass"], ["yes", "no", "yes"]) == ("in_orbit", False)
    assert orbit_verdict(["fail", "fail", "fail"], ["yes", "yes", "yes"]) == ("outside", True)
    verdict, _ = orbit_verdict(["indeterminate", "fail", "fail"], ["yes", "yes", "yes"])
    assert verdict == "indeterminate"
    verdict, _ = orbit_verdict(["pass", "pass", "pass"], ["no", "indeterminate", "no"])
    assert verdict == "indeterminate"


def test_proved_verdicts_carry_no_notes(orbit3: Tensor3) -> None:
    assert classify(unit_tensor(3)).notes == []
    assert classify(gen_Kn(3)).notes == []
    assert classify(orbit3.to_float()).notes == []


@pytest.mark.slow
def test_sampled_f_is_flagged(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING):
        report = classify(gen_Kn(6))
    assert report.verdict == "boundary"
    assert "sampled" in report.f_method
    assert len(report.notes) == 1
    assert "probabilistic" in report.notes[0]
    assert "probabilistic" in caplog.text
