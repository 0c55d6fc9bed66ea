"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from diagorbit.tensor_core import Tensor3, act, random_group_element, unit_tensor


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def orbit3() -> Tensor3:
    """An exact in-orbit 3x3x3 tensor with small integer entries."""
    return act(unit_tensor(3), random_group_element(3, seed=11, bound=2))


@pytest.fixture
def random3(rng: np.random.Generator) -> Tensor3:
    """A generic exact 3x3x3 tensor."""
    return Tensor3.from_array(rng.integers(-3, 4, size=(3, 3, 3)))


@pytest.fixture
def worked3() -> Tensor3:
    """A 3x3x3 tensor with ``h_3 = x1 x2 x3 - x3^3``."""
    s1 = np.zeros((3, 3), dtype=int)
    s1[0, 0] = 1
    s2 = np.zeros((3, 3), dtype=int)
    s2[1, 1] = 1
    s3 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    return Tensor3.from_slices([s1, s2, s3])
