import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arlcp.advantage import (
    broadcast_token_advantages,
    density_ratio,
    ppo_clipped_term,
    rloo_advantages,
)
from oracles import rloo


@pytest.mark.parametrize("rewards,expected", [
    ([1, 0], [1, -1]),
    ([0.3] * 5, [0.0] * 5),
    ([1, 1, 0, 0], [2 / 3, 2 / 3, -2 / 3, -2 / 3]),
])
def test_rloo_examples(rewards, expected):
    assert rloo_advantages(rewards) == pytest.approx(expected, abs=1e-15)


def test_rloo_needs_two():
    with pytest.raises(ValueError):
        rloo_advantages([1.0])


rewards = st.lists(st.floats(-10, 10), min_size=2, max_size=64)


@given(rewards)
def test_rloo_matches_longhand(r):
    assert rloo_advantages(r) == pytest.approx(rloo(r), abs=1e-9)


@given(rewards, st.floats(-5, 5))
def test_rloo_shift_invariant(r, c):
    assert rloo_advantages([x + c for x in r]) == pytest.approx(rloo_advantages(r), abs=1e-9)


@given(rewards, st.floats(-5, 5))
def test_rloo_scale_equivariant(r, k):
    assert rloo_advantages([k * x for x in r]) == pytest.approx(
        [k * a for a in rloo_advantages(r)], abs=1e-9)


def test_broadcast():
    assert broadcast_token_advantages([0.5], [3]).token_advantages() == [[0.5, 0.5, 0.5]]
    assert broadcast_token_advantages([1, -1], [1, 2]).token_advantages() == [[1], [-1, -1]]
    assert broadcast_token_advantages([0], [7]).flat().tolist() == [0.0] * 7
    with pytest.raises(ValueError):
        broadcast_token_advantages([1, 2], [3])
    with pytest.raises(ValueError):
        broadcast_token_advantages([1], [0])


def test_density_ratio():
    assert density_ratio(0.2, 0.2) == 1.0
    assert density_ratio(0.3, 0.2) == pytest.approx(1.5)
    assert density_ratio(0.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        density_ratio(0.1, 0.0)


@pytest.mark.parametrize("ratio,adv,eps,expected", [
    (1.0, 1.0, 0.1, 1.0),
    (1.5, 1.0, 0.2, 1.2),
    (0.5, -1.0, 0.2, -0.8),
    (0.5, 1.0, 0.2, 0.5),
    (1.5, -1.0, 0.2, -1.5),
])
def test_ppo_term(ratio, adv, eps, expected):
    assert ppo_clipped_term(ratio, adv, eps) == pytest.approx(expected)


@given(st.floats(-100, 100), st.floats(0.01, 0.99))
def test_ppo_on_policy_identity(a, eps):
    assert ppo_clipped_term(1.0, a, eps) == a


@given(st.floats(0, 10), st.floats(-100, 100), st.floats(0.01, 0.99))
def test_ppo_magnitude_bound(r, a, eps):
    assert abs(ppo_clipped_term(r, a, eps)) <= max(abs(r * a), (1 + eps) * abs(a)) + 1e-12
