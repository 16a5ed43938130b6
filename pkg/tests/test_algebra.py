import numpy as np
import pytest
from algebra import CHECKS
from hypothesis import given, settings, strategies as st


@pytest.mark.parametrize("name", sorted(CHECKS))
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_identity(name, seed):
    assert CHECKS[name](np.random.default_rng(seed))
