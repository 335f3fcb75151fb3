import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratkrig.design import design_equispaced, design_rescale_endpoints, design_uniform, replication_rng


def test_uniform_replay():
    np.testing.assert_array_equal(design_uniform(10, 3, 42), design_uniform(10, 3, 42))


def test_uniform_single_point():
    x = design_uniform(1, 4, 0)
    assert x.shape == (1, 4) and np.all((x > 0) & (x < 1))


def test_uniform_mean():
    assert abs(design_uniform(100_000, 1, 5).mean() - 0.5) < 0.01


def test_uniform_accepts_generator():
    a = design_uniform(5, 2, np.random.default_rng(3))
    np.testing.assert_array_equal(a, np.random.default_rng(3).uniform(size=(5, 2)))


def test_uniform_rejects_empty():
    with pytest.raises(ValueError):
        design_uniform(0, 1, 0)


def test_rescale_examples():
    np.testing.assert_array_equal(design_rescale_endpoints([0.0, 0.4, 1.0]), [0.0, 0.4, 1.0])
    np.testing.assert_allclose(design_rescale_endpoints([0.2, 0.5, 0.8]), [0.0, 0.5, 1.0], atol=1e-15)
    with pytest.raises(ValueError):
        design_rescale_endpoints([0.3, 0.3])


@given(st.integers(2, 50), st.integers(0, 2**32 - 1))
def test_rescale_property(n, seed):
    x = np.random.default_rng(seed).uniform(size=n)
    u = design_rescale_endpoints(x)
    assert u.min() == 0.0 and u.max() == 1.0
    order = np.argsort(x)
    assert np.all(np.diff(u[order]) >= 0)


def test_equispaced():
    np.testing.assert_array_equal(design_equispaced(2, 0.3, 0.9), [0.3, 0.9])
    np.testing.assert_allclose(np.diff(design_equispaced(11)), 0.1, atol=1e-15)
    np.testing.assert_allclose(np.diff(design_equispaced(17, 0.0, 0.8)), 0.05, atol=1e-15)


def test_replication_streams_independent_of_order():
    a = replication_rng(7, 3).uniform(size=4)
    _ = replication_rng(7, 0).uniform(size=100)
    np.testing.assert_array_equal(a, replication_rng(7, 3).uniform(size=4))
    assert not np.array_equal(a, replication_rng(7, 4).uniform(size=4))
    assert not np.array_equal(a, replication_rng(8, 3).uniform(size=4))
