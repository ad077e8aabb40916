import numpy as np
import pytest
from hypothesis import given, strategies as st

from proclone import kernels

pytestmark = pytest.mark.skipif(kernels.NUMBA_KERNELS is None, reason="numba unavailable")


def _rng(seed):
    return np.random.default_rng(seed)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 3), st.integers(1, 40))
def test_endo_compose_parity(seed, q, m, width):
    r = _rng(seed)
    head = r.integers(0, q, q ** m).astype(np.int64)
    args = r.integers(0, q, (m, width)).astype(np.int64)
    a = kernels.NUMPY_KERNELS["endo_compose"](head, args, q)
    b = kernels.NUMBA_KERNELS["endo_compose"](head, args, q)
    assert np.array_equal(a, b)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 3), st.integers(1, 8), st.integers(1, 20))
def test_endo_compose_batch_parity(seed, q, m, p, width):
    r = _rng(seed)
    heads = r.integers(0, q, (p, q ** m)).astype(np.int64)
    args = r.integers(0, q, (m, p, width)).astype(np.int64)
    a = kernels.NUMPY_KERNELS["endo_compose_batch"](heads, args, q)
    b = kernels.NUMBA_KERNELS["endo_compose_batch"](heads, args, q)
    assert np.array_equal(a, b)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6), st.integers(1, 5), st.integers(1, 5))
def test_arrow_relation_parity(seed, nf, ng, nd, nc):
    r = _rng(seed)
    app_left = r.integers(0, nc, (nf, nd)).astype(np.int64)
    app_right = r.integers(0, nc, (ng, nd)).astype(np.int64)
    rel_dom = r.random((nd, nd)) < 0.4
    rel_cod = r.random((nc, nc)) < 0.6
    a = kernels.NUMPY_KERNELS["arrow_relation"](app_left, app_right, rel_dom, rel_cod)
    b = kernels.NUMBA_KERNELS["arrow_relation"](app_left, app_right, rel_dom, rel_cod)
    assert np.array_equal(a, b)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 5))
def test_pair_related_parity(seed, nd, nc):
    r = _rng(seed)
    left = r.integers(0, nc, nd).astype(np.int64)
    right = r.integers(0, nc, nd).astype(np.int64)
    rel_dom = r.random((nd, nd)) < 0.4
    rel_cod = r.random((nc, nc)) < 0.7
    a = kernels.NUMPY_KERNELS["pair_related"](left, right, rel_dom, rel_cod)
    b = kernels.NUMBA_KERNELS["pair_related"](left, right, rel_dom, rel_cod)
    assert a == b


def test_backend_flag_is_reported():
    assert kernels.BACKEND in ("numba", "numpy")
