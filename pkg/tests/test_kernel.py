import random

import pytest

from qserre import _kernel_py, kernel


def rand_poly(rng, n=30, span=1 << 20):
    return {rng.randrange(-span, span): rng.randrange(-50, 50) or 1 for _ in range(n)}


def naive(a, b, kmax=None):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            if kmax is not None and k >= kmax:
                continue
            out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


BACKENDS = kernel.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    prev = kernel.backend()
    kernel.set_backend(request.param)
    yield request.param
    kernel.set_backend(prev)


def test_mul_matches_naive(backend):
    rng = random.Random(1)
    for _ in range(20):
        a, b = rand_poly(rng), rand_poly(rng)
        assert kernel.mul(a, b) == naive(a, b)
        assert kernel.mul(a, b, kmax=0) == naive(a, b, kmax=0)


def test_mul_many_and_sum_products(backend):
    rng = random.Random(2)
    fs = [rand_poly(rng, 8, 1 << 10) for _ in range(4)]
    expect = naive(naive(naive(fs[0], fs[1]), fs[2]), fs[3])
    assert kernel.mul_many(fs) == expect
    terms = [(3, fs[:2]), (-1, fs[2:])]
    want = _kernel_py.sum_products(terms)
    assert kernel.sum_products(terms) == want


def test_overflow_falls_back(backend):
    big = {1: 1 << 62}
    assert kernel.mul(big, big) == {2: 1 << 124}
    huge = {1 << 70: 1}
    assert kernel.mul(huge, {1: 2}) == {(1 << 70) + 1: 2}


def test_backends_agree():
    rng = random.Random(3)
    a, b = rand_poly(rng, 200), rand_poly(rng, 200)
    results = []
    for name in BACKENDS:
        kernel.set_backend(name)
        results.append(kernel.mul(a, b, kmax=1 << 19))
    kernel.set_backend("auto")
    assert all(r == results[0] for r in results)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernel.set_backend("fortran")


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")
def test_sorting_and_hashing_products_agree():
    from qserre import _kernel
    rng = random.Random(4)
    a, b = rand_poly(rng, 300, 1 << 40), rand_poly(rng, 300, 1 << 40)
    dense_a, dense_b = rand_poly(rng, 300, 64), rand_poly(rng, 300, 64)
    try:
        _kernel.set_sort_limits(1, 1 << 22)      # sort whenever keys look distinct
        sorted_out = [_kernel.mul(a, b), _kernel.mul(a, b, 0), _kernel.mul(dense_a, dense_b),
                      _kernel.mul_many([dense_a, dense_b, a])]
        _kernel.set_sort_limits(1 << 62, 0)      # never sort
        hashed_out = [_kernel.mul(a, b), _kernel.mul(a, b, 0), _kernel.mul(dense_a, dense_b),
                      _kernel.mul_many([dense_a, dense_b, a])]
    finally:
        _kernel.set_sort_limits(1 << 16, 1 << 22)
    assert sorted_out == hashed_out
    assert sorted_out[0] == naive(a, b)
