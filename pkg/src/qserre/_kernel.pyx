# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sparse kernels over packed monomial keys.

Same contract as ``_kernel_py``.  Keys and coefficients must fit in
int64; anything else raises OverflowError or TypeError and the caller
falls back to the Python implementation.
"""

from libc.stdint cimport int64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort
from cython.operator cimport dereference as deref, preincrement as inc

cdef extern from *:
    """
    static inline int qs_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int qs_add_ovf(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    static inline int qs_add_ovf64(int64_t a, int64_t b, int64_t *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    int qs_mul_ovf(long long a, long long b, long long *r) nogil
    int qs_add_ovf(long long a, long long b, long long *r) nogil
    int qs_add_ovf64(int64_t a, int64_t b, int64_t *r) nogil


ctypedef unordered_map[int64_t, int64_t] cmap


cdef int _load(dict d, vector[int64_t]& keys, vector[int64_t]& vals) except -1:
    keys.clear()
    vals.clear()
    keys.reserve(len(d))
    vals.reserve(len(d))
    for k, v in d.items():
        if type(v) is not int:
            raise TypeError("non-integer coefficient")
        keys.push_back(k)
        vals.push_back(v)
    return 0


cdef int _mul_into(const vector[int64_t]& ka, const vector[int64_t]& va,
                   const vector[int64_t]& kb, const vector[int64_t]& vb,
                   cmap& acc, bint bounded, int64_t kmax) noexcept nogil:
    """acc = a * b, keeping keys < kmax when bounded; returns 1 on int64 overflow."""
    cdef size_t i, j
    cdef long long prod, key
    cdef int64_t x, kx
    cdef int64_t* ref
    acc.clear()
    acc.reserve(ka.size() * 2 + kb.size() * 2)
    for i in range(ka.size()):
        x = va[i]
        kx = ka[i]
        for j in range(kb.size()):
            if bounded and kb[j] >= kmax - kx:
                continue
            if qs_mul_ovf(x, vb[j], &prod):
                return 1
            if qs_add_ovf(kx, kb[j], &key):
                return 1
            ref = &acc[key]
            if qs_add_ovf64(ref[0], prod, ref):
                return 1
    return 0


cdef void _store(cmap& acc, vector[int64_t]& keys, vector[int64_t]& vals) noexcept nogil:
    cdef cmap.iterator it = acc.begin()
    keys.clear()
    vals.clear()
    while it != acc.end():
        if deref(it).second != 0:
            keys.push_back(deref(it).first)
            vals.push_back(deref(it).second)
        inc(it)


ctypedef pair[int64_t, int64_t] kv

# products with at most this many term pairs are collected and sorted instead
# of hashed; sorting wins when most products land on distinct keys
cdef size_t SORT_LIMIT = 1 << 22
cdef size_t HASH_MIN_TERMS = 1 << 16


cdef int _mul_sorted(const vector[int64_t]& ka, const vector[int64_t]& va,
                     const vector[int64_t]& kb, const vector[int64_t]& vb,
                     bint bounded, int64_t kmax, vector[kv]& buf,
                     vector[int64_t]& ko, vector[int64_t]& vo) noexcept nogil:
    cdef size_t i, j, n
    cdef long long prod, key
    cdef int64_t s
    buf.clear()
    buf.reserve(ka.size() * kb.size())
    for i in range(ka.size()):
        for j in range(kb.size()):
            if bounded and kb[j] >= kmax - ka[i]:
                continue
            if qs_mul_ovf(va[i], vb[j], &prod):
                return 1
            if qs_add_ovf(ka[i], kb[j], &key):
                return 1
            buf.push_back(kv(key, prod))
    sort(buf.begin(), buf.end())
    ko.clear()
    vo.clear()
    n = buf.size()
    i = 0
    while i < n:
        key = buf[i].first
        s = 0
        while i < n and buf[i].first == key:
            if qs_add_ovf64(s, buf[i].second, &s):
                return 1
            i += 1
        if s != 0:
            ko.push_back(key)
            vo.push_back(s)
    return 0


cdef bint _mostly_distinct(const vector[int64_t]& ka, const vector[int64_t]& kb,
                           cmap& probe) noexcept nogil:
    """Hash the keys of the first rows; true when nearly every product key is new."""
    cdef size_t i, j, seen = 0
    probe.clear()
    for i in range(ka.size()):
        for j in range(kb.size()):
            probe[ka[i] + kb[j]] = 0
            seen += 1
        if seen >= HASH_MIN_TERMS // 4:
            break
    return probe.size() * 4 > seen * 3


cdef int _product(const vector[int64_t]& ka, const vector[int64_t]& va,
                  const vector[int64_t]& kb, const vector[int64_t]& vb,
                  bint bounded, int64_t kmax, cmap& acc, vector[kv]& buf,
                  vector[int64_t]& ko, vector[int64_t]& vo) noexcept nogil:
    """ko/vo = a * b; sorts when products rarely collide, else hashes.  1 on overflow."""
    cdef size_t work = ka.size() * kb.size()
    if HASH_MIN_TERMS <= work <= SORT_LIMIT and _mostly_distinct(ka, kb, acc):
        return _mul_sorted(ka, va, kb, vb, bounded, kmax, buf, ko, vo)
    if ka.size() < kb.size():
        if _mul_into(kb, vb, ka, va, acc, bounded, kmax):
            return 1
    elif _mul_into(ka, va, kb, vb, acc, bounded, kmax):
        return 1
    _store(acc, ko, vo)
    return 0


def set_sort_limits(size_t lo, size_t hi):
    """Tune the work range where the sorting product is used (benchmarks)."""
    global HASH_MIN_TERMS, SORT_LIMIT
    HASH_MIN_TERMS, SORT_LIMIT = lo, hi


cdef dict _to_dict(const vector[int64_t]& keys, const vector[int64_t]& vals):
    cdef dict out = {}
    cdef size_t i
    for i in range(keys.size()):
        out[keys[i]] = vals[i]
    return out


def mul(dict a, dict b, kmax=None):
    cdef vector[int64_t] ka, va, kb, vb, ko, vo
    cdef vector[kv] buf
    cdef cmap acc
    cdef int ovf
    cdef bint bounded = kmax is not None
    cdef int64_t lim = kmax if bounded else 0
    _load(a, ka, va)
    _load(b, kb, vb)
    with nogil:
        ovf = _product(ka, va, kb, vb, bounded, lim, acc, buf, ko, vo)
    if ovf:
        raise OverflowError("int64 overflow in packed product")
    return _to_dict(ko, vo)


def mul_many(factors, limits=None):
    cdef vector[int64_t] kc, vc, kf, vf, ko, vo
    cdef vector[kv] buf
    cdef cmap acc
    cdef int ovf = 0
    cdef bint bounded
    cdef int64_t lim
    factors = list(factors)
    first = factors[0]
    if limits is not None and limits[0] is not None:
        first = {k: v for k, v in first.items() if k < limits[0]}
    _load(first, kc, vc)
    for j in range(1, len(factors)):
        if kc.size() == 0:
            break
        bounded = limits is not None and limits[j] is not None
        lim = limits[j] if bounded else 0
        _load(factors[j], kf, vf)
        with nogil:
            ovf = _product(kc, vc, kf, vf, bounded, lim, acc, buf, ko, vo)
            if not ovf:
                kc.swap(ko)
                vc.swap(vo)
        if ovf:
            raise OverflowError("int64 overflow in packed product")
    return _to_dict(kc, vc)


def sum_products(terms):
    """``sum(scale * prod(factors))`` over ``(scale, factors)`` pairs, accumulated in C++."""
    cdef vector[int64_t] kc, vc, kf, vf, ko, vo
    cdef vector[kv] buf
    cdef cmap acc, total
    cdef int ovf = 0
    cdef long long scale, prod
    cdef int64_t* ref
    cdef cmap.iterator it
    for sc, factors in terms:
        scale = sc
        factors = list(factors)
        _load(factors[0], kc, vc)
        for j in range(1, len(factors)):
            if kc.size() == 0:
                break
            _load(factors[j], kf, vf)
            with nogil:
                ovf = _product(kc, vc, kf, vf, False, 0, acc, buf, ko, vo)
                if not ovf:
                    kc.swap(ko)
                    vc.swap(vo)
            if ovf:
                raise OverflowError("int64 overflow in packed product")
        with nogil:
            for i in range(kc.size()):
                if qs_mul_ovf(vc[i], scale, &prod):
                    ovf = 1
                    break
                ref = &total[kc[i]]
                if qs_add_ovf64(ref[0], prod, ref):
                    ovf = 1
                    break
        if ovf:
            raise OverflowError("int64 overflow in packed sum")
    with nogil:
        _store(total, kc, vc)
    return _to_dict(kc, vc)
