"""Pure-Python sparse kernels over packed monomial keys.

A packed polynomial is a ``dict`` mapping integer keys to nonzero
coefficients (``int`` or ``Fraction``).  These are the reference
implementations; :mod:`qserre._kernel` provides compiled equivalents.
"""


def mul(a: dict, b: dict, kmax=None) -> dict:
    """Product of ``a`` and ``b``; with ``kmax`` only keys below it are kept."""
    if len(a) < len(b):
        a, b = b, a
    out = {}
    get = out.get
    if kmax is None:
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
    else:
        for kb, cb in b.items():
            lim = kmax - kb
            for ka, ca in a.items():
                if ka < lim:
                    k = ka + kb
                    out[k] = get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def add_into(acc: dict, a: dict, scale=1) -> None:
    get = acc.get
    for k, v in a.items():
        s = get(k, 0) + scale * v
        if s:
            acc[k] = s
        else:
            acc.pop(k, None)


def mul_many(factors, limits=None) -> dict:
    """Left-to-right product; ``limits[j]`` bounds the keys kept after factor ``j``."""
    factors = list(factors)
    out = dict(factors[0])
    if limits is not None and limits[0] is not None:
        out = {k: v for k, v in out.items() if k < limits[0]}
    for j in range(1, len(factors)):
        out = mul(out, factors[j], None if limits is None else limits[j])
        if not out:
            return out
    return out


def sum_products(terms) -> dict:
    """``sum(scale * prod(factors))`` over ``(scale, factors)`` pairs."""
    acc = {}
    for scale, factors in terms:
        add_into(acc, mul_many(factors), scale)
    return acc
