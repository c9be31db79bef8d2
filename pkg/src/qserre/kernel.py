"""Backend selection for the packed sparse kernels.

The compiled ``_kernel`` extension is used when it imports; otherwise the
pure-Python ``_kernel_py`` is used.  Setting ``QSERRE_KERNEL=python`` in
the environment forces the fallback.  Calls whose keys or coefficients
do not fit in int64 transparently drop to the Python path.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = None


def available_backends() -> list:
    return ["python"] + (["cython"] if _compiled is not None else [])


def set_backend(name: str = "auto") -> str:
    """Select ``"python"``, ``"cython"`` or ``"auto"``; returns the active name."""
    global _active
    if name == "auto":
        name = "cython" if _compiled is not None else "python"
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not built")
        _active = _compiled
    elif name == "python":
        _active = None
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return name


def backend() -> str:
    return "cython" if _active is not None else "python"


def mul(a: dict, b: dict, kmax=None) -> dict:
    """Sparse product; with ``kmax`` only keys below it are kept."""
    if _active is not None:
        try:
            return _active.mul(a, b, kmax)
        except (OverflowError, TypeError):
            pass
    return _kernel_py.mul(a, b, kmax)


def mul_many(factors, limits=None) -> dict:
    """Left-to-right product with optional per-step key bounds."""
    factors = list(factors)
    if _active is not None:
        try:
            return _active.mul_many(factors, limits)
        except (OverflowError, TypeError):
            pass
    return _kernel_py.mul_many(factors, limits)


def sum_products(terms) -> dict:
    """``sum(scale * prod(factors))`` over ``(scale, factors)`` pairs."""
    terms = [(s, list(fs)) for s, fs in terms]
    if _active is not None:
        try:
            return _active.sum_products(terms)
        except (OverflowError, TypeError):
            pass
    return _kernel_py.sum_products(terms)


add_into = _kernel_py.add_into

set_backend("python" if os.environ.get("QSERRE_KERNEL", "").lower() == "python" else "auto")
