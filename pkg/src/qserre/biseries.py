"""Two-sided formal power series in one variable ``z``.

A :class:`BiSeries` is a finite part plus geometric strings.  A string has
a ratio ``r`` (a monomial in q), a coefficient polynomial ``P`` in the
degree ``n``, and a range; it contributes ``P(n) * r**n`` at ``z**n``.
Ranges are upper rays ``n >= start`` or lower rays ``n <= end``; a
full-lattice string (the formal delta) is an upper and a lower ray with
the same ratio and polynomial meeting end to end.

Polynomial coefficients are needed because products of rays with equal
ratios produce ``n * r**n`` terms.

Products follow the diagonal-sum rule: coefficient ``p`` of ``f * g`` is
``sum_{k+n=p} f_n g_k``.  In exact mode every diagonal must be finite.
In closed-form mode an infinite diagonal is allowed when it is geometric
with a ratio whose modulus at ``|q| = rho`` is below 1; it is then summed
exactly in Q(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable

from .scalarq import ONE, ZERO, QScalar, as_qscalar

DEFAULT_RHO = Fraction(1, 2)


class UndefinedProduct(ArithmeticError):
    """A diagonal sum of a series product does not exist."""

    def __init__(self, message: str, degree: int | None = None):
        super().__init__(message)
        self.degree = degree


# --- polynomials in the degree variable n, QScalar coefficients -------------

def _ptrim(c: list) -> tuple:
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _padd(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] = out[i] + v
    return _ptrim(out)


def _pscale(a: tuple, c: QScalar) -> tuple:
    if not c:
        return ()
    return _ptrim([v * c for v in a])


def _pmul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return _ptrim(out)


def _peval(a: tuple, n: int) -> QScalar:
    acc = ZERO
    x = QScalar(n)
    for v in reversed(a):
        acc = acc * x + v
    return acc


def _pshift(a: tuple, s: int) -> tuple:
    """Coefficients of ``a(n + s)``."""
    if s == 0 or len(a) <= 1:
        return a
    out = [ZERO] * len(a)
    for k, ak in enumerate(a):
        if not ak:
            continue
        for i in range(k + 1):
            out[i] = out[i] + ak * (comb(k, i) * s ** (k - i))
    return _ptrim(out)


def _pneg_arg(a: tuple) -> tuple:
    """Coefficients of ``a(-n)``."""
    return tuple(v if k % 2 == 0 else -v for k, v in enumerate(a))


def _antidiff_geom(f: tuple, v: QScalar) -> tuple:
    """``R`` with ``R(M) - v*R(M-1) = f(M)``; requires ``v != 1``."""
    d = len(f) - 1
    if d < 0:
        return ()
    c = [ZERO] * (d + 1)
    inv = (ONE - v).inverse()
    for i in range(d, -1, -1):
        acc = f[i]
        for k in range(i + 1, d + 1):
            if c[k]:
                acc = acc + v * c[k] * (comb(k, i) * (-1) ** (k - i))
        c[i] = acc * inv
    return _ptrim(c)


def _antidiff_sum(f: tuple) -> tuple:
    """``S`` with ``S(M) - S(M-1) = f(M)`` and ``S(0) = 0``."""
    d = len(f) - 1
    if d < 0:
        return ()
    c = [ZERO] * (d + 2)
    for i in range(d, -1, -1):
        acc = f[i]
        for k in range(i + 2, d + 2):
            if c[k]:
                acc = acc - c[k] * (comb(k, i) * (-1) ** (k - i + 1))
        c[i + 1] = acc / QScalar(i + 1)
    return _ptrim(c)


def _split_convolution(P: tuple, Q: tuple) -> list:
    """``P(n) * Q(p - n) = sum_j p**j * f_j(n)``; returns ``[f_0, f_1, ...]``."""
    out = []
    for j in range(len(Q)):
        qj = [ZERO] * (len(Q) - j)
        for k in range(j, len(Q)):
            if Q[k]:
                qj[k - j] = Q[k] * (comb(k, j) * (-1) ** (k - j))
        out.append(_pmul(P, _ptrim(qj)))
    return out


def _times_pj(a: tuple, j: int) -> tuple:
    return ((ZERO,) * j + a) if a else ()


# --- rays ---------------------------------------------------------------------

@dataclass(frozen=True)
class _Ray:
    up: bool        # True: n >= bound, False: n <= bound
    bound: int
    poly: tuple
    ratio: QScalar

    def at(self, n: int) -> QScalar:
        if (n >= self.bound) if self.up else (n <= self.bound):
            return _peval(self.poly, n) * self.ratio ** n
        return ZERO

    def reflect(self) -> "_Ray":
        return _Ray(not self.up, -self.bound, _pneg_arg(self.poly), self.ratio.inverse())

    def shifted(self, e: int, c: QScalar) -> "_Ray":
        """The ray multiplied by ``c * z**e``."""
        return _Ray(self.up, self.bound + e,
                    _pscale(_pshift(self.poly, -e), c * self.ratio ** (-e)), self.ratio)


def _modulus(r: QScalar, rho: Fraction) -> Fraction:
    c, a = r.monomial_parts()
    return abs(c) * rho ** a


def _up_up(x: _Ray, y: _Ray) -> list:
    s, t = x.bound, y.bound
    fs = _split_convolution(x.poly, y.poly)
    start = s + t
    if x.ratio == y.ratio:
        poly = ()
        for j, fj in enumerate(fs):
            S = _antidiff_sum(fj)
            piece = _padd(_pshift(S, -t), (-_peval(S, s - 1),))
            poly = _padd(poly, _times_pj(piece, j))
        return [_Ray(True, start, poly, x.ratio)]
    u = x.ratio / y.ratio
    v = u.inverse()
    a_poly, b_poly = (), ()
    for j, fj in enumerate(fs):
        R = _antidiff_geom(fj, v)
        a_poly = _padd(a_poly, _times_pj(_pshift(R, -t), j))
        b_poly = _padd(b_poly, _times_pj((_peval(R, s - 1),), j))
    return [_Ray(True, start, _pscale(a_poly, u ** (-t)), x.ratio),
            _Ray(True, start, _pscale(b_poly, -(u ** (s - 1))), y.ratio)]


def _up_down(x: _Ray, y: _Ray, closed: bool, rho: Fraction) -> list:
    if not closed:
        raise UndefinedProduct(
            "upper ray times lower ray has infinite diagonals", degree=0)
    u = x.ratio / y.ratio
    if _modulus(u, rho) >= 1:
        raise UndefinedProduct(
            f"diagonal series with ratio {u} diverges at |q| = {rho}", degree=0)
    s, t = x.bound, y.bound
    v = u.inverse()
    a_poly, b_poly = (), ()
    for j, fj in enumerate(_split_convolution(x.poly, y.poly)):
        R = _antidiff_geom(fj, v)
        a_poly = _padd(a_poly, _times_pj(_pshift(R, -t - 1), j))
        b_poly = _padd(b_poly, _times_pj((_peval(R, s - 1),), j))
    return [_Ray(True, s + t, _pscale(a_poly, -(u ** (-t - 1))), x.ratio),
            _Ray(False, s + t - 1, _pscale(b_poly, -(u ** (s - 1))), y.ratio)]


def _ray_product(x: _Ray, y: _Ray, closed: bool, rho: Fraction) -> list:
    if x.up and y.up:
        return _up_up(x, y)
    if not x.up and not y.up:
        return [r.reflect() for r in _up_up(x.reflect(), y.reflect())]
    if x.up:
        return _up_down(x, y, closed, rho)
    return _up_down(y, x, closed, rho)


# --- BiSeries -------------------------------------------------------------------

class BiSeries:
    """Immutable two-sided series; see the module docstring."""

    __slots__ = ("finite", "up", "down")

    def __init__(self, finite: dict | None = None, rays: Iterable[_Ray] = ()):
        fin = {}
        for n, c in (finite or {}).items():
            c = as_qscalar(c)
            if c:
                fin[int(n)] = c
        up: dict = {}
        down: dict = {}
        for ray in rays:
            if ray.poly:
                _merge_ray(up if ray.up else down, fin, ray)
        _canonicalize(fin, up, down)
        self.finite = fin
        self.up = up
        self.down = down

    # constructors
    @classmethod
    def zero(cls) -> "BiSeries":
        return cls()

    @classmethod
    def laurent(cls, coeffs: dict) -> "BiSeries":
        return cls(coeffs)

    @classmethod
    def monomial(cls, n: int, c=1) -> "BiSeries":
        return cls({n: c})

    @classmethod
    def ray(cls, ratio, start: int, coeff=1, up: bool = True) -> "BiSeries":
        """``coeff * ratio**n`` on ``n >= start`` (or ``n <= start`` when ``up`` is false)."""
        return cls(rays=[_Ray(up, start, (as_qscalar(coeff),), as_qscalar(ratio))])

    def rays(self) -> list:
        return [_Ray(True, b, p, r) for r, (b, p) in self.up.items()] + \
               [_Ray(False, b, p, r) for r, (b, p) in self.down.items()]

    # inspection
    def is_zero(self) -> bool:
        return not (self.finite or self.up or self.down)

    def is_polynomial(self) -> bool:
        return not (self.up or self.down)

    def support_bounds(self) -> tuple:
        """``(lo, hi)`` with ``None`` for an infinite side; ``(None, None)`` if zero."""
        if self.is_zero():
            return None, None
        lows = list(self.finite) + [b for b, _ in self.up.values()] + \
            [b for b, _ in self.down.values()]
        highs = list(self.finite) + [b for b, _ in self.up.values()] + \
            [b for b, _ in self.down.values()]
        lo = None if self.down else min(lows)
        hi = None if self.up else max(highs)
        return lo, hi

    def coefficient(self, n: int) -> QScalar:
        c = self.finite.get(n, ZERO)
        for r, (b, p) in self.up.items():
            if n >= b:
                c = c + _peval(p, n) * r ** n
        for r, (b, p) in self.down.items():
            if n <= b:
                c = c + _peval(p, n) * r ** n
        return c

    def truncate(self, lo: int, hi: int) -> list:
        """Coefficients on ``[lo, hi]`` as a list."""
        if lo > hi:
            raise ValueError("truncate needs lo <= hi")
        return [self.coefficient(n) for n in range(lo, hi + 1)]

    def window(self, lo: int, hi: int) -> dict:
        """Nonzero coefficients on ``[lo, hi]`` as a mapping."""
        out = {}
        for n in range(lo, hi + 1):
            c = self.coefficient(n)
            if c:
                out[n] = c
        return out

    def to_laurent(self) -> dict:
        if not self.is_polynomial():
            raise ValueError("series has infinite support")
        return dict(self.finite)

    def strings(self) -> list:
        """Geometric strings for display: up/down rays, paired into full strings when they meet."""
        out = []
        used_down = set()
        for r, (b, p) in self.up.items():
            d = self.down.get(r)
            if d is not None and d[1] == p and d[0] == b - 1:
                out.append({"kind": "full", "ratio": r, "poly": p})
                used_down.add(r)
            else:
                out.append({"kind": "up", "ratio": r, "poly": p, "start": b})
        for r, (b, p) in self.down.items():
            if r not in used_down:
                out.append({"kind": "down", "ratio": r, "poly": p, "end": b})
        return out

    # linear operations
    def __add__(self, other):
        if not isinstance(other, BiSeries):
            other = BiSeries({0: other})
        fin = dict(self.finite)
        for n, c in other.finite.items():
            fin[n] = fin.get(n, ZERO) + c
        return BiSeries(fin, self.rays() + other.rays())

    __radd__ = __add__

    def __neg__(self):
        return self.scale(QScalar(-1))

    def __sub__(self, other):
        if not isinstance(other, BiSeries):
            other = BiSeries({0: other})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "BiSeries":
        c = as_qscalar(c)
        return BiSeries({n: v * c for n, v in self.finite.items()},
                        [_Ray(r.up, r.bound, _pscale(r.poly, c), r.ratio) for r in self.rays()])

    def shift(self, e: int) -> "BiSeries":
        """Multiply by ``z**e``."""
        return BiSeries({n + e: v for n, v in self.finite.items()},
                        [r.shifted(e, ONE) for r in self.rays()])

    def reflect(self) -> "BiSeries":
        """Substitute ``z -> 1/z``."""
        return BiSeries({-n: v for n, v in self.finite.items()},
                        [r.reflect() for r in self.rays()])

    def dilate(self, a) -> "BiSeries":
        """Substitute ``z -> a*z`` for a monomial ``a`` in q."""
        a = as_qscalar(a)
        return BiSeries({n: v * a ** n for n, v in self.finite.items()},
                        [_Ray(r.up, r.bound, r.poly, r.ratio * a) for r in self.rays()])

    # products
    def mul(self, other: "BiSeries", mode: str = "exact", rho=DEFAULT_RHO) -> "BiSeries":
        return series_mul(self, other, mode, rho)

    def __mul__(self, other):
        if isinstance(other, BiSeries):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            if isinstance(other, (int, Fraction, QScalar)):
                other = BiSeries({0: other})
            else:
                return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("BiSeries is unhashable")

    def convergence_region(self, rho=DEFAULT_RHO) -> "ConvergenceRegion":
        return convergence_region(self, rho)

    def __str__(self):
        parts = [f"({c})*z^{n}" for n, c in sorted(self.finite.items())]
        for s in self.strings():
            terms = [(k, c) for k, c in enumerate(s["poly"]) if c]
            if terms == [(0, ONE)]:
                lead = ""
            else:
                lead = "[" + " + ".join(f"({c})" + (f"*n^{k}" if k > 1 else "*n" if k else "")
                                        for k, c in terms) + "]*"
            rng = {"full": "all n", "up": f"n >= {s.get('start')}",
                   "down": f"n <= {s.get('end')}"}[s["kind"]]
            parts.append(f"{lead}({s['ratio']})^n*z^n for {rng}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"BiSeries({self})"


def _merge_ray(table: dict, fin: dict, ray: _Ray) -> None:
    old = table.get(ray.ratio)
    if old is None:
        table[ray.ratio] = (ray.bound, ray.poly)
        return
    ob, op = old
    if ray.up:
        lo_b, lo_p, hi_b = (ray.bound, ray.poly, ob) if ray.bound < ob else (ob, op, ray.bound)
        rng = range(lo_b, hi_b)
    else:
        lo_b, lo_p, hi_b = (ray.bound, ray.poly, ob) if ray.bound > ob else (ob, op, ray.bound)
        rng = range(hi_b + 1, lo_b + 1)
    for n in rng:
        fin[n] = fin.get(n, ZERO) + _peval(lo_p, n) * ray.ratio ** n
    table[ray.ratio] = (hi_b, _padd(op, ray.poly))


def _canonicalize(fin: dict, up: dict, down: dict) -> None:
    for table, step in ((up, 1), (down, -1)):
        for r in list(table):
            b, p = table[r]
            if not p:
                del table[r]
                continue
            while not _peval(p, b):
                b += step
            while True:
                n = b - step
                c = fin.get(n)
                if c is None or c != _peval(p, n) * r ** n:
                    break
                del fin[n]
                b = n
            table[r] = (b, p)
    for n in [n for n, c in fin.items() if not c]:
        del fin[n]


def series_mul(f: BiSeries, g: BiSeries, mode: str = "exact", rho=DEFAULT_RHO) -> BiSeries:
    """Product by diagonal sums; ``mode`` is ``"exact"`` or ``"closed-form"``."""
    if mode not in ("exact", "closed-form"):
        raise ValueError(f"unknown product mode {mode!r}")
    rho = Fraction(rho)
    closed = mode == "closed-form"
    fin: dict = {}
    for n1, c1 in f.finite.items():
        for n2, c2 in g.finite.items():
            fin[n1 + n2] = fin.get(n1 + n2, ZERO) + c1 * c2
    rays = []
    for n, c in f.finite.items():
        rays.extend(r.shifted(n, c) for r in g.rays())
    for n, c in g.finite.items():
        rays.extend(r.shifted(n, c) for r in f.rays())
    for x in f.rays():
        for y in g.rays():
            rays.extend(_ray_product(x, y, closed, rho))
    return BiSeries(fin, rays)


# --- construction helpers ---------------------------------------------------------

def geometric(a, inverse: bool = False) -> BiSeries:
    """``1/(1 - a z) = sum_{n>=0} a^n z^n``; with ``inverse`` the same series in ``z**-1``."""
    a = as_qscalar(a)
    if not a:
        raise ValueError("geometric ratio must be nonzero")
    if inverse:
        return BiSeries(rays=[_Ray(False, 0, (ONE,), a.inverse())])
    return BiSeries(rays=[_Ray(True, 0, (ONE,), a)])


def delta(a) -> BiSeries:
    """Formal delta ``sum_{n in Z} a^n z^n``."""
    a = as_qscalar(a)
    if not a:
        raise ValueError("delta ratio must be nonzero")
    return BiSeries(rays=[_Ray(True, 0, (ONE,), a), _Ray(False, -1, (ONE,), a)])


def laurent(coeffs: dict) -> BiSeries:
    return BiSeries(coeffs)


# --- convergence regions -------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRegion:
    """Open interval ``lo < log|z| < hi`` (``-inf``/``inf`` allowed) for a fixed ``|q| = rho``."""

    lo: float = -math.inf
    hi: float = math.inf

    @classmethod
    def everywhere(cls) -> "ConvergenceRegion":
        return cls()

    @classmethod
    def nowhere(cls) -> "ConvergenceRegion":
        return cls(0.0, 0.0)

    @classmethod
    def from_moduli(cls, lower=None, upper=None) -> "ConvergenceRegion":
        """``lower < |z| < upper`` with ``None`` meaning unbounded."""
        lo = -math.inf if lower is None or lower == 0 else math.log(lower)
        hi = math.inf if upper is None else math.log(upper)
        return cls(lo, hi)

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def intersect(self, other: "ConvergenceRegion") -> "ConvergenceRegion":
        return ConvergenceRegion(max(self.lo, other.lo), min(self.hi, other.hi))

    def contains(self, other: "ConvergenceRegion") -> bool:
        return other.empty or (self.lo <= other.lo and other.hi <= self.hi)

    def to_json(self) -> dict:
        def enc(x):
            return None if math.isinf(x) else x
        return {"log_lo": enc(self.lo), "log_hi": enc(self.hi), "empty": self.empty}


def _log_modulus(r: QScalar, rho: Fraction) -> float:
    c, a = r.monomial_parts()
    return math.log(abs(c)) + a * math.log(rho)


def convergence_region(f: BiSeries, rho=DEFAULT_RHO) -> ConvergenceRegion:
    """Where every string of ``f`` converges absolutely when ``|q| = rho``."""
    rho = Fraction(rho)
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    lo, hi = -math.inf, math.inf
    for r in f.up:
        hi = min(hi, -_log_modulus(r, rho))
    for r in f.down:
        lo = max(lo, -_log_modulus(r, rho))
    return ConvergenceRegion(lo, hi)


def regions_intersect(regions: Iterable[ConvergenceRegion]) -> bool:
    """True iff the regions share a point with nonempty interior."""
    acc = ConvergenceRegion.everywhere()
    for r in regions:
        acc = acc.intersect(r)
    return not acc.empty
