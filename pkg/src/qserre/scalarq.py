"""Exact arithmetic in the field Q(q) of rational functions in q.

A :class:`QScalar` is stored as ``q**shift * num(q) / den(q)`` where ``num``
and ``den`` are integer polynomials (coefficient tuples, lowest degree
first) with nonzero constant terms.  The representation is canonical:

* ``num`` and ``den`` are coprime over Q[q];
* the integer contents of ``num`` and ``den`` are jointly coprime;
* ``den`` has a positive leading coefficient;
* zero is ``shift=0, num=(), den=(1,)``.

Equality is therefore structural.  Laurent polynomials (the common case)
have ``den == (1,)`` and take a fast path through every operation.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Union

Number = Union[int, Fraction]
Poly = tuple  # tuple[int, ...], lowest degree first, no trailing zeros


# --- integer polynomial helpers -------------------------------------------

def _trim(c: list) -> Poly:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] += v
    return _trim(out)


def _pneg(a: Poly) -> Poly:
    return tuple(-v for v in a)


def _pscale(a: Poly, k: int) -> Poly:
    if k == 0:
        return ()
    return tuple(v * k for v in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    if len(a) == 1:
        return _pscale(b, a[0])
    if len(b) == 1:
        return _pscale(a, b[0])
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _content(a: Poly) -> int:
    g = 0
    for v in a:
        g = gcd(g, v)
        if g == 1:
            break
    return g


def _primitive(a: Poly) -> Poly:
    c = _content(a)
    if c in (0, 1):
        return a
    return tuple(v // c for v in a)


def _prem(a: Poly, b: Poly) -> Poly:
    """Pseudo-remainder of ``a`` by ``b`` over Z."""
    r = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        lr = r[-1]
        r = [v * lb for v in r]
        for i, v in enumerate(b):
            r[i + shift] -= lr * v
        r = list(_trim(r))
    return tuple(r)


def _pgcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd over Z[q] with positive leading coefficient."""
    a, b = _primitive(a), _primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, _primitive(r)
    if a and a[-1] < 0:
        a = _pneg(a)
    return a


def _pdivexact(a: Poly, b: Poly) -> Poly:
    """Exact quotient ``a / b``; ``b`` must divide ``a`` in Q[q] with an integral quotient."""
    if len(b) == 1:
        return tuple(v // b[0] for v in a)
    r = list(a)
    db, lb = len(b) - 1, b[-1]
    out = [0] * (len(a) - db)
    for shift in range(len(a) - 1 - db, -1, -1):
        lr = r[shift + db]
        if lr:
            c, rem = divmod(lr, lb)
            if rem:
                raise ArithmeticError("inexact polynomial division")
            out[shift] = c
            for i, v in enumerate(b):
                r[i + shift] -= c * v
    if any(r):
        raise ArithmeticError("inexact polynomial division")
    return _trim(out)


def _low_zeros(a: Poly) -> int:
    k = 0
    while k < len(a) and a[k] == 0:
        k += 1
    return k


def _peval(a: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for v in reversed(a):
        acc = acc * x + v
    return acc


# --- QScalar ----------------------------------------------------------------

class QScalar:
    """An element of Q(q) in canonical form.  Immutable and hashable."""

    __slots__ = ("_shift", "_num", "_den", "_hash")

    def __init__(self, value: Number = 0):
        if isinstance(value, QScalar):
            self._shift, self._num, self._den = value._shift, value._num, value._den
        else:
            f = Fraction(value)
            if f == 0:
                self._shift, self._num, self._den = 0, (), (1,)
            else:
                self._shift, self._num, self._den = 0, (f.numerator,), (f.denominator,)
        self._hash = None

    @classmethod
    def _raw(cls, shift: int, num: Poly, den: Poly) -> "QScalar":
        obj = object.__new__(cls)
        obj._shift, obj._num, obj._den, obj._hash = shift, num, den, None
        return obj

    @classmethod
    def _make(cls, shift: int, num: Poly, den: Poly) -> "QScalar":
        """Normalize an arbitrary ``q**shift * num / den``."""
        if not num:
            return ZERO
        if not den:
            raise ZeroDivisionError("QScalar denominator is zero")
        k = _low_zeros(num)
        if k:
            num, shift = num[k:], shift + k
        k = _low_zeros(den)
        if k:
            den, shift = den[k:], shift - k
        if len(den) > 1:
            g = _pgcd(num, den)
            if len(g) > 1:
                num, den = _pdivexact(num, g), _pdivexact(den, g)
        c = gcd(_content(num), _content(den))
        if c != 1:
            num = tuple(v // c for v in num)
            den = tuple(v // c for v in den)
        if den[-1] < 0:
            num, den = _pneg(num), _pneg(den)
        return cls._raw(shift, num, den)

    # constructors
    @classmethod
    def q(cls, power: int = 1) -> "QScalar":
        """The monomial ``q**power``."""
        return cls._raw(power, (1,), (1,))

    @classmethod
    def monomial(cls, coeff: Number, power: int) -> "QScalar":
        return cls(coeff) * cls.q(power)

    @classmethod
    def from_laurent(cls, coeffs: dict) -> "QScalar":
        """Build ``sum coeffs[e] * q**e`` from a mapping exponent -> rational."""
        items = [(e, Fraction(c)) for e, c in coeffs.items() if c != 0]
        if not items:
            return ZERO
        lo = min(e for e, _ in items)
        hi = max(e for e, _ in items)
        den = 1
        for _, c in items:
            den = den * c.denominator // gcd(den, c.denominator)
        num = [0] * (hi - lo + 1)
        for e, c in items:
            num[e - lo] += c.numerator * (den // c.denominator)
        return cls._make(lo, _trim(num), (den,))

    @classmethod
    def from_fraction(cls, num: "QScalar", den: "QScalar") -> "QScalar":
        return num / den

    # inspection
    @property
    def shift(self) -> int:
        return self._shift

    @property
    def numerator_poly(self) -> Poly:
        return self._num

    @property
    def denominator_poly(self) -> Poly:
        return self._den

    def is_zero(self) -> bool:
        return not self._num

    def is_laurent(self) -> bool:
        """True when the value is a Laurent polynomial in q (rational coefficients)."""
        return len(self._den) == 1

    def is_integral_laurent(self) -> bool:
        return self._den == (1,)

    def is_monomial(self) -> bool:
        return len(self._num) == 1 and len(self._den) == 1

    def laurent_coeffs(self) -> dict:
        """Mapping exponent -> coefficient; only for Laurent values."""
        if not self.is_laurent():
            raise ValueError(f"{self} is not a Laurent polynomial in q")
        d = self._den[0]
        s = self._shift
        if d == 1:
            return {s + i: v for i, v in enumerate(self._num) if v}
        return {s + i: Fraction(v, d) for i, v in enumerate(self._num) if v}

    def monomial_parts(self) -> tuple:
        """``(coefficient, power)`` of a monomial value."""
        if not self.is_monomial():
            raise ValueError(f"{self} is not a monomial in q")
        return Fraction(self._num[0], self._den[0]), self._shift

    def degree_range(self) -> tuple:
        """(lowest, highest) q-exponent of a Laurent value."""
        return self._shift, self._shift + len(self._num) - 1

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        if not self._num:
            return other
        if not other._num:
            return self
        if self._den == (1,) and other._den == (1,):
            s1, s2 = self._shift, other._shift
            if s1 <= s2:
                num = _padd(self._num, (0,) * (s2 - s1) + other._num)
                return QScalar._make(s1, num, (1,)) if num else ZERO
            num = _padd(other._num, (0,) * (s1 - s2) + self._num)
            return QScalar._make(s2, num, (1,)) if num else ZERO
        s = min(self._shift, other._shift)
        a = _pmul((0,) * (self._shift - s) + self._num, other._den)
        b = _pmul((0,) * (other._shift - s) + other._num, self._den)
        num = _padd(a, b)
        if not num:
            return ZERO
        return QScalar._make(s, num, _pmul(self._den, other._den))

    __radd__ = __add__

    def __neg__(self):
        if not self._num:
            return self
        return QScalar._raw(self._shift, _pneg(self._num), self._den)

    def __sub__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        if not self._num or not other._num:
            return ZERO
        shift = self._shift + other._shift
        if self._den == (1,) and other._den == (1,):
            return QScalar._raw(shift, _pmul(self._num, other._num), (1,))
        return QScalar._make(shift, _pmul(self._num, other._num), _pmul(self._den, other._den))

    __rmul__ = __mul__

    def inverse(self) -> "QScalar":
        if not self._num:
            raise ZeroDivisionError("inverse of zero QScalar")
        return QScalar._make(-self._shift, self._den, self._num)

    def __truediv__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        if not other._num:
            raise ZeroDivisionError("division by zero QScalar")
        if not self._num:
            return ZERO
        return QScalar._make(self._shift - other._shift,
                             _pmul(self._num, other._den), _pmul(self._den, other._num))

    def __rtruediv__(self, other):
        return QScalar(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if self.is_monomial():
            c, e = self.monomial_parts()
            if n < 0 and c == 0:
                raise ZeroDivisionError
            cn = c ** n
            return QScalar._make(e * n, (cn.numerator,), (cn.denominator,))
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QScalar(other)
        if not isinstance(other, QScalar):
            return NotImplemented
        return (self._shift == other._shift and self._num == other._num
                and self._den == other._den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._shift, self._num, self._den))
        return self._hash

    def __bool__(self):
        return bool(self._num)

    # evaluation and substitution
    def evaluate(self, x: Number) -> Fraction:
        """Exact value at the rational point ``q = x``."""
        x = Fraction(x)
        if x == 0 and self._shift < 0:
            raise ZeroDivisionError("q = 0 is a pole")
        d = _peval(self._den, x)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at q = {x}")
        return x ** self._shift * _peval(self._num, x) / d

    def bar(self) -> "QScalar":
        """The image under ``q -> 1/q``."""
        if not self._num:
            return self
        # q^s N(1/q) / D(1/q) = q^(s - deg N + deg D) * rev(N) / rev(D)
        num, den = tuple(reversed(self._num)), tuple(reversed(self._den))
        shift = -self._shift - (len(self._num) - 1) + (len(self._den) - 1)
        return QScalar._make(shift, num, den)

    def substitute_power(self, k: int) -> "QScalar":
        """The image under ``q -> q**k`` for a nonzero integer ``k``."""
        if k == 0:
            raise ValueError("k must be nonzero")
        if k < 0:
            return self.bar().substitute_power(-k)
        if k == 1 or not self._num:
            return self

        def spread(p):
            out = [0] * ((len(p) - 1) * k + 1)
            for i, v in enumerate(p):
                out[i * k] = v
            return tuple(out)
        return QScalar._make(self._shift * k, spread(self._num), spread(self._den))

    # rendering
    def __str__(self):
        if not self._num:
            return "0"
        if self._den == (1,):
            return _render_laurent(self._shift, self._num)
        if len(self._den) == 1:
            return f"({_render_laurent(self._shift, self._num)})/{self._den[0]}"
        return f"({_render_laurent(self._shift, self._num)})/({_render_laurent(0, self._den)})"

    def __repr__(self):
        return f"QScalar('{self}')"

    @classmethod
    def parse(cls, text: str) -> "QScalar":
        """Parse the rendering produced by ``str``."""
        from ._parse import parse_expression

        return parse_expression(text, {"q": cls.q(1)}, lambda v: cls(v))


def _render_laurent(shift: int, num: Poly) -> str:
    parts = []
    for i in range(len(num) - 1, -1, -1):
        c = num[i]
        if not c:
            continue
        e = shift + i
        if e == 0:
            mono = ""
        elif e == 1:
            mono = "q"
        else:
            mono = f"q^{e}"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


ZERO = QScalar._raw(0, (), (1,))
ONE = QScalar._raw(0, (1,), (1,))


def as_qscalar(x) -> QScalar:
    if isinstance(x, QScalar):
        return x
    if isinstance(x, str):
        return QScalar.parse(x)
    return QScalar(x)


# --- q-combinatorics ----------------------------------------------------------

@lru_cache(maxsize=None)
def qint(n: int) -> QScalar:
    """Balanced q-integer ``(q**n - q**-n) / (q - 1/q)``."""
    if n == 0:
        return ZERO
    sign = 1 if n > 0 else -1
    m = abs(n)
    # q^(1-m) + q^(3-m) + ... + q^(m-1)
    coeffs = [0] * (2 * m - 1)
    for i in range(0, 2 * m - 1, 2):
        coeffs[i] = sign
    return QScalar._raw(1 - m, tuple(coeffs), (1,))


@lru_cache(maxsize=None)
def qfact(n: int) -> QScalar:
    """``[n]! = [n][n-1]...[1]``; ``[0]! = 1``."""
    if n < 0:
        raise ValueError(f"q-factorial of negative integer {n}")
    out = ONE
    for i in range(2, n + 1):
        out = out * qint(i)
    return out


@lru_cache(maxsize=None)
def qbinom(m: int, k: int) -> QScalar:
    """Gaussian binomial ``[m]! / ([k]! [m-k]!)`` in the balanced convention."""
    if m < 0 or not 0 <= k <= m:
        raise ValueError(f"q-binomial needs 0 <= k <= m, got m={m}, k={k}")
    out = qfact(m) / (qfact(k) * qfact(m - k))
    if not out.is_integral_laurent():
        raise ArithmeticError("q-binomial failed to reduce to a Laurent polynomial")
    return out
