"""Sparse multivariate Laurent polynomials in z_1..z_N, w over Q(q).

Exponent vectors have one slot per z-variable followed by one slot for
``w``.  Permutations act on the z-slots only.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

from .scalarq import ONE, ZERO, QScalar, as_qscalar


class ArityError(ValueError):
    pass


class InexactDivision(ArithmeticError):
    """Raised by :meth:`MLaurent.divide_exact`; ``witness`` is the offending monomial."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Permutation:
    """A bijection of ``{0..n-1}`` stored as its image tuple.

    ``Permutation((1, 2, 0))`` sends 0 -> 1, 1 -> 2, 2 -> 0.
    """

    __slots__ = ("images", "length")

    def __init__(self, images: Sequence[int]):
        images = tuple(images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a permutation")
        self.images = images
        self.length = sum(1 for i, j in itertools.combinations(range(len(images)), 2)
                          if images[i] > images[j])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycle(cls, n: int, cycle: Sequence[int]) -> "Permutation":
        img = list(range(n))
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            img[a] = b
        return cls(img)

    def __len__(self):
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``(self o other)(i) = self(other(i))``."""
        return Permutation(self.images[j] for j in other.images)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Permutation({self.images})"


def permutations(n: int) -> list:
    """All permutations of ``{0..n-1}`` in lexicographic order of image tuples."""
    return [Permutation(p) for p in itertools.permutations(range(n))]


class MLaurent:
    """Immutable sparse Laurent polynomial with QScalar coefficients."""

    __slots__ = ("nz", "terms")

    def __init__(self, nz: int, terms: dict | None = None):
        self.nz = nz
        clean = {}
        if terms:
            width = nz + 1
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != width:
                    raise ArityError(f"exponent {e} has length {len(e)}, expected {width}")
                c = as_qscalar(c)
                if c:
                    clean[e] = c
        self.terms = clean

    @classmethod
    def _raw(cls, nz: int, terms: dict) -> "MLaurent":
        obj = object.__new__(cls)
        obj.nz, obj.terms = nz, terms
        return obj

    # constructors
    @classmethod
    def zero(cls, nz: int) -> "MLaurent":
        return cls._raw(nz, {})

    @classmethod
    def const(cls, nz: int, c=1) -> "MLaurent":
        c = as_qscalar(c)
        return cls._raw(nz, {(0,) * (nz + 1): c} if c else {})

    @classmethod
    def one(cls, nz: int) -> "MLaurent":
        return cls.const(nz, ONE)

    @classmethod
    def monomial(cls, nz: int, exps: Sequence[int], c=1) -> "MLaurent":
        return cls(nz, {tuple(exps): c})

    @classmethod
    def z(cls, nz: int, i: int, power: int = 1) -> "MLaurent":
        """``z_{i+1} ** power`` (0-based index)."""
        if not 0 <= i < nz:
            raise IndexError(f"z index {i} out of range for arity {nz}")
        e = [0] * (nz + 1)
        e[i] = power
        return cls._raw(nz, {tuple(e): ONE})

    @classmethod
    def w(cls, nz: int, power: int = 1) -> "MLaurent":
        e = [0] * (nz + 1)
        e[nz] = power
        return cls._raw(nz, {tuple(e): ONE})

    # inspection
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def monomials(self) -> list:
        """Exponent vectors in canonical (descending lex on (w, z_1..z_N)) order."""
        return sorted(self.terms, key=_order_key, reverse=True)

    def leading(self):
        if not self.terms:
            return None
        e = max(self.terms, key=_order_key)
        return e, self.terms[e]

    def coefficient(self, exps: Sequence[int]) -> QScalar:
        return self.terms.get(tuple(exps), ZERO)

    def _check(self, other: "MLaurent"):
        if self.nz != other.nz:
            raise ArityError(f"arity mismatch: {self.nz} vs {other.nz}")

    # ring operations
    def __add__(self, other):
        if not isinstance(other, MLaurent):
            return self + MLaurent.const(self.nz, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MLaurent._raw(self.nz, out)

    __radd__ = __add__

    def __neg__(self):
        return MLaurent._raw(self.nz, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MLaurent):
            other = MLaurent.const(self.nz, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MLaurent":
        c = as_qscalar(c)
        if not c:
            return MLaurent.zero(self.nz)
        return MLaurent._raw(self.nz, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MLaurent):
            if isinstance(other, (int, Fraction, QScalar)):
                return self.scale(other)
            return NotImplemented
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return MLaurent._raw(self.nz, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QScalar)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, MLaurent):
            return self.divide_exact(other)
        return self.scale(as_qscalar(other).inverse())

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("negative powers only for monomials")
            (e, c), = self.terms.items()
            return MLaurent._raw(self.nz, {tuple(-x * (-n) for x in e): c ** n})
        out = MLaurent.one(self.nz)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, MLaurent):
            return self.nz == other.nz and self.terms == other.terms
        if isinstance(other, (int, Fraction, QScalar)):
            return self == MLaurent.const(self.nz, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nz, frozenset(self.terms.items())))

    # symmetric-group action
    def permute(self, pi: Permutation) -> "MLaurent":
        """Substitute ``z_i -> z_{pi(i)}``; ``w`` is fixed."""
        if len(pi) != self.nz:
            raise ArityError(f"permutation of size {len(pi)} on arity {self.nz}")
        img = pi.images
        out = {}
        for e, c in self.terms.items():
            ne = [0] * (self.nz + 1)
            for i in range(self.nz):
                ne[img[i]] = e[i]
            ne[self.nz] = e[self.nz]
            out[tuple(ne)] = c
        return MLaurent._raw(self.nz, out)

    def substitute_monomials(self, images: Sequence[Sequence[int]], nz: int) -> "MLaurent":
        """Send variable ``k`` (z's then w) to the monomial with exponent vector ``images[k]``."""
        out: dict = {}
        for e, c in self.terms.items():
            ne = [0] * (nz + 1)
            for k, ek in enumerate(e):
                if ek:
                    for s, v in enumerate(images[k]):
                        ne[s] += ek * v
            ne = tuple(ne)
            s = out.get(ne)
            out[ne] = c if s is None else s + c
        return MLaurent._raw(nz, {e: c for e, c in out.items() if c})

    # evaluation
    def evaluate(self, point: Sequence, qvalue) -> Fraction:
        """Exact value at rational ``(z_1..z_N, w)`` and ``q``."""
        if len(point) != self.nz + 1:
            raise ArityError(f"point has {len(point)} entries, expected {self.nz + 1}")
        pt = [Fraction(x) for x in point]
        if any(x == 0 for x in pt):
            raise ZeroDivisionError("Laurent polynomials cannot be evaluated at 0")
        qv = Fraction(qvalue)
        if qv == 0:
            raise ZeroDivisionError("q must be nonzero")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c.evaluate(qv)
            for x, k in zip(pt, e):
                if k:
                    v *= x ** k
            total += v
        return total

    # exact division
    def divide_exact(self, other: "MLaurent") -> "MLaurent":
        """Quotient ``c`` with ``other * c == self``; raises :class:`InexactDivision`."""
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return MLaurent.zero(self.nz)
        # Newton polytope bound on the quotient's exponents
        width = self.nz + 1
        lo = [min(e[i] for e in self.terms) - min(e[i] for e in other.terms) for i in range(width)]
        hi = [max(e[i] for e in self.terms) - max(e[i] for e in other.terms) for i in range(width)]
        lead_e, lead_c = other.leading()
        rem = dict(self.terms)
        quot = {}
        while rem:
            e = max(rem, key=_order_key)
            qe = tuple(a - b for a, b in zip(e, lead_e))
            if any(x < l or x > h for x, l, h in zip(qe, lo, hi)):
                raise InexactDivision(f"{other} does not divide {self}", witness=e)
            qc = rem[e] / lead_c
            quot[qe] = qc
            for be, bc in other.terms.items():
                k = tuple(a + b for a, b in zip(qe, be))
                s = rem.get(k, ZERO) - qc * bc
                if s:
                    rem[k] = s
                else:
                    rem.pop(k, None)
        return MLaurent._raw(self.nz, quot)

    # normalization and rendering
    def normalized(self) -> "MLaurent":
        """Scale so the leading coefficient's top q-term is positive (sign normalization)."""
        if not self.terms:
            return self
        _, c = self.leading()
        top = c.numerator_poly[-1]
        return self if top > 0 else -self

    def var_names(self) -> list:
        return [f"z{i + 1}" for i in range(self.nz)] + ["w"]

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.var_names()
        parts = []
        for e in self.monomials():
            c = self.terms[e]
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
            )
            cs = str(c)
            negative = False
            if c.is_monomial() and c.numerator_poly[0] < 0 and c.is_integral_laurent():
                cs = str(-c)
                negative = True
            if " " in cs or "/" in cs:
                cs = f"({cs})"
            if not mono:
                body = cs
            elif cs == "1":
                body = mono
            else:
                body = f"{cs}*{mono}"
            if not parts:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"MLaurent({self.nz}, '{self}')"

    @classmethod
    def parse(cls, text: str, nz: int) -> "MLaurent":
        from ._parse import parse_expression

        symbols = {f"z{i + 1}": cls.z(nz, i) for i in range(nz)}
        symbols["w"] = cls.w(nz)
        symbols["q"] = cls.const(nz, QScalar.q(1))
        return parse_expression(text, symbols, lambda v: cls.const(nz, v))


def _order_key(e: tuple):
    return (e[-1],) + e[:-1]


def product(polys: Iterable[MLaurent], nz: int) -> MLaurent:
    out = MLaurent.one(nz)
    for p in polys:
        out = out * p
    return out
