"""Exact verification of the Serre-type identities.

Every identity handled here has the same shape::

    sum_pi sign(pi) sum_k coef_k  prod_{p<q} PF[pi(p), pi(q)]
                                  prod_{r<=k} L[pi(r)]  prod_{s>k} R[pi(s)]

where each factor is a monomial shift times a one-variable series in a
ratio monomial.  A :class:`Shape` stores those factor tables; the engine
expands one permutation at a time over packed integer keys (see
:mod:`qserre.packing` and :mod:`qserre.kernel`) and adds the results.

Truncated mode
--------------
When some factor is an infinite series every series factor is cut to
degrees ``[-W, W]`` in its ratio variable.  Per permutation ``pi`` the
engine orders the variables so that every series ratio increases along
an integer level vector ``lam`` (``lam . x > 0`` for upward series,
``< 0`` for downward ones); a cycle or a two-sided series makes the term
undefined.  A dropped term of factor ``f`` has weight at least
``lam.shift_f + (W+1)|lam.x_f|`` and every other factor contributes at
least its minimum weight, so all output monomials ``e`` with
``lam . e < T_pi`` are exact, where ``T_pi`` is the minimum of those sums
over series factors and over ``k``.  The certified set is the
intersection of these half-spaces over all ``pi``; coefficients outside
it are discarded (and pruned early during multiplication).
"""

from __future__ import annotations

import itertools
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from scipy.optimize import linprog

from . import kernel
from .biseries import DEFAULT_RHO, BiSeries, UndefinedProduct, convergence_region, geometric
from .cartan import CartanData
from .mlaurent import MLaurent, Permutation, permutations
from .packing import Layout
from .scalarq import QScalar, qbinom
from .solutions import DEFAULT_WINDOW, SolutionFamily

BINOMIAL_CONVENTION = "[m]!/([k]! [m-k]!)"


class IdentityError(ValueError):
    """Instance parameters violate the identity's preconditions."""


# --- shapes -------------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """``z^shift * g(z^ratio)`` with ``g`` a one-variable series."""

    shift: tuple
    ratio: tuple
    series: BiSeries


@dataclass
class Shape:
    name: str
    nz: int
    pair: dict      # (a, b) -> Factor, a placed before b
    left: list      # Factor per variable, positions <= k
    right: list     # Factor per variable, positions > k
    coefs: list     # QScalar per k
    signed: bool = False
    params: dict = field(default_factory=dict)

    @property
    def nterms(self) -> int:
        n = 1
        for i in range(2, self.nz + 1):
            n *= i
        return n * (self.nz + 1)

    def factors(self):
        yield from self.pair.values()
        yield from self.left
        yield from self.right

    @property
    def is_polynomial(self) -> bool:
        return all(f.series.is_polynomial() for f in self.factors())


def _unit(nz: int, slot: int, k: int = 1) -> tuple:
    e = [0] * (nz + 1)
    e[slot] = k
    return tuple(e)


def _diff(nz: int, b: int, a: int) -> tuple:
    """Exponent vector of ``x_b / x_a`` (slot ``nz`` is w)."""
    e = [0] * (nz + 1)
    e[b] += 1
    e[a] -= 1
    return tuple(e)


def _zero(nz: int) -> tuple:
    return (0,) * (nz + 1)


def _serre_coefs(n: int, d: int) -> list:
    return [qbinom(n, k).substitute_power(d) * (-1) ** k for k in range(n + 1)]


def _poly(coeffs: dict) -> BiSeries:
    return BiSeries(coeffs)


def lemma2_shape(m: int, t_power: int = 1) -> Shape:
    """Triangular-relation sum with ``t = q^t_power``; ``m <= 0``."""
    if m > 0:
        raise IdentityError("lemma2 needs m <= 0")
    n = 1 - m
    q = QScalar.q
    t2, tm = q(2 * t_power), q(m * t_power)
    z0 = _zero(n)
    pair = {}
    for a in range(n):
        for b in range(n):
            if a != b:
                g = _poly({0: t2, 1: -1}) if a < b else _poly({0: 1, -1: -t2})
                pair[(a, b)] = Factor(z0, _diff(n, b, a), g)
    left = [Factor(z0, _diff(n, v, n), _poly({0: 1, 1: -tm})) for v in range(n)]
    right = [Factor(z0, _diff(n, v, n), _poly({0: tm, 1: -1})) for v in range(n)]
    return Shape("lemma2", n, pair, left, right, _serre_coefs(n, t_power),
                 params={"m": m, "t": f"q^{t_power}"})


def jing_shape(m: int, t_power: int = 1, literal: bool = False) -> Shape:
    """Sign-weighted sum over permutations; ``literal`` uses the opposite-sign ``(z/w - t^m)`` last factor."""
    if m > 0:
        raise IdentityError("jing needs m <= 0")
    n = 1 - m
    q = QScalar.q
    t2, tm = q(2 * t_power), q(m * t_power)
    z0 = _zero(n)
    pair = {(a, b): Factor(_unit(n, a), _diff(n, b, a), _poly({1: 1, 0: -t2}))
            for a in range(n) for b in range(n) if a != b}
    left = [Factor(z0, _diff(n, v, n), _poly({0: 1, 1: -tm})) for v in range(n)]
    last = {1: 1, 0: -tm} if literal else {0: tm, 1: -1}
    right = [Factor(z0, _diff(n, v, n), _poly(last)) for v in range(n)]
    return Shape("jing", n, pair, left, right, _serre_coefs(n, t_power), signed=True,
                 params={"m": m, "t": f"q^{t_power}", "literal": literal})


def eq5_shape(a_ij: int, b_ii: int, b_ij: int, d_i: int) -> Shape:
    """The P_1 relations written out with the hand-expanded factors."""
    if a_ij > -1:
        raise IdentityError("eq5 needs a_ij <= -1")
    n = 1 - a_ij
    q = QScalar.q
    c, t2 = q(b_ij), q(b_ii)
    z0 = _zero(n)
    pair = {(a, b): Factor(z0, _diff(n, b, a), _poly({0: 1 + t2, 1: -1, -1: -t2}))
            for a in range(n) for b in range(n) if a != b}
    left = [Factor(z0, _diff(n, v, n), _poly({0: 1 + c, 1: -c, -1: -1})) for v in range(n)]
    right = [Factor(z0, _diff(n, v, n), _poly({0: 1 + c, 1: -1, -1: -c})) for v in range(n)]
    return Shape("eq5", n, pair, left, right, _serre_coefs(n, d_i),
                 params={"a_ij": a_ij, "b_ii": b_ii, "b_ij": b_ij, "d_i": d_i})


def _check_pair(family: SolutionFamily, i: int, j: int) -> tuple:
    cart = family.cartan
    if not (0 <= i < cart.rank and 0 <= j < cart.rank):
        raise IdentityError(f"indices ({i},{j}) out of range for rank {cart.rank}")
    if i == j:
        raise IdentityError("the identity needs i != j")
    a_ij = cart.a[i][j]
    if a_ij == 0:
        raise IdentityError(f"a_{i}{j} = 0")
    return 1 - a_ij, cart.d[i]


def serre_shape(family: SolutionFamily, i: int, j: int) -> Shape:
    n, d_i = _check_pair(family, i, j)
    f_ii, f_ij, f_ji = family.F(i, i), family.F(i, j), family.F(j, i)
    z0 = _zero(n)
    pair = {(a, b): Factor(z0, _diff(n, b, a), f_ii)
            for a in range(n) for b in range(n) if a != b}
    left = [Factor(z0, _diff(n, n, v), f_ji) for v in range(n)]
    right = [Factor(z0, _diff(n, v, n), f_ij) for v in range(n)]
    return Shape("serre", n, pair, left, right, _serre_coefs(n, d_i),
                 params={"i": i, "j": j, "family": family.descriptor()})


def prefactored_shape(family: SolutionFamily, i: int, j: int) -> Shape:
    """Serre sum times the symmetric prefactor, each prefactor factor fused into its series."""
    n, d_i = _check_pair(family, i, j)
    b = family.cartan.b
    t2, c = QScalar.q(b[i][i]), QScalar.q(b[i][j])
    f_ii = _poly({0: 1, 1: -t2}) * family.F(i, i) * _poly({0: 1, -1: -t2})
    f_ji = _poly({0: 1, -1: -c}) * family.F(j, i)
    f_ij = _poly({0: 1, 1: -c}) * family.F(i, j)
    z0 = _zero(n)
    pair = {(a, b_): Factor(z0, _diff(n, b_, a), f_ii)
            for a in range(n) for b_ in range(n) if a != b_}
    left = [Factor(z0, _diff(n, n, v), f_ji) for v in range(n)]
    right = [Factor(z0, _diff(n, v, n), f_ij) for v in range(n)]
    return Shape("prefactored", n, pair, left, right, _serre_coefs(n, d_i),
                 params={"i": i, "j": j, "family": family.descriptor()})


# --- termwise access ---------------------------------------------------------------------

def factor_polynomial(f: Factor, nz: int) -> MLaurent:
    if not f.series.is_polynomial():
        raise UndefinedProduct("factor is an infinite series")
    terms = {}
    for n, c in f.series.finite.items():
        e = tuple(s + n * x for s, x in zip(f.shift, f.ratio))
        terms[e] = terms.get(e, QScalar(0)) + c
    return MLaurent(nz, terms)


def term_factors(shape: Shape, pi: Permutation, k: int) -> tuple:
    """``(scalar, factors)`` of the ``(pi, k)`` term."""
    n = shape.nz
    order = [pi(p) for p in range(n)]
    fs = [shape.pair[(order[p], order[q])] for p in range(n) for q in range(p + 1, n)]
    fs += [shape.left[v] for v in order[:k]] + [shape.right[v] for v in order[k:]]
    c = shape.coefs[k] * (pi.sign if shape.signed else 1)
    return c, fs


def term_polynomial(shape: Shape, pi: Permutation, k: int) -> MLaurent:
    """The ``(pi, k)`` term by plain MLaurent arithmetic (exact shapes only)."""
    c, fs = term_factors(shape, pi, k)
    out = MLaurent.const(shape.nz, c)
    for f in fs:
        out = out * factor_polynomial(f, shape.nz)
    return out


def terms(shape: Shape):
    """Yield ``((pi, k), term)`` in lexicographic permutation order."""
    for pi in permutations(shape.nz):
        for k in range(shape.nz + 1):
            yield (pi, k), term_polynomial(shape, pi, k)


# --- engine preparation ---------------------------------------------------------------------

def _orientation(s: BiSeries):
    if s.up and s.down:
        return None
    if s.up:
        return 1
    if s.down:
        return -1
    return 0


def _support(s: BiSeries, orient: int, window: int) -> tuple:
    keys = list(s.finite) + [b for b, _ in s.up.values()] + [b for b, _ in s.down.values()]
    if orient == 1:
        lo = min(keys)
        return lo, min(lo, -window), window
    if orient == -1:
        hi = max(keys)
        return hi, -window, max(hi, window)
    return None, None, None


@dataclass
class _FInfo:
    shift: tuple
    ratio: tuple
    orient: int
    extreme: int | None     # lowest (up) or highest (down) support degree
    degrees: tuple          # degrees present after truncation
    monos: list             # (exps incl. q slot when packing q, coeff)


def _prepare_factor(f: Factor, window: int, pack_q: bool) -> _FInfo:
    s = f.series
    orient = _orientation(s)
    if orient is None:
        raise UndefinedProduct("a factor is a two-sided series; its truncation has no safe window")
    if orient == 0:
        coeffs = dict(s.finite)
        extreme = None
    else:
        extreme, lo, hi = _support(s, orient, window)
        coeffs = s.window(lo, hi)
    monos = []
    for n, c in coeffs.items():
        e = tuple(a + n * x for a, x in zip(f.shift, f.ratio))
        if pack_q:
            for qe, v in c.laurent_coeffs().items():
                monos.append(((qe,) + e, v))
        else:
            monos.append((e, c))
    return _FInfo(f.shift, f.ratio, orient, extreme, tuple(sorted(coeffs)), monos)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _levels(nvars: int, infos) -> tuple | None:
    """Longest-path levels making every oriented ratio increase; ``None`` on a cycle."""
    succ = {v: set() for v in range(nvars)}
    for f in infos:
        if f.orient == 0:
            continue
        pos = [s for s, x in enumerate(f.ratio) if x > 0]
        neg = [s for s, x in enumerate(f.ratio) if x < 0]
        if len(pos) != 1 or len(neg) != 1 or f.ratio[pos[0]] != 1 or f.ratio[neg[0]] != -1:
            raise UndefinedProduct("series ratio is not a quotient of two variables")
        lo, hi = (neg[0], pos[0]) if f.orient == 1 else (pos[0], neg[0])
        succ[lo].add(hi)
    indeg = {v: 0 for v in range(nvars)}
    for v in succ:
        for u in succ[v]:
            indeg[u] += 1
    level = [0] * nvars
    ready = [v for v in range(nvars) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for u in succ[v]:
            level[u] = max(level[u], level[v] + 1)
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
    return tuple(level) if seen == nvars else None


def _minwt(f: _FInfo, lam: tuple) -> int:
    base = _dot(lam, f.shift)
    lx = _dot(lam, f.ratio)
    if f.orient == 0:
        return base + min(n * lx for n in f.degrees)
    return base + f.extreme * lx


def _threshold(infos, lam: tuple, window: int):
    mins = [_minwt(f, lam) for f in infos]
    total = sum(mins)
    best = None
    for f, mw in zip(infos, mins):
        if f.orient == 0:
            continue
        drop = _dot(lam, f.shift) + (window + 1) * abs(_dot(lam, f.ratio))
        t = drop - mw + total
        best = t if best is None else min(best, t)
    return best


# --- engine -----------------------------------------------------------------------

@dataclass
class Certificate:
    """Per-permutation half-spaces ``levels . e < threshold`` whose intersection is exact."""

    window: int
    cuts: list          # (perm images, levels, threshold)
    box_radius: int | None

    def certifies(self, e) -> bool:
        return all(_dot(lam, e) < t for _, lam, t in self.cuts)

    def to_json(self) -> dict:
        return {"W": self.window, "box_radius": self.box_radius,
                "rule": "levels . exponent < threshold for every permutation",
                "cuts": [{"perm": list(p), "levels": list(lam), "threshold": t}
                         for p, lam, t in self.cuts]}


@dataclass
class SumResult:
    shape: Shape
    polynomial: MLaurent          # exact sum, or its certified part in truncated mode
    mode: str                     # "exact" | "truncated"
    certificate: Certificate | None = None
    backend: str = "python"

    @property
    def is_zero(self) -> bool:
        return self.polynomial.is_zero()


def _slot_bound(infos_by_group, slot: int) -> int:
    total = 0
    for group in infos_by_group:
        total += max((max((abs(e[slot]) for e, _ in f.monos), default=0) for f in group), default=0)
    return total


class _Context:
    """Picklable engine state shared with worker processes."""

    def __init__(self, shape: Shape, window: int, truncated: bool):
        n = shape.nz
        self.n = n
        self.signed = shape.signed
        self.truncated = truncated
        try:
            self._build(shape, window, pack_q=True)
            self.pack_q = True
        except ValueError:
            self._build(shape, window, pack_q=False)
            self.pack_q = False

    def _build(self, shape: Shape, window: int, pack_q: bool):
        n = self.n
        self.pair = {k: _prepare_factor(f, window, pack_q) for k, f in shape.pair.items()}
        self.left = [_prepare_factor(f, window, pack_q) for f in shape.left]
        self.right = [_prepare_factor(f, window, pack_q) for f in shape.right]
        if pack_q:
            coef_monos = [[((qe,) + _zero(n), v) for qe, v in c.laurent_coeffs().items()]
                          for c in shape.coefs]
        else:
            coef_monos = [[(_zero(n), c)] for c in shape.coefs]
        groups = [[_FInfo(None, None, 0, None, (), m) for m in coef_monos]]
        for a in range(n):
            for b in range(a + 1, n):
                groups.append([self.pair[(a, b)], self.pair[(b, a)]])
        for v in range(n):
            groups.append([self.left[v], self.right[v]])
        width = n + 1 + (1 if pack_q else 0)
        bounds = [_slot_bound(groups, s) + 1 for s in range(width)]
        zw = bounds[1:] if pack_q else bounds
        self.wbound = n * sum(zw) + 2
        self.base = Layout.for_bounds(bounds)
        self.full = Layout.for_bounds(bounds + [self.wbound]) if self.truncated else self.base
        self.wshift = self.base.total_bits
        self.coefs = [{self.base.pack(e): v for e, v in m} for m in coef_monos]
        self.off = 1 if pack_q else 0

    # packing
    def packed(self, f: _FInfo, lam=None) -> dict:
        if lam is None:
            return {self.base.pack(e): v for e, v in f.monos}
        off, sh = self.off, self.wshift
        return {self.base.pack(e) + (_dot(lam, e[off:]) << sh): v for e, v in f.monos}

    def limit(self, weight_max: int):
        """Key bound keeping monomials with weight <= weight_max."""
        if weight_max >= self.wbound:
            return None
        weight_max = max(weight_max, -self.wbound)
        return ((weight_max + 1) << self.wshift) - (1 << (self.wshift - 1))

    def strip(self, d: dict) -> dict:
        sh, half = self.wshift, 1 << (self.wshift - 1)
        return {k - (((k + half) >> sh) << sh): v for k, v in d.items()}

    def infos(self, order, k):
        n = self.n
        fs = [self.pair[(order[p], order[q])] for p in range(n) for q in range(p + 1, n)]
        return fs, [self.left[v] for v in order[:k]] + [self.right[v] for v in order[k:]]


def _eval_exact(ctx: _Context, order: tuple, cache: dict) -> dict:
    n = ctx.n
    pairs = [ctx.packed(ctx.pair[(order[p], order[q])]) for p in range(n) for q in range(p + 1, n)]
    sign = Permutation(order).sign if ctx.signed else 1
    g: dict = {}
    for k in range(n + 1):
        key = frozenset(order[:k])
        lr = cache.get(key)
        if lr is None:
            fs = [ctx.packed(ctx.left[v]) for v in sorted(key)]
            fs += [ctx.packed(ctx.right[v]) for v in range(n) if v not in key]
            lr = kernel.mul_many(fs) if fs else {0: 1}
            cache[key] = lr
        kernel.add_into(g, kernel.mul(ctx.coefs[k], lr), sign)
    if not pairs:
        return g
    return kernel.mul(kernel.mul_many(pairs), g)


def _eval_truncated(ctx: _Context, order: tuple, lam: tuple, T: int) -> dict:
    n = ctx.n
    sign = Permutation(order).sign if ctx.signed else 1
    pair_infos = [ctx.pair[(order[p], order[q])] for p in range(n) for q in range(p + 1, n)]
    pair_min = sum(_minwt(f, lam) for f in pair_infos)
    g: dict = {}
    for k in range(n + 1):
        infos = [ctx.left[v] for v in order[:k]] + [ctx.right[v] for v in order[k:]]
        mins = [_minwt(f, lam) for f in infos]
        fs = [ctx.coefs[k]] + [ctx.packed(f, lam) for f in infos]
        rest = [sum(mins[j:]) for j in range(len(mins) + 1)]
        limits = [ctx.limit(T - 1 - pair_min - rest[0])]
        limits += [ctx.limit(T - 1 - pair_min - rest[j + 1]) for j in range(len(infos))]
        kernel.add_into(g, kernel.mul_many(fs, limits), sign)
    if not g:
        return {}
    g_min = min(((k + (1 << (ctx.wshift - 1))) >> ctx.wshift) for k in g)
    if not pair_infos:
        lim = ctx.limit(T - 1)
        return ctx.strip({k: v for k, v in g.items() if lim is None or k < lim})
    mins = [_minwt(f, lam) for f in pair_infos]
    rest = [sum(mins[j:]) for j in range(len(mins) + 1)]
    fs = [ctx.packed(f, lam) for f in pair_infos]
    limits = [ctx.limit(T - 1 - g_min - rest[j + 1]) for j in range(len(fs))]
    pp = kernel.mul_many(fs, limits)
    return ctx.strip(kernel.mul(pp, g, ctx.limit(T - 1)))


def _eval_chunk(ctx: _Context, jobs: list) -> dict:
    acc: dict = {}
    cache: dict = {}
    for job in jobs:
        if ctx.truncated:
            order, lam, T = job
            kernel.add_into(acc, _eval_truncated(ctx, order, lam, T))
        else:
            kernel.add_into(acc, _eval_exact(ctx, job, cache))
    return acc


def _subset_tables(ctx: _Context) -> dict:
    """``A[S]``: sum over orderings of ``S`` of the in-order pair factors (with inversion signs for signed shapes)."""
    n = ctx.n
    pf = {k: ctx.packed(f) for k, f in ctx.pair.items()}
    table = {frozenset(): {0: 1}}
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            s = frozenset(combo)
            acc: dict = {}
            for v in combo:
                rest = s - {v}
                fs = [table[rest]] + [pf[(u, v)] for u in sorted(rest)]
                sign = (-1) ** sum(1 for u in rest if u > v) if ctx.signed else 1
                kernel.add_into(acc, kernel.mul_many(fs), sign)
            table[s] = acc
    return table


def _eval_subsets(ctx: _Context, table: dict, subsets: list) -> dict:
    n = ctx.n
    work = []
    for combo in subsets:
        s = frozenset(combo)
        rest = [v for v in range(n) if v not in s]
        fs = [ctx.coefs[len(combo)]]
        fs += [ctx.packed(ctx.left[v]) for v in combo] + [ctx.packed(ctx.right[v]) for v in rest]
        fs += [ctx.packed(ctx.pair[(u, v)]) for u in combo for v in rest]
        fs.append(table[frozenset(rest)])
        fs.append(table[s])
        sign = (-1) ** sum(1 for u in combo for v in rest if u > v) if ctx.signed else 1
        work.append((sign, sorted(fs, key=len)))
    return kernel.sum_products(work)


def _to_mlaurent(ctx: _Context, acc: dict, nz: int) -> MLaurent:
    terms: dict = {}
    for key, v in acc.items():
        e = ctx.base.unpack(key)
        if ctx.pack_q:
            qe, zw = e[0], e[1:]
            terms.setdefault(zw, {})[qe] = v
        else:
            terms[e] = v
    if ctx.pack_q:
        terms = {zw: QScalar.from_laurent(d) for zw, d in terms.items()}
    return MLaurent(nz, terms)


def _median_center(levels: tuple) -> Fraction:
    s = sorted(levels)
    m = len(s)
    return Fraction(s[(m - 1) // 2] + s[m // 2], 2)


def _homogeneous(shape: Shape) -> bool:
    return all(sum(f.shift) == 0 and sum(f.ratio) == 0 for f in shape.factors())


def evaluate(shape: Shape, window: int = DEFAULT_WINDOW, workers: int = 1,
             chunks: int | None = None, strategy: str = "auto") -> SumResult:
    """Sum the identity; exact when every factor is a Laurent polynomial, else truncated at ``window``.

    ``strategy`` is ``"perm"`` (one permutation at a time), ``"subset"``
    (exact mode only: group permutations by the set placed first, which
    factors the pair product) or ``"auto"`` (subset when exact).
    """
    if strategy not in ("auto", "perm", "subset"):
        raise ValueError(f"unknown strategy {strategy!r}")
    truncated = not shape.is_polynomial
    if strategy == "subset" and truncated:
        raise ValueError("the subset strategy needs an exact shape")
    use_subsets = not truncated and strategy != "perm"
    ctx = _Context(shape, window, truncated)
    n = shape.nz
    orders = [tuple(p(i) for i in range(n)) for p in permutations(n)]
    cert = None
    if truncated:
        jobs = []
        cuts = []
        for order in orders:
            # one level vector per permutation, covering the factors of every k
            lam = _levels(n + 1, ctx.infos(order, 0)[0] + ctx.left + ctx.right)
            if lam is None:
                raise UndefinedProduct(
                    f"series factors for perm {list(order)} have conflicting ratio cones")
            T = None
            for k in range(n + 1):
                pf, lr = ctx.infos(order, k)
                t = _threshold(pf + lr, lam, window)
                if t is not None:
                    T = t if T is None else min(T, t)
            if T is None:
                T = ctx.wbound + 1
            jobs.append((order, lam, T))
            cuts.append((order, lam, T))
        radius = None
        center_ok = _homogeneous(shape)
        for _, lam, T in cuts:
            c = _median_center(lam) if center_ok else Fraction(0)
            norm = sum(abs(x - c) for x in lam)
            if norm == 0:
                continue
            r = (T - 1) // norm if T >= 1 else -1
            r = int(r)
            radius = r if radius is None else min(radius, r)
        cert = Certificate(window, cuts, radius)
    elif use_subsets:
        jobs = [c for size in range(n + 1) for c in itertools.combinations(range(n), size)]
    else:
        jobs = orders
    table = _subset_tables(ctx) if use_subsets else None
    if workers <= 1:
        acc = _eval_subsets(ctx, table, jobs) if use_subsets else _eval_chunk(ctx, jobs)
    else:
        nchunks = chunks or workers * 4
        size = max(1, -(-len(jobs) // nchunks))
        parts = [jobs[s:s + size] for s in range(0, len(jobs), size)]
        acc = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            if use_subsets:
                results = pool.map(_eval_subsets, [ctx] * len(parts), [table] * len(parts), parts)
            else:
                results = pool.map(_eval_chunk, [ctx] * len(parts), parts)
            for part in results:
                kernel.add_into(acc, part)
    poly = _to_mlaurent(ctx, acc, n)
    if cert is not None:
        poly = MLaurent(n, {e: c for e, c in poly.terms.items() if cert.certifies(e)})
    return SumResult(shape, poly, "truncated" if truncated else "exact", cert, kernel.backend())


# --- public identity sums -------------------------------------------------------------------

def lemma2_sum(m: int, t_power: int = 1, workers: int = 1) -> MLaurent:
    return evaluate(lemma2_shape(m, t_power), workers=workers).polynomial


def jing_sum(m: int, t_power: int = 1, literal: bool = False, workers: int = 1) -> MLaurent:
    return evaluate(jing_shape(m, t_power, literal), workers=workers).polynomial


def eq5_sum(a_ij: int, b_ii: int, b_ij: int, d_i: int, workers: int = 1) -> MLaurent:
    return evaluate(eq5_shape(a_ij, b_ii, b_ij, d_i), workers=workers).polynomial


def serre_sum(family: SolutionFamily, i: int, j: int, window: int = DEFAULT_WINDOW,
              workers: int = 1) -> SumResult:
    return evaluate(serre_shape(family, i, j), window, workers)


def prefactored_serre(family: SolutionFamily, i: int, j: int, window: int = DEFAULT_WINDOW,
                      workers: int = 1) -> SumResult:
    return evaluate(prefactored_shape(family, i, j), window, workers)


# --- reports ---------------------------------------------------------------------------

@dataclass
class VerdictReport:
    identity: str
    params: dict
    mode: str
    result: str                 # zero | nonzero | undefined
    terms: int
    millis: int = 0
    witness: dict | None = None
    window: dict | None = None
    notes: list = field(default_factory=list)
    polynomial: MLaurent | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        out = {"identity": self.identity, "params": self.params, "mode": self.mode,
               "result": self.result, "terms": self.terms, "millis": self.millis}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.window is not None:
            out["window"] = self.window
        if self.notes:
            out["notes"] = self.notes
        return out

    @classmethod
    def from_json(cls, data: dict) -> "VerdictReport":
        return cls(data["identity"], data["params"], data["mode"], data["result"],
                   data["terms"], data.get("millis", 0), data.get("witness"),
                   data.get("window"), data.get("notes", []))

    def canonical(self) -> str:
        """Deterministic rendering without timing, for comparisons."""
        d = self.to_json()
        d.pop("millis")
        if self.polynomial is not None:
            d["polynomial"] = str(self.polynomial)
        return json.dumps(d, sort_keys=True)


def _notes(shape: Shape) -> list:
    notes = [f"q-binomial read as {BINOMIAL_CONVENTION}"]
    if shape.name == "lemma2":
        notes.append("binomial top and product bounds read as 1-m throughout")
    if shape.name == "jing" and not shape.params.get("literal"):
        notes.append("last factor taken as (t^m - z/w); the opposite sign (z/w - t^m) gives a nonzero sum")
    if shape.name in ("serre", "prefactored"):
        notes.append("exchange system read with z = u/v")
    return notes


def report_for(result: SumResult, millis: int = 0) -> VerdictReport:
    poly = result.polynomial
    witness = None
    if poly:
        e, c = poly.leading()
        witness = {"monomial": str(MLaurent(poly.nz, {e: 1})), "exponent": list(e),
                   "coefficient": str(c)}
    window = result.certificate.to_json() if result.certificate else None
    return VerdictReport(result.shape.name, result.shape.params, result.mode,
                         "nonzero" if poly else "zero", result.shape.nterms, millis,
                         witness, window, _notes(result.shape), poly)


def verify_shape(shape: Shape, window: int = DEFAULT_WINDOW, workers: int = 1) -> VerdictReport:
    t0 = time.perf_counter()
    try:
        res = evaluate(shape, window, workers)
    except UndefinedProduct as exc:
        millis = int((time.perf_counter() - t0) * 1000)
        rep = VerdictReport(shape.name, shape.params,
                            "exact" if shape.is_polynomial else "truncated", "undefined",
                            shape.nterms, millis, notes=_notes(shape) + [str(exc)])
        return rep
    return report_for(res, int((time.perf_counter() - t0) * 1000))


@dataclass
class IdentityInstance:
    which: str
    cartan: CartanData | None = None
    i: int = 0
    j: int = 1
    family: SolutionFamily | None = None
    m: int = -1
    window: int = DEFAULT_WINDOW
    t_power: int = 1
    literal: bool = False
    eq5: tuple | None = None     # (a_ij, b_ii, b_ij, d_i)

    def shape(self) -> Shape:
        if self.which == "lemma2":
            return lemma2_shape(self.m, self.t_power)
        if self.which == "jing":
            return jing_shape(self.m, self.t_power, self.literal)
        if self.which == "eq5":
            if self.eq5 is not None:
                return eq5_shape(*self.eq5)
            if self.cartan is None:
                raise IdentityError("eq5 needs a Cartan matrix or explicit parameters")
            b, d = self.cartan.b, self.cartan.d
            a_ij = self.cartan.a[self.i][self.j]
            if self.i == self.j or a_ij == 0:
                raise IdentityError("eq5 needs i != j and a_ij != 0")
            return eq5_shape(a_ij, b[self.i][self.i], b[self.i][self.j], d[self.i])
        if self.family is None:
            raise IdentityError(f"{self.which} needs a solution family")
        if self.which == "serre":
            return serre_shape(self.family, self.i, self.j)
        if self.which == "prefactored":
            return prefactored_shape(self.family, self.i, self.j)
        raise IdentityError(f"unknown identity {self.which!r}")


def verify(inst: IdentityInstance, workers: int = 1) -> VerdictReport:
    return verify_shape(inst.shape(), inst.window, workers)


# --- convergence hypotheses ------------------------------------------------------------------------

@dataclass
class HypothesisReport:
    variant: str
    ok: bool
    rho: Fraction
    regions: list       # (label, ratio exponent vector, ConvergenceRegion)
    slack: float | None
    reason: str = ""

    def to_json(self) -> dict:
        return {"variant": self.variant, "common_domain": self.ok, "rho": str(self.rho),
                "slack": self.slack, "reason": self.reason,
                "regions": [{"factor": lab, "ratio": list(x), **reg.to_json()}
                            for lab, x, reg in self.regions]}


def hypothesis_check(family: SolutionFamily, i: int, j: int, variant: str = "constr1",
                     rho=DEFAULT_RHO) -> HypothesisReport:
    """Do all series in (constr1)/(constr2) share a domain of absolute convergence?"""
    if variant not in ("constr1", "constr2"):
        raise IdentityError("variant must be constr1 or constr2")
    rho = Fraction(rho)
    n, _ = _check_pair(family, i, j)
    b = family.cartan.b
    names = [f"z{v + 1}" for v in range(n)] + ["w"]
    items = []
    s_series = geometric(QScalar.q(b[i][i]))
    for p in range(n):
        for q_ in range(n):
            if p != q_:
                items.append((f"s: 1/(1 - q^{b[i][i]} {names[q_]}/{names[p]})",
                              _diff(n, q_, p), s_series))
    r_series = geometric(QScalar.q(b[i][j]))
    for s in range(n):
        if variant == "constr1":
            items.append((f"r: 1/(1 - q^{b[i][j]} {names[s]}/w)", _diff(n, s, n), r_series))
        else:
            items.append((f"r': (w/{names[s]})/(1 - q^{b[i][j]} w/{names[s]})",
                          _diff(n, n, s), r_series.shift(1)))
    for a in range(n):
        for c in range(n):
            if a != c:
                items.append((f"F_ii({names[c]}/{names[a]})", _diff(n, c, a), family.F(i, i)))
    for v in range(n):
        items.append((f"F_ji(w/{names[v]})", _diff(n, n, v), family.F(j, i)))
        items.append((f"F_ij({names[v]}/w)", _diff(n, v, n), family.F(i, j)))
    regions = [(lab, x, convergence_region(f, rho)) for lab, x, f in items]
    for lab, _, reg in regions:
        if reg.empty:
            return HypothesisReport(variant, False, rho, regions, None,
                                    f"{lab} converges nowhere")
    # maximize slack s with lo + s <= x.X <= hi - s, w pinned at 0
    a_ub, b_ub = [], []
    for _, x, reg in regions:
        row = list(x[:n]) + [0.0]
        if reg.lo != float("-inf"):
            a_ub.append([-v for v in row[:n]] + [1.0])
            b_ub.append(-reg.lo)
        if reg.hi != float("inf"):
            a_ub.append(list(row[:n]) + [1.0])
            b_ub.append(reg.hi)
    if not a_ub:
        return HypothesisReport(variant, True, rho, regions, None, "no constraints")
    res = linprog(c=[0.0] * n + [-1.0], A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * n + [(None, 1.0)], method="highs")
    if res.status != 0:
        return HypothesisReport(variant, False, rho, regions, None, f"LP failed: {res.message}")
    slack = float(-res.fun)
    ok = slack > 1e-9
    return HypothesisReport(variant, ok, rho, regions, slack,
                            "common domain found" if ok else "no common open domain")


# --- numeric oracle ----------------------------------------------------------------------------

def _rand_rational(rng: random.Random) -> Fraction:
    num = 0
    while num == 0:
        num = rng.randint(-40, 40)
    return Fraction(num, rng.randint(1, 40))


def numeric_oracle(target, trials: int = 5, nvars: int | None = None, seed: int = 0) -> bool:
    """Evaluate at random rational points and random rational q; true iff every value is 0.

    ``target`` is an :class:`MLaurent` or a callable ``(point, q) -> Fraction``.
    Singular samples are redrawn.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(target, MLaurent):
        nvars = target.nz + 1
        fn = target.evaluate
    else:
        if nvars is None:
            raise ValueError("nvars is required for a callable target")
        fn = target
    rng = random.Random(seed)
    done = attempts = 0
    while done < trials:
        attempts += 1
        if attempts > 100 * trials:
            raise RuntimeError("could not find nonsingular sample points")
        point = [_rand_rational(rng) for _ in range(nvars)]
        qv = _rand_rational(rng)
        if qv in (1, -1):
            continue
        try:
            val = fn(point, qv)
        except ZeroDivisionError:
            continue
        if val != 0:
            return False
        done += 1
    return True


# Pointwise evaluators: the identities recomputed straight from their
# formulas with Fractions, sharing no code with the shape tables above.

def _qint_at(n: int, x: Fraction) -> Fraction:
    return (x ** n - x ** -n) / (x - 1 / x)


def _qbinom_at(m: int, k: int, x: Fraction) -> Fraction:
    out = Fraction(1)
    for r in range(1, k + 1):
        out = out * _qint_at(m - k + r, x) / _qint_at(r, x)
    return out


def _inversions(perm) -> int:
    return sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])


def pointwise_lemma2(m: int, t_power: int = 1):
    n = 1 - m

    def fn(point, qv):
        z, w = point[:n], point[n]
        t = qv ** t_power
        total = Fraction(0)
        for perm in itertools.permutations(range(n)):
            pf = Fraction(1)
            for p in range(n):
                for q_ in range(p + 1, n):
                    a, b = perm[p], perm[q_]
                    pf *= (t * t - z[b] / z[a]) if a < b else (1 - t * t * z[a] / z[b])
            for k in range(n + 1):
                term = (-1) ** k * _qbinom_at(n, k, t) * pf
                for r in range(k):
                    term *= 1 - t ** m * z[perm[r]] / w
                for s in range(k, n):
                    term *= t ** m - z[perm[s]] / w
                total += term
        return total
    return fn, n + 1


def pointwise_jing(m: int, t_power: int = 1, literal: bool = False):
    n = 1 - m

    def fn(point, qv):
        z, w = point[:n], point[n]
        t = qv ** t_power
        total = Fraction(0)
        for perm in itertools.permutations(range(n)):
            pf = Fraction((-1) ** _inversions(perm))
            for p in range(n):
                for q_ in range(p + 1, n):
                    pf *= z[perm[q_]] - t * t * z[perm[p]]
            for k in range(n + 1):
                term = (-1) ** k * _qbinom_at(n, k, t) * pf
                for r in range(k):
                    term *= 1 - t ** m * z[perm[r]] / w
                for s in range(k, n):
                    x = z[perm[s]] / w
                    term *= (x - t ** m) if literal else (t ** m - x)
                total += term
        return total
    return fn, n + 1


def pointwise_eq5(a_ij: int, b_ii: int, b_ij: int, d_i: int):
    n = 1 - a_ij

    def fn(point, qv):
        z, w = point[:n], point[n]
        c, t2, qi = qv ** b_ij, qv ** b_ii, qv ** d_i
        total = Fraction(0)
        for perm in itertools.permutations(range(n)):
            pf = Fraction(1)
            for p in range(n):
                for q_ in range(p + 1, n):
                    x = z[perm[q_]] / z[perm[p]]
                    pf *= (1 - x) * (1 - t2 / x)
            for k in range(n + 1):
                term = (-1) ** k * _qbinom_at(n, k, qi) * pf
                for r in range(k):
                    zr = z[perm[r]]
                    term *= (1 - w / zr) * (1 - c * zr / w)
                for s in range(k, n):
                    zs = z[perm[s]]
                    term *= (1 - zs / w) * (1 - c * w / zs)
                total += term
        return total
    return fn, n + 1


def _eval_laurent(f: BiSeries, x: Fraction, qv: Fraction) -> Fraction:
    if not f.is_polynomial():
        raise ValueError("pointwise evaluation needs Laurent polynomial solutions")
    return sum((c.evaluate(qv) * x ** n for n, c in f.finite.items()), Fraction(0))


def pointwise_serre(family: SolutionFamily, i: int, j: int):
    n = 1 - family.cartan.a[i][j]
    d_i = family.cartan.d[i]
    f_ii, f_ij, f_ji = family.F(i, i), family.F(i, j), family.F(j, i)

    def fn(point, qv):
        z, w = point[:n], point[n]
        qi = qv ** d_i
        total = Fraction(0)
        for perm in itertools.permutations(range(n)):
            pf = Fraction(1)
            for p in range(n):
                for q_ in range(p + 1, n):
                    pf *= _eval_laurent(f_ii, z[perm[q_]] / z[perm[p]], qv)
            for k in range(n + 1):
                term = (-1) ** k * _qbinom_at(n, k, qi) * pf
                for r in range(k):
                    term *= _eval_laurent(f_ji, w / z[perm[r]], qv)
                for s in range(k, n):
                    term *= _eval_laurent(f_ij, z[perm[s]] / w, qv)
                total += term
        return total
    return fn, n + 1


def pointwise_prefactored(family: SolutionFamily, i: int, j: int):
    inner, nv = pointwise_serre(family, i, j)
    n = nv - 1
    b = family.cartan.b

    def fn(point, qv):
        z, w = point[:n], point[n]
        t2, c = qv ** b[i][i], qv ** b[i][j]
        pre = Fraction(1)
        for p in range(n):
            for q_ in range(n):
                if p != q_:
                    pre *= 1 - t2 * z[q_] / z[p]
        for s in range(n):
            pre *= 1 - c * z[s] / w
        return pre * inner(point, qv)
    return fn, nv


def pointwise(shape: Shape):
    """Independent evaluator for an exact shape, rebuilt from its parameters."""
    p = shape.params
    if shape.name == "lemma2":
        return pointwise_lemma2(p["m"], int(p["t"][2:]))
    if shape.name == "jing":
        return pointwise_jing(p["m"], int(p["t"][2:]), p["literal"])
    if shape.name == "eq5":
        return pointwise_eq5(p["a_ij"], p["b_ii"], p["b_ij"], p["d_i"])
    raise ValueError(f"no parameter-only evaluator for {shape.name}")


__all__ = [
    "Factor", "Shape", "SumResult", "Certificate", "VerdictReport", "IdentityInstance",
    "HypothesisReport", "IdentityError", "UndefinedProduct",
    "lemma2_shape", "jing_shape", "eq5_shape", "serre_shape", "prefactored_shape",
    "evaluate", "lemma2_sum", "jing_sum", "eq5_sum", "serre_sum", "prefactored_serre",
    "term_polynomial", "term_factors", "terms", "verify", "verify_shape", "report_for",
    "hypothesis_check", "numeric_oracle", "pointwise", "pointwise_lemma2", "pointwise_jing",
    "pointwise_eq5", "pointwise_serre", "pointwise_prefactored",
]
