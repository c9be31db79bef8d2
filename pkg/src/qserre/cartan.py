"""Generalized Cartan matrices and their symmetrizers.

Indices are 0-based throughout.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm


class CartanError(ValueError):
    """Matrix is not a generalized Cartan matrix."""

    def __init__(self, problems: list):
        super().__init__("; ".join(problems))
        self.problems = problems


class NotSymmetrizable(ValueError):
    def __init__(self, cycle: list, message: str):
        super().__init__(message)
        self.cycle = cycle


def validate_gcm(a) -> tuple:
    """Check the three axioms; returns the matrix as a tuple of tuples."""
    try:
        rows = [list(r) for r in a]
    except TypeError:
        raise CartanError(["matrix must be a list of rows"]) from None
    n = len(rows)
    problems = []
    if n == 0:
        problems.append("matrix is empty")
    for i, r in enumerate(rows):
        if len(r) != n:
            problems.append(f"row {i} has length {len(r)}, expected {n}")
        for j, x in enumerate(r):
            if isinstance(x, bool) or not isinstance(x, int):
                problems.append(f"entry ({i},{j}) is not an integer")
    if problems:
        raise CartanError(problems)
    for i in range(n):
        if rows[i][i] != 2:
            problems.append(f"diagonal entry ({i},{i}) is {rows[i][i]}, expected 2")
        for j in range(n):
            if i == j:
                continue
            if rows[i][j] > 0:
                problems.append(f"off-diagonal entry ({i},{j}) = {rows[i][j]} is positive")
            if (rows[i][j] == 0) != (rows[j][i] == 0) and i < j:
                problems.append(f"zero pattern broken at ({i},{j}) / ({j},{i})")
    if problems:
        raise CartanError(problems)
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class CartanData:
    a: tuple
    d: tuple
    b: tuple

    @property
    def rank(self) -> int:
        return len(self.a)

    def q_exponent(self, i: int) -> int:
        """Exponent of ``q_i = q^{d_i}``."""
        return self.d[i]

    def to_json(self) -> dict:
        return {"a": [list(r) for r in self.a], "d": list(self.d),
                "b": [list(r) for r in self.b]}


def _path(parent: dict, v: int) -> list:
    out = [v]
    while parent[v] is not None:
        v = parent[v]
        out.append(v)
    return out[::-1]


def symmetrize(a) -> CartanData:
    """Coprime positive ``d`` with ``d_i a_ij = d_j a_ji``; raises :class:`NotSymmetrizable`."""
    a = validate_gcm(a)
    n = len(a)
    ratio: list = [None] * n
    d = [0] * n
    for root in range(n):
        if ratio[root] is not None:
            continue
        ratio[root] = Fraction(1)
        parent = {root: None}
        comp = [root]
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if i == j or a[i][j] == 0:
                    continue
                want = ratio[i] * a[i][j] / a[j][i]
                if ratio[j] is None:
                    ratio[j] = want
                    parent[j] = i
                    comp.append(j)
                    queue.append(j)
                elif ratio[j] != want:
                    pi, pj = _path(parent, i), _path(parent, j)
                    k = 0
                    while k < min(len(pi), len(pj)) and pi[k] == pj[k]:
                        k += 1
                    cycle = pi[k - 1:] + pj[k:][::-1]
                    raise NotSymmetrizable(
                        cycle,
                        f"no symmetrizer: ratios disagree around cycle {cycle + [cycle[0]]}")
        den = lcm(*(ratio[v].denominator for v in comp))
        ints = [int(ratio[v] * den) for v in comp]
        g = gcd(*ints)
        for v, x in zip(comp, ints):
            d[v] = x // g
    b = tuple(tuple(d[i] * a[i][j] for j in range(n)) for i in range(n))
    assert all(b[i][j] == b[j][i] for i in range(n) for j in range(n))
    return CartanData(a, tuple(d), b)


def load_cartan(path) -> CartanData:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "a" not in data:
        raise CartanError(['cartan file must be a JSON object with key "a"'])
    return symmetrize(data["a"])
