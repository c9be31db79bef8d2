"""Solution families of the exchange system and their direct checks.

Every solution value is a one-variable :class:`BiSeries` (Laurent
polynomials are series with finite support).  The pair equation is read
with ``z = u/v``::

    (z - c) F_ji(1/z) = (c z - 1) F_ij(z),   c = q^{b_ij}

which for ``i = j`` is the single equation ``(z - c) F(1/z) = (c z - 1) F(z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .biseries import BiSeries, delta, geometric
from .cartan import CartanData
from .scalarq import ONE, QScalar, as_qscalar

DEFAULT_WINDOW = 30

KINDS = ("p-basis", "q-basis", "taylor", "phi-psi", "general-offdiag", "constant-ones")


class FamilyError(ValueError):
    """Bad family descriptor or a constructed family that fails the system."""


def _q(e: int) -> QScalar:
    return QScalar.q(e)


# --- Laurent polynomial bases --------------------------------------------------

def basis_P(n: int, c) -> BiSeries:
    """``z^n + c z^-n + sum_{p=1-n}^{-1} c^{p+n-1}(c^2-1) z^p - c^{n-1}(c+1)``."""
    if n < 1:
        raise ValueError("basis index n must be >= 1")
    c = as_qscalar(c)
    if not c:
        raise ValueError("c must be nonzero")
    coeffs = {n: ONE, -n: c}
    for p in range(1 - n, 0):
        coeffs[p] = coeffs.get(p, QScalar(0)) + c ** (p + n - 1) * (c * c - 1)
    coeffs[0] = coeffs.get(0, QScalar(0)) - c ** (n - 1) * (c + 1)
    return BiSeries(coeffs)


def basis_Q(n: int, c) -> BiSeries:
    """``P_n(1/z, 1/c)``."""
    c = as_qscalar(c)
    if not c:
        raise ValueError("c must be nonzero")
    return basis_P(n, c.inverse()).reflect()


# --- series bases -------------------------------------------------------------

def phi(n: int, c) -> BiSeries:
    """``z^-n + z^n (c - z)/(1 - c z)`` for ``n >= 1``; ``(1 - z)/(1 - c z)`` for ``n = 0``."""
    c = as_qscalar(c)
    if n < 0:
        raise ValueError("n must be >= 0")
    g = geometric(c)
    if n == 0:
        return BiSeries({0: 1, 1: -1}) * g
    return BiSeries({-n: 1}) + BiSeries({n: c, n + 1: -1}) * g


def psi(n: int, c) -> BiSeries:
    """``z^n + z^-n (1/c - 1/z)/(1 - 1/(c z))`` for ``n >= 1``; ``(1 - 1/z)/(1 - 1/(c z))`` for ``n = 0``."""
    c = as_qscalar(c)
    if n < 0:
        raise ValueError("n must be >= 0")
    g = geometric(c.inverse(), inverse=True)
    if n == 0:
        return BiSeries({0: 1, -1: -1}) * g
    return BiSeries({n: 1}) + BiSeries({-n: c.inverse(), -n - 1: -1}) * g


def phi_psi(n: int, c, which: str = "phi") -> BiSeries:
    if which in ("phi", "φ"):
        return phi(n, c)
    if which in ("psi", "ψ"):
        return psi(n, c)
    raise ValueError(f"which must be 'phi' or 'psi', not {which!r}")


# --- equation checks -------------------------------------------------------------

def _check_range(fs, window: int) -> range:
    if all(f.is_polynomial() for f in fs):
        lo, hi = 0, 0
        for f in fs:
            if f.finite:
                lo = min(lo, min(f.finite), -max(f.finite))
                hi = max(hi, max(f.finite), -min(f.finite))
        return range(lo - 2, hi + 3)
    return range(-window, window + 1)


def pair_residual(f_ij: BiSeries, f_ji: BiSeries, c, p: int) -> QScalar:
    """Coefficient of ``z^p`` in ``(z - c) F_ji(1/z) - (c z - 1) F_ij(z)``."""
    c = as_qscalar(c)
    return (f_ji.coefficient(1 - p) - c * f_ji.coefficient(-p)
            - c * f_ij.coefficient(p - 1) + f_ij.coefficient(p))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    exact: bool
    window: tuple
    witness: int | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {"ok": self.ok, "exact": self.exact, "window": list(self.window)}
        if self.witness is not None:
            out["witness_degree"] = self.witness
        return out


def check_pair(f_ij: BiSeries, f_ji: BiSeries, c, window: int = DEFAULT_WINDOW) -> CheckResult:
    """Coefficientwise check of the pair equation; exact for polynomial inputs."""
    rng = _check_range((f_ij, f_ji), window)
    exact = f_ij.is_polynomial() and f_ji.is_polynomial()
    for p in rng:
        if pair_residual(f_ij, f_ji, c, p):
            return CheckResult(False, exact, (rng.start, rng.stop - 1), p)
    return CheckResult(True, exact, (rng.start, rng.stop - 1))


def check_equation_c(F, c, window: int = DEFAULT_WINDOW) -> CheckResult:
    """``(z - c) F(1/z) = (c z - 1) F(z)``, exactly or on ``[-window, window]``."""
    if not isinstance(F, BiSeries):
        F = BiSeries(F)
    return check_pair(F, F, c, window)


# --- Taylor family ------------------------------------------------------------------

def taylor_solution(d_i: int, d_j: int, b_ij: int, n_ij: int, n_ji: int) -> tuple:
    """``F_ij = (q_j^{n_ij} - z q_i^{n_ji})/(1 - z q^{b_ij})`` and its partner, as Taylor series."""
    f_ij = BiSeries({0: _q(d_j * n_ij), 1: -_q(d_i * n_ji)}) * geometric(_q(b_ij))
    f_ji = BiSeries({0: _q(d_i * n_ji), 1: -_q(d_j * n_ij)}) * geometric(_q(b_ij))
    return f_ij, f_ji


def epsilon_constraint(d_i: int, d_j: int, b_ij: int, n_ij: int, n_ji: int):
    """``eps`` with ``d_i n_ji - d_j n_ij = eps b_ij``, or ``None``."""
    if b_ij == 0:
        raise ValueError("b_ij must be nonzero")
    lhs = d_i * n_ji - d_j * n_ij
    if lhs == b_ij:
        return 1
    if lhs == -b_ij:
        return -1
    return None


# --- general off-diagonal solution --------------------------------------------------------

def general_offdiag(coeffs: dict, C, b_ij: int) -> tuple:
    """``F_ij = sum_n C^n z^n`` (finite) and ``F_ji`` assembled from the delta, double-tail and per-mode terms."""
    c = _q(b_ij)
    ci = c.inverse()
    C = as_qscalar(C)
    coeffs = {int(n): as_qscalar(v) for n, v in coeffs.items() if as_qscalar(v)}
    f_ij = BiSeries(coeffs)
    up = geometric(c)
    down = geometric(ci, inverse=True)
    f_ji = BiSeries()
    if C:
        f_ji = f_ji + delta(c).scale(C)
    c0 = coeffs.get(0)
    if c0:
        f_ji = f_ji - (up.shift(1) + down.shift(-1)).scale(c0)
    for n, v in coeffs.items():
        if n < 0:
            m = -n
            f_ji = f_ji + (BiSeries({m: c, m + 1: -1}) * up).scale(v)
        elif n > 0:
            f_ji = f_ji + (BiSeries({-n: ci, -n - 1: -1}) * down).scale(v)
    return f_ij, f_ji


# --- families -------------------------------------------------------------------------

@dataclass
class SolutionFamily:
    """A value ``F[(k, l)]`` for every ordered pair with ``a_kl != 0``."""

    kind: str
    cartan: CartanData
    values: dict
    params: dict = field(default_factory=dict)

    def F(self, k: int, l: int) -> BiSeries:
        try:
            return self.values[(k, l)]
        except KeyError:
            raise FamilyError(f"family has no entry F_{k}{l}") from None

    @property
    def is_polynomial(self) -> bool:
        return all(f.is_polynomial() for f in self.values.values())

    def tag(self) -> str:
        return "exact-polynomial" if self.is_polynomial else "series"

    def descriptor(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    def check(self, window: int = DEFAULT_WINDOW) -> dict:
        out = {}
        for (k, l) in sorted(self.values):
            if k <= l:
                out[(k, l)] = check_system1(self, k, l, window)
        return out


def check_system1(fam: SolutionFamily, i: int, j: int, window: int = DEFAULT_WINDOW) -> CheckResult:
    """The pair equation for ``(F_ij, F_ji)`` with ``c = q^{b_ij}``."""
    if fam.cartan.a[i][j] == 0:
        raise FamilyError(f"a_{i}{j} = 0: no equation for this pair")
    return check_pair(fam.F(i, j), fam.F(j, i), _q(fam.cartan.b[i][j]), window)


def _pairs(cartan: CartanData):
    n = cartan.rank
    return [(k, l) for k in range(n) for l in range(n) if cartan.a[k][l] != 0]


def _finish(fam: SolutionFamily, verify: bool, window: int) -> SolutionFamily:
    if verify:
        for pair, res in fam.check(window).items():
            if not res.ok:
                raise FamilyError(
                    f"{fam.kind} family fails the system at pair {pair} (degree {res.witness})")
    return fam


def _int_matrix(n: int, value, name: str) -> list:
    if value is None:
        return [[0] * n for _ in range(n)]
    if isinstance(value, int):
        return [[value] * n for _ in range(n)]
    rows = [list(r) for r in value]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise FamilyError(f"{name} must be an integer or a {n}x{n} matrix")
    return rows


def p_basis_family(cartan: CartanData, n: int = 1, which: str = "P", window=DEFAULT_WINDOW) -> SolutionFamily:
    basis = basis_P if which == "P" else basis_Q
    vals = {(k, l): basis(n, _q(cartan.b[k][l])) for k, l in _pairs(cartan)}
    kind = "p-basis" if which == "P" else "q-basis"
    return _finish(SolutionFamily(kind, cartan, vals, {"n": n}), True, window)


def taylor_family(cartan: CartanData, n=None, eps: int = 1, window=DEFAULT_WINDOW,
                  verify: bool = True) -> SolutionFamily:
    """Taylor solutions.  ``n`` is the integer matrix ``n_kl``; when omitted, ``n_kl = 0``
    for ``k <= l`` and the lower entries are chosen so that ``eps_kl = eps`` for ``k < l``."""
    r = cartan.rank
    d, b = cartan.d, cartan.b
    if n is None:
        n = [[0] * r for _ in range(r)]
        for k in range(r):
            for l in range(k + 1, r):
                if cartan.a[k][l]:
                    n[l][k] = eps * cartan.a[k][l]
    n = _int_matrix(r, n, "n")
    vals = {}
    for k, l in _pairs(cartan):
        if k <= l:
            f_kl, f_lk = taylor_solution(d[k], d[l], b[k][l], n[k][l], n[l][k])
            vals[(k, l)] = f_kl
            vals[(l, k)] = f_lk
    fam = SolutionFamily("taylor", cartan, vals, {"n": n})
    return _finish(fam, verify, window)


def phi_psi_family(cartan: CartanData, which: str = "phi", n: int = 1, n_off: int | None = None,
                   window=DEFAULT_WINDOW) -> SolutionFamily:
    """``F_kk = which_n(z, q^{b_kk})`` and ``F_kl = F_lk = which_{n_off}(z, q^{b_kl})``."""
    n_off = n if n_off is None else n_off
    vals = {}
    for k, l in _pairs(cartan):
        vals[(k, l)] = phi_psi(n if k == l else n_off, _q(cartan.b[k][l]), which)
    fam = SolutionFamily("phi-psi", cartan, vals, {"which": which, "n": n, "n_off": n_off})
    return _finish(fam, True, window)


def general_offdiag_family(cartan: CartanData, coeffs: dict, C=0, n: int = 1,
                           window=DEFAULT_WINDOW) -> SolutionFamily:
    """Diagonal ``phi_n``; for ``k < l`` the general off-diagonal pair built from ``coeffs``."""
    vals = {}
    for k, l in _pairs(cartan):
        if k == l:
            vals[(k, k)] = phi(n, _q(cartan.b[k][k]))
        elif k < l:
            vals[(k, l)], vals[(l, k)] = general_offdiag(coeffs, C, cartan.b[k][l])
    params = {"coeffs": {str(m): str(as_qscalar(v)) for m, v in sorted(coeffs.items())},
              "C": str(as_qscalar(C)), "n": n}
    return _finish(SolutionFamily("general-offdiag", cartan, vals, params), True, window)


def constant_ones_family(cartan: CartanData) -> SolutionFamily:
    """Every ``F_kl = 1``; not a solution, used to exercise nonzero verdicts."""
    vals = {p: BiSeries({0: 1}) for p in _pairs(cartan)}
    return SolutionFamily("constant-ones", cartan, vals, {})


def _scalar(v) -> QScalar:
    if isinstance(v, str):
        return QScalar.parse(v)
    if isinstance(v, (int, Fraction)):
        return QScalar(v)
    raise FamilyError(f"cannot read coefficient {v!r}")


def family_from_descriptor(cartan: CartanData, desc: dict, window: int = DEFAULT_WINDOW) -> SolutionFamily:
    """Build a family from ``{"kind": ..., "params": {...}}``."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise FamilyError('family descriptor must be an object with a "kind"')
    kind = desc["kind"]
    p = dict(desc.get("params") or {})
    try:
        if kind == "p-basis":
            return p_basis_family(cartan, int(p.get("n", 1)), "P", window)
        if kind == "q-basis":
            return p_basis_family(cartan, int(p.get("n", 1)), "Q", window)
        if kind == "taylor":
            return taylor_family(cartan, p.get("n"), int(p.get("eps", 1)), window)
        if kind == "phi-psi":
            n_off = p.get("n_off")
            return phi_psi_family(cartan, p.get("which", "phi"), int(p.get("n", 1)),
                                  None if n_off is None else int(n_off), window)
        if kind == "general-offdiag":
            coeffs = {int(k): _scalar(v) for k, v in (p.get("coeffs") or {}).items()}
            return general_offdiag_family(cartan, coeffs, _scalar(p.get("C", 0)),
                                          int(p.get("n", 1)), window)
        if kind == "constant-ones":
            return constant_ones_family(cartan)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FamilyError):
            raise
        raise FamilyError(f"bad parameters for family {kind!r}: {exc}") from exc
    raise FamilyError(f"unknown family kind {kind!r}; expected one of {', '.join(KINDS)}")
