"""sl2 opers d^2/dt^2 - T(t) with regular singularities at z_1..z_N.

T(t) = sum_i a_i/(t - z_i)^2 + c_i/(t - z_i).  The second-order residues
a_i are fixed by the weights, a_i = (l_i/2)(l_i/2 + 1); the accessory
parameters c_i come either from a Gaudin eigenvalue or from Bethe roots via
the Miura transform.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt

import numpy as np
import sympy

from . import kernels, spectral
from .bethe import bethe_residual, bethe_search
from .gaudin import GaudinParams, generator_set
from .lie import TensorSpace, build_algebra, singular_subspace
from .operators import to_complex, to_fraction

__all__ = [
    "Sl2Oper", "MonodromyReport", "OperSpaceDimension", "CalibrationError",
    "oper_space_dimension", "calibration", "oper_from_eigenvalue", "indicial_roots",
    "residue_check", "frobenius_obstruction", "monodromy_report", "miura_oper",
    "miura_simple_pole_at_root", "count_bijection", "BijectionReport", "eigen_opers",
]


class CalibrationError(ValueError):
    pass


def _residue(lam):
    return Fraction(lam * (lam + 2), 4)


@dataclass(frozen=True)
class Sl2Oper:
    z: tuple
    a: tuple
    c: tuple
    weights: tuple

    @property
    def N(self):
        return len(self.z)

    def __call__(self, t):
        t = complex(t)
        return sum(float(a) / (t - z) ** 2 + c / (t - z) for z, a, c in zip(self.z, self.a, self.c))

    def sum_c(self):
        return sum(self.c)

    def taylor_at(self, i, order):
        """Taylor coefficients (in s = t - z_i) of T minus its principal part at z_i."""
        zi = self.z[i - 1]
        n = np.arange(order)
        out = np.zeros(order, dtype=np.complex128)
        for k, (zk, ak, ck) in enumerate(zip(self.z, self.a, self.c), start=1):
            if k == i:
                continue
            d = zi - zk
            sign = (-1.0) ** n
            out += float(ak) * sign * (n + 1) / d ** (n + 2) + ck * sign / d ** (n + 1)
        return out

    def infinity_coefficients(self, order):
        """A_n, the coefficient of s^(n-2) in s^-4 T(1/s), for n = 0..order-1.

        The s^-3 term is sum_i c_i and is omitted (it vanishes for regular
        opers at infinity)."""
        out = np.zeros(order, dtype=np.complex128)
        for zk, ak, ck in zip(self.z, self.a, self.c):
            for n in range(order):
                out[n] += float(ak) * (n + 1) * zk ** n + ck * zk ** (n + 1)
        return out

    def max_distance(self, other):
        """Largest difference of accessory parameters (same points and residues)."""
        if self.a != other.a or not np.allclose(self.z, other.z, rtol=0, atol=1e-14):
            return float("inf")
        return float(max(abs(x - y) for x, y in zip(self.c, other.c))) if self.c else 0.0


# ---------------------------------------------------------------------------
# dimension of the oper space


@dataclass
class OperSpaceDimension:
    formula: int
    independent: int
    parameters: int
    constraints: int

    @property
    def agree(self):
        return self.formula == self.independent

    def __int__(self):
        return self.formula


def oper_space_dimension(algebra, N, irregular=False, seed=0):
    """Formula value and an independent parameter count.

    The count takes the pole coefficients v_{j,n}^(i), n = 0..d_j, at every
    point and imposes regularity at infinity: for each exponent d_j, the
    coefficients of t^-(m+1), m < d_j, in the expansion at infinity vanish.
    The rank of these linear constraints is computed exactly at random
    rational points.
    """
    if N < 1:
        raise ValueError("N must be positive")
    dim, rk = algebra.dim, algebra.rank
    formula = (dim + rk) * N // 2 if irregular else (dim + rk) * (N - 1) // 2 + rk
    exps = algebra.exponents
    params = N * sum(d + 1 for d in exps)
    if irregular:
        return OperSpaceDimension(formula, params, params, 0)
    rng = np.random.default_rng(seed)
    zs = []
    while len(zs) < N:
        q = sympy.Rational(int(rng.integers(-50, 51)), int(rng.integers(1, 13)))
        if q not in zs:
            zs.append(q)
    # column index of v_{j,n}^(i)
    cols, k = {}, 0
    for j, d in enumerate(exps):
        for i in range(N):
            for n in range(d + 1):
                cols[(j, i, n)] = k
                k += 1
    rows = []
    for j, d in enumerate(exps):
        for m in range(d):
            row = [0] * params
            for i in range(N):
                for n in range(m + 1):
                    if n <= d:
                        row[cols[(j, i, n)]] = comb(m, n) * zs[i] ** (m - n)
            rows.append(row)
    rank = sympy.Matrix(rows).rank() if rows else 0
    return OperSpaceDimension(formula, params - rank, params, rank)


# ---------------------------------------------------------------------------
# eigenvalue -> oper


@lru_cache(maxsize=None)
def _calibration(form_scale):
    alg = build_algebra("sl2", form=form_scale)
    T = TensorSpace(alg, (1, 1))
    c = T.casimir(1).scalar_value()
    if c is None:
        raise CalibrationError("the Casimir is not scalar on an irreducible factor")
    alpha = _residue(1) / to_fraction(c)
    return alpha, Fraction(0)


def calibration(algebra):
    """(alpha, beta) with T = alpha * chi(S) + beta; fixed on V_1 (x) V_1."""
    return _calibration(algebra.form_scale)


def _chi_value(chi, label):
    if isinstance(chi, dict):
        return chi[label]
    raise TypeError("chi must map generator labels to eigenvalues")


def oper_from_eigenvalue(chi, params, algebra, weights=None, tol=1e-9):
    """Oper of a joint eigenvalue.

    ``chi`` maps the labels ``S[i,1]`` and ``S[i,2]`` to eigenvalues.  The
    second-order residues alpha * chi(S[i,2]) are compared with the expected
    (l_i/2)(l_i/2 + 1) and then replaced by that exact value.
    """
    weights = tuple(weights if weights is not None else params.weights)
    alpha, beta = calibration(algebra)
    a, c = [], []
    for i, lam in enumerate(weights, start=1):
        target = _residue(lam)
        got = float(alpha) * complex(_chi_value(chi, f"S[{i},2]")) + float(beta)
        if abs(got - float(target)) > tol * max(1.0, float(target)):
            raise CalibrationError(f"residue at z_{i} is {got}, expected {target}")
        a.append(target)
        c.append(float(alpha) * complex(_chi_value(chi, f"S[{i},1]")))
    z = tuple(to_complex(p) for p in params.z)
    return Sl2Oper(z, tuple(a), tuple(c), weights)


# ---------------------------------------------------------------------------
# local analysis


def _rational_sqrt(q):
    q = Fraction(q)
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    return Fraction(n, d) if n * n == q.numerator and d * d == q.denominator else None


def indicial_roots(a):
    """Roots of r(r-1) = a, exact when they are rational (else ``None``)."""
    s = _rational_sqrt(1 + 4 * Fraction(a))
    if s is None:
        return None
    return ((1 - s) / 2, (1 + s) / 2)


def residue_check(oper, weights=None):
    """Indicial roots at each z_i are exactly {-l_i/2, l_i/2 + 1}."""
    weights = tuple(weights if weights is not None else oper.weights)
    if len(weights) != oper.N:
        return False
    for a, lam in zip(oper.a, weights):
        if not isinstance(a, Fraction):
            return False
        roots = indicial_roots(a)
        if roots is None or roots != (Fraction(-lam, 2), Fraction(lam, 2) + 1):
            return False
    return True


def _nearest(points, at):
    d = [abs(p - at) for p in points if p != at]
    return min(d) if d else 1.0


def frobenius_obstruction(oper, i):
    """Resonance coefficient at z_i, normalized to be scale-free.

    The Frobenius recursion starts at the smaller root r = -l/2 and runs to the
    resonant order l + 1, where the pivot vanishes; the right-hand side there
    must vanish for a log-free solution.  It is multiplied by the product of
    the nonzero pivots and by ell^(l+1), ell the distance to the nearest
    other singular point.
    """
    lam = oper.weights[i - 1]
    a = oper.a[i - 1]
    roots = indicial_roots(a)
    if roots is None or roots[1] - roots[0] != lam + 1:
        raise ValueError(f"point {i}: residue {a} does not match weight {lam}")
    order = lam + 1
    taylor = oper.taylor_at(i, max(order - 1, 1))
    rhs, pivots, _ = kernels.frobenius(float(roots[0]), float(a), complex(oper.c[i - 1]), taylor, order)
    if order > 1 and abs(pivots) == 0:
        raise ArithmeticError("zero pivot before the resonant order")
    ell = _nearest(oper.z, oper.z[i - 1])
    return complex(rhs) * complex(pivots) * ell ** order


def _infinity_obstruction(oper):
    """Obstruction at infinity in the chart s = 1/t; also returns nu."""
    A = oper.infinity_coefficients(2)
    a_inf = A[0]
    disc = 1 + 4 * a_inf
    nu_f = np.sqrt(disc).real - 1
    nu = int(round(nu_f))
    regular = abs(sum(oper.c)) <= 1e-9 * max(1.0, max(abs(c) for c in oper.c)) if oper.c else True
    if abs(nu_f - nu) > 1e-8 or nu < 0 or not regular:
        return None, nu_f
    order = nu + 1
    coeffs = oper.infinity_coefficients(order + 2)
    r = -nu / 2
    rhs, pivots, _ = kernels.frobenius(r, (nu / 2) * (nu / 2 + 1), complex(coeffs[1]),
                                       np.asarray(coeffs[2:], dtype=np.complex128), order)
    far = max(abs(z) for z in oper.z) if oper.z else 1.0
    ell = 1.0 / far if far > 0 else 1.0
    return complex(rhs) * complex(pivots) * ell ** order, nu


@dataclass
class MonodromyReport:
    obstructions: list
    passes: list
    tol: float
    infinity: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return all(self.passes)


def monodromy_report(oper, tol=1e-10, include_infinity=False):
    """Frobenius obstructions at the finite points (and optionally at infinity,
    reported separately and not part of the verdict)."""
    obs = [frobenius_obstruction(oper, i) for i in range(1, oper.N + 1)]
    rep = MonodromyReport(obs, [abs(o) <= tol for o in obs], tol)
    if include_infinity:
        val, nu = _infinity_obstruction(oper)
        rep.infinity = {"nu": nu, "obstruction": val, "pass": val is not None and abs(val) <= tol}
    return rep


# ---------------------------------------------------------------------------
# Miura transform


def miura_simple_pole_at_root(config, params):
    """Coefficient of 1/(t - w_j) in u^2 - u'.  It equals -residual_j."""
    z = [to_complex(p) for p in params.z]
    w = config.roots
    kap = [x / 2 for x in config.weights]
    out = []
    for j, wj in enumerate(w):
        s = sum(k / (wj - zi) for k, zi in zip(kap, z))
        s -= sum(1 / (wj - wk) for k, wk in enumerate(w) if k != j)
        out.append(-2 * s)
    return np.array(out, dtype=np.complex128)


def miura_oper(config, params, tol=1e-8):
    """T = u^2 - u' for u = sum_i (l_i/2)/(t - z_i) - sum_j 1/(t - w_j)."""
    z = [to_complex(p) for p in params.z]
    w = config.roots
    if w:
        bethe_residual(config, params)  # rejects roots on marked points
        poles = miura_simple_pole_at_root(config, params)
        scale = max(1.0, max(abs(x) for x in z))
        if np.max(np.abs(poles)) > tol * scale:
            raise ValueError(f"pole at a Bethe root survives (|res| = {np.max(np.abs(poles)):.3e}); "
                             "the configuration does not solve the Bethe equations")
    kap = [Fraction(x, 2) for x in config.weights]
    a = tuple(k * (k + 1) for k in kap)
    c = []
    for i, zi in enumerate(z):
        s = sum(float(kap[k]) / (zi - zk) for k, zk in enumerate(z) if k != i)
        s -= sum(1 / (zi - wj) for wj in w)
        c.append(complex(2 * float(kap[i]) * s))
    return Sl2Oper(tuple(z), a, tuple(c), config.weights)


# ---------------------------------------------------------------------------
# bijection count


@dataclass
class BijectionReport:
    sectors: dict
    totals: dict
    verdict: bool
    incomplete: bool


def eigen_opers(params, T, weights):
    """Per sector nu: list of (values dict, oper) for joint eigenvectors on V^sing."""
    sing = singular_subspace(T)
    out = {}
    for nu in sorted(sing.sectors(), reverse=True):
        gs = generator_set(params, T, restrict_to=sing.restrict(nu))
        spec = spectral.joint_diagonalize(gs.ops, gs.labels, gram=gs.gram)
        entries = []
        for space in spec.spaces:
            vals = dict(zip(gs.labels, space.values))
            entries.append((vals, oper_from_eigenvalue(vals, params, T.algebra, weights), space.multiplicity))
        out[nu] = entries
    return out


def _validated(search, params, entries, tol, match_tol):
    validated, matched = 0, 0
    for cfg in search.solutions:
        try:
            op = miura_oper(cfg, params)
        except ValueError:
            continue
        if not residue_check(op) or not monodromy_report(op, tol).verdict:
            continue
        validated += 1
        if any(op.max_distance(e[1]) <= match_tol for e in entries):
            matched += 1
    return validated, matched


def count_bijection(params, weights=None, starts=200, seed=0, tol=1e-10, match_tol=1e-8, max_starts=3200):
    """Eigenvalue count vs validated Bethe-solution count, per sector nu.

    A sector whose search falls short is retried with twice the starts (new
    seed) up to ``max_starts``; a remaining shortfall is reported as an
    incomplete search.
    """
    weights = tuple(weights if weights is not None else params.weights)
    alg = build_algebra("sl2")
    T = TensorSpace(alg, weights)
    if not isinstance(params, GaudinParams) or params.weights is None:
        params = GaudinParams(params.z if isinstance(params, GaudinParams) else params, None, weights)
    eig = eigen_opers(params, T, weights)
    sectors, incomplete = {}, False
    for nu, entries in eig.items():
        m = (sum(weights) - nu) // 2
        distinct = len(entries)
        budget, attempt = starts, 0
        while True:
            search = bethe_search(params, m, weights=weights, starts=budget, seed=seed + 1000 * attempt + m)
            validated, matched = _validated(search, params, entries, tol, match_tol)
            if validated >= distinct or budget >= max_starts:
                break
            budget, attempt = 2 * budget, attempt + 1
        simple = all(e[2] == 1 for e in entries)
        if validated < distinct:
            incomplete = True
        sectors[nu] = {"m": m, "eigenvalues": distinct, "simple": simple, "bethe": validated,
                       "matched": matched, "found": len(search.solutions), "starts": budget}
    totals = {"eigenvalues": sum(s["eigenvalues"] for s in sectors.values()),
              "bethe": sum(s["bethe"] for s in sectors.values())}
    verdict = all(s["eigenvalues"] == s["bethe"] == s["matched"] for s in sectors.values())
    return BijectionReport(sectors, totals, verdict, incomplete)
