"""Quadratic Gaudin Hamiltonians, the generating function S(w) and its
coefficients, generator sets and the ad(diag h) filtration.

Normalization: S(w) = sum_a (B(mu, x_a) + sum_i x_a^(i)/(w - z_i))
(B(mu, x^a) + sum_k x^(a,k)/(w - z_k)).  With this choice the coefficient of
(w - z_i)^-2 is the Casimir C^(i) and the coefficient of (w - z_i)^-1 is
2 H_i^mu, i.e. the recorded constant NORMALIZATION = 2.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, QQ_I

from . import spectral
from .operators import (EXACT, FLOAT, OperatorMatrix, exact, is_exact_scalar, to_complex,
                        to_fraction)

__all__ = [
    "NORMALIZATION", "GaudinParams", "QuadraticGenFn", "GeneratorSet",
    "quadratic_hamiltonian", "inhomogeneous_hamiltonian", "generating_function", "direct_generating_function",
    "generator_set", "filtration_degree", "mu_embedding",
]

NORMALIZATION = 2


def _coerce_point(x):
    if isinstance(x, str):
        s = x.strip()
        if any(c in s for c in ".eE") and not s.endswith(("i", "j")):
            return complex(float(s))
        return exact(s)
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        return complex(x)
    return exact(x)


@dataclass(frozen=True)
class GaudinParams:
    """Points z_1..z_N (exact rationals/Gaussian rationals or complex doubles)
    and a twist mu (algebra element spec, ``None`` for the homogeneous case)."""

    z: tuple
    mu: object = None
    weights: tuple = None

    def __post_init__(self):
        pts = tuple(_coerce_point(x) for x in self.z)
        if any(isinstance(p, complex) for p in pts):
            pts = tuple(to_complex(p) if not isinstance(p, complex) else p for p in pts)
        elif any(QQ_I.of_type(p) for p in pts):
            pts = tuple(QQ_I.convert(p) for p in pts)
        for i in range(len(pts)):
            for k in range(i):
                if pts[i] == pts[k]:
                    raise ValueError(f"coincident points z_{k + 1} = z_{i + 1}")
        object.__setattr__(self, "z", pts)
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
            if len(self.weights) != len(pts):
                raise ValueError("weights and points differ in length")
        if isinstance(self.mu, list):
            object.__setattr__(self, "mu", tuple(self.mu))

    @property
    def N(self):
        return len(self.z)

    @property
    def field(self):
        return FLOAT if self.z and isinstance(self.z[0], complex) else EXACT

    @property
    def is_real(self):
        if self.field == FLOAT:
            return all(abs(p.imag) == 0 for p in self.z)
        return all(QQ.of_type(p) or not p.y for p in self.z)

    def mu_coords(self, algebra):
        return _resolve_mu(algebra, self.mu)

    def is_homogeneous(self, algebra):
        return not any(self.mu_coords(algebra))

    def affine(self, a, b):
        """Parameters at a z + b with mu / a (the covariant transport)."""
        if self.field == EXACT:
            a, b = exact(a), exact(b)
            pts = tuple(a * p + b for p in self.z)
        else:
            a, b = complex(a), complex(b)
            pts = tuple(a * p + b for p in self.z)
        mu = self.mu
        if mu is not None:
            if not is_exact_scalar(a) or QQ_I.of_type(a):
                raise ValueError("twisted transport needs a rational scale")
            mu = ("scaled", 1 / to_fraction(a), mu)
        return GaudinParams(pts, mu, self.weights)

    def with_mu(self, mu):
        return GaudinParams(self.z, mu, self.weights)

    def scaled_mu(self, s):
        return GaudinParams(self.z, ("scaled", Fraction(s), self.mu), self.weights)

    def check_space(self, T):
        if T.N != self.N:
            raise ValueError(f"{self.N} points for a {T.N}-fold tensor product")
        if self.weights is not None and self.weights != T.weights:
            raise ValueError("parameter weights do not match the tensor space")


def _resolve_mu(algebra, mu):
    if isinstance(mu, tuple) and len(mu) == 3 and mu[0] == "scaled":
        base = _resolve_mu(algebra, mu[2])
        return tuple(Fraction(mu[1]) * c for c in base)
    return algebra.element(mu if mu is not None else 0)


def _mu(params, T):
    return _resolve_mu(T.algebra, params.mu)


def _inv_diff(a, b):
    if isinstance(a, complex):
        return 1.0 / (a - b)
    d = a - b
    return (QQ_I(1, 0) / d) if QQ_I.of_type(d) else QQ(1) / d


def _block(T, key, field):
    """Exact cached block, converted to float once when needed."""
    kind = key[0]
    if kind == "omega":
        op = T.omega(key[1], key[2])
    elif kind == "dcas":
        op = T.diagonal_casimir()
    else:
        op = T.embed(key[1], key[2])
    if field == EXACT:
        return op
    fkey = ("float",) + key
    cached = T._cache.get(fkey)
    if cached is None:
        cached = op.to_float()
        T._cache[fkey] = cached
    return cached


def _combine(terms, n, field):
    acc = OperatorMatrix.zeros(n, field)
    for c, op in terms:
        if field == EXACT:
            if c:
                acc = acc + op.scale(c)
        elif c != 0:
            acc = acc + op.scale(complex(c))
    return acc


def quadratic_hamiltonian(i, params, T):
    """H_i = sum_{k != i} Omega^(ik) / (z_i - z_k); the twist is ignored."""
    params.check_space(T)
    if not 1 <= i <= T.N:
        raise IndexError(f"point index {i} out of range 1..{T.N}")
    f = params.field
    terms = []
    for k in range(1, T.N + 1):
        if k != i:
            terms.append((_inv_diff(params.z[i - 1], params.z[k - 1]), _block(T, ("omega", i, k), f)))
    return _combine(terms, T.dim, f)


def mu_embedding(i, params, T):
    """mu^(i) = sum_a B(mu, x_a) x^(a,(i))."""
    alg = T.algebra
    mu = _mu(params, T)
    # sum_a B(mu, x_a) x^a expressed in basis coordinates
    coords = [Fraction(0)] * alg.dim
    for a in range(alg.dim):
        bma = sum(mu[b] * alg.form[b][a] for b in range(alg.dim))
        if bma:
            for c, d in enumerate(alg.dual[a]):
                coords[c] += bma * d
    return _block(T, ("x", tuple(coords), i), params.field)


def inhomogeneous_hamiltonian(i, params, T):
    """H_i^mu = H_i + mu^(i)."""
    h = quadratic_hamiltonian(i, params, T)
    if params.is_homogeneous(T.algebra):
        return h
    return h + mu_embedding(i, params, T)


@dataclass
class QuadraticGenFn:
    """Partial-fraction data of S(w).

    ``points[i-1] = (S^{i,2}, S^{i,1})``; ``infinity[m]`` is the coefficient of
    w^m in the expansion of w^2 S(w) at infinity (m = 2, 1, 0).
    """

    params: GaudinParams
    points: tuple
    infinity: dict
    mu_norm: object
    normalization: int = NORMALIZATION

    def evaluate(self, w):
        """Reconstructed rational function at a regular point w."""
        f = self.params.field
        n = self.points[0][0].dim
        w = exact(w) if f == EXACT else complex(w)
        terms = [(self.mu_norm, OperatorMatrix.identity(n, f))]
        for zi, (s2, s1) in zip(self.params.z, self.points):
            r = _inv_diff(w, zi)
            terms.append((r * r, s2))
            terms.append((r, s1))
        return _combine(terms, n, f)


def _scalar(x, field):
    return exact(x) if field == EXACT else complex(float(x))


def _mu_norm(params, T):
    alg = T.algebra
    mu = _mu(params, T)
    return alg.pairing(mu, mu)


def generating_function(params, T):
    params.check_space(T)
    f = params.field
    pts = []
    for i in range(1, T.N + 1):
        s2 = _block(T, ("omega", i, i), f)
        s1 = inhomogeneous_hamiltonian(i, params, T).scale(NORMALIZATION)
        pts.append((s2, s1))
    diag_mu = _combine([(1, mu_embedding(i, params, T)) for i in range(1, T.N + 1)], T.dim, f)
    zsum = _combine([(p, mu_embedding(i, params, T)) for i, p in enumerate(params.z, start=1)], T.dim, f)
    mn = _scalar(_mu_norm(params, T), f)
    infinity = {
        2: OperatorMatrix.identity(T.dim, f).scale(mn),
        1: diag_mu.scale(NORMALIZATION),
        0: _block(T, ("dcas",), f) + zsum.scale(NORMALIZATION),
    }
    return QuadraticGenFn(params, tuple(pts), infinity, mn)


def direct_generating_function(params, T, w):
    """S(w) from the defining product formula (no partial fractions)."""
    params.check_space(T)
    alg = T.algebra
    f = params.field
    w = exact(w) if f == EXACT else complex(w)
    mu = _mu(params, T)
    inv = [_inv_diff(w, zi) for zi in params.z]

    def factor(coords):
        # B(mu, x) + sum_i x^(i) / (w - z_i)
        const = _scalar(alg.pairing(mu, coords), f)
        terms = [(const, OperatorMatrix.identity(T.dim, f))]
        terms += [(inv[i - 1], _block(T, ("x", coords, i), f)) for i in range(1, T.N + 1)]
        return _combine(terms, T.dim, f)

    acc = OperatorMatrix.zeros(T.dim, f)
    for a, b, c in alg.casimir_pairs:
        ea = tuple(Fraction(int(k == a)) for k in range(alg.dim))
        eb = tuple(Fraction(int(k == b)) for k in range(alg.dim))
        acc = acc + (factor(ea) @ factor(eb)).scale(_scalar(c, f))
    return acc


@dataclass
class GeneratorSet:
    """Operators with provenance labels.

    ``basis`` is ``None`` for operators on the full tensor space; otherwise
    the Gram-orthonormal basis (ambient coordinates) of the subspace the
    float matrices act on, so that ``gram`` is the identity there.
    """

    ops: list
    labels: list
    field: str
    basis: np.ndarray = None
    gram: np.ndarray = None

    def __len__(self):
        return len(self.ops)

    def dense(self):
        return [spectral.as_dense(o) for o in self.ops]

    def nonscalar(self):
        keep = [(o, l) for o, l in zip(self.ops, self.labels) if o.scalar_value() is None]
        return GeneratorSet([o for o, _ in keep], [l for _, l in keep], self.field, self.basis, self.gram)

    def commutator_failures(self, tol=1e-10):
        """Pairs of labels whose commutator is nonzero (exactly, or above a
        relative ``tol`` for float operators).  Scalars are skipped."""
        ops = [(o, l) for o, l in zip(self.ops, self.labels) if o.scalar_value() is None]
        bad = []
        for k in range(len(ops)):
            for j in range(k + 1, len(ops)):
                a, la = ops[k]
                b, lb = ops[j]
                c = a.commutator(b)
                if self.field == EXACT:
                    if not c.is_zero():
                        bad.append((la, lb))
                elif c.max_abs() > tol * max(a.max_abs() * b.max_abs(), 1e-300):
                    bad.append((la, lb))
        return bad

    def extend(self, other):
        if other.field != self.field:
            raise TypeError("mixed-field generator sets")
        return GeneratorSet(self.ops + other.ops, self.labels + other.labels, self.field, self.basis, self.gram)


def _restrict_set(gs, subspace, T):
    vecs = subspace.array() if hasattr(subspace, "array") else np.asarray(subspace)
    q = spectral.orthonormal_basis(vecs, T.gram)
    ops = []
    for k, op in enumerate(gs.ops):
        m, res = spectral.restrict(op, q, T.gram)
        if res > 1e-8:
            raise spectral.NotInvariantError(gs.labels[k], res)
        ops.append(OperatorMatrix.from_array(m))
    return GeneratorSet(ops, list(gs.labels), FLOAT, q, np.eye(q.shape[1]))


def generator_set(params, T, restrict_to=None, full=True, check=False):
    """Generators of the quadratic Gaudin algebra image.

    For sl2 (``full=True``) this is {S^{i,1}, S^{i,2}} together with the
    infinity coefficients S^{inf,1}, S^{inf,2} and the constant term
    S^{inf,0} (the diagonal Casimir when mu = 0).  For other algebras use
    ``full=False``, which returns the quadratic H_i^mu only.
    """
    params.check_space(T)
    if full and T.algebra.n != 2:
        raise ValueError("the full generator set is available for sl2 only; pass full=False")
    if full:
        S = generating_function(params, T)
        ops, labels = [], []
        for i, (s2, s1) in enumerate(S.points, start=1):
            ops += [s1, s2]
            labels += [f"S[{i},1]", f"S[{i},2]"]
        for m in (1, 2, 0):
            ops.append(S.infinity[m])
            labels.append(f"S[inf,{m}]")
    else:
        ops = [inhomogeneous_hamiltonian(i, params, T) for i in range(1, T.N + 1)]
        labels = [f"H[{i}]" for i in range(1, T.N + 1)]
    gs = GeneratorSet(ops, labels, params.field, None, T.gram)
    if check:
        bad = gs.commutator_failures()
        if bad:
            raise spectral.CommutativityError(f"non-commuting generators: {bad[:3]}")
    if restrict_to is not None:
        gs = _restrict_set(gs, restrict_to, T)
    return gs


def filtration_degree(op, T):
    """ad(diag h)-degrees of an operator: (min_degree, max_degree, top component).

    The entry (r, c) lies in the eigenvalue h(r) - h(c) = 2k of ad(diag h),
    which is degree k.  A zero operator gives (None, None, zero).
    """
    hdeg = T.h_degrees
    degs = {}
    for r, c, v in op.entries():
        d = int(hdeg[r] - hdeg[c])
        if d % 2:
            raise ArithmeticError("odd ad(diag h) eigenvalue")
        degs.setdefault(d // 2, []).append((r, c, v))
    if not degs:
        return None, None, OperatorMatrix.zeros(op.dim, op.field)
    top = max(degs)
    if op.field == EXACT:
        lead = OperatorMatrix.exact_from_dict({(r, c): v for r, c, v in degs[top]}, op.dim, op.domain)
    else:
        a = np.zeros(op.shape, dtype=np.complex128)
        for r, c, v in degs[top]:
            a[r, c] = v
        lead = OperatorMatrix.from_array(a)
    return min(degs), top, lead
