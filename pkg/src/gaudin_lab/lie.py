"""Lie algebra data, sl2 irreducibles and tensor-product spaces.

Algebras are realised through their defining matrices with exact rational
entries.  The invariant form is a rational multiple of the trace form, and
the Casimir tensor is built from dual bases, so everything stays rational.
Factor indices in the public API are 1-based, matching x^(i), z_i, H_i.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import factorial, prod
import re
import threading

import numpy as np
import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices.sdm import SDM

from . import kernels
from .operators import EXACT, OperatorMatrix, exact, exact_nullspace

__all__ = [
    "LieAlgebraData", "build_algebra", "IrrepSl2", "irrep_sl2", "TensorSpace",
    "embed_factor", "singular_subspace", "isotypic_decomposition", "Subspace",
    "sl2_multiplicities", "sln_defining_multiplicities",
]


def _matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _bracket_mat(a, b):
    ab, ba = _matmul(a, b), _matmul(b, a)
    n = len(a)
    return [[ab[i][j] - ba[i][j] for j in range(n)] for i in range(n)]


def _trace(a):
    return sum(a[i][i] for i in range(len(a)))


def _unit(n, i, j):
    m = [[Fraction(0)] * n for _ in range(n)]
    m[i][j] = Fraction(1)
    return m


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Structure data of sl_n in a chosen basis.

    ``matrices`` are the defining n x n matrices of the basis elements,
    ``structure[a][b]`` the coordinates of [x_a, x_b], ``form`` the Gram
    matrix B(x_a, x_b) = form_scale * tr(x_a x_b) and ``dual[a]`` the
    coordinates of the B-dual element x^a.
    """

    name: str
    n: int
    labels: tuple
    matrices: tuple
    structure: tuple
    form: tuple
    form_scale: Fraction
    dual: tuple
    _coord_solver: object = field(repr=False)

    @property
    def dim(self):
        return len(self.labels)

    @property
    def rank(self):
        return self.n - 1

    @property
    def exponents(self):
        return tuple(range(1, self.n))

    def coords(self, mat):
        """Coordinates of a traceless n x n matrix in this basis."""
        vec = sympy.Matrix([sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x
                            for row in mat for x in row])
        sol = self._coord_solver * vec
        out = tuple(Fraction(int(s.p), int(s.q)) for s in sol)
        if self.matrix_of(out) != [[Fraction(x) for x in row] for row in mat]:
            raise ValueError("matrix is not in sl_n (nonzero trace?)")
        return out

    def matrix_of(self, coords):
        n = self.n
        m = [[Fraction(0)] * n for _ in range(n)]
        for c, x in zip(coords, self.matrices):
            if c:
                for i in range(n):
                    for j in range(n):
                        m[i][j] += c * x[i][j]
        return m

    def bracket(self, u, v):
        out = [Fraction(0)] * self.dim
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if vb:
                    for c, s in enumerate(self.structure[a][b]):
                        if s:
                            out[c] += ua * vb * s
        return tuple(out)

    def pairing(self, u, v):
        return sum(u[a] * self.form[a][b] * v[b] for a in range(self.dim) for b in range(self.dim) if u[a] and v[b])

    @cached_property
    def casimir_pairs(self):
        """Omega = sum_a x_a (x) x^a as a list of (a, b, coeff): coeff x_a (x) x_b."""
        pairs = []
        for a in range(self.dim):
            for b, c in enumerate(self.dual[a]):
                if c:
                    pairs.append((a, b, c))
        return tuple(pairs)

    def casimir_tensor_matrix(self):
        """Omega in End(C^n (x) C^n), as nested lists (for basis-independence checks)."""
        n = self.n
        out = [[Fraction(0)] * (n * n) for _ in range(n * n)]
        for a, b, c in self.casimir_pairs:
            xa, xb = self.matrices[a], self.matrices[b]
            for i, j, k, l in product(range(n), repeat=4):
                if xa[i][j] and xb[k][l]:
                    out[i * n + k][j * n + l] += c * xa[i][j] * xb[k][l]
        return out

    def element(self, spec):
        """Resolve an algebra element from a coordinate tuple, a basis label,
        a principal-triple name (``e``, ``f``, ``h``) or a sum like ``"h+e+f"``."""
        if isinstance(spec, (tuple, list)):
            if len(spec) != self.dim:
                raise ValueError(f"expected {self.dim} coordinates")
            return tuple(Fraction(x) for x in spec)
        if spec is None or spec == 0 or spec == "0":
            return (Fraction(0),) * self.dim
        if not isinstance(spec, str):
            raise TypeError(f"cannot interpret {spec!r} as an element of {self.name}")
        total = [Fraction(0)] * self.dim
        for sign, coef, sym in re.findall(r"([+-]?)\s*([0-9/]*)\s*\*?\s*([A-Za-z][A-Za-z0-9]*)", spec.replace(" ", "")):
            c = Fraction(coef) if coef else Fraction(1)
            if sign == "-":
                c = -c
            vec = self._named(sym)
            for a in range(self.dim):
                total[a] += c * vec[a]
        return tuple(total)

    def _named(self, sym):
        if sym in self.labels:
            v = [Fraction(0)] * self.dim
            v[self.labels.index(sym)] = Fraction(1)
            return tuple(v)
        triple = self.principal_triple
        if sym in triple:
            return triple[sym]
        raise ValueError(f"unknown element {sym!r} of {self.name}")

    @cached_property
    def principal_triple(self):
        """Principal sl2-triple (e, h, f) with h diagonal and e upper triangular."""
        n = self.n
        e = [[Fraction(0)] * n for _ in range(n)]
        f = [[Fraction(0)] * n for _ in range(n)]
        h = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n - 1):
            e[i][i + 1] = Fraction(1)
            f[i + 1][i] = Fraction((i + 1) * (n - 1 - i))
        for i in range(n):
            h[i][i] = Fraction(n - 1 - 2 * i)
        return {"e": self.coords(e), "h": self.coords(h), "f": self.coords(f)}

    @cached_property
    def simple_raising(self):
        """Coordinates of E_{i,i+1}, i = 1..n-1."""
        return tuple(self.coords(_unit(self.n, i, i + 1)) for i in range(self.n - 1))

    @cached_property
    def cartan(self):
        """Coordinates of H_i = E_ii - E_{i+1,i+1}."""
        out = []
        for i in range(self.n - 1):
            m = _unit(self.n, i, i)
            m[i + 1][i + 1] = Fraction(-1)
            out.append(self.coords(m))
        return tuple(out)

    def killing_scale(self):
        """Ratio tr(ad x ad y) / tr(xy), computed from the structure constants."""
        d = self.dim
        ad = [[[self.structure[a][b][c] for b in range(d)] for c in range(d)] for a in range(d)]
        ratio = None
        for a in range(d):
            for b in range(d):
                k = _trace(_matmul(ad[a], ad[b]))
                t = _trace(_matmul(self.matrices[a], self.matrices[b]))
                if t == 0:
                    if k != 0:
                        raise ArithmeticError("Killing form not proportional to trace form")
                    continue
                r = k / t
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    raise ArithmeticError("Killing form not proportional to trace form")
        return ratio


def _standard_basis(n):
    labels, mats = [], []
    for i in range(n):
        for j in range(i + 1, n):
            labels.append("e" if n == 2 else f"E{i + 1}{j + 1}")
            mats.append(_unit(n, i, j))
    for i in range(n - 1):
        m = _unit(n, i, i)
        m[i + 1][i + 1] = Fraction(-1)
        labels.append("h" if n == 2 else f"H{i + 1}")
        mats.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            labels.append("f" if n == 2 else f"E{j + 1}{i + 1}")
            mats.append(_unit(n, j, i))
    return labels, mats


def _parse_name(name):
    if name == "sl2":
        return 2
    m = re.fullmatch(r"sl(?:n\()?(\d+)\)?", str(name).strip())
    if not m or int(m.group(1)) < 2:
        raise ValueError(f"unsupported algebra {name!r}; expected 'sl2' or 'sl<n>' with n >= 2")
    return int(m.group(1))


def build_algebra(name, form="trace", basis=None):
    """Build sl_n structure data.

    ``form`` is ``"trace"`` (default), ``"killing"`` or a rational multiple of
    the trace form.  ``basis`` optionally replaces the standard basis by any
    list of n^2-1 linearly independent traceless matrices (labels ``x1..``).
    """
    n = _parse_name(name)
    if basis is None:
        labels, mats = _standard_basis(n)
    else:
        mats = [[[Fraction(x) for x in row] for row in m] for m in basis]
        labels = [f"x{k + 1}" for k in range(len(mats))]
        if len(mats) != n * n - 1 or any(_trace(m) != 0 for m in mats):
            raise ValueError(f"basis must consist of {n * n - 1} traceless {n}x{n} matrices")
    d = len(mats)
    cols = sympy.Matrix([[sympy.Rational(m[i][j].numerator, m[i][j].denominator) for m in mats]
                         for i in range(n) for j in range(n)])
    if cols.rank() != d:
        raise ValueError("basis matrices are linearly dependent")
    solver = (cols.T * cols).inv() * cols.T

    def coords(mat):
        vec = sympy.Matrix([sympy.Rational(x.numerator, x.denominator) for row in mat for x in row])
        return tuple(Fraction(int(s.p), int(s.q)) for s in solver * vec)

    structure = tuple(tuple(coords(_bracket_mat(mats[a], mats[b])) for b in range(d)) for a in range(d))
    trace_gram = [[_trace(_matmul(mats[a], mats[b])) for b in range(d)] for a in range(d)]

    probe = LieAlgebraData(
        name=f"sl{n}", n=n, labels=tuple(labels), matrices=tuple(tuple(map(tuple, m)) for m in mats),
        structure=structure, form=tuple(map(tuple, trace_gram)), form_scale=Fraction(1),
        dual=(), _coord_solver=solver,
    )
    if form == "trace":
        scale = Fraction(1)
    elif form == "killing":
        scale = probe.killing_scale()
    else:
        scale = Fraction(form)
        if scale == 0:
            raise ValueError("form scale must be nonzero")
    gram = sympy.Matrix([[sympy.Rational((scale * t).numerator, (scale * t).denominator) for t in row]
                         for row in trace_gram])
    ginv = gram.inv()
    dual = tuple(tuple(Fraction(int(ginv[b, a].p), int(ginv[b, a].q)) for b in range(d)) for a in range(d))
    return LieAlgebraData(
        name=f"sl{n}", n=n, labels=tuple(labels), matrices=probe.matrices, structure=structure,
        form=tuple(tuple(scale * t for t in row) for row in trace_gram), form_scale=scale,
        dual=dual, _coord_solver=solver,
    )


# ---------------------------------------------------------------------------
# sl2 irreducibles


@dataclass(frozen=True)
class IrrepSl2:
    """V_lambda on the weight basis v_k = f^k v_0, k = 0..lambda."""

    weight: int
    e: tuple  # (row, col, value) triples
    f: tuple
    h: tuple

    @property
    def dim(self):
        return self.weight + 1

    def dense(self, which):
        m = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for r, c, v in getattr(self, which):
            m[r][c] = v
        return m

    def gram(self):
        """Norms <v_k, v_k> making e and f mutually adjoint."""
        lam = self.weight
        return tuple(Fraction(factorial(k) * factorial(lam), factorial(lam - k)) for k in range(lam + 1))


def irrep_sl2(lam):
    if isinstance(lam, bool) or int(lam) != lam or lam < 0:
        raise ValueError(f"highest weight must be a nonnegative integer, got {lam!r}")
    lam = int(lam)
    e = tuple((k - 1, k, Fraction(k * (lam - k + 1))) for k in range(1, lam + 1))
    f = tuple((k + 1, k, Fraction(1)) for k in range(lam))
    h = tuple((k, k, Fraction(lam - 2 * k)) for k in range(lam + 1) if lam != 2 * k)
    return IrrepSl2(lam, e, f, h)


# ---------------------------------------------------------------------------
# tensor products


class TensorSpace:
    """V_{lambda_1} (x) ... (x) V_{lambda_N} with lexicographic flat indexing.

    For sl2 the weights are nonnegative integers.  For sl_n (n > 2) only the
    defining representation is supported; pass weight ``1`` for each factor.
    """

    def __init__(self, algebra, weights):
        weights = tuple(int(w) for w in weights)
        if not weights:
            raise ValueError("need at least one tensor factor")
        if algebra.n == 2:
            if any(w < 0 for w in weights):
                raise ValueError("sl2 weights must be nonnegative")
            dims = tuple(w + 1 for w in weights)
        else:
            if any(w != 1 for w in weights):
                raise ValueError(f"{algebra.name}: only defining factors (weight 1) are supported")
            dims = (algebra.n,) * len(weights)
        self.algebra = algebra
        self.weights = weights
        self.dims = dims
        self.dim = prod(dims)
        self.N = len(weights)
        self._dims_arr = np.asarray(dims, dtype=np.int64)
        self._cache = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"TensorSpace({self.algebra.name}, weights={self.weights}, dim={self.dim})"

    # index maps -------------------------------------------------------------

    def flat_index(self, multi):
        idx = 0
        for m, d in zip(multi, self.dims):
            if not 0 <= m < d:
                raise IndexError(f"multi-index {multi} out of range")
            idx = idx * d + m
        return idx

    def multi_index(self, flat):
        out = []
        for d in reversed(self.dims):
            out.append(flat % d)
            flat //= d
        return tuple(reversed(out))

    # factor representations --------------------------------------------------

    def _factor_entries(self, i, coords):
        """Sparse (row, col, value) of the basis-element combination on factor i (1-based)."""
        alg = self.algebra
        if alg.n == 2:
            rep = irrep_sl2(self.weights[i - 1])
            # read off the e, h, f components from the defining matrix
            mat = alg.matrix_of(coords)
            ce, ch, cf = mat[0][1], mat[0][0], mat[1][0]
            acc = {}
            for c, triples in ((ce, rep.e), (ch, rep.h), (cf, rep.f)):
                if c:
                    for r, col, v in triples:
                        acc[(r, col)] = acc.get((r, col), Fraction(0)) + c * v
        else:
            mat = alg.matrix_of(coords)
            acc = {(r, c): mat[r][c] for r in range(alg.n) for c in range(alg.n) if mat[r][c]}
        return [(r, c, v) for (r, c), v in sorted(acc.items()) if v]

    def embed(self, coords, i):
        """x^(i) for an element given by basis coordinates (cached by value)."""
        if not 1 <= i <= self.N:
            raise IndexError(f"factor index {i} out of range 1..{self.N}")
        key = ("x", tuple(coords), i)
        op = self._cache.get(key)
        if op is None:
            ent = self._factor_entries(i, coords)
            rows = {}
            if ent:
                frow = np.array([e[0] for e in ent], dtype=np.int64)
                fcol = np.array([e[1] for e in ent], dtype=np.int64)
                vals = [QQ(v.numerator, v.denominator) for _, _, v in ent]
                gr, gc, ge = kernels.embed_indices(self._dims_arr, i - 1, frow, fcol)
                for r, c, e in zip(gr.tolist(), gc.tolist(), ge.tolist()):
                    rows.setdefault(r, {})[c] = vals[e]
            op = OperatorMatrix(SDM(rows, (self.dim, self.dim), QQ), EXACT)
            with self._lock:
                self._cache[key] = op
        return op

    def basis_op(self, a, i):
        unit = [Fraction(0)] * self.algebra.dim
        unit[a] = Fraction(1)
        return self.embed(tuple(unit), i)

    def diag(self, coords):
        """diag(x) = sum_i x^(i)."""
        key = ("diag", tuple(coords))
        op = self._cache.get(key)
        if op is None:
            op = self.embed(coords, 1)
            for i in range(2, self.N + 1):
                op = op + self.embed(coords, i)
            self._cache[key] = op
        return op

    def omega(self, i, k):
        """Omega^(ik) = sum_a x_a^(i) x^{a,(k)} (i != k) or the Casimir C^(i) (i == k)."""
        key = ("omega", min(i, k), max(i, k)) if i != k else ("omega", i, i)
        op = self._cache.get(key)
        if op is None:
            op = OperatorMatrix.zeros(self.dim)
            for a, b, c in self.algebra.casimir_pairs:
                term = self.basis_op(a, i) @ self.basis_op(b, k)
                op = op + term.scale(exact(c))
            self._cache[key] = op
        return op

    def casimir(self, i):
        return self.omega(i, i)

    def diagonal_casimir(self):
        key = ("dcas",)
        op = self._cache.get(key)
        if op is None:
            op = OperatorMatrix.zeros(self.dim)
            for a, b, c in self.algebra.casimir_pairs:
                e = [Fraction(0)] * self.algebra.dim
                e[a] = Fraction(1)
                g = [Fraction(0)] * self.algebra.dim
                g[b] = Fraction(1)
                op = op + (self.diag(tuple(e)) @ self.diag(tuple(g))).scale(exact(c))
            self._cache[key] = op
        return op

    # weights and Hermitian structure ----------------------------------------

    @cached_property
    def weight_vectors(self):
        """Per basis vector: eigenvalues of diag(H_1..H_{n-1}) (ints)."""
        out = []
        for flat in range(self.dim):
            m = self.multi_index(flat)
            if self.algebra.n == 2:
                out.append((sum(lam - 2 * k for lam, k in zip(self.weights, m)),))
            else:
                n = self.algebra.n
                occ = [0] * n
                for k in m:
                    occ[k] += 1
                out.append(tuple(occ[j] - occ[j + 1] for j in range(n - 1)))
        return tuple(out)

    @cached_property
    def h_degrees(self):
        """Eigenvalue of diag(h) (principal h) on each basis vector."""
        n = self.algebra.n
        if n == 2:
            return np.array([w[0] for w in self.weight_vectors], dtype=np.int64)
        hvals = [n - 1 - 2 * i for i in range(n)]
        return np.array([sum(hvals[k] for k in self.multi_index(f)) for f in range(self.dim)], dtype=np.int64)

    @cached_property
    def gram_diagonal(self):
        """Exact diagonal of the Hermitian Gram matrix in the product basis."""
        if self.algebra.n != 2:
            return (Fraction(1),) * self.dim
        per = [irrep_sl2(w).gram() for w in self.weights]
        return tuple(prod((per[i][k] for i, k in enumerate(self.multi_index(f))), start=Fraction(1))
                     for f in range(self.dim))

    @cached_property
    def gram(self):
        return np.diag(np.array([float(g) for g in self.gram_diagonal]))


def embed_factor(x, i, T):
    """x^(i) = 1 (x) .. (x) x (x) .. (x) 1 for ``x`` an element spec (see
    :meth:`LieAlgebraData.element`) and 1-based factor index ``i``."""
    return T.embed(T.algebra.element(x), i)


# ---------------------------------------------------------------------------
# singular vectors and isotypic components


@dataclass(frozen=True)
class Subspace:
    """Exact basis of a subspace of a TensorSpace, with a weight label per vector."""

    ambient_dim: int
    vectors: tuple  # dicts flat_index -> QQ
    labels: tuple

    @property
    def dim(self):
        return len(self.vectors)

    def array(self):
        out = np.zeros((self.ambient_dim, self.dim), dtype=np.complex128)
        for j, v in enumerate(self.vectors):
            for i, x in v.items():
                out[i, j] = float(QQ.to_sympy(x))
        return out

    def sectors(self):
        out = {}
        for j, lab in enumerate(self.labels):
            out.setdefault(lab, []).append(j)
        return out

    def restrict(self, label):
        idx = self.sectors().get(label, [])
        return Subspace(self.ambient_dim, tuple(self.vectors[j] for j in idx), tuple(self.labels[j] for j in idx))


def singular_subspace(T):
    """Exact basis of the joint kernel of diag(E_alpha) over simple roots.

    Computed weight space by weight space.  Labels are the highest weight of
    each vector: an int for sl2, a tuple of Dynkin labels for sl_n.
    """
    alg = T.algebra
    raising = [T.diag(c) for c in alg.simple_raising]
    groups = {}
    for idx, wt in enumerate(T.weight_vectors):
        groups.setdefault(wt, []).append(idx)
    vectors, labels = [], []
    for wt in sorted(groups, reverse=True):
        if any(x < 0 for x in wt):
            continue
        cols = groups[wt]
        colpos = {c: j for j, c in enumerate(cols)}
        rows, rowpos = {}, {}
        for k, R in enumerate(raising):
            for r, row in R.data.items():
                for c, v in row.items():
                    if c in colpos:
                        key = (k, r)
                        if key not in rowpos:
                            rowpos[key] = len(rowpos)
                        rows.setdefault(rowpos[key], {})[colpos[c]] = v
        for vec in exact_nullspace(rows, len(cols)):
            vectors.append({cols[j]: x for j, x in vec.items()})
            labels.append(wt[0] if alg.n == 2 else wt)
    return Subspace(T.dim, tuple(vectors), tuple(labels))


def isotypic_decomposition(T):
    """Projectors onto the diag-isotypic components I_nu (sl2 only).

    Returns a list of ``(nu, P_nu)`` with exact projectors, built as Lagrange
    interpolation polynomials in the diagonal Casimir.
    """
    if T.algebra.n != 2:
        raise NotImplementedError("isotypic projectors are implemented for sl2 only")
    mult = sl2_multiplicities(T.weights)
    nus = sorted((nu for nu, m in mult.items() if m), reverse=True)
    cas = T.diagonal_casimir()
    scale = T.algebra.form_scale
    values = {}
    for nu in nus:
        rep = irrep_sl2(nu)
        e, f, h = rep.dense("e"), rep.dense("f"), rep.dense("h")
        # C = (ef + fe + h^2/2)/scale acts by a scalar; read it off v_0
        ef, fe, hh = _matmul(e, f), _matmul(f, e), _matmul(h, h)
        values[nu] = (ef[0][0] + fe[0][0] + hh[0][0] / 2) / scale
    ident = OperatorMatrix.identity(T.dim)
    out = []
    for nu in nus:
        P = ident
        for other in nus:
            if other == nu:
                continue
            denom = values[nu] - values[other]
            P = P @ (cas - ident.scale(exact(values[other]))).scale(exact(1 / denom))
        out.append((nu, P))
    return out


# ---------------------------------------------------------------------------
# character-theory oracles (independent of the kernel computations above)


def sl2_multiplicities(weights):
    """Multiplicity of V_nu in the tensor product, by peeling characters."""
    counts = {}
    for ks in product(*(range(w + 1) for w in weights)):
        wt = sum(w - 2 * k for w, k in zip(weights, ks))
        counts[wt] = counts.get(wt, 0) + 1
    mult = {}
    while counts:
        top = max(counts)
        m = counts[top]
        mult[top] = m
        for wt in range(top, -top - 1, -2):
            counts[wt] -= m
            if counts[wt] == 0:
                del counts[wt]
            elif counts[wt] < 0:
                raise ArithmeticError("character expansion failed")
    return {nu: m for nu, m in mult.items() if nu >= 0}


def _partitions(total, max_parts, largest=None):
    if largest is None:
        largest = total
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, max_parts - 1, first):
            yield (first,) + rest


def _hook_count(shape):
    cells = sum(shape)
    conj = [sum(1 for r in shape if r > j) for j in range(shape[0])] if shape else []
    hooks = 1
    for i, r in enumerate(shape):
        for j in range(r):
            hooks *= (r - j - 1) + (conj[j] - i - 1) + 1
    return factorial(cells) // hooks


def sln_defining_multiplicities(n, N):
    """Multiplicities of irreducibles in (C^n)^{(x)N}: number of standard Young
    tableaux per shape with at most n rows, keyed by Dynkin labels."""
    out = {}
    for shape in _partitions(N, n):
        padded = list(shape) + [0] * (n - len(shape))
        dynkin = tuple(padded[j] - padded[j + 1] for j in range(n - 1))
        out[dynkin] = out.get(dynkin, 0) + _hook_count(shape)
    return out
