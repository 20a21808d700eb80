"""Sparse operators over an exact field (Gaussian rationals) or complex doubles.

Exact matrices are sympy ``SDM`` objects over ``QQ`` or ``QQ_I``; the two are
unified on demand (``QQ`` embeds into ``QQ_I``).  Float matrices are scipy
CSR arrays of complex128.  Arithmetic between an exact and a float operator
raises ``TypeError``; convert explicitly with :meth:`OperatorMatrix.to_float`.
"""

from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
import scipy.sparse as sp
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices.sdm import SDM

EXACT = "exact"
FLOAT = "float"

# ---------------------------------------------------------------------------
# scalars


def is_exact_scalar(x):
    if isinstance(x, bool):
        return False
    if isinstance(x, (Integral, Rational)):
        return True
    return QQ.of_type(x) or QQ_I.of_type(x)


def exact(x):
    """Coerce ``x`` to an exact scalar (QQ element, or QQ_I when non-real).

    Accepts ints, Fractions, gmpy/sympy rationals, Gaussian rationals,
    ``(re, im)`` pairs and strings like ``"3/4"``, ``"1/2-2/3i"``, ``"2i"``.
    """
    if QQ_I.of_type(x):
        return x if x.y else QQ(x.x)
    if QQ.of_type(x):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Integral):
        return QQ(int(x))
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, Rational):
        return QQ(int(x.numerator), int(x.denominator))
    if isinstance(x, tuple) and len(x) == 2:
        re_, im_ = exact(x[0]), exact(x[1])
        if not (QQ.of_type(re_) and QQ.of_type(im_)):
            raise TypeError(f"components of {x!r} must be rational")
        return QQ_I(re_, im_) if im_ else re_
    if isinstance(x, str):
        return _parse_exact(x)
    raise TypeError(f"{x!r} is not an exact scalar")


def _parse_exact(text):
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if s[-1] in "ij":
        body = s[:-1]
        # split at the last sign that is not the leading one
        cut = max(body.rfind("+", 1), body.rfind("-", 1))
        if cut <= 0:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return exact((Fraction(re_part), Fraction(im_part)))
    if any(c in s for c in ".eE"):
        raise ValueError(f"{text!r} is a decimal, not an exact rational")
    return exact(Fraction(s))


def exact_domain(x):
    return QQ_I if QQ_I.of_type(x) else QQ


def to_complex(x):
    if QQ_I.of_type(x):
        return complex(float(QQ.to_sympy(x.x)), float(QQ.to_sympy(x.y)))
    if QQ.of_type(x):
        return complex(float(QQ.to_sympy(x)))
    return complex(x)


def to_fraction(x):
    """Exact rational as ``Fraction`` (raises on non-real Gaussian)."""
    if QQ_I.of_type(x):
        if x.y:
            raise ValueError("non-real Gaussian rational")
        x = x.x
    if QQ.of_type(x):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


def exact_conj(x):
    if QQ_I.of_type(x):
        return QQ_I(x.x, -x.y)
    return x


def _in_domain(x, dom):
    x = exact(x)
    if dom is QQ_I and QQ.of_type(x):
        return QQ_I(x, QQ(0))
    if dom is QQ and QQ_I.of_type(x):
        raise TypeError("Gaussian scalar in rational domain")
    return x


def _join(d1, d2):
    return QQ_I if QQ_I in (d1, d2) else QQ


# ---------------------------------------------------------------------------
# operators


class OperatorMatrix:
    """A square sparse operator tagged with its scalar field."""

    __slots__ = ("data", "field")

    def __init__(self, data, field):
        if field == EXACT and not isinstance(data, SDM):
            raise TypeError("exact operators wrap an SDM")
        if field == FLOAT and not sp.issparse(data):
            raise TypeError("float operators wrap a scipy sparse matrix")
        self.data = data
        self.field = field

    # -- construction --------------------------------------------------------

    @classmethod
    def exact_from_dict(cls, entries, n, domain=None):
        """Build from ``{(row, col): value}`` with exact values."""
        vals = {k: exact(v) for k, v in entries.items()}
        if domain is None:
            domain = QQ_I if any(QQ_I.of_type(v) for v in vals.values()) else QQ
        rows = {}
        for (r, c), v in vals.items():
            v = _in_domain(v, domain)
            if v:
                rows.setdefault(r, {})[c] = v
        return cls(SDM(rows, (n, n), domain), EXACT)

    @classmethod
    def identity(cls, n, field=EXACT):
        if field == EXACT:
            return cls(SDM.eye((n, n), QQ), EXACT)
        return cls(sp.identity(n, dtype=np.complex128, format="csr"), FLOAT)

    @classmethod
    def zeros(cls, n, field=EXACT):
        if field == EXACT:
            return cls(SDM({}, (n, n), QQ), EXACT)
        return cls(sp.csr_matrix((n, n), dtype=np.complex128), FLOAT)

    @classmethod
    def from_array(cls, a):
        return cls(sp.csr_matrix(np.asarray(a, dtype=np.complex128)), FLOAT)

    # -- basic properties ----------------------------------------------------

    @property
    def shape(self):
        return tuple(self.data.shape)

    @property
    def dim(self):
        return self.data.shape[0]

    @property
    def domain(self):
        return self.data.domain if self.field == EXACT else None

    @property
    def nnz(self):
        return self.data.nnz() if self.field == EXACT else self.data.count_nonzero()

    def entries(self):
        """Iterate ``(row, col, value)`` over stored nonzeros."""
        if self.field == EXACT:
            for r, row in self.data.items():
                for c, v in row.items():
                    yield r, c, v
        else:
            coo = self.data.tocoo()
            for r, c, v in zip(coo.row, coo.col, coo.data):
                if v != 0:
                    yield int(r), int(c), complex(v)

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, OperatorMatrix):
            raise TypeError(f"cannot combine OperatorMatrix with {type(other).__name__}")
        if other.field != self.field:
            raise TypeError(f"mixed-field arithmetic ({self.field} vs {other.field})")
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def _pair(self, other):
        a, b = self.data, other.data
        if self.field == EXACT and a.domain != b.domain:
            dom = _join(a.domain, b.domain)
            a, b = a.convert_to(dom), b.convert_to(dom)
        return a, b

    def __add__(self, other):
        self._check(other)
        a, b = self._pair(other)
        return OperatorMatrix(a.add(b) if self.field == EXACT else a + b, self.field)

    def __sub__(self, other):
        self._check(other)
        a, b = self._pair(other)
        return OperatorMatrix(a.sub(b) if self.field == EXACT else a - b, self.field)

    def __neg__(self):
        return OperatorMatrix(self.data.neg() if self.field == EXACT else -self.data, self.field)

    def __matmul__(self, other):
        self._check(other)
        a, b = self._pair(other)
        return OperatorMatrix(a.matmul(b) if self.field == EXACT else (a @ b).tocsr(), self.field)

    def scale(self, c):
        """Multiply by a scalar of the operator's own field."""
        if self.field == EXACT:
            if isinstance(c, (float, complex, np.floating, np.complexfloating)):
                raise TypeError("exact operator scaled by a non-exact scalar")
            c = exact(c)
            dom = _join(self.data.domain, exact_domain(c))
            data = self.data.convert_to(dom) if dom != self.data.domain else self.data
            c = _in_domain(c, dom)
            if not c:
                return OperatorMatrix(SDM({}, self.shape, dom), EXACT)
            return OperatorMatrix(data.mul(c), EXACT)
        if isinstance(c, str) or (is_exact_scalar(c) and not isinstance(c, Integral)):
            c = to_complex(exact(c))
        return OperatorMatrix((self.data * complex(c)).tocsr(), FLOAT)

    def __mul__(self, c):
        if isinstance(c, OperatorMatrix):
            raise TypeError("use @ for operator products")
        return self.scale(c)

    __rmul__ = __mul__

    def commutator(self, other):
        return self @ other - other @ self

    # -- comparisons and conversion -----------------------------------------

    def is_zero(self, tol=0.0):
        if self.field == EXACT:
            return all(not row for row in self.data.values())
        if self.data.nnz == 0:
            return True
        return float(np.abs(self.data.data).max()) <= tol

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.field != self.field or other.shape != self.shape:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def max_abs(self):
        if self.field == EXACT:
            return max((abs(to_complex(v)) for _, _, v in self.entries()), default=0.0)
        return float(np.abs(self.data.data).max()) if self.data.nnz else 0.0

    def to_float(self):
        if self.field == FLOAT:
            return self
        n = self.dim
        rows, cols, vals = [], [], []
        for r, c, v in self.entries():
            rows.append(r)
            cols.append(c)
            vals.append(to_complex(v))
        m = sp.csr_matrix((np.asarray(vals, dtype=np.complex128), (rows, cols)), shape=(n, n))
        return OperatorMatrix(m, FLOAT)

    def toarray(self):
        return np.asarray(self.to_float().data.toarray(), dtype=np.complex128)

    def transpose(self):
        if self.field == EXACT:
            return OperatorMatrix(self.data.transpose(), EXACT)
        return OperatorMatrix(self.data.T.tocsr(), FLOAT)

    def adjoint(self):
        """Entrywise conjugate transpose (adjoint for the standard form)."""
        if self.field == EXACT:
            t = self.data.transpose()
            if t.domain == QQ_I:
                t = SDM({r: {c: exact_conj(v) for c, v in row.items()} for r, row in t.items()}, t.shape, QQ_I)
            return OperatorMatrix(t, EXACT)
        return OperatorMatrix(self.data.conj().T.tocsr(), FLOAT)

    def scalar_value(self):
        """Return ``c`` if the operator equals ``c * identity``, else ``None``."""
        n = self.dim
        if self.field == EXACT:
            first = self.data.get(0, {}).get(0, None)
            if first is None:
                return exact(0) if self.is_zero() else None
            for r in range(n):
                row = self.data.get(r, {})
                if len(row) != 1 or row.get(r) != first:
                    return None
            return first
        d = self.data.diagonal()
        off = self.data - sp.diags(d)
        if off.count_nonzero() or not np.allclose(d, d[0], rtol=0, atol=1e-14 * max(1.0, abs(d[0]))):
            return None
        return complex(d[0])

    def apply(self, v):
        """Matrix-vector product with a dense complex vector (or matrix)."""
        return self.to_float().data @ np.asarray(v, dtype=np.complex128)

    def __repr__(self):
        return f"OperatorMatrix(dim={self.dim}, field={self.field}, nnz={self.nnz})"


def linear_combination(terms, n, field):
    """Sum of ``coeff * op`` over ``terms``; zero coefficients are skipped."""
    acc = OperatorMatrix.zeros(n, field)
    for coeff, op in terms:
        if field == EXACT:
            if exact(coeff):
                acc = acc + op.scale(coeff)
        elif coeff != 0:
            acc = acc + op.to_float().scale(coeff)
    return acc


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def exact_nullspace(rows, ncols, domain=QQ):
    """Basis (list of dicts col->value) of the right kernel of a sparse matrix.

    ``rows`` is a dict ``{row: {col: value}}`` over ``domain``.
    """
    nrows = (max(rows) + 1) if rows else 1
    m = SDM({r: dict(v) for r, v in rows.items() if v}, (nrows, ncols), domain)
    basis, _ = m.nullspace()
    return [dict(row) for _, row in sorted(basis.items())]


def exact_rank(vectors, ncols, domain=QQ):
    """Rank of a list of sparse vectors (dicts col->value)."""
    if not vectors:
        return 0
    m = SDM({i: dict(v) for i, v in enumerate(vectors) if v}, (len(vectors), ncols), domain)
    _, pivots = m.rref()
    return len(pivots)
