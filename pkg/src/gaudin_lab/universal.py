"""Elements of U(g)^{(x)n} as linear combinations of words.

A word is a tuple of letters ``(factor, basis_index)`` read left to right;
factors are 1-based.  Coefficients are exact scalars (QQ / QQ_I) or complex
floats.  Substituting factors realizes the operad maps: a factor ``a`` is
replaced by the sum of the letters on a set of new factors.
"""

from fractions import Fraction
from itertools import product

from .operators import EXACT, FLOAT, OperatorMatrix, exact, is_exact_scalar

__all__ = ["UElement"]


def _coerce(c):
    if isinstance(c, complex) or isinstance(c, float):
        return complex(c)
    return exact(c)


def _is_zero(c):
    return c == 0


class UElement:
    __slots__ = ("algebra", "n", "terms")

    def __init__(self, algebra, n, terms=None):
        self.algebra = algebra
        self.n = n
        clean = {}
        for w, c in (terms or {}).items():
            for f, _ in w:
                if not 1 <= f <= n:
                    raise IndexError(f"factor {f} out of range 1..{n}")
            if not _is_zero(c):
                clean[tuple(w)] = c
        self.terms = clean

    # construction ------------------------------------------------------------

    @classmethod
    def one(cls, algebra, n, coeff=1):
        return cls(algebra, n, {(): _coerce(coeff)})

    @classmethod
    def letter(cls, algebra, n, factor, coords):
        """The element x^(factor) for x given by basis coordinates."""
        terms = {}
        for idx, c in enumerate(coords):
            if c:
                terms[((factor, idx),)] = _coerce(Fraction(c))
        return cls(algebra, n, terms)

    @classmethod
    def omega(cls, algebra, n, a, b):
        """Omega^(ab) = sum_a x_a^(a) x^(a,(b)); for a == b the Casimir C^(a)."""
        terms = {}
        for p, q, c in algebra.casimir_pairs:
            w = ((a, p), (b, q))
            terms[w] = terms.get(w, exact(0)) + exact(c)
        return cls(algebra, n, terms)

    # arithmetic --------------------------------------------------------------

    def _same(self, other):
        if self.n != other.n or self.algebra is not other.algebra:
            raise ValueError("elements of different tensor powers")

    def __add__(self, other):
        self._same(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms[w] + c if w in terms else c
        return UElement(self.algebra, self.n, terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = _coerce(c)
        return UElement(self.algebra, self.n, {w: v * c for w, v in self.terms.items()})

    def __matmul__(self, other):
        self._same(other)
        terms = {}
        for (w1, c1), (w2, c2) in product(self.terms.items(), other.terms.items()):
            w = w1 + w2
            terms[w] = terms[w] + c1 * c2 if w in terms else c1 * c2
        return UElement(self.algebra, self.n, terms)

    def commutator(self, other):
        return self @ other - other @ self

    @property
    def is_exact(self):
        return all(is_exact_scalar(c) for c in self.terms.values())

    def degree(self):
        return max((len(w) for w in self.terms), default=0)

    # operad maps ---------------------------------------------------------------

    def substitute(self, mapping, n_new):
        """Replace each letter on factor ``a`` by the sum of the same letter on
        the factors ``mapping[a]`` of a tensor power ``n_new``."""
        terms = {}
        for w, c in self.terms.items():
            choices = [[(t, idx) for t in mapping[f]] for f, idx in w]
            for new in product(*choices):
                terms[new] = terms[new] + c if new in terms else c
        return UElement(self.algebra, n_new, terms)

    # normal ordering -------------------------------------------------------------

    def normal_ordered(self):
        """PBW normal form: letters sorted by (factor, basis index), using the
        structure constants to reorder within a factor."""
        out = {}
        for w, c in self.terms.items():
            for nw, k in _order(self.algebra, w).items():
                v = c * k
                out[nw] = out[nw] + v if nw in out else v
        return UElement(self.algebra, self.n, out)

    def coefficients(self):
        """Normal-ordered coefficients as a dict word -> scalar."""
        return dict(self.normal_ordered().terms)

    def __eq__(self, other):
        if not isinstance(other, UElement):
            return NotImplemented
        return (self - other).normal_ordered().terms == {}

    __hash__ = None

    # representation ---------------------------------------------------------------

    def represent(self, T, field=None):
        """Operator on the tensor space T (whose N must equal n)."""
        if T.N != self.n:
            raise ValueError(f"element of U(g)^{self.n} on a {T.N}-fold product")
        field = field or (EXACT if self.is_exact else FLOAT)
        acc = OperatorMatrix.zeros(T.dim, field)
        for w, c in self.terms.items():
            op = OperatorMatrix.identity(T.dim)
            for f, idx in w:
                op = op @ T.basis_op(idx, f)
            if field == FLOAT:
                op = op.to_float()
                acc = acc + op.scale(complex(c))
            else:
                acc = acc + op.scale(c)
        return acc

    def __repr__(self):
        return f"UElement(n={self.n}, terms={len(self.terms)}, degree={self.degree()})"


_ORDER_CACHE = {}


def _order(algebra, word):
    key = (id(algebra), word)
    hit = _ORDER_CACHE.get(key)
    if hit is not None:
        return hit
    # letters on different factors commute: a stable sort by factor is free
    w = tuple(sorted(word, key=lambda x: x[0]))
    for i in range(len(w) - 1):
        (f1, a), (f2, b) = w[i], w[i + 1]
        if f1 == f2 and a > b:
            # x_a x_b = x_b x_a + [x_a, x_b]
            res = {}
            swapped = w[:i] + (w[i + 1], w[i]) + w[i + 2:]
            for nw, k in _order(algebra, swapped).items():
                res[nw] = res.get(nw, exact(0)) + k
            for c, s in enumerate(algebra.structure[a][b]):
                if s:
                    shorter = w[:i] + ((f1, c),) + w[i + 2:]
                    for nw, k in _order(algebra, shorter).items():
                        res[nw] = res.get(nw, exact(0)) + exact(s) * k
            res = {k: v for k, v in res.items() if v != 0}
            _ORDER_CACHE[key] = res
            return res
    res = {w: exact(1)}
    _ORDER_CACHE[key] = res
    return res
