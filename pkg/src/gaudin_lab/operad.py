"""Operad maps D, I and gamma, limit Gaudin algebras of boundary trees,
collision-limit checks and the limit spectrum suite.

Limit algebras are assembled symbolically: every vertex contributes the
quadratic Gaudin generators of its own point configuration as elements of
U(g)^{(x)k}, which are pushed to the leaves by factor substitution.  Only
the final elements are represented on a tensor space.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, QQ_I

from . import spectral
from .gaudin import GaudinParams, GeneratorSet, _coerce_point, _inv_diff
from .lie import TensorSpace, singular_subspace
from .operators import EXACT, FLOAT, OperatorMatrix, exact, exact_rank, to_complex
from .universal import UElement

__all__ = [
    "SetPartition", "OperadTree", "LimitAlgebra", "d_homomorphism", "i_homomorphism",
    "gamma_substitute", "gaudin_elements", "limit_algebra", "CollisionSchedule",
    "CollisionReport", "collision_limit_check", "flatness_dimensions", "LimitSuiteReport",
    "limit_spectrum_suite", "all_trees", "boundary_trees",
]


# ---------------------------------------------------------------------------
# partitions and trees


@dataclass(frozen=True)
class SetPartition:
    """Ordered blocks M_1..M_k of {1..N}; each block is stored increasing."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(j) for j in b)) for b in self.blocks)
        if not blocks or any(not b for b in blocks):
            raise ValueError("blocks must be nonempty")
        flat = [j for b in blocks for j in b]
        if len(set(flat)) != len(flat):
            raise ValueError("blocks overlap")
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError(f"blocks do not cover 1..{len(flat)}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def N(self):
        return sum(len(b) for b in self.blocks)

    @property
    def k(self):
        return len(self.blocks)

    def mapping(self):
        return {a: b for a, b in enumerate(self.blocks, start=1)}


def _point(x):
    return _coerce_point(x)


def _normalize(points):
    """Affine normal form of a configuration: first point 0, last point 1."""
    pts = [_point(p) for p in points]
    if any(isinstance(p, complex) for p in pts):
        pts = [to_complex(p) for p in pts]
    p0, p1 = pts[0], pts[-1]
    if p0 == p1:
        raise ValueError("first and last child points coincide")
    if isinstance(p0, complex):
        return tuple((p - p0) / (p1 - p0) for p in pts)
    inv = _inv_diff(p1, p0)
    return tuple(exact((p - p0) * inv) for p in pts)


@dataclass(frozen=True)
class OperadTree:
    """A vertex of a boundary tree: children (leaf labels or subtrees) and
    pairwise-distinct child coordinates, stored in affine normal form."""

    children: tuple
    points: tuple = None

    def __post_init__(self):
        kids = tuple(c if isinstance(c, OperadTree) else int(c) for c in self.children)
        if len(kids) < 2:
            raise ValueError("an internal vertex needs at least two children")
        pts = self.points
        if pts is None:
            k = len(kids)
            pts = tuple(Fraction(j, k - 1) for j in range(k))
        if len(pts) != len(kids):
            raise ValueError("one point per child is required")
        pts = _normalize(pts)
        if len(set(pts)) != len(pts):
            raise ValueError("child points must be pairwise distinct")
        object.__setattr__(self, "children", kids)
        object.__setattr__(self, "points", pts)

    # structure ---------------------------------------------------------------

    def leaves(self):
        out = []
        for c in self.children:
            out.extend(c.leaves() if isinstance(c, OperadTree) else [c])
        return out

    @property
    def N(self):
        return len(self.leaves())

    def validate(self):
        lv = self.leaves()
        if sorted(lv) != list(range(1, len(lv) + 1)):
            raise ValueError(f"leaf labels {lv} are not a bijection with 1..{len(lv)}")
        return self

    def child_blocks(self):
        return [tuple(sorted(c.leaves())) if isinstance(c, OperadTree) else (c,) for c in self.children]

    def vertices(self, path=()):
        """Yield (path, vertex) pairs, parents before children."""
        yield path, self
        for a, c in enumerate(self.children, start=1):
            if isinstance(c, OperadTree):
                yield from c.vertices(path + (a,))

    def depth(self):
        return 1 + max((c.depth() for c in self.children if isinstance(c, OperadTree)), default=0)

    @property
    def is_real(self):
        return all(_is_real(p) for _, v in self.vertices() for p in v.points)

    def relabeled(self, mapping):
        return OperadTree(tuple(c.relabeled(mapping) if isinstance(c, OperadTree) else mapping[c]
                                for c in self.children), self.points)

    def shape(self):
        """Unlabeled shape, e.g. ((2, 1), 1) for a nested caterpillar."""
        parts = []
        for c in self.children:
            parts.append(c.shape() if isinstance(c, OperadTree) else 1)
        if all(p == 1 for p in parts):
            return len(parts)
        return tuple(sorted(parts, key=lambda p: (isinstance(p, tuple), p if isinstance(p, int) else 0),
                            reverse=True))

    # (de)serialization ---------------------------------------------------------

    @classmethod
    def parse(cls, spec):
        """Build from nested lists (``[[1, 2], 3]``) or dicts with keys
        ``children`` and optional ``points``; leaves must be 1..N."""
        return cls._build(spec).validate()

    @classmethod
    def _build(cls, spec):
        if isinstance(spec, OperadTree):
            return spec
        if isinstance(spec, dict):
            kids = [c if isinstance(c, int) else cls._build(c) for c in spec["children"]]
            pts = spec.get("points")
            return cls(tuple(kids), tuple(pts) if pts is not None else None)
        return cls(tuple(c if isinstance(c, int) else cls._build(c) for c in spec))

    def to_dict(self):
        return {"children": [c.to_dict() if isinstance(c, OperadTree) else c for c in self.children],
                "points": [_fmt(p) for p in self.points]}


def _is_real(p):
    if isinstance(p, complex):
        return p.imag == 0
    return QQ.of_type(p) or not p.y


def _fmt(p):
    if isinstance(p, complex):
        return repr(p.real) if p.imag == 0 else repr(p)
    return str(p) if QQ.of_type(p) else f"{p.x}+{p.y}i"


# ---------------------------------------------------------------------------
# operad homomorphisms


def _as_partition(p):
    return p if isinstance(p, SetPartition) else SetPartition(tuple(p))


def d_homomorphism(partition, x_tuple, T):
    """D_{M_1..M_k}(x_1^(1) ... x_k^(k)) = prod_a sum_{j in M_a} x_a^(j).

    Entries of ``x_tuple`` are element specs or ``None`` (the unit).  A
    ``UElement`` on k factors is also accepted in place of the tuple.
    """
    part = _as_partition(partition)
    if part.N != T.N:
        raise ValueError(f"partition of 1..{part.N} on a {T.N}-fold product")
    if isinstance(x_tuple, UElement):
        elem = x_tuple
        if elem.n != part.k:
            raise ValueError(f"element on {elem.n} factors for {part.k} blocks")
    else:
        if len(x_tuple) != part.k:
            raise ValueError(f"{len(x_tuple)} entries for {part.k} blocks")
        elem = UElement.one(T.algebra, part.k)
        for a, x in enumerate(x_tuple, start=1):
            if x is not None:
                elem = elem @ UElement.letter(T.algebra, part.k, a, T.algebra.element(x))
    return elem.substitute(part.mapping(), T.N).represent(T)


def i_homomorphism(M, op, T):
    """I_M: place an operator on the factors M (increasing), identity elsewhere.

    ``op`` is a ``UElement`` on |M| factors or an ``OperatorMatrix`` on the
    tensor product of the factors in M.
    """
    M = tuple(int(j) for j in M)
    if not M or list(M) != sorted(set(M)) or M[0] < 1 or M[-1] > T.N:
        raise ValueError(f"M={M} must be a nonempty increasing subset of 1..{T.N}")
    if isinstance(op, UElement):
        if op.n != len(M):
            raise ValueError(f"element on {op.n} factors for |M|={len(M)}")
        return op.substitute({a: (j,) for a, j in enumerate(M, start=1)}, T.N).represent(T)
    sub_dims = [T.dims[j - 1] for j in M]
    sub_dim = int(np.prod(sub_dims))
    if op.dim != sub_dim:
        raise ValueError(f"operator of size {op.dim} on factors of total dimension {sub_dim}")
    rows = {}
    for r, c, v in op.entries():
        rows.setdefault(r, []).append((c, v))

    def sub_multi(flat):
        out = []
        for d in reversed(sub_dims):
            out.append(flat % d)
            flat //= d
        return out[::-1]

    cols_multi = {}
    entries = {}
    for f in range(T.dim):
        multi = list(T.multi_index(f))
        r = 0
        for j, d in zip(M, sub_dims):
            r = r * d + multi[j - 1]
        for c, v in rows.get(r, ()):
            cm = cols_multi.setdefault(c, sub_multi(c))
            g = list(multi)
            for j, x in zip(M, cm):
                g[j - 1] = x
            entries[(f, T.flat_index(g))] = v
    if op.field == EXACT:
        return OperatorMatrix.exact_from_dict(entries, T.dim)
    a = np.zeros((T.dim, T.dim), dtype=np.complex128)
    for (r, c), v in entries.items():
        a[r, c] = v
    return OperatorMatrix.from_array(a)


def _labeled(gens, prefix):
    out = []
    for k, g in enumerate(gens):
        if isinstance(g, tuple):
            out.append((f"{prefix}{g[0]}", g[1]))
        else:
            out.append((f"{prefix}{k}", g))
    return out


def _commuting_or_raise(ops, labels, field):
    gs = GeneratorSet(list(ops), list(labels), field)
    bad = gs.commutator_failures()
    if bad:
        raise spectral.CommutativityError(f"non-commuting substitution output: {bad[:3]}")
    return gs


def gamma_substitute(partition, outer_gens, inner_gens_per_block, T, check=True):
    """gamma: D(outer) together with I_{M_a}(inner_a) for every block.

    Generators are ``UElement`` objects (optionally ``(label, element)``
    pairs); outer ones live on k factors, inner ones on |M_a| factors.
    Blocks without inner generators take ``None`` or an empty list.  The
    union is checked for commutativity (exactly when all coefficients are).
    """
    part = _as_partition(partition)
    if len(inner_gens_per_block) != part.k:
        raise ValueError(f"{len(inner_gens_per_block)} inner families for {part.k} blocks")
    elems = _gamma_elements(part, _labeled(outer_gens, "outer:"),
                            [_labeled(g or [], f"block{a}:") for a, g in enumerate(inner_gens_per_block, start=1)],
                            T.N)
    exact_all = all(e.is_exact for _, e in elems)
    field = EXACT if exact_all else FLOAT
    ops = [e.represent(T, field) for _, e in elems]
    labels = [l for l, _ in elems]
    if check:
        return _commuting_or_raise(ops, labels, field)
    return GeneratorSet(ops, labels, field)


def _gamma_elements(part, outer, inner, n):
    out = [(l, e.substitute(part.mapping(), n)) for l, e in outer]
    for M, fam in zip(part.blocks, inner):
        sub = {a: (j,) for a, j in enumerate(M, start=1)}
        for l, e in fam:
            if e.n != len(M):
                raise ValueError(f"inner generator {l} on {e.n} factors for block {M}")
            out.append((l, e.substitute(sub, n)))
    return out


# ---------------------------------------------------------------------------
# vertex generators and limit algebras


def gaudin_elements(algebra, points):
    """Quadratic Gaudin generators of a configuration as elements of U(g)^{(x)k}:
    S[a,1] = 2 H_a, S[a,2] = C^(a) and the diagonal Casimir S[inf,0]."""
    k = len(points)
    pts = [_point(p) for p in points]
    if any(isinstance(p, complex) for p in pts):
        pts = [to_complex(p) for p in pts]
    om = {(a, b): UElement.omega(algebra, k, a, b) for a in range(1, k + 1) for b in range(1, k + 1)}
    out = []
    for a in range(1, k + 1):
        h = UElement(algebra, k)
        for b in range(1, k + 1):
            if b != a:
                h = h + om[(a, b)].scale(_inv_diff(pts[a - 1], pts[b - 1]))
        out.append((f"S[{a},1]", h.scale(2)))
        out.append((f"S[{a},2]", om[(a, a)]))
    dc = UElement(algebra, k)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            dc = dc + om[(a, b)]
    out.append(("S[inf,0]", dc))
    return out


@dataclass
class LimitAlgebra:
    """Limit Gaudin algebra of a boundary tree: operators with provenance.

    ``provenance[j]`` is the path of the tree vertex that contributed
    generator ``j`` (``()`` is the root); ``elements`` keeps the symbolic form.
    """

    tree: OperadTree
    generators: GeneratorSet
    provenance: list
    elements: list = field(repr=False)

    @property
    def labels(self):
        return self.generators.labels

    def operator_set(self):
        """Canonical set of distinct nonzero operators (for order-free comparison)."""
        keys = set()
        for op in self.generators.ops:
            if op.field == EXACT:
                ent = tuple(sorted((r, c, str(v)) for r, c, v in op.entries()))
            else:
                ent = tuple(sorted((r, c, complex(np.round(v, 12))) for r, c, v in op.entries()))
            if ent:
                keys.add(ent)
        return frozenset(keys)

    def restricted(self, T, subspace=None):
        """Float generator set restricted to ``subspace`` (default V^sing)."""
        sub = subspace if subspace is not None else singular_subspace(T)
        gs = self.generators.nonscalar()
        return spectral_restrict(gs, sub, T)


def spectral_restrict(gs, subspace, T):
    from .gaudin import _restrict_set
    return _restrict_set(gs, subspace, T)


def _vertex_prefix(path):
    return "v" + ("".join(f".{p}" for p in path) if path else "") + ":"


def _recursive_elements(tree, algebra, rng):
    """gamma(vertex generators; limit algebras of the child subtrees) for a
    tree whose leaves are exactly 1..n."""
    blocks = tree.child_blocks()
    n = sum(len(b) for b in blocks)
    part = SetPartition(tuple(blocks))
    outer = [(f"{_vertex_prefix(())}{l}", e) for l, e in gaudin_elements(algebra, tree.points)]
    children = list(enumerate(tree.children, start=1))
    if rng is not None:
        rng.shuffle(children)
    inner = [[] for _ in blocks]
    for a, c in children:
        if isinstance(c, OperadTree):
            local = c.relabeled({j: r for r, j in enumerate(sorted(c.leaves()), start=1)})
            inner[a - 1] = [(f"v.{a}{l[1:]}", e) for l, e in _recursive_elements(local, algebra, rng)]
    return _gamma_elements(part, outer, inner, n)


def _direct_elements(tree, algebra, rng):
    """Every vertex's generators substituted straight into the leaves."""
    N = tree.N
    verts = list(tree.vertices())
    if rng is not None:
        rng.shuffle(verts)
    out = []
    for path, v in verts:
        mapping = {a: b for a, b in enumerate(v.child_blocks(), start=1)}
        for l, e in gaudin_elements(algebra, v.points):
            out.append((f"{_vertex_prefix(path)}{l}", e.substitute(mapping, N)))
    return out


def limit_algebra(tree, T, method="recursive", seed=None, check=True):
    """Generators of the limit algebra attached to a boundary tree.

    ``method="recursive"`` nests gamma along the tree; ``"direct"`` pushes each
    vertex straight to the leaves.  ``seed`` shuffles the assembly order.
    Leaf Casimirs C^(j) are always included; the result is ordered by label.
    """
    tree = OperadTree.parse(tree).validate()
    if tree.N != T.N:
        raise ValueError(f"tree with {tree.N} leaves on a {T.N}-fold product")
    rng = random.Random(seed) if seed is not None else None
    if method == "recursive":
        elems = _recursive_elements(tree, T.algebra, rng)
    elif method == "direct":
        elems = _direct_elements(tree, T.algebra, rng)
    else:
        raise ValueError(f"unknown assembly method {method!r}")
    elems.sort(key=lambda le: le[0])
    exact_all = all(e.is_exact for _, e in elems)
    field = EXACT if exact_all else FLOAT
    ops = [e.represent(T, field) for _, e in elems]
    labels = [l for l, _ in elems]
    gs = _commuting_or_raise(ops, labels, field) if check else GeneratorSet(ops, labels, field, None, T.gram)
    gs.gram = T.gram
    prov = [_path_of(l) for l in labels]
    return LimitAlgebra(tree, gs, prov, elems)


def _path_of(label):
    head = label.split(":", 1)[0]
    return tuple(int(p) for p in head[1:].split(".") if p)


# ---------------------------------------------------------------------------
# collision limits


@dataclass(frozen=True)
class CollisionSchedule:
    """z_i(s) = base_i + s * velocity_i; equal base points form a cluster."""

    base: tuple
    velocity: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(exact(b) for b in self.base))
        object.__setattr__(self, "velocity", tuple(exact(v) for v in self.velocity))
        if len(self.base) != len(self.velocity):
            raise ValueError("base and velocity differ in length")
        for M in self.clusters():
            vs = [self.velocity[j - 1] for j in M]
            if len(set(vs)) != len(vs):
                raise ValueError(f"cluster {M} has repeated velocities")

    @property
    def N(self):
        return len(self.base)

    def clusters(self):
        groups = {}
        for j, b in enumerate(self.base, start=1):
            groups.setdefault(b, []).append(j)
        return [tuple(g) for g in groups.values()]

    def at(self, s, mu=None, weights=None):
        s = exact(s)
        return GaudinParams(tuple(b + s * v for b, v in zip(self.base, self.velocity)), mu, weights)

    def tree(self):
        kids, pts = [], []
        for M in self.clusters():
            if len(M) == 1:
                kids.append(M[0])
            else:
                kids.append(OperadTree(M, tuple(self.velocity[j - 1] for j in M)))
            pts.append(self.base[M[0] - 1])
        if len(kids) < 2:
            raise ValueError("the schedule collapses all points; no boundary stratum")
        return OperadTree(tuple(kids), tuple(pts)).validate()


@dataclass
class CollisionReport:
    s: object
    exponents: dict
    deviation: float           # raw max |X(s) - L|
    deviation_half: float      # raw max |X(s/2) - L|
    ratio: float
    richardson: float          # max |2 X(s/2) - X(s) - L|
    in_limit_algebra: bool
    flatness: list
    tol: float
    ratio_max: float

    @property
    def converged(self):
        return self.richardson <= self.tol and self.ratio <= self.ratio_max

    @property
    def flat(self):
        return len(set(self.flatness)) == 1

    @property
    def verdict(self):
        return self.converged and self.in_limit_algebra and self.flat


def _h(i, params, T):
    from .gaudin import quadratic_hamiltonian
    return quadratic_hamiltonian(i, params, T)


def _families(schedule, s, T):
    """Rescaled families X(s) keyed by label, with rescaling exponents."""
    params = schedule.at(s)
    H = {i: _h(i, params, T) for i in range(1, T.N + 1)}
    fams, expo = {}, {}
    s_ex = exact(s)
    for M in schedule.clusters():
        if len(M) > 1:
            for j in M:
                fams[f"s*H[{j}]"] = H[j].scale(s_ex)
                expo[f"s*H[{j}]"] = 1
            tot = H[M[0]]
            for j in M[1:]:
                tot = tot + H[j]
            key = "sum H[" + ",".join(map(str, M)) + "]"
            fams[key] = tot
            expo[key] = 0
        else:
            fams[f"H[{M[0]}]"] = H[M[0]]
            expo[f"H[{M[0]}]"] = 0
    return fams, expo


def _limits(schedule, T):
    """Exact limits of the rescaled families (an oracle independent of the tree)."""
    alg = T.algebra
    N = T.N
    clusters = schedule.clusters()
    om = lambda a, b: UElement.omega(alg, N, a, b)
    out = {}
    bases = {M: schedule.base[M[0] - 1] for M in clusters}
    for M in clusters:
        if len(M) > 1:
            for j in M:
                e = UElement(alg, N)
                for k in M:
                    if k != j:
                        e = e + om(j, k).scale(_inv_diff(schedule.velocity[j - 1], schedule.velocity[k - 1]))
                out[f"s*H[{j}]"] = e
        e = UElement(alg, N)
        for M2 in clusters:
            if M2 != M:
                c = _inv_diff(bases[M], bases[M2])
                for j in M:
                    for k in M2:
                        e = e + om(j, k).scale(c)
        key = "sum H[" + ",".join(map(str, M)) + "]" if len(M) > 1 else f"H[{M[0]}]"
        out[key] = e
    return {k: v.represent(T, EXACT) for k, v in out.items()}


def _vec(op):
    return {r * op.dim + c: v for r, c, v in op.entries()}


def _in_span(ops, target):
    n = target.dim ** 2
    vecs = [_vec(o) for o in ops if not o.is_zero()]
    dom = QQ_I if any(o.domain == QQ_I for o in ops + [target]) else QQ
    conv = lambda vs: [{k: dom.convert(v) for k, v in d.items()} for d in vs]
    return exact_rank(conv(vecs + [_vec(target)]), n, dom) == exact_rank(conv(vecs), n, dom)


def flatness_dimensions(schedule, T, s_values, tree=None):
    """Dimension of the span of generators of PBW degree <= 2 (with the unit)
    at each s in ``s_values`` and at the limit point, computed exactly from
    normal-ordered coefficients in U(g)^{(x)N}."""
    alg, N = T.algebra, T.N
    dims = []
    for s in s_values:
        z = schedule.at(s).z
        elems = [e for _, e in gaudin_elements(alg, z)]
        dims.append(_pbw_rank(elems + [UElement.one(alg, N)]))
    tree = tree or schedule.tree()
    lim = [e for _, e in _direct_elements(tree, alg, None)]
    dims.append(_pbw_rank(lim + [UElement.one(alg, N)]))
    return dims


def _pbw_rank(elems):
    vecs, index = [], {}
    for e in elems:
        d = {}
        for w, c in e.coefficients().items():
            d[index.setdefault(w, len(index))] = c
        vecs.append(d)
    dom = QQ_I if any(QQ_I.of_type(v) for d in vecs for v in d.values()) else QQ
    vecs = [{k: dom.convert(v) for k, v in d.items()} for d in vecs]
    return exact_rank(vecs, max(len(index), 1), dom)


def collision_limit_check(params, collision_schedule, tree=None, s=Fraction(1, 10000), tol=1e-6,
                          ratio_max=0.6, flat_s=(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5))):
    """Check that rescaled generators of A(z(s)) converge to the limit algebra.

    In-cluster H_j are rescaled by s (H is homogeneous of degree -1 under
    affine maps, so collapsing a cluster by s scales its internal part by
    1/s); cluster sums and outside H_k are left unscaled.  Convergence is
    judged by the Richardson combination 2X(s/2) - X(s), whose error is
    O(s^2), together with the first-order ratio dev(s/2)/dev(s).
    ``params`` supplies the weights (its points are ignored).
    """
    weights = params.weights if isinstance(params, GaudinParams) else tuple(params)
    if weights is None:
        raise ValueError("weights are required")
    sched = collision_schedule
    if sched.N < 3:
        raise ValueError("no boundary stratum for N < 3")
    derived = sched.tree()
    tree = OperadTree.parse(tree) if tree is not None else derived
    if sorted(map(tuple, tree.child_blocks())) != sorted(map(tuple, derived.child_blocks())):
        raise ValueError("tree does not match the collision schedule")
    from .lie import build_algebra
    alg = build_algebra("sl2")
    T = TensorSpace(alg, weights)
    s = exact(s)
    fams, expo = _families(sched, s, T)
    fams_half, _ = _families(sched, s / 2, T)
    lim = _limits(sched, T)
    dev = max((fams[k] - lim[k]).max_abs() for k in lim)
    dev_half = max((fams_half[k] - lim[k]).max_abs() for k in lim)
    rich = max((fams_half[k].scale(2) - fams[k] - lim[k]).max_abs() for k in lim)
    if not np.isfinite(dev) or dev > 1e3:
        raise ArithmeticError(f"rescaled generators diverge (deviation {dev:.3e}); check exponents")
    la = limit_algebra(tree, T)
    member = all(_in_span(la.generators.ops, L) for L in lim.values())
    flat = flatness_dimensions(sched, T, flat_s, tree)
    ratio = dev_half / dev if dev > 0 else 0.0
    return CollisionReport(s, expo, float(dev), float(dev_half), float(ratio), float(rich), member, flat,
                           tol, ratio_max)


# ---------------------------------------------------------------------------
# spectra of limit algebras


@dataclass
class LimitSuiteReport:
    tree: OperadTree
    weights: tuple
    dim: int
    commutative: bool
    cyclicity: spectral.CyclicityReport
    spectrum: spectral.SpectrumVerdict
    tuples: np.ndarray = field(repr=False)

    @property
    def passes(self):
        return self.commutative and self.cyclicity.verdict and self.spectrum.simple


def limit_spectrum_suite(tree, weights, algebra="sl2", trials=20, rng_seed=0, gap_tol=1e-8):
    """Cyclicity and simple spectrum of a limit algebra on V^sing."""
    from .lie import build_algebra
    tree = OperadTree.parse(tree).validate()
    if not tree.is_real:
        raise ValueError("the suite needs real stratum coordinates")
    alg = build_algebra(algebra) if isinstance(algebra, str) else algebra
    T = TensorSpace(alg, weights)
    try:
        la = limit_algebra(tree, T)
        commutative = True
    except spectral.CommutativityError:
        la = limit_algebra(tree, T, check=False)
        commutative = False
    sing = singular_subspace(T)
    gs = la.restricted(T, sing)
    ops = gs.dense()
    if not ops:
        ops = [np.eye(sing.dim)]
    cyc = spectral.is_cyclic(ops, trials=trials, rng_seed=rng_seed)
    spec = spectral.joint_diagonalize(ops, gs.labels or None)
    verdict = spectral.simple_spectrum(spec, gap_tol)
    return LimitSuiteReport(tree, tuple(weights), sing.dim, commutative, cyc, verdict, spec.tuples())


# ---------------------------------------------------------------------------
# catalogs


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _set_partitions(rest):
        for k in range(len(p)):
            yield p[:k] + [[first] + p[k]] + p[k + 1:]
        yield [[first]] + p


def _shapes(leaves):
    """All trees on ``leaves`` as nested tuples (no coordinates)."""
    if len(leaves) == 1:
        return [leaves[0]]
    out = []
    for p in _set_partitions(list(leaves)):
        if len(p) < 2:
            continue
        p = sorted(p)
        options = [_shapes(tuple(b)) for b in p]
        for combo in _product(options):
            out.append(tuple(combo))
    return out


def _product(lists):
    if not lists:
        yield []
        return
    for x in lists[0]:
        for rest in _product(lists[1:]):
            yield [x] + rest


def _with_points(shape, rng):
    if isinstance(shape, int):
        return shape
    k = len(shape)
    inner = sorted(rng.sample(range(1, 97), k - 2))
    pts = [Fraction(0)] + [Fraction(x, 97) for x in inner] + [Fraction(1)]
    return OperadTree(tuple(_with_points(c, rng) for c in shape), tuple(pts))


def all_trees(N, seed=0, include_interior=False):
    """Every labeled tree on 1..N with random real rational coordinates.

    The flat tree (one vertex with all N leaves) is an interior point and
    is returned only with ``include_interior``.
    """
    rng = random.Random(seed)
    trees = []
    for sh in _shapes(tuple(range(1, N + 1))):
        t = _with_points(sh, rng)
        if t.depth() == 1 and not include_interior:
            continue
        trees.append(t)
    return trees


boundary_trees = all_trees
