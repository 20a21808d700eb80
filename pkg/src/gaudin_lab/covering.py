"""Eigenline continuation along real paths and monodromy permutations.

A path is a chain of segments in real configuration space.  ``Line``
segments move points linearly.  ``Cross`` segments pass a cluster of points
through a codimension-one boundary stratum: z_j = c + eps v_j for j in the
cluster, with eps running through 0 so the cluster re-emerges reversed.
Inside a collar |eps| <= collar the tracker uses the rescaled generators
(eps H_j in the cluster, the cluster sum and the outside H_k), which extend
analytically to eps = 0, where the limit algebra of the stratum is used.
``Jump`` segments re-coordinatize by a real affine map (same moduli point).

All generators act on V^sing in one fixed Gram-orthonormal basis, so
eigenvectors at different points are directly comparable.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import spectral
from .lie import TensorSpace, build_algebra, singular_subspace
from .operad import OperadTree, limit_algebra

__all__ = [
    "Line", "Cross", "Jump", "ParamPath", "PermutationResult", "TrackingError", "GapCollapseError",
    "AmbiguousMatchError", "EigenlineTracker", "track_eigenlines", "interval_loop",
    "standard_loops", "cactus_loop_suite", "compose",
]

OVERLAP_MIN = 0.9
CROSSOVER_MIN = 0.99


class TrackingError(RuntimeError):
    pass


class GapCollapseError(TrackingError):
    pass


class AmbiguousMatchError(TrackingError):
    pass


def _real(z):
    return tuple(float(Fraction(x)) if not isinstance(x, float) else x for x in z)


@dataclass(frozen=True)
class Line:
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", _real(self.a))
        object.__setattr__(self, "b", _real(self.b))

    def start(self):
        return self.a

    def end(self):
        return self.b

    def reversed(self):
        return Line(self.b, self.a)


@dataclass(frozen=True)
class Cross:
    """z_j = base_j + eps * v_j for j in ``cluster`` (v_j = 0 elsewhere), eps0 -> eps1."""

    base: tuple
    v: tuple
    eps0: float
    eps1: float
    cluster: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", _real(self.base))
        object.__setattr__(self, "v", _real(self.v))
        cl = tuple(sorted(int(j) for j in self.cluster))
        object.__setattr__(self, "cluster", cl)
        if len(cl) < 2 or len({self.base[j - 1] for j in cl}) != 1:
            raise ValueError("a crossing needs a cluster of at least two points with a common centre")
        if len({self.v[j - 1] for j in cl}) != len(cl):
            raise ValueError("cluster offsets must be distinct")
        if any(self.v[j - 1] for j in range(1, len(self.v) + 1) if j not in cl):
            raise ValueError("offsets outside the cluster must vanish")

    def at(self, eps):
        return tuple(b + eps * x for b, x in zip(self.base, self.v))

    def start(self):
        return self.at(self.eps0)

    def end(self):
        return self.at(self.eps1)

    def reversed(self):
        return Cross(self.base, self.v, self.eps1, self.eps0, self.cluster)


@dataclass(frozen=True)
class Jump:
    """Re-coordinatization z -> alpha z + beta (alpha real, nonzero)."""

    a: tuple
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "a", _real(self.a))
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")

    def start(self):
        return self.a

    def end(self):
        return tuple(self.alpha * x + self.beta for x in self.a)

    def reversed(self):
        return Jump(self.end(), 1 / self.alpha, -self.beta / self.alpha)


def _distinct(z, tol=1e-12):
    s = sorted(z)
    return all(b - a > tol for a, b in zip(s, s[1:]))


@dataclass(frozen=True)
class ParamPath:
    """Piecewise path s -> z(s) with step control."""

    segments: tuple
    initial_step: float = 0.05
    max_step: float = 0.1
    min_step: float = 1e-6
    gap_floor: float = 1e-8
    collar: float = 0.05

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("empty path")
        for s1, s2 in zip(segs, segs[1:]):
            if not np.allclose(s1.end(), s2.start(), atol=1e-12):
                raise ValueError(f"segments do not connect: {s1.end()} vs {s2.start()}")
        for s in segs:
            if isinstance(s, Line):
                for t in np.linspace(0, 1, 65):
                    if not _distinct([(1 - t) * x + t * y for x, y in zip(s.a, s.b)]):
                        raise ValueError("a line segment meets a diagonal")
        object.__setattr__(self, "segments", segs)

    @property
    def N(self):
        return len(self.segments[0].start())

    def start(self):
        return self.segments[0].start()

    def end(self):
        return self.segments[-1].end()

    def reversed(self):
        return ParamPath(tuple(s.reversed() for s in reversed(self.segments)), self.initial_step,
                         self.max_step, self.min_step, self.gap_floor, self.collar)

    def __add__(self, other):
        return ParamPath(self.segments + other.segments, self.initial_step, self.max_step, self.min_step,
                         self.gap_floor, self.collar)

    def with_steps(self, **kw):
        opts = dict(initial_step=self.initial_step, max_step=self.max_step, min_step=self.min_step,
                    gap_floor=self.gap_floor, collar=self.collar)
        opts.update(kw)
        return ParamPath(self.segments, **opts)

    def digest(self):
        h = hashlib.sha256()
        for s in self.segments:
            h.update(type(s).__name__.encode())
            for val in (s.start(), s.end()):
                h.update(np.round(np.asarray(val, dtype=float), 12).tobytes())
        return h.hexdigest()[:16]


@dataclass
class PermutationResult:
    """``permutation[k]`` is the end index of the eigenline that started at k
    (indices in the canonical order of the joint spectrum)."""

    permutation: tuple
    min_gap: float
    steps: int
    path_hash: str
    min_overlap: float = 1.0
    crossover: float = 1.0
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def is_identity(self):
        return self.permutation == tuple(range(len(self.permutation)))

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("not a permutation")


def compose(p2, p1):
    """sigma2 o sigma1 (apply p1 first)."""
    return tuple(p2[k] for k in p1)


# ---------------------------------------------------------------------------
# tracker


class EigenlineTracker:
    """Gaudin generators on V^sing for a fixed tensor space."""

    def __init__(self, weights, algebra="sl2"):
        alg = build_algebra(algebra) if isinstance(algebra, str) else algebra
        self.T = T = TensorSpace(alg, weights)
        self.N = T.N
        sing = singular_subspace(T)
        self.q = spectral.orthonormal_basis(sing.array(), T.gram)
        self.dim = self.q.shape[1]
        self.omega = {}
        for j in range(1, self.N + 1):
            for k in range(j + 1, self.N + 1):
                m, res = spectral.restrict(T.omega(j, k).to_float(), self.q, T.gram)
                if res > 1e-10:
                    raise spectral.NotInvariantError((j, k), res)
                self.omega[(j, k)] = self.omega[(k, j)] = (m + m.conj().T) / 2
        m, _ = spectral.restrict(T.diagonal_casimir().to_float(), self.q, T.gram)
        self.dcas = (m + m.conj().T) / 2
        self._limit_cache = {}

    def interior(self, z):
        ops = []
        for j in range(1, self.N + 1):
            h = np.zeros((self.dim, self.dim), dtype=np.complex128)
            for k in range(1, self.N + 1):
                if k != j:
                    h = h + self.omega[(j, k)] / (z[j - 1] - z[k - 1])
            ops.append(h)
        return ops + [self.dcas]

    def rescaled(self, seg, eps):
        """eps H_j (j in cluster), the cluster sum and outside H_k; analytic at eps = 0."""
        z = seg.at(eps)
        M = seg.cluster
        ops = []
        block_sum = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for j in range(1, self.N + 1):
            h_in = np.zeros_like(block_sum)
            h_out = np.zeros_like(block_sum)
            for k in range(1, self.N + 1):
                if k == j:
                    continue
                if j in M and k in M:
                    h_in = h_in + self.omega[(j, k)] / (seg.v[j - 1] - seg.v[k - 1])
                else:
                    h_out = h_out + self.omega[(j, k)] / (z[j - 1] - z[k - 1])
            if j in M:
                ops.append(h_in + eps * h_out)
                block_sum = block_sum + h_out
            else:
                ops.append(h_out)
        return ops + [block_sum, self.dcas]

    def limit(self, seg):
        """Restricted limit-algebra generators at the crossing point."""
        key = (seg.base, seg.v, seg.cluster)
        hit = self._limit_cache.get(key)
        if hit is None:
            M = seg.cluster
            kids, pts = [], []
            centre = seg.base[M[0] - 1]
            inner = OperadTree(M, tuple(Fraction(seg.v[j - 1]).limit_denominator(10**12) for j in M))
            placed = False
            for j in sorted(range(1, self.N + 1), key=lambda k: seg.base[k - 1]):
                if j in M:
                    if not placed:
                        kids.append(inner)
                        pts.append(Fraction(centre).limit_denominator(10**12))
                        placed = True
                else:
                    kids.append(j)
                    pts.append(Fraction(seg.base[j - 1]).limit_denominator(10**12))
            tree = OperadTree(tuple(kids), tuple(pts)).validate()
            la = limit_algebra(tree, self.T)
            gs = la.generators.nonscalar()
            hit = []
            for op in gs.ops:
                m, res = spectral.restrict(op.to_float(), self.q, self.T.gram)
                if res > 1e-8:
                    raise spectral.NotInvariantError("limit", res)
                hit.append((m + m.conj().T) / 2)
            self._limit_cache[key] = hit
        return hit

    def lines(self, ops, floor):
        spec = spectral.joint_diagonalize(ops, gram=np.eye(self.dim), check=False)
        if any(m != 1 for m in spec.multiplicities):
            raise GapCollapseError(f"degenerate joint eigenspace (multiplicities {spec.multiplicities})")
        verdict = spectral.simple_spectrum(spec, gap_tol=floor, floor=floor)
        if verdict.min_gap < floor:
            raise GapCollapseError(f"joint spectrum gap {verdict.min_gap:.3e} below floor {floor:.1e}")
        v = np.hstack([s.basis for s in spec.spaces])
        v = v / np.linalg.norm(v, axis=0)
        return v, verdict.min_gap


def _match(v_old, v_new, threshold):
    ov = np.abs(v_old.conj().T @ v_new)
    target = ov.argmax(axis=1)
    if len(set(target.tolist())) != len(target):
        return None, float(ov.max(axis=1).min())
    worst = float(ov[np.arange(len(target)), target].min())
    if worst < threshold:
        return None, worst
    return target, worst


class _Walker:
    def __init__(self, tracker, path, threshold):
        self.tr = tracker
        self.path = path
        self.threshold = threshold
        self.current = None
        self.v = None
        self.steps = 0
        self.min_gap = np.inf
        self.min_overlap = 1.0
        self.crossover = 1.0

    def _lines(self, ops):
        v, gap = self.tr.lines(ops, self.path.gap_floor)
        self.min_gap = min(self.min_gap, gap)
        return v

    def _switch(self, v_new):
        """Same point, possibly another generator set: eigenlines must coincide."""
        if self.v is None:
            self.v = v_new
            self.current = list(range(v_new.shape[1]))
            return
        target, worst = _match(self.v, v_new, CROSSOVER_MIN)
        self.crossover = min(self.crossover, worst)
        if target is None:
            raise AmbiguousMatchError(f"crossover overlap {worst:.4f} < {CROSSOVER_MIN}")
        self.current = [int(target[c]) for c in self.current]
        self.v = v_new

    def _advance(self, ops_at, t0, t1):
        """Continue from parameter t0 to t1 with adaptive steps."""
        p = self.path
        s, h = 0.0, min(p.initial_step, p.max_step)
        while s < 1.0:
            s_new = min(s + h, 1.0)
            v_new = self._lines(ops_at(t0 + s_new * (t1 - t0)))
            target, worst = _match(self.v, v_new, self.threshold)
            if target is None:
                h /= 2
                if h < p.min_step:
                    raise AmbiguousMatchError(
                        f"no unambiguous matching at step {h:.2e} (worst overlap {worst:.4f})")
                continue
            self.min_overlap = min(self.min_overlap, worst)
            self.current = [int(target[c]) for c in self.current]
            self.v = v_new
            self.steps += 1
            s = s_new
            h = min(h * 1.5, p.max_step)

    def run(self):
        tr = self.tr
        for seg in self.path.segments:
            if isinstance(seg, Line):
                a, b = np.asarray(seg.a), np.asarray(seg.b)
                f = lambda t, a=a, b=b: tr.interior((1 - t) * a + t * b)
                self._switch(self._lines(f(0.0)))
                self._advance(f, 0.0, 1.0)
            elif isinstance(seg, Jump):
                self._switch(self._lines(tr.interior(seg.start())))
                self._switch(self._lines(tr.interior(seg.end())))
            else:
                self._cross(seg)
        return self

    def _cross(self, seg):
        tr, c = self.tr, self.path.collar
        e0, e1 = seg.eps0, seg.eps1
        # pieces split at the collar edges and at the stratum, in travel order
        marks = sorted({e0, e1} | {x for x in (c, -c, 0.0) if min(e0, e1) < x < max(e0, e1)},
                       reverse=e0 > e1)
        collar_ops = lambda e: tr.limit(seg) if e == 0.0 else tr.rescaled(seg, e)
        interior_ops = lambda e: tr.interior(seg.at(e))
        if len(marks) == 1:
            self._switch(self._lines(collar_ops(e0) if abs(e0) <= c else interior_ops(e0)))
        for a, b in zip(marks, marks[1:]):
            f = collar_ops if abs(a + b) / 2 <= c else interior_ops
            self._switch(self._lines(f(a)))
            self._advance(f, a, b)


def track_eigenlines(path, weights, tol=OVERLAP_MIN, algebra="sl2", tracker=None, name=""):
    """Continue the joint eigenlines on V^sing along ``path``.

    Returns the end-versus-start matching.  The start spectrum must be simple
    (gap at least ``path.gap_floor``); a collapse anywhere aborts.
    """
    tr = tracker or EigenlineTracker(weights, algebra)
    if tr.N != path.N:
        raise ValueError(f"path in R^{path.N} for {tr.N} factors")
    w = _Walker(tr, path, tol).run()
    return PermutationResult(tuple(w.current), float(w.min_gap), w.steps, path.digest(), w.min_overlap,
                             w.crossover, name)


# ---------------------------------------------------------------------------
# loop catalog


def interval_loop(N, intervals, eps=0.1, closed=True, **path_opts):
    """Closed path from the base configuration (0, 1, ..., N-1).

    Each interval [p, q] of positions is contracted to its centre, passed
    through the boundary stratum where it collides (reversing its order) and
    expanded back.  The composite reversal must be the identity or the full
    reversal, which is closed by the affine jump w -> (N-1) - w.  With
    ``closed=False`` the path simply ends after the last crossing.
    """
    base = tuple(float(x) for x in range(N))
    order = list(range(1, N + 1))  # order[pos] = label at position pos
    z = list(base)
    segs = []
    for p, q in intervals:
        if not (1 <= p < q <= N) or (p, q) == (1, N):
            raise ValueError(f"[{p}, {q}] is not a boundary interval for N={N}")
        labels = order[p - 1:q]
        c = (p - 1 + q - 1) / 2
        v = [0.0] * N
        for lab in labels:
            v[lab - 1] = z[lab - 1] - c
        cbase = [c if j + 1 in labels else z[j] for j in range(N)]
        near = tuple(cb + eps * x for cb, x in zip(cbase, v))
        segs.append(Line(tuple(z), near))
        segs.append(Cross(tuple(cbase), tuple(v), eps, -eps, tuple(labels)))
        far = tuple(cb - x for cb, x in zip(cbase, v))
        segs.append(Line(segs[-1].end(), far))
        z = list(far)
        order[p - 1:q] = labels[::-1]
    if not closed:
        pass
    elif order == list(range(N, 0, -1)):
        segs.append(Jump(tuple(z), -1.0, float(N - 1)))
    elif order != list(range(1, N + 1)):
        raise ValueError(f"intervals {intervals} do not close up (final order {order})")
    return ParamPath(tuple(segs), **path_opts)


def standard_loops(N):
    """Named interval sequences closing up at the base configuration."""
    if N == 3:
        return {
            "circle": [(2, 3), (1, 2), (2, 3)],
            "circle-reverse": [(2, 3), (1, 2), (2, 3)][::-1],
            "back-and-forth": [(2, 3), (2, 3)],
        }
    if N == 4:
        return {
            "left-triangle": [(1, 2), (2, 3), (1, 2), (1, 3)],
            "right-triangle": [(2, 3), (3, 4), (2, 3), (2, 4)],
            "full-reversal": [(1, 3), (2, 4), (1, 2), (3, 4)],
            "disjoint-square": [(1, 2), (3, 4), (1, 2), (3, 4)],
            "back-and-forth": [(2, 3), (2, 3)],
        }
    raise ValueError("standard loops are catalogued for N = 3, 4")


def cactus_loop_suite(N, weights=None, loop_catalog=None, threads=1, **path_opts):
    """Permutations for a catalog of loops (name -> interval sequence)."""
    weights = tuple(weights) if weights is not None else (1,) * N
    catalog = loop_catalog or standard_loops(N)
    tr = EigenlineTracker(weights)

    def one(item):
        name, intervals = item
        path = interval_loop(N, intervals, **path_opts)
        return track_eigenlines(path, weights, tracker=tr, name=name)

    items = list(catalog.items())
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, items))
    return [one(it) for it in items]
