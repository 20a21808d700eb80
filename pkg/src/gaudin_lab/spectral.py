"""Joint spectra, cyclicity and Hermiticity for commuting operator families.

Everything here is floating point.  Operators may be given as
``OperatorMatrix`` or dense arrays.  A Gram matrix ``G`` defines the
Hermitian form <u, v> = u^H G v; self-adjointness means G A = A^H G.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg as sla

from .operators import OperatorMatrix

__all__ = [
    "NotInvariantError", "HermiticityError", "CommutativityError",
    "as_dense", "orthonormal_basis", "restrict", "hermitian_check",
    "algebra_closure", "CyclicityReport", "is_cyclic",
    "JointEigenspace", "JointSpectrum", "joint_diagonalize",
    "SpectrumVerdict", "simple_spectrum", "max_commutator",
]

RESIDUAL_TOL = 1e-10
GAP_TOL = 1e-8
GAP_FLOOR = 1e-12


class NotInvariantError(ValueError):
    def __init__(self, index, residual):
        super().__init__(f"generator {index} does not preserve the subspace (residual {residual:.3e})")
        self.index = index
        self.residual = residual


class HermiticityError(ValueError):
    pass


class CommutativityError(ValueError):
    pass


def as_dense(op):
    if isinstance(op, OperatorMatrix):
        return op.toarray()
    return np.asarray(op, dtype=np.complex128)


def _gram(gram, n):
    if gram is None:
        return np.eye(n)
    g = np.asarray(gram, dtype=np.complex128)
    if g.ndim == 1:
        g = np.diag(g)
    return g


def _check_pd(g):
    if not np.allclose(g, g.conj().T, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise ValueError("Gram matrix is not Hermitian")
    if np.linalg.eigvalsh(g).min() <= 0:
        raise ValueError("Gram matrix is not positive definite")


def orthonormal_basis(vectors, gram=None):
    """Columns spanning the same space, orthonormal for the Gram form."""
    x = np.asarray(vectors, dtype=np.complex128)
    if x.ndim == 1:
        x = x[:, None]
    g = _gram(gram, x.shape[0])
    m = x.conj().T @ g @ x
    m = (m + m.conj().T) / 2
    chol = np.linalg.cholesky(m)
    return sla.solve_triangular(chol, x.conj().T, lower=True).conj().T


def restrict(op, basis, gram=None):
    """Matrix of ``op`` on span(basis), for a Gram-orthonormal ``basis``.

    Returns ``(matrix, residual)`` where residual = ||A Q - Q M|| / (||A|| ||Q||)
    measures invariance of the subspace.  Entries of M below 1e-13 ||A|| are
    rounding noise and are set to zero.
    """
    a = as_dense(op)
    q = np.asarray(basis, dtype=np.complex128)
    g = _gram(gram, q.shape[0])
    aq = a @ q
    m = q.conj().T @ g @ aq
    na = np.linalg.norm(a, 2)
    m[np.abs(m) <= 1e-13 * na] = 0
    scale = na * np.linalg.norm(q, 2)
    res = np.linalg.norm(aq - q @ m) / scale if scale > 0 else 0.0
    return m, float(res)


def hermitian_check(op, gram=None):
    """Relative residual ||G A - A^H G|| / ||G A|| (zero iff self-adjoint)."""
    a = as_dense(op)
    g = _gram(gram, a.shape[0])
    _check_pd(g)
    ga = g @ a
    nrm = np.linalg.norm(ga)
    if nrm == 0:
        return 0.0
    return float(np.linalg.norm(ga - a.conj().T @ g) / nrm)


def max_commutator(ops):
    """Largest relative commutator ||[A,B]|| / (||A|| ||B||) over pairs."""
    dense = [as_dense(o) for o in ops]
    norms = [np.linalg.norm(a) for a in dense]
    floor = 1e-13 * max(norms, default=0.0)
    worst = 0.0
    for (a, na), (b, nb) in combinations(zip(dense, norms), 2):
        if na > floor and nb > floor:
            worst = max(worst, float(np.linalg.norm(a @ b - b @ a) / (na * nb)))
    return worst


# ---------------------------------------------------------------------------
# cyclicity


def algebra_closure(generators, seed_vector, tol=RESIDUAL_TOL, check=False):
    """Orthonormal basis of the smallest generator-stable subspace containing
    ``seed_vector`` (the span A.v for the unital algebra A they generate)."""
    ops = [as_dense(g) for g in generators]
    if check and max_commutator(ops) > tol:
        raise CommutativityError("generators do not commute")
    v = np.asarray(seed_vector, dtype=np.complex128).ravel()
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.zeros((v.size, 0), dtype=np.complex128)
    basis = [v / nv]
    frontier = [basis[0]]
    while frontier and len(basis) < v.size:
        nxt = []
        for w in frontier:
            for a in ops:
                u = a @ w
                nu = np.linalg.norm(u)
                if nu == 0:
                    continue
                q = np.array(basis).T
                for _ in range(2):
                    u = u - q @ (q.conj().T @ u)
                if np.linalg.norm(u) > tol * nu:
                    u = u / np.linalg.norm(u)
                    basis.append(u)
                    nxt.append(u)
                    if len(basis) == v.size:
                        break
        frontier = nxt
    return np.array(basis).T


@dataclass
class CyclicityReport:
    target_dim: int
    achieved: list
    verdict: bool
    trials: int
    rng_seed: int

    @property
    def max_dim(self):
        return max(self.achieved) if self.achieved else 0

    @property
    def attaining(self):
        """Number of trials reaching the maximum closure dimension."""
        return sum(1 for d in self.achieved if d == self.max_dim)


def is_cyclic(generators, module_subspace=None, trials=20, rng_seed=0, gram=None, tol=RESIDUAL_TOL):
    """Random-seed cyclicity test.

    Without ``module_subspace`` the generators act on the whole space.  With
    it (columns in ambient coordinates) each generator is restricted first;
    a non-invariant subspace raises ``NotInvariantError``.
    """
    ops = [as_dense(g) for g in generators]
    if module_subspace is not None:
        q = orthonormal_basis(module_subspace, gram)
        restricted = []
        for k, a in enumerate(ops):
            m, res = restrict(a, q, gram)
            if res > 1e-8:
                raise NotInvariantError(k, res)
            restricted.append(m)
        ops = restricted
        dim = q.shape[1]
    else:
        dim = ops[0].shape[0]
    rng = np.random.default_rng(rng_seed)
    achieved = []
    for _ in range(trials):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        achieved.append(algebra_closure(ops, v, tol).shape[1])
    return CyclicityReport(dim, achieved, any(d == dim for d in achieved), trials, rng_seed)


# ---------------------------------------------------------------------------
# joint diagonalization


@dataclass
class JointEigenspace:
    values: tuple
    basis: np.ndarray
    residual: float

    @property
    def multiplicity(self):
        return self.basis.shape[1]


@dataclass
class JointSpectrum:
    spaces: list
    labels: tuple
    dim: int
    gram: np.ndarray = field(repr=False, default=None)

    @property
    def multiplicities(self):
        return [s.multiplicity for s in self.spaces]

    @property
    def residuals(self):
        return [s.residual for s in self.spaces]

    def tuples(self):
        return np.array([s.values for s in self.spaces])

    def projector(self, k):
        """Gram-orthogonal projector onto the k-th joint eigenspace."""
        q = self.spaces[k].basis
        g = _gram(self.gram, self.dim)
        return q @ q.conj().T @ g

    def reconstruct(self, j):
        """sum over eigenspaces of chi(A_j) P_chi."""
        return sum(s.values[j] * self.projector(k) for k, s in enumerate(self.spaces))


def _clusters(vals, tol):
    groups = [[0]]
    for k in range(1, len(vals)):
        if vals[k] - vals[k - 1] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def joint_diagonalize(generators, labels=None, gram=None, tol=RESIDUAL_TOL, cluster_tol=GAP_FLOOR,
                      order=None, check=True):
    """Common eigenbasis of a commuting family of Gram-self-adjoint operators.

    Splits recursively: each block found so far is diagonalized for the next
    generator and refined along clusters of equal eigenvalues (relative
    ``cluster_tol``).  ``order`` permutes the splitting order only.
    """
    ops = [as_dense(g) for g in generators]
    n = ops[0].shape[0]
    labels = tuple(labels) if labels is not None else tuple(f"A{k}" for k in range(len(ops)))
    g = _gram(gram, n)
    _check_pd(g)
    if check:
        for k, a in enumerate(ops):
            r = hermitian_check(a, g)
            if r > tol:
                raise HermiticityError(f"generator {labels[k]} is not self-adjoint (residual {r:.3e})")
        if max_commutator(ops) > tol:
            raise CommutativityError("generators do not commute")
    chol = np.linalg.cholesky(g)  # G = L L^H
    # A' = L^H A L^{-H} is Hermitian when A is G-self-adjoint
    herm = []
    for a in ops:
        m = chol.conj().T @ sla.solve_triangular(chol, a.conj().T, lower=True).conj().T
        herm.append((m + m.conj().T) / 2)
    blocks = [np.eye(n, dtype=np.complex128)]
    for k in (order if order is not None else range(len(ops))):
        a = herm[k]
        scale = np.linalg.norm(a, 2)
        new = []
        for q in blocks:
            if q.shape[1] == 1 or scale == 0:
                new.append(q)
                continue
            m = q.conj().T @ a @ q
            w, v = np.linalg.eigh((m + m.conj().T) / 2)
            for grp in _clusters(w, cluster_tol * scale):
                new.append(q @ v[:, grp])
        blocks = new
    spaces = []
    for q in blocks:
        amb = sla.solve_triangular(chol.conj().T, q, lower=False)
        vals, worst = [], 0.0
        for a, ah in zip(ops, herm):
            mu = float(np.real(np.trace(q.conj().T @ ah @ q)) / q.shape[1])
            vals.append(mu)
            nrm = np.linalg.norm(a, 2)
            if nrm:
                worst = max(worst, float(np.linalg.norm(a @ amb - mu * amb) / (nrm * np.linalg.norm(amb, 2))))
        spaces.append(JointEigenspace(tuple(vals), amb, worst))
    spaces.sort(key=lambda s: tuple(np.round(s.values, 9)))
    return JointSpectrum(spaces, labels, n, g)


class SpectrumVerdict(tuple):
    """``(simple, min_gap)``; ``indeterminate`` flags gaps in (floor, gap_tol)."""

    def __new__(cls, simple, min_gap, indeterminate):
        obj = super().__new__(cls, (simple, min_gap))
        obj.indeterminate = indeterminate
        return obj

    @property
    def simple(self):
        return self[0]

    @property
    def min_gap(self):
        return self[1]

    def __repr__(self):
        return f"SpectrumVerdict(simple={self[0]}, min_gap={self[1]:.3e}, indeterminate={self.indeterminate})"


def simple_spectrum(spec, gap_tol=GAP_TOL, floor=GAP_FLOOR):
    """Is every joint eigenvalue tuple simple and separated by ``gap_tol``?

    The gap is the minimal infinity-norm distance between distinct tuples.
    Gaps in (floor, gap_tol) are reported as indeterminate, not as simple.
    """
    t = spec.tuples()
    if len(t) < 2:
        min_gap = float("inf")
    else:
        d = np.abs(t[:, None, :] - t[None, :, :]).max(axis=2)
        d[np.diag_indices(len(t))] = np.inf
        min_gap = float(d.min())
    mult_ok = all(m == 1 for m in spec.multiplicities)
    indeterminate = mult_ok and floor < min_gap < gap_tol
    return SpectrumVerdict(bool(mult_ok and min_gap >= gap_tol), min_gap, bool(indeterminate))
