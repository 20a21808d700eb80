"""sl2 Bethe ansatz equations and a deflated multistart Newton solver."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .operators import to_complex

__all__ = ["BetheConfig", "bethe_residual", "solve_bethe", "bethe_search", "BetheSearch"]


def _canonical(roots):
    w = np.asarray(roots, dtype=np.complex128).ravel()
    order = sorted(range(len(w)), key=lambda k: (round(w[k].real, 9), round(w[k].imag, 9)))
    return tuple(complex(w[k]) for k in order)


@dataclass(frozen=True)
class BetheConfig:
    """Unordered set of Bethe roots (stored in canonical order) for weights
    ``weights``; the associated singular sector is nu = sum(weights) - 2m."""

    roots: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "roots", _canonical(self.roots))
        object.__setattr__(self, "weights", tuple(int(x) for x in self.weights))
        w = self.roots
        for j in range(len(w)):
            for k in range(j):
                if abs(w[j] - w[k]) == 0:
                    raise ValueError("Bethe roots must be pairwise distinct")

    @property
    def m(self):
        return len(self.roots)

    @property
    def nu(self):
        return sum(self.weights) - 2 * self.m

    @property
    def multiplicity_free(self):
        return True

    def array(self):
        return np.array(self.roots, dtype=np.complex128)


ACCEPT_NORM = 1e-8


def _points(params):
    return np.array([to_complex(p) for p in params.z], dtype=np.complex128)


def bethe_residual(config, params):
    """residual_j = sum_i lambda_i/(w_j - z_i) - sum_{k != j} 2/(w_j - w_k)."""
    z = _points(params)
    if config.m == 0:
        return np.zeros(0, dtype=np.complex128)
    w = config.array()
    if np.min(np.abs(w[:, None] - z[None, :])) == 0:
        raise ValueError("a Bethe root coincides with a marked point")
    lam = np.asarray(config.weights, dtype=np.float64)
    F, _ = kernels.bethe_system(w, z, lam)
    return np.asarray(F)


@dataclass
class BetheSearch:
    solutions: list
    starts: int
    converged: int
    seed: int


def _starting_point(rng, zr, m, spread, kind):
    """Random initial roots: real (kind 0), independently perturbed (kind 1)
    or containing conjugate pairs x +- iy (kind 2)."""
    # choose intervals between consecutive real parts, including both ends
    edges = np.concatenate(([zr[0] - spread], zr, [zr[-1] + spread]))
    k = rng.integers(0, len(edges) - 1, size=m)
    t = rng.uniform(0.05, 0.95, size=m)
    w = (edges[k] + t * (edges[k + 1] - edges[k])).astype(np.complex128)
    if kind == 1:
        w = w + 1j * rng.normal(0.0, 0.3 * spread, size=m)
    elif kind == 2 and m > 1:
        pairs = int(rng.integers(1, m // 2 + 1))
        y = np.abs(rng.normal(0.0, 0.5 * spread, size=pairs)) * rng.uniform(0.05, 1.0, size=pairs)
        for p in range(pairs):
            w[2 * p + 1] = w[2 * p]
            w[2 * p] += 1j * y[p]
            w[2 * p + 1] -= 1j * y[p]
    return w


def _run(w0, z, lam, found, maxiter, wmax, weighted):
    """One Newton run plus an undeflated polish; ``None`` unless it lands on
    an admissible candidate (distinct roots, away from the marked points)."""
    m = w0.shape[0]
    empty = np.zeros((0, m + 1), dtype=np.complex128)
    try:
        # rounding near close root pairs can stall the line search just short
        # of ftol; such endpoints are kept and judged by the raw residual
        w, status, _, fn = kernels.newton(w0, z, lam, found, maxiter, 1e-13, wmax, weighted)
        if status != 1 and fn > ACCEPT_NORM:
            return None
        w, _, _, _ = kernels.newton(w, z, lam, empty, 30, 1e-14, wmax, False)
    except (np.linalg.LinAlgError, ZeroDivisionError):
        return None
    w = np.asarray(w)
    if not np.all(np.isfinite(w)):
        return None
    if np.min(np.abs(w[:, None] - z[None, :])) < 1e-9:
        return None
    if m > 1 and np.min(np.abs(w[:, None] - w[None, :]) + np.eye(m)) < 1e-7:
        return None
    return w


def bethe_search(params, m, weights=None, starts=200, seed=0, dedup_tol=1e-7, residual_tol=1e-10,
                expected=None, maxiter=100):
    """Find Bethe solutions with m roots by deflated damped Newton multistart.

    Starts cycle through real points on the segments between consecutive
    marked points, complex perturbations of those, and sets with conjugate
    pairs.  Newton alternates between the raw equations and the equations
    multiplied by prod_i (w_j - z_i), whose spurious attractors differ.
    Solutions are deduplicated on their monic root polynomials (permutation
    invariant).  With ``expected`` the
    search stops once that many distinct solutions are known.
    """
    weights = tuple(weights if weights is not None else params.weights)
    if sum(weights) < 2 * m or m < 0:
        raise ValueError(f"m={m} exceeds half the total weight {sum(weights)}")
    if m == 0:
        return BetheSearch([BetheConfig((), weights)], 0, 0, seed)
    z_raw = _points(params)
    lam = np.asarray(weights, dtype=np.float64)
    active = lam > 0
    ref = z_raw[active] if active.any() else z_raw
    # the equations are affine covariant; work with points centred in the unit disc
    center = ref.mean()
    radius = max(float(np.abs(ref - center).max()), 1e-300) if len(ref) > 1 else 1.0
    z = (z_raw - center) / radius
    zr = np.sort(z[active].real) if active.any() else np.sort(z.real)
    spread = max(float(np.ptp(z.real)), float(np.ptp(z.imag)), 1e-3) / max(len(zr), 1)
    wmax = 1e4
    rng = np.random.default_rng(seed)
    found = np.zeros((0, m + 1), dtype=np.complex128)
    sols, converged = [], 0
    empty = np.zeros((0, m + 1), dtype=np.complex128)
    for s in range(starts):
        w0 = _starting_point(rng, zr, m, spread, kind=s % 3)
        w0 = w0 + 1j * 1e-3 * spread * rng.standard_normal(m)
        weighted = bool((s // 3) % 2)
        # plain Newton first; deflation only to steer a start that lands on a
        # known solution elsewhere (deflating every run distorts the merit
        # landscape and costs far more starts than it saves)
        for deflate in (False, True):
            if deflate and not found.shape[0]:
                break
            w = _run(w0, z, lam, found if deflate else empty, maxiter, wmax, weighted)
            if w is None:
                continue
            coeffs = kernels.poly_coeffs(w)
            scale = max(1.0, float(np.abs(coeffs).max()))
            if found.shape[0] and np.min(np.abs(found - coeffs[None, :]).max(axis=1)) <= dedup_tol * scale:
                converged += 1
                continue
            w_out = center + radius * w
            w_out = np.where(np.abs(w_out.imag) < 1e-13 * radius, w_out.real + 0j, w_out)
            try:
                cfg = BetheConfig(w_out, weights)
            except ValueError:
                continue
            if np.max(np.abs(bethe_residual(cfg, params))) > residual_tol:
                continue
            converged += 1
            found = np.vstack([found, coeffs[None, :]])
            sols.append(cfg)
            break
        if expected is not None and len(sols) >= expected:
            break
    sols.sort(key=lambda c: tuple((round(r.real, 9), round(r.imag, 9)) for r in c.roots))
    return BetheSearch(sols, starts, converged, seed)


def solve_bethe(params, m, **kwargs):
    """List of distinct Bethe solutions with m roots (see :func:`bethe_search`)."""
    return bethe_search(params, m, **kwargs).solutions
