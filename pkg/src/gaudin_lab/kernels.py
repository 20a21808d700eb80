"""Numeric inner loops.

Every kernel exists twice: a loop version compiled with numba (``*_loop``) and
a vectorised numpy version (``*_np``).  The public names at the bottom of the
module are bound to one or the other according to ``_accel.USE_NUMBA``; tests
call both explicitly and compare.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# tensor-factor embedding: index maps of 1 x .. x A x .. x 1


def _embed_indices_py(dims, pos, frow, fcol):
    total = 1
    for d in dims:
        total *= d
    stride = 1
    for k in range(pos + 1, dims.shape[0]):
        stride *= dims[k]
    d = dims[pos]
    outer = total // (d * stride)
    n = frow.shape[0] * outer * stride
    rows = np.empty(n, dtype=np.int64)
    cols = np.empty(n, dtype=np.int64)
    ent = np.empty(n, dtype=np.int64)
    t = 0
    for e in range(frow.shape[0]):
        for hi in range(outer):
            base = hi * d * stride
            r0 = base + frow[e] * stride
            c0 = base + fcol[e] * stride
            for lo in range(stride):
                rows[t] = r0 + lo
                cols[t] = c0 + lo
                ent[t] = e
                t += 1
    return rows, cols, ent


embed_indices_loop = njit(_embed_indices_py)


def embed_indices_np(dims, pos, frow, fcol):
    dims = np.asarray(dims, dtype=np.int64)
    d = int(dims[pos])
    stride = int(np.prod(dims[pos + 1:])) if pos + 1 < len(dims) else 1
    outer = int(np.prod(dims)) // (d * stride)
    nnz = len(frow)
    base = (np.arange(outer, dtype=np.int64) * d * stride)[None, :, None]
    lo = np.arange(stride, dtype=np.int64)[None, None, :]
    fr = np.asarray(frow, dtype=np.int64)[:, None, None]
    fc = np.asarray(fcol, dtype=np.int64)[:, None, None]
    rows = (base + fr * stride + lo).reshape(-1)
    cols = (base + fc * stride + lo).reshape(-1)
    ent = np.broadcast_to(np.arange(nnz, dtype=np.int64)[:, None, None], (nnz, outer, stride)).reshape(-1)
    return rows, cols, np.ascontiguousarray(ent)


# ---------------------------------------------------------------------------
# Bethe equations  R_j = sum_i lam_i/(w_j - z_i) - sum_{k != j} 2/(w_j - w_k)


def _bethe_system_py(w, z, lam):
    m = w.shape[0]
    F = np.zeros(m, dtype=np.complex128)
    J = np.zeros((m, m), dtype=np.complex128)
    for j in range(m):
        acc = 0j
        dacc = 0j
        for i in range(z.shape[0]):
            if lam[i] != 0.0:
                q = 1.0 / (w[j] - z[i])
                acc += lam[i] * q
                dacc -= lam[i] * q * q
        for k in range(m):
            if k != j:
                q = 1.0 / (w[j] - w[k])
                acc -= 2.0 * q
                dacc += 2.0 * q * q
                J[j, k] = -2.0 * q * q
        F[j] = acc
        J[j, j] = dacc
    return F, J


bethe_system_loop = njit(_bethe_system_py)


def bethe_system_np(w, z, lam):
    w = np.asarray(w, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    lam = np.asarray(lam, dtype=np.float64)
    m = w.shape[0]
    qz = 1.0 / (w[:, None] - z[None, :])
    dw = w[:, None] - w[None, :]
    off = ~np.eye(m, dtype=bool)
    qw = np.zeros((m, m), dtype=np.complex128)
    qw[off] = 1.0 / dw[off]
    F = qz @ lam - 2.0 * qw.sum(axis=1)
    J = -2.0 * qw * qw
    J[np.diag_indices(m)] = -(qz * qz) @ lam + 2.0 * (qw * qw).sum(axis=1)
    return F, J


# Newton works on G_j = P(w_j) R_j with P(x) = prod_{lam_i > 0} (x - z_i).
# G has the same finite zeros as R but grows at infinity and is nonzero at
# the marked points, so the merit function has no spurious minima there.


def _apply_weights_py(w, z, lam, F, J):
    m = w.shape[0]
    for j in range(m):
        p = 1.0 + 0j
        dlog = 0j
        for i in range(z.shape[0]):
            if lam[i] != 0.0:
                p *= w[j] - z[i]
                dlog += 1.0 / (w[j] - z[i])
        for k in range(m):
            J[j, k] = p * J[j, k]
        J[j, j] += p * dlog * F[j]
        F[j] = p * F[j]
    return F, J


_apply_weights_loop = njit(_apply_weights_py)


@njit
def _scaled_system_loop(w, z, lam):
    F, J = bethe_system_loop(w, z, lam)
    return _apply_weights_loop(w, z, lam, F, J)


def _scaled_system_np(w, z, lam):
    F, J = bethe_system_np(w, z, lam)
    act = z[np.asarray(lam) != 0.0]
    d = w[:, None] - act[None, :]
    p = np.prod(d, axis=1)
    dlog = (1.0 / d).sum(axis=1)
    J = p[:, None] * J
    J[np.diag_indices(w.shape[0])] += p * dlog * F
    return p * F, J


def _system_np(w, z, lam, weighted):
    return _scaled_system_np(w, z, lam) if weighted else bethe_system_np(w, z, lam)


@njit
def _system_loop(w, z, lam, weighted):
    if weighted:
        return _scaled_system_loop(w, z, lam)
    return bethe_system_loop(w, z, lam)


# ---------------------------------------------------------------------------
# deflated damped Newton for one start


def _poly_coeffs_py(w):
    # monic coefficients of prod (x - w_j), highest degree first
    m = w.shape[0]
    c = np.zeros(m + 1, dtype=np.complex128)
    c[0] = 1.0
    for j in range(m):
        for k in range(j + 1, 0, -1):
            c[k] = c[k] - w[j] * c[k - 1]
    return c


_poly_coeffs_loop = njit(_poly_coeffs_py)


def _coeff_jacobian(w, poly):
    # column j: d coeffs / d w_j = -(coeffs of prod_{k != j}(x - w_k)), shifted by one
    m = w.shape[0]
    E = np.zeros((m + 1, m), dtype=np.complex128)
    for j in range(m):
        rest = np.zeros(m, dtype=np.complex128)
        rest[0] = 1.0
        deg = 0
        for k in range(m):
            if k != j:
                deg += 1
                for t in range(deg, 0, -1):
                    rest[t] = rest[t] - w[k] * rest[t - 1]
        for t in range(m):
            E[t + 1, j] = -rest[t]
    return E


_coeff_jacobian_loop = njit(_coeff_jacobian)


def _deflation_np(w, found):
    # returns (M, g) with M = prod_k (1/d_k^2 + 1) and D(log M)[delta] = Re(g @ delta)
    m = w.shape[0]
    g = np.zeros(m, dtype=np.complex128)
    if found.shape[0] == 0:
        return 1.0, g
    e = np.poly(w).astype(np.complex128)
    E = _coeff_jacobian(w, e)
    diff = e[None, :] - found
    d2 = np.maximum(np.sum(np.abs(diff) ** 2, axis=1), 1e-300)
    Mk = 1.0 / d2 + 1.0
    rows = np.conj(diff) @ E
    g = ((-2.0 / (d2 * d2) / Mk)[:, None] * rows).sum(axis=0)
    return float(np.prod(Mk)), g


@njit
def _deflation_loop(w, found):
    K = found.shape[0]
    m = w.shape[0]
    g = np.zeros(m, dtype=np.complex128)
    M = 1.0
    if K == 0:
        return M, g
    e = _poly_coeffs_loop(w)
    E = _coeff_jacobian_loop(w, e)
    for k in range(K):
        d2 = 0.0
        for t in range(m + 1):
            dt = e[t] - found[k, t]
            d2 += dt.real * dt.real + dt.imag * dt.imag
        if d2 < 1e-300:
            d2 = 1e-300
        Mk = 1.0 / d2 + 1.0
        M *= Mk
        fac = -2.0 / (d2 * d2) / Mk
        for j in range(m):
            acc = 0j
            for t in range(m + 1):
                acc += np.conj(e[t] - found[k, t]) * E[t, j]
            g[j] += fac * acc
    return M, g


def _admissible(wn, z, lam, wmax):
    m = wn.shape[0]
    for j in range(m):
        if abs(wn[j]) > wmax:
            return False
        for i in range(z.shape[0]):
            if lam[i] != 0.0 and abs(wn[j] - z[i]) < 1e-14:
                return False
        for k in range(j):
            if abs(wn[j] - wn[k]) < 1e-14:
                return False
    return True


_admissible_loop = njit(_admissible)


def _newton_py(w0, z, lam, found, maxiter, ftol, wmax, weighted):
    w = w0.copy()
    F, J = _system_np(w, z, lam, weighted)
    M, g = _deflation_np(w, found)
    fn = np.sqrt(np.sum(np.abs(F) ** 2))
    it = 0
    status = 0
    while it < maxiter:
        it += 1
        if fn < ftol:
            break
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            status = -1
            break
        denom = 1.0 - (g @ delta).real
        if abs(denom) < 1e-12:
            denom = 1e-12
        step = delta / denom
        alpha = 1.0
        accepted = False
        for _ in range(30):
            wn = w + alpha * step
            if _admissible(wn, z, lam, wmax):
                Fn, Jn = _system_np(wn, z, lam, weighted)
                Mn, gn = _deflation_np(wn, found)
                fnn = np.sqrt(np.sum(np.abs(Fn) ** 2))
                if np.isfinite(fnn) and Mn * fnn < (1.0 - 1e-4 * alpha) * M * fn:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            status = -1
            break
        w = wn
        F, J, M, g, fn = Fn, Jn, Mn, gn, fnn
    if fn < ftol:
        status = 1
    return w, status, it, float(fn)


@njit
def _newton_loop(w0, z, lam, found, maxiter, ftol, wmax, weighted):
    w = w0.copy()
    m = w.shape[0]
    F, J = _system_loop(w, z, lam, weighted)
    M, g = _deflation_loop(w, found)
    fn = np.sqrt(np.sum(np.abs(F) ** 2))
    it = 0
    status = 0
    Fn, Jn, Mn, gn, fnn = F, J, M, g, fn
    wn = w
    while it < maxiter:
        it += 1
        if fn < ftol:
            break
        try:
            delta = np.linalg.solve(J, -F)
        except Exception:
            status = -1
            break
        gd = 0.0
        for j in range(m):
            gd += (g[j] * delta[j]).real
        denom = 1.0 - gd
        if abs(denom) < 1e-12:
            denom = 1e-12
        step = delta / denom
        alpha = 1.0
        accepted = False
        for _ in range(30):
            wn = w + alpha * step
            if _admissible_loop(wn, z, lam, wmax):
                Fn, Jn = _system_loop(wn, z, lam, weighted)
                Mn, gn = _deflation_loop(wn, found)
                fnn = np.sqrt(np.sum(np.abs(Fn) ** 2))
                if np.isfinite(fnn) and Mn * fnn < (1.0 - 1e-4 * alpha) * M * fn:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            status = -1
            break
        w = wn
        F, J, M, g, fn = Fn, Jn, Mn, gn, fnn
    if fn < ftol:
        status = 1
    return w, status, it, fn


def newton_np(w0, z, lam, found, maxiter=100, ftol=1e-13, wmax=1e6, weighted=True):
    """Deflated damped Newton from ``w0``; returns (w, status, iterations, |F|).

    ``status`` is 1 on convergence, -1 when the line search stalls and 0 when
    ``maxiter`` runs out.  ``found`` holds monic coefficient vectors of
    already-known solutions (one row each) that the deflation pushes away from.
    """
    return _newton_py(
        np.asarray(w0, dtype=np.complex128), np.asarray(z, dtype=np.complex128),
        np.asarray(lam, dtype=np.float64), np.asarray(found, dtype=np.complex128),
        maxiter, ftol, wmax, weighted,
    )


def newton_loop(w0, z, lam, found, maxiter=100, ftol=1e-13, wmax=1e6, weighted=True):
    w, status, it, fn = _newton_loop(
        np.asarray(w0, dtype=np.complex128), np.asarray(z, dtype=np.complex128),
        np.asarray(lam, dtype=np.float64), np.ascontiguousarray(found, dtype=np.complex128),
        maxiter, ftol, wmax, weighted,
    )
    return w, status, it, float(fn)


def poly_coeffs(w):
    return np.poly(np.asarray(w, dtype=np.complex128)).astype(np.complex128) if len(w) else np.ones(1, dtype=np.complex128)


# ---------------------------------------------------------------------------
# Frobenius recursion for psi'' = T psi at a regular singular point.
#   T(s) = a/s^2 + c/s + sum_k taylor[k] s^k,   psi = s^r sum_n g_n s^n
#   [(r+n)(r+n-1) - a] g_n = c g_{n-1} + sum_{k<=n-2} taylor[k] g_{n-2-k}


def _frobenius_py(r, a, c, taylor, order):
    g = np.zeros(order + 1, dtype=np.complex128)
    g[0] = 1.0
    pivots = 1.0 + 0j
    rhs = 0j
    for n in range(1, order + 1):
        rhs = c * g[n - 1]
        for k in range(n - 1):
            if k < taylor.shape[0]:
                rhs += taylor[k] * g[n - 2 - k]
        piv = (r + n) * (r + n - 1) - a
        if n == order:
            break
        g[n] = rhs / piv
        pivots *= piv
    return rhs, pivots, g


frobenius_loop = njit(_frobenius_py)


def frobenius_np(r, a, c, taylor, order):
    taylor = np.asarray(taylor, dtype=np.complex128)
    g = np.zeros(order + 1, dtype=np.complex128)
    g[0] = 1.0
    n = np.arange(1, order + 1)
    piv = (r + n) * (r + n - 1) - a
    pad = np.zeros(max(order, 1), dtype=np.complex128)
    pad[: min(len(taylor), len(pad))] = taylor[: len(pad)]
    rhs = 0j
    for k in range(1, order + 1):
        rhs = c * g[k - 1] + np.dot(pad[: k - 1], g[k - 2 :: -1][: k - 1]) if k >= 2 else c * g[k - 1]
        if k < order:
            g[k] = rhs / piv[k - 1]
    pivots = np.prod(piv[: order - 1]) if order > 1 else 1.0 + 0j
    return complex(rhs), complex(pivots), g


# ---------------------------------------------------------------------------

if USE_NUMBA:
    embed_indices = embed_indices_loop
    bethe_system = bethe_system_loop
    newton = newton_loop
    frobenius = frobenius_loop
else:
    embed_indices = embed_indices_np
    bethe_system = bethe_system_np
    newton = newton_np
    frobenius = frobenius_np
