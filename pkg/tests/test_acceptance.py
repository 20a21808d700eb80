"""Acceptance suite: one PASS/FAIL line per criterion at the stated tolerances."""

import random
import time
from fractions import Fraction
from functools import reduce

import numpy as np
from conftest import random_points, random_real_floats
from gaudin_lab.covering import (
    EigenlineTracker,
    cactus_loop_suite,
    compose,
    interval_loop,
    standard_loops,
    track_eigenlines,
)
from gaudin_lab.gaudin import (
    GaudinParams,
    filtration_degree,
    generator_set,
    inhomogeneous_hamiltonian,
    quadratic_hamiltonian,
)
from gaudin_lab.lie import TensorSpace, build_algebra, singular_subspace
from gaudin_lab.oper import (
    count_bijection,
    eigen_opers,
    frobenius_obstruction,
    oper_space_dimension,
    residue_check,
)
from gaudin_lab.operad import CollisionSchedule, all_trees, collision_limit_check, limit_algebra, limit_spectrum_suite
from gaudin_lab.operators import exact
from gaudin_lab.spectral import hermitian_check, is_cyclic, joint_diagonalize, simple_spectrum

REAL_CATALOG = ((1, 1), (1, 1, 1), (1, 1, 1, 1), (2, 2), (2, 1, 1))
CONFIGS_PER_WEIGHT = 5


def _real_catalog():
    rng = random.Random(2024)
    for weights in REAL_CATALOG:
        for _ in range(CONFIGS_PER_WEIGHT):
            yield weights, random_real_floats(rng, len(weights))


# ---------------------------------------------------------------------------
# numpy oracle, independent of the package's representation code


def _irrep(lam):
    """e, h, f on V_lam in the basis f^k v_0."""
    d = lam + 1
    e, h, f = np.zeros((d, d)), np.zeros((d, d)), np.zeros((d, d))
    for k in range(d):
        h[k, k] = lam - 2 * k
        if k + 1 < d:
            f[k + 1, k] = 1.0
            e[k, k + 1] = (k + 1) * (lam - k)
    return e, h, f


def _embed(weights, i, x):
    return reduce(np.kron, [x if k == i else np.eye(w + 1) for k, w in enumerate(weights)])


def _oracle_sector_counts(weights, z, seed=0):
    """Distinct joint eigenvalues of the H_i on each highest-weight sector, by brute force."""
    reps = [_irrep(w) for w in weights]
    N = len(weights)
    E = sum(_embed(weights, i, reps[i][0]) for i in range(N))
    Hd = sum(_embed(weights, i, reps[i][1]) for i in range(N))

    def omega(i, k):
        ei, hi, fi = reps[i]
        ek, hk, fk = reps[k]
        return (_embed(weights, i, ei) @ _embed(weights, k, fk)
                + _embed(weights, i, fi) @ _embed(weights, k, ek)
                + 0.5 * _embed(weights, i, hi) @ _embed(weights, k, hk))

    H = [sum(omega(i, k) / (z[i] - z[k]) for k in range(N) if k != i) for i in range(N)]
    rng = np.random.default_rng(seed)
    combo = sum(c * h for c, h in zip(rng.standard_normal(N), H))
    counts = {}
    for nu in range(sum(weights), -1, -2):
        diag = np.diag(Hd).copy()
        sel = np.where(np.isclose(diag, nu))[0]
        if sel.size == 0:
            continue
        # singular vectors of weight nu: kernel of E on the weight space
        _, s, vt = np.linalg.svd(E[:, sel])
        null = vt[np.sum(s > 1e-9):].T
        if null.shape[1] == 0:
            continue
        basis = np.zeros((Hd.shape[0], null.shape[1]))
        basis[sel] = null
        q, _ = np.linalg.qr(basis)
        vals = np.sort(np.linalg.eigvals(q.T @ combo @ q).real)
        counts[nu] = 1 + int(np.sum(np.diff(vals) > 1e-7))
    return counts


def _oracle_singular_dim(weights):
    reps = [_irrep(w) for w in weights]
    E = sum(_embed(weights, i, reps[i][0]) for i in range(len(weights)))
    return E.shape[1] - np.linalg.matrix_rank(E)


# ---------------------------------------------------------------------------


def test_criterion_01_exact_commutativity(acceptance, sl2, sl3):
    rng = random.Random(1)
    t0 = time.perf_counter()
    failures, checked = [], 0
    sl2_weights = ((1, 1), (3, 3), (1, 2, 3), (3, 3, 3), (1, 2, 3, 1), (2, 2, 2, 2))
    for weights in sl2_weights:
        T = TensorSpace(sl2, weights)
        for _ in range(5):
            z = random_points(rng, len(weights), gaussian=True)
            for mu in (None, "h", "h+e+f", "f"):
                gs = generator_set(GaudinParams(z, mu), T)
                assert gs.field == "exact"
                bad = gs.commutator_failures()
                checked += 1
                if bad:
                    failures.append((weights, mu, bad[:2]))
    for N in (2, 3):
        T = TensorSpace(sl3, (1,) * N)
        for _ in range(5):
            z = random_points(rng, N, gaussian=True)
            for mu in (None, "h", "h+e+f", "f"):
                gs = generator_set(GaudinParams(z, mu), T, full=False)
                bad = gs.commutator_failures()
                checked += 1
                if bad:
                    failures.append(((1,) * N, mu, bad[:2]))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed <= 60
    acceptance(1, ok, f"{checked} generator sets, {len(failures)} nonzero commutators, {elapsed:.1f}s")
    assert ok, failures


def test_criterion_02_affine_semiinvariance(acceptance, sl2):
    rng = random.Random(2)
    T = TensorSpace(sl2, (1, 2, 1))
    bad = 0
    for mu in (None, "h", "f", "h+e+f"):
        p = GaudinParams(random_points(rng, 3), mu)
        for _ in range(3):
            a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
            b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            moved = tuple(a * x + b for x in p.z)
            for i in range(1, 4):
                bad += quadratic_hamiltonian(i, GaudinParams(moved), T) != \
                    quadratic_hamiltonian(i, p, T).scale(exact(1 / a))
                # twisted version: the twist is divided by a along with the points
                lhs = inhomogeneous_hamiltonian(i, GaudinParams(moved, mu).scaled_mu(1 / a), T)
                bad += lhs != inhomogeneous_hamiltonian(i, p, T).scale(exact(1 / a))
                bad += inhomogeneous_hamiltonian(i, p.affine(a, b), T) != lhs
    acceptance(2, bad == 0, f"{bad} mismatches over 4 twists x 3 (a, b) x 3 points, exact")
    assert bad == 0


def test_criterion_03_cyclicity(acceptance, sl2):
    t0 = time.perf_counter()
    bad = []
    for weights, z in _real_catalog():
        T = TensorSpace(sl2, weights)
        gs = generator_set(GaudinParams(z), T, restrict_to=singular_subspace(T))
        rep = is_cyclic(gs.dense(), trials=20, rng_seed=0)
        want = _oracle_singular_dim(weights)
        if not (rep.verdict and rep.max_dim == want == rep.target_dim and rep.attaining >= 18):
            bad.append((weights, z, rep))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed <= 120
    acceptance(3, ok, f"{len(REAL_CATALOG) * CONFIGS_PER_WEIGHT} configurations, {len(bad)} non-cyclic, {elapsed:.1f}s")
    assert ok, bad


def test_criterion_04_simple_spectrum(acceptance, sl2):
    worst_gap, worst_herm, bad = np.inf, 0.0, []
    for weights, z in _real_catalog():
        T = TensorSpace(sl2, weights)
        p = GaudinParams(z)
        ambient = generator_set(p, T)
        worst_herm = max([worst_herm] + [hermitian_check(op, T.gram) for op in ambient.ops])
        gs = generator_set(p, T, restrict_to=singular_subspace(T))
        verdict = simple_spectrum(joint_diagonalize(gs.ops, gs.labels), gap_tol=1e-8)
        worst_gap = min(worst_gap, verdict.min_gap)
        if not verdict.simple:
            bad.append((weights, z))
    ok = not bad and worst_gap >= 1e-8 and worst_herm <= 1e-12
    acceptance(4, ok, f"min gap {worst_gap:.3g}, max Hermitian residual {worst_herm:.2g}, {len(bad)} degenerate")
    assert ok, bad


def test_criterion_05_eigenvalues_give_monodromy_free_opers(acceptance, sl2):
    worst, count, bad = 0.0, 0, []
    for weights, z in _real_catalog():
        T = TensorSpace(sl2, weights)
        for nu, entries in eigen_opers(GaudinParams(z), T, weights).items():
            for _, op, _ in entries:
                count += 1
                obs = max(abs(frobenius_obstruction(op, i)) for i in range(1, len(weights) + 1))
                worst = max(worst, obs)
                if not residue_check(op) or obs > 1e-10:
                    bad.append((weights, z, nu, obs))
    ok = not bad and count > 0
    acceptance(5, ok, f"{count} eigen-opers, max obstruction {worst:.2g}, {len(bad)} failing")
    assert ok, bad


def test_criterion_06_bijection_counts(acceptance):
    rng = random.Random(6)
    lines, ok = [], True
    for weights, total in (((1, 1), 2), ((1, 1, 1, 1), 6), ((2, 2), 3)):
        for k in range(3):
            z = random_real_floats(rng, len(weights))
            rep = count_bijection(GaudinParams(z, weights=weights), seed=k)
            oracle = _oracle_sector_counts(weights, z, seed=k)
            bethe = {nu: s["bethe"] for nu, s in rep.sectors.items()}
            eig = {nu: s["eigenvalues"] for nu, s in rep.sectors.items()}
            ok &= (rep.verdict and not rep.incomplete and bethe == oracle == eig
                   and rep.totals == {"eigenvalues": total, "bethe": total})
        lines.append(f"{weights}: {rep.totals['bethe']}/{total}")
    acceptance(6, ok, "Bethe totals per weight vs oracle " + ", ".join(lines))
    assert ok


def test_criterion_07_oper_space_dimension(acceptance, sl2):
    bad = []
    for N in range(2, 7):
        reg = oper_space_dimension(sl2, N)
        irr = oper_space_dimension(sl2, N, irregular=True)
        if not (int(reg) == 2 * (N - 1) + 1 == reg.independent and int(irr) == 2 * N == irr.independent):
            bad.append(N)
    acceptance(7, not bad, f"N = 2..6 regular 2N-1, irregular 2N, independent count agrees; failing N: {bad}")
    assert not bad


def test_criterion_08_inhomogeneous_cyclicity(acceptance, sl2):
    rng = random.Random(8)
    bad, worst = [], np.inf
    for weights in ((1, 1), (1, 1, 1)):
        for _ in range(3):
            z = random_real_floats(rng, len(weights))
            T = TensorSpace(sl2, weights)
            gs = generator_set(GaudinParams(z, "h"), T)
            ops = gs.dense()
            cyc = is_cyclic(ops, trials=20, rng_seed=1, tol=1e-10)
            verdict = simple_spectrum(joint_diagonalize(ops, gs.labels, gram=T.gram), gap_tol=1e-8)
            worst = min(worst, verdict.min_gap)
            if not (cyc.verdict and cyc.max_dim == T.dim and verdict.simple):
                bad.append((weights, z))
    ok = not bad and worst >= 1e-8
    acceptance(8, ok, f"mu = h on full tensor space, min gap {worst:.3g}, {len(bad)} failing")
    assert ok, bad


def test_criterion_09_degeneration(acceptance, sl2):
    rng = random.Random(9)
    T = TensorSpace(sl2, (1, 2, 1))
    p = GaudinParams(random_points(rng, 3), "f")
    f = sl2.element("f")
    exact_ok = True
    for s in (Fraction(1, 10), Fraction(1, 1000)):
        ps = p.scaled_mu(s)
        for i in range(1, 4):
            d = (inhomogeneous_hamiltonian(i, ps, T) - quadratic_hamiltonian(i, ps, T)).scale(exact(1 / s))
            exact_ok &= d == T.embed(f, i)
            lo, hi, lead = filtration_degree(inhomogeneous_hamiltonian(i, p, T), T)
            exact_ok &= (lo, hi) == (-1, 0) and lead == quadratic_hamiltonian(i, p, T)
    rep = collision_limit_check((1, 1, 1), CollisionSchedule((0, 0, 1), (0, 1, 0)), s=Fraction(1, 10000))
    conv_ok = rep.richardson <= 1e-6 and rep.ratio <= 0.6 and rep.verdict
    ok = exact_ok and conv_ok
    acceptance(9, ok, f"exact degeneration {exact_ok}; s=1e-4 extrapolated deviation {rep.richardson:.2g}, "
                      f"raw {rep.deviation:.2g}, ratio {rep.ratio:.3f}")
    assert ok


def test_criterion_10_limit_algebras(acceptance, sl2):
    bad, worst, count = [], np.inf, 0
    for N in (3, 4):
        T = TensorSpace(sl2, (1,) * N)
        for tree in all_trees(N):
            count += 1
            la = limit_algebra(tree, T)
            exact_comm = la.generators.field == "exact" and la.generators.commutator_failures() == []
            rep = limit_spectrum_suite(tree, (1,) * N)
            worst = min(worst, rep.spectrum.min_gap)
            if not (exact_comm and rep.passes and rep.cyclicity.max_dim == rep.dim):
                bad.append(tree.to_dict())
    ok = not bad and worst >= 1e-8
    acceptance(10, ok, f"{count} boundary trees, min gap {worst:.3g}, {len(bad)} failing")
    assert ok, bad


def test_criterion_11_covering_monodromy(acceptance):
    t0 = time.perf_counter()
    problems = []
    for N in (3, 4):
        W = (1,) * N
        ident = None
        coarse = cactus_loop_suite(N, W)
        fine = cactus_loop_suite(N, W, max_step=0.05, initial_step=0.025)
        for a, b in zip(coarse, fine):
            if a.permutation != b.permutation:
                problems.append(("halving", N, a.name))
        tracker = EigenlineTracker(W)
        perms = {r.name: r.permutation for r in coarse}
        ident = tuple(range(len(next(iter(perms.values())))))
        names = list(standard_loops(N))
        loops = {name: interval_loop(N, standard_loops(N)[name]) for name in names}
        for x, y in zip(names, names[1:] + names[:1]):
            got = track_eigenlines(loops[x] + loops[y], W, tracker=tracker).permutation
            if got != compose(perms[y], perms[x]):
                problems.append(("concatenation", N, x, y))
        for name in names:
            if compose(perms[name], perms[name]) == ident:
                doubled = track_eigenlines(loops[name] + loops[name], W, tracker=tracker)
                if not doubled.is_identity:
                    problems.append(("doubled", N, name))
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed <= 300
    acceptance(11, ok, f"N = 3, 4 catalog loops, {len(problems)} problems, {elapsed:.1f}s")
    assert ok, problems


def test_sl3_catalog_uses_defining_factors():
    """Guard for criterion 1: the sl3 factors are the 3-dimensional defining module."""
    assert TensorSpace(build_algebra("sl3"), (1, 1)).dim == 9
