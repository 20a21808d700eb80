"""Command-line driver: ``gaudin-lab <command> --config FILE``.

Exit codes: 0 when every verdict passes, 2 when a mathematical verdict
fails, 1 for operational errors (bad config, pipeline failure).
"""

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__

SCHEMA_VERSION = 1
COMMANDS = ("commute-check", "spectrum", "cyclicity", "bethe", "oper-check", "bijection-count", "limit", "cover")
HERMITICITY_REFUSAL = "Hermiticity unavailable for non-real parameters"

__all__ = ["ExperimentConfig", "ConfigError", "Report", "run", "main", "COMMANDS", "SCHEMA_VERSION"]


class ConfigError(ValueError):
    """A configuration problem, located by field and (when known) line."""

    def __init__(self, message, field_name=None, line=None):
        where = []
        if field_name:
            where.append(f"field '{field_name}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field_name = field_name
        self.line = line


# ---------------------------------------------------------------------------
# configuration


def _point_text(x):
    if isinstance(x, bool):
        raise TypeError("booleans are not points")
    if isinstance(x, (int, float)):
        return repr(x)
    if isinstance(x, str):
        return x.strip()
    raise TypeError(f"unsupported point {x!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: algebra, weights, points (as text), twist and options.

    Points keep their textual form (``"1/3"``, ``"0.25"``, ``"1+2i"``), so
    the field is inferred downstream: any decimal selects the float pipeline.
    """

    weights: tuple
    points: tuple
    algebra: str = "sl2"
    form: str = "trace"
    mu: object = None
    seed: int = 0
    options: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "points", tuple(_point_text(p) for p in self.points))
        if isinstance(self.mu, list):
            object.__setattr__(self, "mu", tuple(self.mu))

    # -- (de)serialization ----------------------------------------------------

    def to_dict(self):
        d = {"algebra": self.algebra, "form": self.form, "weights": list(self.weights),
             "points": list(self.points), "mu": list(self.mu) if isinstance(self.mu, tuple) else self.mu,
             "seed": self.seed}
        if self.options:
            d["options"] = _plain(self.options)
        if self.outputs:
            d["outputs"] = _plain(self.outputs)
        return d

    def emit(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def parse(cls, text):
        try:
            node = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(f"not valid YAML ({getattr(exc, 'problem', exc)})",
                              line=mark.line + 1 if mark else None) from None
        if not isinstance(data, dict):
            raise ConfigError("top level must be a mapping", line=1)
        lines = {}
        if node is not None and isinstance(node, yaml.MappingNode):
            for k, _ in node.value:
                lines[k.value] = k.start_mark.line + 1
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError("unknown field", key, lines.get(key))
        for key in ("weights", "points"):
            if key not in data:
                raise ConfigError("missing required field", key)
            if not isinstance(data[key], list) or not data[key]:
                raise ConfigError("must be a nonempty list", key, lines.get(key))
        if len(data["weights"]) != len(data["points"]):
            raise ConfigError("weights and points differ in length", "points", lines.get("points"))
        for key in ("options", "outputs"):
            if key in data and not isinstance(data[key] or {}, dict):
                raise ConfigError("must be a mapping", key, lines.get(key))
        try:
            cfg = cls(weights=data["weights"], points=data["points"], algebra=str(data.get("algebra", "sl2")),
                      form=str(data.get("form", "trace")), mu=data.get("mu"), seed=int(data.get("seed", 0)),
                      options=dict(data.get("options") or {}), outputs=dict(data.get("outputs") or {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate(lines)
        return cfg

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def validate(self, lines=None):
        lines = lines or {}
        try:
            self.params()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "points", lines.get("points")) from None
        try:
            self.space()
        except ValueError as exc:
            raise ConfigError(str(exc), "weights", lines.get("weights")) from None
        return self

    def digest(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    # -- pipeline objects ------------------------------------------------------------

    def algebra_data(self):
        from .lie import build_algebra
        return build_algebra(self.algebra, form=self.form)

    def space(self):
        from .lie import TensorSpace
        return TensorSpace(self.algebra_data(), self.weights)

    def params(self):
        from .gaudin import GaudinParams
        return GaudinParams(self.points, self.mu, self.weights)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# reports


def _json_value(x, digits=12):
    """Deterministic JSON-ready form: floats rounded, complex as [re, im]."""
    if isinstance(x, dict):
        return {str(k): _json_value(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return _json_value(x.tolist(), digits)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not np.isfinite(v):
            return str(v)
        return float(f"{v:.{digits}g}") + 0.0
    if isinstance(x, (complex, np.complexfloating)):
        return [_json_value(x.real, digits), _json_value(x.imag, digits)]
    if x is None or isinstance(x, str):
        return x
    return str(x)


@dataclass
class Report:
    command: str
    config: ExperimentConfig
    seed: int
    results: dict
    verdict: bool
    tables: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self):
        results = _json_value(self.results)
        return {
            "schema_version": SCHEMA_VERSION,
            "library_version": __version__,
            "command": self.command,
            "config": self.config.to_dict(),
            "config_hash": self.config.digest(),
            "seed": self.seed,
            "verdict": bool(self.verdict),
            "results": results,
            "results_hash": hashlib.sha256(json.dumps(results, sort_keys=True).encode()).hexdigest(),
            "wall_time": round(self.wall_time, 3),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        _atomic_write(os.path.join(out_dir, "report.json"), self.to_json() + "\n")
        for name, (header, rows) in self.tables.items():
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_csv_cell(c) for c in r])
            _atomic_write(os.path.join(out_dir, f"{name}.csv"), buf.getvalue())


def _csv_cell(c):
    v = _json_value(c)
    return json.dumps(v) if isinstance(v, list) else v


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands


def _opt(cfg, name, default):
    return cfg.options.get(name, default)


def _cmd_commute_check(cfg, seed, tol):
    from .gaudin import generator_set
    T, params = cfg.space(), cfg.params()
    gs = generator_set(params, T, full=T.algebra.n == 2)
    bad = gs.commutator_failures(tol)
    nonscalar = [o for o in gs.ops if o.scalar_value() is None]
    exact = gs.field == "exact"
    msg = f"all commutators zero ({'exact' if exact else f'relative tol {tol:g}'})" if not bad else \
        f"{len(bad)} nonzero commutators"
    res = {"field": gs.field, "generators": gs.labels, "pairs": len(nonscalar) * (len(nonscalar) - 1) // 2,
           "failures": [list(p) for p in bad], "message": msg}
    return res, not bad, {}


def _sector_spaces(cfg, T):
    from .lie import singular_subspace
    sing = singular_subspace(T)
    sectors = _opt(cfg, "sectors", None)
    labels = sorted(sing.sectors(), reverse=True)
    if sectors is not None:
        labels = [l for l in labels if l in set(sectors)]
    return sing, labels


def _cmd_spectrum(cfg, seed, tol):
    from . import spectral
    from .gaudin import generator_set
    T, params = cfg.space(), cfg.params()
    hermitian_required = bool(_opt(cfg, "hermitian_required", True))
    if not params.is_real and hermitian_required:
        raise ConfigError(HERMITICITY_REFUSAL, "options.hermitian_required")
    sing, labels = _sector_spaces(cfg, T)
    gap_tol = float(_opt(cfg, "gap_tol", 1e-8))
    sectors, rows, verdict = {}, [], True
    for nu in labels:
        gs = generator_set(params, T, restrict_to=sing.restrict(nu), full=T.algebra.n == 2)
        if params.is_real:
            herm = max(spectral.hermitian_check(o, gs.gram) for o in gs.ops)
            spec = spectral.joint_diagonalize(gs.ops, gs.labels, gram=gs.gram)
            sv = spectral.simple_spectrum(spec, gap_tol)
            tuples = spec.tuples()
            ok = bool(sv.simple) and herm <= 1e-12
            info = {"dim": spec.dim, "hermitian_residual": herm, "simple": sv.simple, "min_gap": sv.min_gap,
                    "indeterminate": sv.indeterminate}
        else:
            tuples = _nonhermitian_tuples(gs.dense(), seed)
            ok = True
            info = {"dim": len(tuples), "hermitian_residual": None}
        verdict &= ok
        sectors[str(nu)] = dict(info, tuples=tuples)
        for k, t in enumerate(tuples):
            rows.append([str(nu), k] + list(t))
    header = ["sector", "index"] + (list(gs.labels) if labels else [])
    return {"sectors": sectors, "field": params.field}, verdict, {"eigenvalues": (header, rows)}


def _nonhermitian_tuples(ops, seed):
    """Eigenvalue tuples via a random combination (no Hermitian structure)."""
    rng = np.random.default_rng(seed)
    comb = sum(c * a for c, a in zip(rng.standard_normal(len(ops)), ops))
    _, vecs = np.linalg.eig(comb)
    out = []
    for k in range(vecs.shape[1]):
        v = vecs[:, k]
        out.append([complex(v.conj() @ a @ v / (v.conj() @ v)) for a in ops])
    out.sort(key=lambda t: [(round(x.real, 9), round(x.imag, 9)) for x in t])
    return out


def _cmd_cyclicity(cfg, seed, tol):
    from . import spectral
    from .gaudin import generator_set
    from .lie import singular_subspace
    T, params = cfg.space(), cfg.params()
    trials = int(_opt(cfg, "trials", 20))
    space = _opt(cfg, "space", "singular")
    full = T.algebra.n == 2
    if space == "full":
        gs = generator_set(params, T, full=full)
        rep = spectral.is_cyclic(gs.dense(), trials=trials, rng_seed=seed, tol=1e-10)
    elif space == "singular":
        gs = generator_set(params, T, restrict_to=singular_subspace(T), full=full)
        rep = spectral.is_cyclic(gs.dense(), trials=trials, rng_seed=seed)
    else:
        raise ConfigError("must be 'singular' or 'full'", "options.space")
    need = int(_opt(cfg, "min_attaining", 0))
    ok = rep.verdict and rep.attaining >= need
    return ({"space": space, "target_dim": rep.target_dim, "max_dim": rep.max_dim, "attaining": rep.attaining,
             "trials": rep.trials, "cyclic": rep.verdict}, ok, {})


def _cmd_bethe(cfg, seed, tol):
    from .bethe import bethe_residual, bethe_search
    params = cfg.params()
    if "m" not in cfg.options:
        raise ConfigError("the bethe command needs options.m", "options.m")
    m = int(cfg.options["m"])
    search = bethe_search(params, m, starts=int(_opt(cfg, "starts", 200)), seed=seed,
                          expected=_opt(cfg, "expected", None))
    rows, sols = [], []
    worst = 0.0
    for k, c in enumerate(search.solutions):
        r = float(np.max(np.abs(bethe_residual(c, params)))) if c.m else 0.0
        worst = max(worst, r)
        sols.append({"roots": list(c.roots), "residual": r})
        for j, w in enumerate(c.roots):
            rows.append([k, j, w.real, w.imag])
    expected = _opt(cfg, "expected", None)
    ok = worst <= max(tol, 1e-10) and (expected is None or len(sols) == int(expected))
    res = {"m": m, "solutions": sols, "count": len(sols), "starts": search.starts, "max_residual": worst}
    return res, ok, {"bethe_roots": (["solution", "root", "re", "im"], rows)}


def _cmd_oper_check(cfg, seed, tol):
    from .oper import eigen_opers, monodromy_report, residue_check
    T, params = cfg.space(), cfg.params()
    if T.algebra.n != 2:
        raise ConfigError("oper checks are implemented for sl2", "algebra")
    if not params.is_real:
        raise ConfigError(HERMITICITY_REFUSAL, "points")
    eig = eigen_opers(params, T, T.weights)
    otol = float(_opt(cfg, "obstruction_tol", 1e-10))
    sectors, ok = {}, True
    for nu, entries in eig.items():
        rows = []
        for _, op, mult in entries:
            rep = monodromy_report(op, otol)
            res_ok = residue_check(op)
            ok &= res_ok and rep.verdict
            rows.append({"residues": res_ok, "obstructions": [abs(x) for x in rep.obstructions],
                         "monodromy_free": rep.verdict, "multiplicity": mult, "c": list(op.c)})
        sectors[str(nu)] = rows
    return {"sectors": sectors, "tol": otol}, ok, {}


def _cmd_bijection_count(cfg, seed, tol):
    from .oper import count_bijection
    params = cfg.params()
    if not params.is_real:
        raise ConfigError(HERMITICITY_REFUSAL, "points")
    rep = count_bijection(params, starts=int(_opt(cfg, "starts", 200)), seed=seed,
                          max_starts=int(_opt(cfg, "max_starts", 3200)))
    rows = [[nu, s["m"], s["eigenvalues"], s["bethe"], s["matched"]] for nu, s in sorted(rep.sectors.items(), reverse=True)]
    table = {str(nu): f"{s['bethe']}/{s['eigenvalues']}" for nu, s in sorted(rep.sectors.items(), reverse=True)}
    res = {"sectors": {str(k): v for k, v in rep.sectors.items()}, "table": table, "totals": rep.totals,
           "incomplete": rep.incomplete}
    return res, rep.verdict, {"bijection": (["nu", "m", "eigenvalues", "bethe", "matched"], rows)}


def _cmd_limit(cfg, seed, tol):
    from .operad import CollisionSchedule, OperadTree, collision_limit_check, limit_spectrum_suite
    res, ok, tables = {}, True, {}
    if "tree" in cfg.options:
        try:
            tree = OperadTree.parse(cfg.options["tree"])
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc), "options.tree") from None
        rep = limit_spectrum_suite(tree, cfg.weights, algebra=cfg.algebra_data(),
                                   trials=int(_opt(cfg, "trials", 20)), rng_seed=seed)
        res["suite"] = {"tree": tree.to_dict(), "dim": rep.dim, "commutative": rep.commutative,
                        "cyclic": rep.cyclicity.verdict, "simple": rep.spectrum.simple,
                        "min_gap": rep.spectrum.min_gap}
        ok &= rep.passes
        tables["limit_eigenvalues"] = (["index", "values"], [[k, list(t)] for k, t in enumerate(rep.tuples)])
    if "collision" in cfg.options:
        col = cfg.options["collision"]
        try:
            sched = CollisionSchedule(tuple(col["base"]), tuple(col["velocity"]))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc), "options.collision") from None
        rep = collision_limit_check(cfg.params(), sched)
        res["collision"] = {"s": str(rep.s), "exponents": rep.exponents, "deviation": rep.deviation,
                            "richardson": rep.richardson, "ratio": rep.ratio, "flatness": rep.flatness,
                            "in_limit_algebra": rep.in_limit_algebra, "verdict": rep.verdict}
        ok &= rep.verdict
    if not res:
        raise ConfigError("the limit command needs options.tree or options.collision", "options")
    return res, ok, tables


def _cmd_cover(cfg, seed, tol, threads=1):
    from .covering import TrackingError, cactus_loop_suite, standard_loops
    N = len(cfg.weights)
    loops = _opt(cfg, "loops", "standard")
    catalog = standard_loops(N) if loops == "standard" else {k: [tuple(i) for i in v] for k, v in loops.items()}
    step = {k: float(cfg.options[k]) for k in ("initial_step", "max_step", "min_step", "gap_floor", "collar")
            if k in cfg.options}
    try:
        results = cactus_loop_suite(N, cfg.weights, catalog, threads=threads, **step)
    except TrackingError as exc:
        return {"error": str(exc)}, False, {}
    out, rows = {}, []
    for r in results:
        out[r.name] = {"permutation": list(r.permutation), "min_gap": r.min_gap, "steps": r.steps,
                       "path_hash": r.path_hash, "min_overlap": r.min_overlap, "crossover": r.crossover}
        rows.append([r.name, " ".join(map(str, r.permutation)), r.min_gap, r.steps, r.path_hash])
    ok = True
    if _opt(cfg, "check_halving", False):
        half = dict(step, max_step=step.get("max_step", 0.1) / 2, initial_step=step.get("initial_step", 0.05) / 2)
        again = cactus_loop_suite(N, cfg.weights, catalog, threads=threads, **half)
        for a, b in zip(results, again):
            out[a.name]["halving_stable"] = a.permutation == b.permutation
            ok &= a.permutation == b.permutation
    return {"loops": out}, ok, {"permutations": (["loop", "permutation", "min_gap", "steps", "path_hash"], rows)}


_DISPATCH = {
    "commute-check": _cmd_commute_check,
    "spectrum": _cmd_spectrum,
    "cyclicity": _cmd_cyclicity,
    "bethe": _cmd_bethe,
    "oper-check": _cmd_oper_check,
    "bijection-count": _cmd_bijection_count,
    "limit": _cmd_limit,
    "cover": _cmd_cover,
}


def run(command, config, seed=None, tol=1e-10, threads=1):
    """Dispatch ``command`` on ``config`` and return a :class:`Report`."""
    if command not in _DISPATCH:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    seed = config.seed if seed is None else int(seed)
    t0 = time.perf_counter()
    fn = _DISPATCH[command]
    if command == "cover":
        results, verdict, tables = fn(config, seed, tol, threads=threads)
    else:
        results, verdict, tables = fn(config, seed, tol)
    return Report(command, config, seed, results, bool(verdict), tables, time.perf_counter() - t0)


def _parser():
    p = argparse.ArgumentParser(prog="gaudin-lab", description="Gaudin algebra experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML experiment file")
    p.add_argument("--out", default=None, help="directory for report.json and CSV tables")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--tol", type=float, default=1e-10, help="numerical tolerance")
    p.add_argument("--threads", type=int, default=1, help="worker threads where supported")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        report = run(args.command, cfg, seed=args.seed, tol=args.tol, threads=args.threads)
    except ConfigError as exc:
        print(f"gaudin-lab: config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gaudin-lab: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # surfaced with module context
        mod = getattr(exc, "__module__", None) or type(exc).__module__
        print(f"gaudin-lab: {args.command} failed in {mod}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        report.write(args.out)
    summary = {"command": report.command, "verdict": report.verdict, "config_hash": report.config.digest()[:16]}
    if "message" in report.results:
        summary["message"] = report.results["message"]
    if "table" in report.results:
        summary["table"] = report.results["table"]
    print(json.dumps(summary))
    return 0 if report.verdict else 2


if __name__ == "__main__":
    sys.exit(main())
