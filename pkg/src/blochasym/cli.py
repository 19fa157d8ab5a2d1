"""Command-line front end: ``blochasym <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import validation
from .blochfn import compare_with_oracle, predict_coefficients
from .config import RunConfig, load_config
from .domains import asymptotic_constants, classify
from .errors import BlochAsymError, ConfigParse, SmallDenominator
from .expansion import iterability_floor, predict_eigenvalue
from .isoenergetic import band_coverage_witness, measure_nonresonance_fraction, practical_eps1, simplicity_check, \
    sphere_points
from .lattice import reduce_to_fundamental, sqnorm
from .oracle import bloch_eigen, match_eigenvalue
from .resonance import resonance_predict

SCHEMA_VERSION = 1
COMMANDS = ("constants", "classify", "solve", "expand", "resonance", "blochfn", "simplicity", "isosurface",
            "measure", "validate")


class CommandOutput:
    def __init__(self, command, columns, rows, meta=None, status=0):
        self.command = command
        self.columns = list(columns)
        self.rows = rows
        self.meta = meta or {}
        self.status = status


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(out: CommandOutput, fmt: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": out.command, "columns": out.columns,
               "rows": [{c: _json_value(r.get(c)) for c in out.columns} for r in out.rows],
               "meta": {k: _json_value(v) for k, v in out.meta.items()}}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(out.columns)
    for r in out.rows:
        w.writerow([_cell(r.get(c)) for c in out.columns])
    return buf.getvalue()


def worker_count(cfg: RunConfig, flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("BLOCHASYM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigParse(f"BLOCHASYM_THREADS must be an integer, got {env!r}") from exc
        if n <= 0:
            raise ConfigParse("BLOCHASYM_THREADS must be positive")
        return n
    return cfg.workers or os.cpu_count() or 1


def _pmap(fn, items, workers):
    """Order-preserving map on a thread pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _vec(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in str(text).split(",")])
    except ValueError as exc:
        raise ConfigParse(f"cannot parse vector {text!r}") from exc


def _constants(cfg: RunConfig):
    s = cfg.constants.get("s")
    return asymptotic_constants(cfg.dim, s)


def _points(cfg: RunConfig, C):
    """Quasimomenta from params: explicit x list and/or a points file, rho + theta (d = 2), or seeded sphere samples.

    rho may be a list; theta and sample modes then produce points for every radius.
    """
    p = cfg.params
    pts = []
    if p.get("x"):
        xs = p["x"] if isinstance(p["x"], list) else [p["x"]]
        pts += [_vec(v) if isinstance(v, str) else np.asarray(v, dtype=float) for v in xs]
    if p.get("points"):
        pts += _read_points(p["points"])
    if not pts:
        rhos = p.get("rho")
        rhos = [] if rhos is None else (rhos if isinstance(rhos, list) else [rhos])
        if p.get("theta") is not None and rhos:
            if cfg.dim != 2:
                raise ConfigParse("--theta only makes sense in dimension 2")
            ths = p["theta"] if isinstance(p["theta"], list) else [p["theta"]]
            pts = [float(r) * np.array([math.cos(float(t)), math.sin(float(t))]) for r in rhos for t in ths]
        elif p.get("samples") and rhos:
            seed = int(p.get("seed", 0))
            for i, r in enumerate(rhos):
                rng = np.random.default_rng(seed + i)
                pts += list(sphere_points(float(r), cfg.dim, int(p["samples"]), rng))
        else:
            raise ConfigParse("give points with --x or --points, with --rho and --theta, or with --rho and --samples")
    for x in pts:
        if len(x) != cfg.dim:
            raise ConfigParse(f"point {x} does not have {cfg.dim} components")
    return pts


def _read_points(path):
    """Rows of d reals; a non-numeric first row is taken as a header."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                out.append(np.array([float(v) for v in row]))
            except ValueError as exc:
                if i == 0:
                    continue
                raise ConfigParse(f"{path}, line {i + 1}: {exc}") from exc
    return out


def _rho_for(cfg, x):
    r = cfg.params.get("rho")
    if r is None or isinstance(r, list):
        return float(np.linalg.norm(x))
    return float(r)


def _xcols(d):
    return [f"x{i + 1}" for i in range(d)]


def _xrow(x):
    return {f"x{i + 1}": float(v) for i, v in enumerate(x)}


def cmd_constants(cfg, workers):
    d = int(cfg.params.get("d", cfg.dim))
    C = asymptotic_constants(d, cfg.constants.get("s"))
    rows = [{"quantity": "d", "value": d}, {"quantity": "s", "value": C.s}, {"quantity": "s0", "value": C.s0},
            {"quantity": "q", "value": C.q_exp}, {"quantity": "alpha", "value": C.alpha}]
    rows += [{"quantity": f"alpha_{k + 1}", "value": a} for k, a in enumerate(C.alpha_k)]
    rows += [{"quantity": "p", "value": C.p}, {"quantity": "p1", "value": C.p1}, {"quantity": "k1", "value": C.k1}]
    rows += [{"quantity": name, "value": margin, "holds": holds} for name, holds, margin in C.inequality_report]
    return CommandOutput("constants", ["quantity", "value", "holds"], rows)


def cmd_classify(cfg, workers):
    C = _constants(cfg)
    lat = cfg.lattice()
    pts = _points(cfg, C)
    bm = cfg.constants.get("ball_multiplier")

    def one(x):
        cls = classify(x, _rho_for(cfg, x), C, lat, ball_multiplier=bm)
        dirs = ";".join("(" + ",".join(map(str, d.coeffs)) + ")" for d in cls.directions)
        margins = ";".join(format(cls.margins[d.coeffs], ".17g") for d in cls.directions)
        return {**_xrow(x), "kind": cls.kind.value, "k": cls.k, "directions": dirs, "margins": margins}

    cols = _xcols(cfg.dim) + ["kind", "k", "directions", "margins"]
    return CommandOutput("classify", cols, _pmap(one, pts, workers))


def cmd_solve(cfg, workers):
    lat = cfg.lattice()
    pot = cfg.build_potential(lat)
    p = cfg.params
    t = _vec(p["t"]) if isinstance(p.get("t"), str) else np.asarray(p.get("t", [0.0] * cfg.dim), dtype=float)
    radius = p.get("basis_radius")
    rho = p.get("rho")
    if isinstance(rho, list):
        raise ConfigParse("solve takes a single --rho")
    if radius is None and rho is None:
        radius = 20.0
    cap = cfg.constants.get("basis_cap", 20000)
    res = bloch_eigen(pot, t, radius, rho=None if rho is None else float(rho), cap=cap)
    count = min(int(p.get("count", 20)), len(res))
    rows = []
    for N in range(count):
        key = res.dominant_key(N)
        rows.append({"N": N, "eigenvalue": float(res.eigenvalues[N]),
                     **{f"g{i + 1}": v for i, v in enumerate(key)},
                     "weight": float(abs(res.coefficient(N, key)) ** 2)})
    cols = ["N", "eigenvalue"] + [f"g{i + 1}" for i in range(cfg.dim)] + ["weight"]
    return CommandOutput("solve", cols, rows, {"basis_size": len(res)})


def _oracle_for(cfg, pot, x, rho):
    t, _ = reduce_to_fundamental(pot.lattice, x)
    return bloch_eigen(pot, t, rho=rho, cap=cfg.constants.get("basis_cap", 20000))


def cmd_expand(cfg, workers):
    C = _constants(cfg)
    pot = cfg.build_potential()
    order = int(cfg.params.get("order", 3))
    rows = []
    for x in _points(cfg, C):
        rho = _rho_for(cfg, x)
        res = _oracle_for(cfg, pot, x, rho)
        rep = predict_eigenvalue(x, pot, order, C=C, rho=rho, oracle=res)
        lam = None if rep.oracle_index is None else float(res.eigenvalues[rep.oracle_index])
        for row in rep.orders:
            rows.append({**_xrow(x), "k": row.k, "F_prev": row.F_prev, "prediction": row.prediction,
                         "oracle_lambda": lam, "gap": row.oracle_gap, "min_denominator": rep.iterability_min,
                         "valid": rep.valid})
    cols = _xcols(cfg.dim) + ["k", "F_prev", "prediction", "oracle_lambda", "gap", "min_denominator", "valid"]
    return CommandOutput("expand", cols, rows)


def cmd_resonance(cfg, workers):
    C = _constants(cfg)
    lat = cfg.lattice()
    pot = cfg.build_potential(lat)
    rows = []
    for x in _points(cfg, C):
        rho = _rho_for(cfg, x)
        cls = classify(x, rho, C, lat)
        if cls.is_nonresonant:
            raise BlochAsymError(f"x = {x.tolist()} is non-resonant; no resonance block")
        res = _oracle_for(cfg, pot, x, rho)
        pred = resonance_predict(x, cls.directions, pot, C, rho, oracle=res)
        lam = float(sqnorm(x)) + pred.block.shifted_eigenvalues(pot)
        near = np.argsort(np.abs(lam - rho**2), kind="stable")[:5]
        for j in sorted(near):
            rows.append({**_xrow(x), "block_size": pred.block.size, "j": int(j), "lambda_j": float(lam[j]),
                         "lambda_minus_rho2": float(lam[j] - rho**2), "matched": bool(j == pred.j),
                         "oracle_gap": pred.gap if j == pred.j else None})
    cols = _xcols(cfg.dim) + ["block_size", "j", "lambda_j", "lambda_minus_rho2", "matched", "oracle_gap"]
    return CommandOutput("resonance", cols, rows)


def cmd_blochfn(cfg, workers):
    C = _constants(cfg)
    lat = cfg.lattice()
    pot = cfg.build_potential(lat)
    n = int(cfg.params.get("order", 2))
    rows = []
    for x in _points(cfg, C):
        rho = _rho_for(cfg, x)
        pred = predict_coefficients(x, pot, n, C, rho)
        res = _oracle_for(cfg, pot, x, rho)
        _, g = reduce_to_fundamental(lat, x)
        N = match_eigenvalue(res, g.coeffs, iterability_floor(rho, C))
        if N is None:
            raise BlochAsymError("no oracle eigenvalue matches x")
        for key, (pv, ov) in compare_with_oracle(pred, res, N, g.coeffs).items():
            key = key or (0,) * cfg.dim
            rows.append({**{f"g{i + 1}": v for i, v in enumerate(key)},
                         "pred_re": complex(pv).real, "pred_im": complex(pv).imag,
                         "oracle_re": ov.real, "oracle_im": ov.imag, "abs_error": abs(pv - ov)})
    cols = [f"g{i + 1}" for i in range(cfg.dim)] + ["pred_re", "pred_im", "oracle_re", "oracle_im", "abs_error"]
    return CommandOutput("blochfn", cols, rows)


def cmd_simplicity(cfg, workers):
    C = _constants(cfg)
    pot = cfg.build_potential()

    def one(x):
        v = simplicity_check(x, pot, C, _rho_for(cfg, x))
        gaps = [g for _, _, g in v.violations]
        kinds = ";".join(sorted({k.value for _, k, _ in v.violations}))
        return {**_xrow(x), "passed": v.passed, "K_size": v.K_size, "violations": len(v.violations),
                "kinds": kinds, "min_gap": min(gaps) if gaps else None, "eps1": v.eps1}

    cols = _xcols(cfg.dim) + ["passed", "K_size", "violations", "kinds", "min_gap", "eps1"]
    return CommandOutput("simplicity", cols, _pmap(one, _points(cfg, C), workers))


def _rho_list(cfg):
    r = cfg.params.get("rho")
    if r is None:
        raise ConfigParse("missing rho")
    return [float(v) for v in (r if isinstance(r, list) else [r])]


def cmd_isosurface(cfg, workers):
    C = _constants(cfg)
    pot = cfg.build_potential()
    p = cfg.params
    tries = int(p.get("tries", 50))
    seed = int(p.get("seed", 0))
    practical = bool(p.get("practical", False))

    def one(item):
        i, rho = item
        e1 = practical_eps1(pot.lattice, rho) if practical else None
        w = band_coverage_witness(rho, pot, C, tries, seed + i, eps1=e1)
        return {"rho": rho, **{f"y{j + 1}": v for j, v in enumerate(w.y)}, "Lambda": w.value,
                "residual": w.residual, "N": w.eigen_index, "steps": w.steps, "eps": w.eps,
                "eps1_mode": "practical" if practical else "asymptotic"}

    cols = ["rho"] + [f"y{j + 1}" for j in range(cfg.dim)] + ["Lambda", "residual", "N", "steps", "eps",
                                                               "eps1_mode"]
    return CommandOutput("isosurface", cols, _pmap(one, list(enumerate(_rho_list(cfg))), workers))


def cmd_measure(cfg, workers):
    C = _constants(cfg)
    lat = cfg.lattice()
    p = cfg.params
    n = int(p.get("samples", 100_000))
    seed = int(p.get("seed", 0))
    c8 = float(p.get("c8", 1.0))
    bm = cfg.constants.get("ball_multiplier")

    def one(item):
        i, rho = item
        m = measure_nonresonance_fraction(rho, C, c8, n, seed + i, lat=lat, ball_multiplier=bm)
        return {"rho": rho, "n_samples": m.n_samples, "fraction": m.fraction, "stderr": m.stderr,
                "seed": m.seed, "c8": c8}

    cols = ["rho", "n_samples", "fraction", "stderr", "seed", "c8"]
    return CommandOutput("measure", cols, _pmap(one, list(enumerate(_rho_list(cfg))), workers))


def cmd_validate(cfg, workers):
    profile = cfg.params.get("profile", "desk")
    results = validation.run_all(profile)
    rows = [{"criterion": c.number, "name": c.name, "passed": c.passed, "detail": c.detail} for c in results]
    status = 0 if all(c.passed for c in results) else 2
    return CommandOutput("validate", ["criterion", "name", "passed", "detail"], rows, {"profile": profile}, status)


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blochasym", description="Asymptotics of Bloch eigenvalues and eigenfunctions "
                                                               "checked against a plane-wave solver.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--workers", type=int, help="worker threads for point and rho sweeps")
    common.add_argument("--lam", type=float, help="use the cosine potential with this strength")
    common.add_argument("--zero-potential", action="store_true", help="use q = 0")
    common.add_argument("--s", type=float, help="smoothness s (default s0)")
    pts = argparse.ArgumentParser(add_help=False)
    pts.add_argument("--x", action="append", help="quasimomentum 'x1,x2,...' (repeatable)")
    pts.add_argument("--points", help="CSV file with one quasimomentum per row")
    pts.add_argument("--rho", type=float, nargs="+")
    pts.add_argument("--theta", type=float, action="append", help="angle on |x| = rho (d = 2)")
    pts.add_argument("--samples", type=int)
    pts.add_argument("--seed", type=int)

    p = sub.add_parser("constants", parents=[common], help="exponent system and its inequalities")
    p.add_argument("--d", type=int)
    sub.add_parser("classify", parents=[common, pts], help="non-resonant / resonant class of points")
    p = sub.add_parser("solve", parents=[common], help="plane-wave eigenvalues at quasimomentum t")
    p.add_argument("--t")
    p.add_argument("--basis-radius", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--count", type=int)
    p = sub.add_parser("expand", parents=[common, pts], help="non-resonance predictions against the oracle")
    p.add_argument("--order", type=int)
    sub.add_parser("resonance", parents=[common, pts], help="resonance block eigenvalues")
    p = sub.add_parser("blochfn", parents=[common, pts], help="predicted Bloch coefficients against the oracle")
    p.add_argument("--order", type=int)
    sub.add_parser("simplicity", parents=[common, pts], help="simplicity conditions")
    p = sub.add_parser("isosurface", parents=[common, pts], help="points with Lambda = rho^2")
    p.add_argument("--tries", type=int)
    p.add_argument("--practical", action="store_true", default=None,
                   help="scale eps1 to 0.1 x the mean level spacing")
    p = sub.add_parser("measure", parents=[common, pts], help="Monte Carlo non-resonant fraction of |x| = rho")
    p.add_argument("--c8", type=float)
    p = sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    p.add_argument("--profile", choices=validation.PROFILES)
    return ap


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    top = {"format": args.format, "output": args.output}
    params = {}
    for name in ("x", "points", "theta", "samples", "seed", "d", "t", "basis_radius", "count", "order", "tries",
                 "practical", "c8", "profile"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    rho = getattr(args, "rho", None)
    if rho is not None:
        params["rho"] = rho if isinstance(rho, (int, float)) else (rho if len(rho) > 1 else rho[0])
    d = cfg.to_dict()
    d.update({k: v for k, v in top.items() if v is not None})
    d["params"].update(params)
    if args.lam is not None:
        d["potential"] = {"cosine": args.lam}
    if args.zero_potential:
        d["potential"] = {"entries": []}
    if args.s is not None:
        d["constants"]["s"] = args.s
    return RunConfig(**d)


def run(command: str, cfg: RunConfig, workers: int = 1) -> CommandOutput:
    if command not in HANDLERS:
        raise ConfigParse(f"unknown command {command!r}")
    return HANDLERS[command](cfg, workers)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        workers = worker_count(cfg, args.workers)
        with warnings.catch_warnings():
            # iterability problems show up in the "valid" columns instead
            warnings.simplefilter("ignore", SmallDenominator)
            out = run(args.command, cfg, workers)
        text = render(out, cfg.format)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return out.status
    except (BlochAsymError, ValueError, KeyError, TypeError) as exc:
        print(f"blochasym {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
