"""Command-line interface.

Commands emit JSON (or CSV for ``simulate``) on stdout; the exit status is
nonzero when a verification or comparison fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import discrete
from .diffop import (
    BoundaryViolation,
    DiffusionModel,
    check_boundary_eq,
    density_check,
    h_transform,
    model_from_json,
    model_to_json,
    to_real,
    verify_ground_state,
)
from .experiments import EXPERIMENTS, load_defaults, run_experiment
from .models import CATALOG
from .polyring import format_poly
from .simkit import SimConfig, conditioned_paths, sample_summary, sample_to_csv, sde_paths

PARAM_FLAGS = ("n", "alpha", "beta", "lam", "d", "m", "p", "q", "a")


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _add_params(p: argparse.ArgumentParser):
    for name in PARAM_FLAGS:
        p.add_argument(f"--{name}", type=_frac, default=None, help=f"model parameter {name} (rational)")


def _params(args, entry) -> dict:
    return {k: getattr(args, k) for k in entry.defaults if getattr(args, k, None) is not None}


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_model(args) -> tuple[DiffusionModel, str | None, dict]:
    if getattr(args, "file", None):
        return model_from_json(Path(args.file).read_text()), None, {}
    if not args.model:
        raise SystemExit("error: give --model or --file")
    if args.model not in CATALOG:
        raise SystemExit(f"error: unknown model {args.model!r}; known: {', '.join(sorted(CATALOG))}")
    entry = CATALOG[args.model]
    params = entry.coerce(_params(args, entry))
    return entry.build(**params), args.model, params


# ---------------------------------------------------------------------------
# verify

def _residual_report(polys, names, label):
    bad = [{label: i, "residual": format_poly(p, names)} for i, p in enumerate(polys) if not p.is_zero()]
    return {"pass": not bad, "nonzero": bad}


def certificate(m: DiffusionModel, name: str | None = None, params: dict | None = None) -> dict:
    """Run every exact identity on ``m``; catalog models also get dual and kappa checks."""
    checks: dict = {}
    try:
        bd = check_boundary_eq(m)
    except BoundaryViolation as exc:
        checks["boundary_equation"] = {
            "pass": False,
            "failures": [{"i": i, "r": r, "reason": why} for i, r, why in exc.failures],
        }
        return {"model": m.label, "params": params or {}, "pass": False, "checks": checks}
    checks["boundary_equation"] = {
        "pass": True,
        "L": [[format_poly(q, m.names) for q in row] for row in bd.L],
        "c": [str(c) for c in bd.c],
        "weight_shift": [str(s) for s in bd.shift],
    }
    checks["density"] = _residual_report(density_check(m), m.names, "i")
    checks["ground_state"] = _residual_report(verify_ground_state(m), m.names, "r")
    ht = h_transform(m)
    back = h_transform(ht.model).model
    checks["involution"] = {"pass": back == m}
    if name is not None:
        entry = CATALOG[name]
        dual = entry.build(**entry.coerce(entry.dual(params)))
        checks["dual_round_trip"] = {"pass": ht.model == dual, "dual": dual.label}
        expected = entry.kappa(params)
        checks["kappa"] = {"pass": ht.kappa == expected, "computed": str(ht.kappa), "expected": str(expected)}
    else:
        checks["kappa"] = {"pass": True, "computed": str(ht.kappa)}
    ok = all(c["pass"] for c in checks.values())
    return {"model": m.label, "params": {k: str(v) for k, v in (params or {}).items()}, "pass": ok,
            "checks": checks}


def cmd_verify(args) -> int:
    if args.model == "all" and not args.file:
        certs = []
        for name, entry in CATALOG.items():
            params = entry.coerce({})
            certs.append(certificate(entry.build(**params), name, params))
        _emit({"pass": all(c["pass"] for c in certs), "certificates": certs}, args.out)
        return 0 if all(c["pass"] for c in certs) else 1
    m, name, params = _load_model(args)
    cert = certificate(m, name, params)
    _emit(cert, args.out)
    return 0 if cert["pass"] else 1


# ---------------------------------------------------------------------------
# models / htransform

def cmd_models(args) -> int:
    if args.action == "list":
        _emit([{"name": k, "defaults": {p: str(v) for p, v in e.defaults.items()}, "summary": e.summary}
               for k, e in CATALOG.items()])
        return 0
    if not args.model:
        raise SystemExit("error: models show needs --model")
    m, _, _ = _load_model(args)
    _emit(model_to_json(m), args.out)
    return 0


def cmd_htransform(args) -> int:
    m, _, _ = _load_model(args)
    try:
        ht = h_transform(m)
    except BoundaryViolation as exc:
        _emit({"error": str(exc), "failures": [list(f) for f in exc.failures]})
        return 1
    doc = {
        "kappa": str(ht.kappa),
        "h": [{"poly": format_poly(p, m.names), "exponent": str(a)} for p, a in ht.h_description],
        "model": model_to_json(ht.model),
    }
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# simulate / compare

def cmd_simulate(args) -> int:
    defaults = load_defaults()["simulate"]
    m, _, _ = _load_model(args)
    if not m.is_real():
        m = to_real(m)
    cfg = SimConfig(
        args.t if args.t is not None else defaults["t"],
        args.dt if args.dt is not None else defaults["dt"],
        args.n_paths if args.n_paths is not None else defaults["n_paths"],
        args.seed if args.seed is not None else defaults["seed"],
        args.policy or defaults["boundary_policy"],
    )
    if args.x0 is not None:
        x0 = [float(Fraction(v)) for v in args.x0.split(",")]
    else:
        x0 = [float(complex(v).real) for v in m.interior_float()]
    run = conditioned_paths if args.conditioned else sde_paths
    sample = run(m, x0, cfg, boundary_start=args.boundary_start)
    if args.summary:
        Path(args.summary).write_text(json.dumps(sample_summary(sample), indent=2) + "\n")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            sample_to_csv(sample, fh)
    else:
        sys.stdout.write(sample_to_csv(sample))
    return 0


def cmd_compare(args) -> int:
    overrides = {"t": args.t, "dt": args.dt, "n_paths": args.n_paths, "seed": args.seed,
                 "d": args.d, "p": args.p, "q": args.q}
    if args.engine:
        overrides["engine"] = True
    reports = run_experiment(args.experiment, overrides)
    ok = all(r.passed for r in reports)
    _emit({"experiment": args.experiment, "pass": ok, "reports": [r.to_dict() for r in reports]}, args.out)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# chain

def _read_matrix(text: str) -> np.ndarray:
    raw = text if text.lstrip().startswith("[") else Path(text).read_text()
    return np.array([[float(Fraction(str(v))) for v in row] for row in json.loads(raw)])


def cmd_chain(args) -> int:
    defaults = load_defaults()["chain"]
    P = discrete.StochasticMatrix(_read_matrix(args.matrix)).entries
    A = [int(s) for s in args.subset.split(",")]
    n = args.n if args.n is not None else defaults["n"]
    N = args.N if args.N is not None else defaults["N"]
    PA = discrete.restrict(P, A)
    gs = discrete.perron_ground_state(PA)
    Q = discrete.doob_matrix(PA).entries
    law = discrete.conditioned_path_law(P, A, args.x0, n, N)
    qlaw = discrete.markov_path_law(Q, A, args.x0, n)
    doc = {
        "subset": A,
        "x0": args.x0,
        "n": n,
        "N": N,
        "mu0": gs.mu0,
        "v0": gs.v0.tolist(),
        "Q": Q.tolist(),
        "path_law": [{"path": list(k), "prob": v} for k, v in sorted(law.items())],
        "q_chain_law": [{"path": list(k), "prob": v} for k, v in sorted(qlaw.items())],
        "tv": discrete.total_variation(law, qlaw),
    }
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="doobpoly", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("models", help="list catalog models or show one as JSON")
    pm.add_argument("action", choices=("list", "show"))
    pm.add_argument("--model")
    pm.add_argument("--file")
    pm.add_argument("--out")
    _add_params(pm)
    pm.set_defaults(func=cmd_models)

    pv = sub.add_parser("verify", help="exact identity certificate for a model")
    pv.add_argument("--model", help="catalog name or 'all'")
    pv.add_argument("--file", help="model JSON document")
    pv.add_argument("--out")
    _add_params(pv)
    pv.set_defaults(func=cmd_verify)

    ph = sub.add_parser("htransform", help="Doob transform of a model")
    ph.add_argument("--model")
    ph.add_argument("--file")
    ph.add_argument("--emit", choices=("json",), default="json")
    ph.add_argument("--out")
    _add_params(ph)
    ph.set_defaults(func=cmd_htransform)

    ps = sub.add_parser("simulate", help="Euler-Maruyama terminal sample as CSV")
    ps.add_argument("--model")
    ps.add_argument("--file")
    ps.add_argument("--x0", help="comma-separated start point in real coordinates")
    ps.add_argument("--t", type=float)
    ps.add_argument("--dt", type=float)
    ps.add_argument("--n-paths", dest="n_paths", type=int)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--policy", choices=("reject-step", "halve-dt", "absorb"))
    ps.add_argument("--conditioned", action="store_true", help="simulate the h-transform")
    ps.add_argument("--boundary-start", action="store_true")
    ps.add_argument("--out", help="CSV path (default stdout)")
    ps.add_argument("--summary", help="JSON moments path")
    _add_params(ps)
    ps.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("compare", help="run a named two-sided experiment")
    pc.add_argument("experiment", choices=sorted(EXPERIMENTS))
    pc.add_argument("--t", type=float)
    pc.add_argument("--dt", type=float)
    pc.add_argument("--n-paths", dest="n_paths", type=int)
    pc.add_argument("--seed", type=int)
    pc.add_argument("--d", type=int)
    pc.add_argument("--p", type=int)
    pc.add_argument("--q", type=int)
    pc.add_argument("--engine", action="store_true", help="weyl-dyson: also run the coefficient model")
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_compare)

    pch = sub.add_parser("chain", help="finite Markov chain conditioning")
    pch.add_argument("action", choices=("condition",))
    pch.add_argument("--matrix", required=True, help="JSON matrix or path to one")
    pch.add_argument("--subset", required=True, help="comma-separated states of A")
    pch.add_argument("--x0", type=int, required=True)
    pch.add_argument("--n", type=int)
    pch.add_argument("--N", type=int)
    pch.add_argument("--out")
    pch.set_defaults(func=cmd_chain)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
