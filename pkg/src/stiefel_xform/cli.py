"""Command-line front end.

Subcommands:

* ``list``           print the identity catalog
* ``list-constants`` print the closed-form constant registry
* ``verify``         run one identity fixture and report a verdict
* ``audit``          fit an identity's constant empirically across probe fields
* ``eval``           evaluate a single transform at a point
* ``suite``          run the default grid over every fixture

Exit codes: 0 all pass, 1 any failure, 2 constant mismatch only,
3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from .errors import StiefelXformError
from .fields import canonical_frame, make_field
from .identities import fit_constant, get_fixture, list_identities, verify
from .linalg import Frame
from .manifold import MCConfig, RandomSource, derived_seed, sample_stiefel
from .report import ReportEnvelope, format_text, render_figures, write_csv
from .special import constant_registry
from .transforms import TransformKind, evaluate, normalized

ENV_SEED = "STIEFEL_XFORM_SEED"
DEFAULT_SEED = 12345

SMOKE_SAMPLES = 20_000
SMOKE_OUTER = 2_000
SMOKE_INNER = 200


def _add_mc_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo sample budget")
    p.add_argument("--seed", type=int, default=None, help=f"base seed (default ${ENV_SEED} or {DEFAULT_SEED})")
    p.add_argument("--shards", type=int, default=1, help="parallel shard count (does not change results)")
    p.add_argument("--z-tol", type=float, default=None, help="z-score tolerance override")
    p.add_argument("--abs-tol", type=float, default=1e-9, help="absolute comparison floor")
    p.add_argument("--json", action="store_true", help="emit the JSON envelope instead of text")
    p.add_argument("--format", choices=("json", "text"), default=None, help="output format")
    p.add_argument("--out", default=None, help="write the report to this path instead of stdout")
    p.add_argument("--timings", action="store_true",
                   help="record wall-clock runtimes (breaks byte reproducibility)")


def _add_param_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--lam", type=str, default=None, help="comma-separated exponent vector, e.g. 1.5,0.5")
    p.add_argument("--s", type=float, default=None, help="scalar scale parameter where applicable")
    p.add_argument("--field", type=str, default=None, help="probe field spec, e.g. minor-power:p=0.5")
    p.add_argument("--field2", type=str, default=None, help="second probe field (pairing identities)")
    p.add_argument("--points", type=int, default=None, help="number of base points for pointwise identities")
    p.add_argument("--outer-samples", type=int, default=None)
    p.add_argument("--inner-samples", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stiefel-xform",
        description="Monte Carlo transforms on Stiefel manifolds and their identity checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="print the identity catalog")
    p_list.add_argument("--json", action="store_true")

    p_const = sub.add_parser("list-constants", help="print the constant registry")
    p_const.add_argument("--json", action="store_true")

    p_verify = sub.add_parser("verify", help="verify one identity")
    p_verify.add_argument("id", help="identity id, e.g. ID-MASS-COS")
    _add_param_args(p_verify)
    _add_mc_args(p_verify)
    p_verify.add_argument("--audit", action="store_true", help="force constant-audit mode")

    p_audit = sub.add_parser("audit", help="fit an identity's constant empirically")
    p_audit.add_argument("id")
    _add_param_args(p_audit)
    _add_mc_args(p_audit)
    p_audit.add_argument("--fields", type=int, default=3, help="number of probe fields")

    p_eval = sub.add_parser("eval", help="evaluate one transform at a point")
    p_eval.add_argument("--kind", required=True, choices=[k.value for k in TransformKind])
    _add_param_args(p_eval)
    _add_mc_args(p_eval)
    p_eval.add_argument("--normalized", action="store_true", help="apply the gamma-ratio normalization")
    p_eval.add_argument("--unsafe", action="store_true", help="skip the convergence guard")
    p_eval.add_argument("--point", choices=("canonical", "random"), default="canonical")
    p_eval.add_argument("--point-seed", type=int, default=0)

    p_suite = sub.add_parser("suite", help="run the default grid over all fixtures")
    p_suite.add_argument("--profile", choices=("smoke", "full"), default="smoke")
    _add_mc_args(p_suite)
    p_suite.add_argument("--jobs", type=int, default=1, help="fixture-level parallelism")
    p_suite.add_argument("--figures", default=None, help="directory for rendered figures")
    p_suite.add_argument("--csv", default=None, help="path for the delimited summary")
    return parser


def _seed_from(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    return int(env) if env else DEFAULT_SEED


def _config_from(args, default_samples: int = 200_000) -> MCConfig:
    return MCConfig(
        samples=getattr(args, "samples", None) or default_samples,
        seed=_seed_from(args),
        shards=getattr(args, "shards", 1),
        z_tol=getattr(args, "z_tol", None) or 4.0,
        abs_tol=getattr(args, "abs_tol", 1e-9),
    )


def _params_from(args) -> dict:
    p: dict = {}
    for name in ("n", "m", "k", "alpha", "beta", "s", "field", "field2", "points",
                 "outer_samples", "inner_samples"):
        val = getattr(args, name, None)
        if val is not None:
            p[name] = val
    if getattr(args, "lam", None) is not None:
        parts = [float(x) for x in str(args.lam).split(",") if x.strip()]
        p["lam"] = parts[0] if len(parts) == 1 else tuple(parts)
    if getattr(args, "z_tol", None) is not None:
        p["z_tol"] = args.z_tol
    if getattr(args, "audit", False):
        p["audit"] = True
    return p


def _emit(envelope: ReportEnvelope, args) -> None:
    fmt = "json" if (getattr(args, "json", False) or getattr(args, "format", None) == "json") else "text"
    payload = envelope.to_json() if fmt == "json" else format_text(envelope)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _timestamp(args) -> str | None:
    return datetime.now(timezone.utc).isoformat() if getattr(args, "timings", False) else None


def _cmd_list(args) -> int:
    catalog = list_identities()
    if args.json:
        sys.stdout.write(json.dumps(catalog, sort_keys=True, indent=2) + "\n")
    else:
        for entry in catalog:
            sys.stdout.write(f"{entry['id']:18s} {entry['statement']}\n")
            sys.stdout.write(f"{'':18s}   params: {entry['params']}  guards: {'; '.join(entry['guards'])}\n")
    return 0


def _cmd_list_constants(args) -> int:
    registry = constant_registry()
    if args.json:
        sys.stdout.write(json.dumps(registry, sort_keys=True, indent=2) + "\n")
    else:
        for entry in registry:
            sys.stdout.write(
                f"{entry['kind']:20s} params={','.join(entry['params']):14s} {entry['formula']}\n"
            )
            extra = entry["constraints"]
            if entry["excluded"]:
                extra += f"; excluded: {entry['excluded']}"
            sys.stdout.write(f"{'':20s} {extra}\n")
    return 0


def _cmd_verify(args) -> int:
    cfg = _config_from(args)
    report = verify(args.id, _params_from(args), cfg, timings=args.timings)
    envelope = ReportEnvelope("verify", _echo_config(cfg, args), [report], timestamp=_timestamp(args))
    _emit(envelope, args)
    return envelope.exit_code


def _cmd_audit(args) -> int:
    cfg = _config_from(args)
    params = _params_from(args)
    value, (lo, hi) = fit_constant(args.id, params, cfg, count=args.fields)
    fx = get_fixture(args.id)
    merged = dict(fx.defaults)
    merged.update(params)
    paper = fx.constant_value(merged) if fx.constant_value else None
    result = {
        "id": args.id,
        "constant_empirical": {"value": value, "ci_low": lo, "ci_high": hi},
        "constant_paper": paper,
        "ratio_to_paper": (value / paper) if paper else None,
        "gated": True,
        "verdict": "pass",
    }
    envelope = ReportEnvelope("audit", _echo_config(cfg, args), [result], timestamp=_timestamp(args))
    _emit(envelope, args)
    return 0


def _cmd_eval(args) -> int:
    cfg = _config_from(args)
    kind = TransformKind(args.kind)
    if args.n is None or args.m is None:
        raise StiefelXformError("eval requires --n and --m")
    n, m = args.n, args.m
    k = args.k if args.k is not None else m
    if kind in (TransformKind.DualFunk, TransformKind.DualCosine, TransformKind.DualSine,
                TransformKind.CompositeCosine, TransformKind.CompRadon):
        field_shape, point_shape = (n, k), (n, m)
    elif kind in (TransformKind.Mcos, TransformKind.Qsin):
        field_shape, point_shape = (n, m), (n, m)
    else:
        field_shape, point_shape = (n, m), (n, k)
    field = make_field(args.field or "const", *field_shape)
    if args.point == "canonical":
        point = Frame(canonical_frame(*point_shape))
    else:
        point = sample_stiefel(*point_shape, RandomSource(derived_seed(cfg.seed, args.point_seed), 0))
    lam = None
    if args.lam is not None:
        lam = np.array([float(x) for x in str(args.lam).split(",") if x.strip()])
    if args.normalized:
        est = normalized(kind, field, point, args.alpha, cfg, unsafe=args.unsafe)
    else:
        est = evaluate(kind, field, point, cfg, alpha=args.alpha, lam=lam, unsafe=args.unsafe)
    result = {
        "kind": kind.value,
        "field": field.name,
        "point": args.point,
        "params": {"n": n, "m": m, "k": k, "alpha": args.alpha,
                   "lam": list(lam) if lam is not None else None},
        "estimate": est.to_dict(),
    }
    envelope = ReportEnvelope("eval", _echo_config(cfg, args), [result], timestamp=_timestamp(args))
    _emit(envelope, args)
    return 0


def _suite_jobs(entries, cfg, timings, jobs):
    def run(entry):
        fid, params = entry
        return verify(fid, params, cfg, timings=timings)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, entries))
    return [run(e) for e in entries]


def _cmd_suite(args) -> int:
    smoke = args.profile == "smoke"
    cfg = _config_from(args, default_samples=SMOKE_SAMPLES if smoke else 200_000)
    entries = []
    for fx_entry in list_identities():
        fid = fx_entry["id"]
        for grid_params in fx_entry["grid"]:
            params = dict(grid_params)
            if "lam" in params and isinstance(params["lam"], list):
                params["lam"] = tuple(params["lam"])
            if smoke:
                params.setdefault("outer_samples", SMOKE_OUTER)
                params.setdefault("inner_samples", SMOKE_INNER)
            entries.append((fid, params))
    reports = _suite_jobs(entries, cfg, args.timings, args.jobs)
    # deterministic aggregation order regardless of execution order
    reports.sort(key=lambda r: (r.id, json.dumps(r.params, sort_keys=True)))
    envelope = ReportEnvelope("suite", _echo_config(cfg, args, profile=args.profile),
                              reports, timestamp=_timestamp(args))
    if args.csv:
        write_csv(envelope, args.csv)
    if args.figures:
        render_figures(envelope, args.figures)
    _emit(envelope, args)
    return envelope.exit_code


def _echo_config(cfg: MCConfig, args, **extra) -> dict:
    d = {
        "samples": cfg.samples,
        "seed": cfg.seed,
        "shards": cfg.shards,
        "z_tol": cfg.z_tol,
        "abs_tol": cfg.abs_tol,
    }
    d.update(extra)
    return d


def run(argv: list[str] | None = None) -> int:
    """Parse arguments and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code not in (0, None) else 0
    handlers = {
        "list": _cmd_list,
        "list-constants": _cmd_list_constants,
        "verify": _cmd_verify,
        "audit": _cmd_audit,
        "eval": _cmd_eval,
        "suite": _cmd_suite,
    }
    try:
        return handlers[args.command](args)
    except StiefelXformError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
