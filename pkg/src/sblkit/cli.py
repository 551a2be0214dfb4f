"""Command line front end.

Exit codes: 0 pass, 1 checks failed, 2 input error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .defining import classify, riemann_invariant_grid
from .errors import InputError, NumericError
from .io import (
    dumps_candidate,
    dumps_model,
    load_cattaneo_params,
    load_cattaneo_spec,
    load_candidate,
    load_model,
)
from .report import SCHEMA_VERSION, RunConfig, to_json, verify_candidate
from .sampling import sample_box

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

INFEASIBLE_NOTE = (
    "no pointwise multipliers exist for this candidate; constraint-type laws such as "
    "divergence conditions are preserved by the evolution without being "
    "Lagrange-Liu consistent"
)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--samples", type=int, default=200, help="number of sampled states")
    p.add_argument("--seed", type=int, default=0, help="seed of the scrambled Sobol sequence")
    p.add_argument("--tol-reg", type=float, default=1e-10, help="regularity tolerance (relative)")
    p.add_argument("--tol-ll", type=float, default=1e-8, help="Lagrange-Liu tolerance")
    p.add_argument("--tol-def", type=float, default=1e-9, help="defining-system tolerance")
    p.add_argument("--tol-path", type=float, default=1e-7, help="path-independence tolerance")
    p.add_argument("--tol-eig", type=float, default=1e-8, help="eigenvector tolerance")
    p.add_argument("--json", dest="output", help="write the JSON report to this file")
    p.add_argument("--format", choices=("json", "text"), default="json", help="stdout format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sblkit", description="Supplementary balance law workbench")
    ap.add_argument("--version", action="version", version=f"sblkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classify the defining system of a model")
    a.add_argument("model")
    _common(a)
    a.add_argument("--grid-csv", help="two-field hyperbolic models: write Riemann invariants as CSV")
    a.add_argument("--grid-size", type=int, default=21, help="nodes per axis of the invariant grid")

    v = sub.add_parser("verify", help="verify a candidate supplementary law")
    v.add_argument("model")
    v.add_argument("sbl")
    _common(v)
    v.add_argument("--require-definite", action="store_true", help="fail unless Hess h0 is definite")
    v.add_argument("--require-inequality", action="store_true", help="fail unless Q >= 0 on samples")

    c = sub.add_parser("cattaneo-derive", help="derive the Cattaneo model and law from parameters")
    c.add_argument("spec")
    c.add_argument("params")
    _common(c)
    c.add_argument("--out-dir", default=".", help="directory for the emitted model and law")
    c.add_argument("--require-entropy", action="store_true", help="fail unless the law is entropy-type")

    z = sub.add_parser("export-zoo", help="write the shipped models and laws as text files")
    z.add_argument("out_dir")
    return ap


def _config(args) -> RunConfig:
    return RunConfig(
        samples=args.samples,
        seed=args.seed,
        tol_reg=args.tol_reg,
        tol_ll=args.tol_ll,
        tol_def=args.tol_def,
        tol_path=args.tol_path,
        tol_eig=args.tol_eig,
        output=args.output,
        format=args.format,
    ).validate()


def _emit(report: dict, cfg: RunConfig, text_lines: list):
    doc = to_json(report)
    if cfg.output:
        Path(cfg.output).write_text(doc, encoding="utf-8")
    if cfg.format == "json":
        _sys.stdout.write(doc)
    else:
        _sys.stdout.write("\n".join(text_lines) + "\n")


def cmd_analyze(args) -> int:
    cfg = _config(args)
    system = load_model(args.model)
    rep = classify(system, cfg.samples, cfg.seed, tol_eig=cfg.tol_eig)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "analyze",
        "model": system.name,
        "fields": list(system.field_names),
        "spatial_dim": system.n,
        "config": cfg.to_dict(),
        "classification": rep.to_dict(),
    }
    lines = [
        f"model {system.name}: m={system.m}, n={system.n}",
        f"elliptic: {rep.elliptic}",
        f"holonomic: {rep.holonomic_verdict} ({rep.regular_points}/{rep.sampled_points} regular samples)",
    ]
    if rep.two_field:
        lines.append(f"two-field: detJ={rep.two_field['detJ']:.6g} type={rep.two_field['type']}")
    if args.grid_csv:
        if not rep.two_field:
            raise InputError("--grid-csv needs a two-field model in one space dimension")
        (l1, h1), (l2, h2) = system.domain_box
        grid = (np.linspace(l1, h1, args.grid_size), np.linspace(l2, h2, args.grid_size))
        out = Path(args.grid_csv)
        for which in (1, 2):
            g = riemann_invariant_grid(system, grid, which)
            target = out.with_name(f"{out.stem}_{which}{out.suffix or '.csv'}")
            target.write_text(g.to_csv(), encoding="utf-8")
            lines.append(f"invariant {which}: {target}")
    _emit(report, cfg, lines)
    return EXIT_PASS


def cmd_verify(args) -> int:
    cfg = _config(args)
    system = load_model(args.model)
    cand = load_candidate(args.sbl)
    res = verify_candidate(system, cand, cfg, args.require_definite, args.require_inequality)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "model": system.name,
        "config": cfg.to_dict(),
        "verification": res.to_dict(),
    }
    lines = [
        f"model {system.name}: {res.feasible_points}/{res.samples} samples admit multipliers",
        f"max LL residual: flux {res.max_flux_residual:.3e}, source {res.max_source_residual:.3e}",
        f"Hessian of K0 in density coordinates: {res.convexity}",
        f"min production: {res.min_production:.6g}",
    ]
    if res.feasible_points < res.samples:
        report["note"] = INFEASIBLE_NOTE
        lines.append("infeasible: " + INFEASIBLE_NOTE)
    lines.append("PASS" if res.passed else "FAIL")
    _emit(report, cfg, lines)
    return EXIT_PASS if res.passed else EXIT_FAIL


def cmd_cattaneo_derive(args) -> int:
    from .zoo.cattaneo import (
        cattaneo_entropy_check,
        cattaneo_internal_energy,
        cattaneo_sbl,
        cattaneo_system,
    )

    cfg = _config(args)
    spec = load_cattaneo_spec(args.spec).validate()
    params = load_cattaneo_params(args.params)
    eps = cattaneo_internal_energy(spec, params)
    system = cattaneo_system(spec, eps)
    cand = cattaneo_sbl(spec, params)
    verdict = cattaneo_entropy_check(spec, params, sample_box(spec.box, cfg.samples, cfg.seed))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path, sbl_path = out / "cattaneo.model", out / "cattaneo.sbl"
    model_path.write_text(dumps_model(system), encoding="utf-8")
    sbl_path.write_text(dumps_candidate(cand), encoding="utf-8")
    report = {
        "schema": SCHEMA_VERSION,
        "command": "cattaneo-derive",
        "config": cfg.to_dict(),
        "internal_energy": str(eps),
        "files": {"model": model_path.name, "sbl": sbl_path.name},
        "entropy": verdict.to_dict(),
    }
    lines = [
        f"wrote {model_path} and {sbl_path}",
        f"entropy-type: {verdict.is_entropy_type} (min production {verdict.min_production:.6g})",
    ]
    _emit(report, cfg, lines)
    if args.require_entropy and not verdict.is_entropy_type:
        return EXIT_FAIL
    return EXIT_PASS


def cmd_export_zoo(args) -> int:
    from .zoo.export import export_zoo

    for path in export_zoo(args.out_dir):
        print(path)
    return EXIT_PASS


COMMANDS = {
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "cattaneo-derive": cmd_cattaneo_derive,
    "export-zoo": cmd_export_zoo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
