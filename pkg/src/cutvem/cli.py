"""Command line entry point: ``solve``, ``study``, ``certify`` and ``properties``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .config import KEY_MAP, config_from_mapping, load_config
from .exceptions import CutVEMError
from .harness import DOMAIN, StudyConfig, emit_report, run_convergence_study, solve_vem
from .mesh import build_background_mesh, certify
from .verify import PropertyConfig, run_property_suite

FLAG_TYPES = {
    "n_values": None,
    "alpha_plus": float, "alpha_minus": float, "beta_plus": float, "beta_minus": float,
    "gamma_k": float, "cg_tol": float, "quad_degree": int, "r2": float, "k2": float,
    "interface.name": str, "interface.cx": float, "interface.cy": float, "interface.r": float,
    "output.path": str, "output.format": str,
}


def _flag(key: str) -> str:
    return "--" + key.replace(".", "-").replace("_", "-")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="TOML configuration file")
    for key in KEY_MAP:
        dest = "cfg__" + key.replace(".", "__")
        if key == "n_values":
            p.add_argument(_flag(key), dest=dest, type=int, nargs="+", metavar="N")
        elif key == "output.format":
            p.add_argument(_flag(key), dest=dest, choices=["csv", "markdown"])
        else:
            p.add_argument(_flag(key), dest=dest, type=FLAG_TYPES[key])


def _resolve_config(args) -> StudyConfig:
    cfg = load_config(args.config) if args.config else StudyConfig()
    overrides = {}
    for name, value in vars(args).items():
        if name.startswith("cfg__") and value is not None:
            overrides[name[5:].replace("__", ".")] = value
    return config_from_mapping(overrides, cfg) if overrides else cfg


def cmd_solve(args) -> int:
    cfg = _resolve_config(args)
    n = args.n if args.n is not None else cfg.n_values[0]
    res = solve_vem(cfg.case(), n, cfg.gamma_k, cfg.cg_tol, cfg.quad_degree)
    print(f"N={n} h=1/{n} unknowns={res.n_unknowns} cg_iters={res.iterations} "
          f"residual={res.residual:.3e} seconds={res.seconds:.2f}")
    print(f"e0={res.e0:.6g} e1={res.e1:.6g}")
    return 0


def cmd_study(args) -> int:
    cfg = _resolve_config(args)

    def progress(row):
        if args.verbose:
            status = row.error or f"e0={row.e0:.4g} e1={row.e1:.4g}"
            print(f"N={row.n}: {status}", file=sys.stderr)

    report = run_convergence_study(cfg, progress)
    text = emit_report(report, cfg.output_format)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
        print(f"wrote {cfg.output_path}")
    else:
        sys.stdout.write(text)
    return 0 if all(r.error is None for r in report.rows) else 1


def cmd_certify(args) -> int:
    cfg = _resolve_config(args)
    ls = cfg.case().interface
    ok = True
    for n in cfg.n_values:
        cert = certify(build_background_mesh(n, DOMAIN), ls)
        ok &= cert.passed
        print(f"N={n}: {cert.summary()}")
    return 0 if ok else 1


def cmd_properties(args) -> int:
    pc = PropertyConfig(n_circles=args.circles, n_quads=args.quads,
                        gamma_values=tuple(args.gamma or ()))
    report = run_property_suite(args.seed, pc)
    print(report.text())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cutvem", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="one refinement level, prints e0/e1")
    _add_config_args(p)
    p.add_argument("--n", type=int, help="background mesh size N (default: first of n_values)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("study", help="convergence sweep, writes a report")
    _add_config_args(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("certify", help="geometry certificate for each N")
    _add_config_args(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("properties", help="seeded property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--circles", type=int, default=100)
    p.add_argument("--quads", type=int, default=1000)
    p.add_argument("--gamma", type=float, nargs="*", help="also check rates for these gamma_K")
    p.set_defaults(func=cmd_properties)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (CutVEMError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
