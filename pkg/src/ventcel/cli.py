"""Command-line front end: ``ventcel {check,mesh,solve,study}``.

Exit codes: 0 success, 2 config error, 3 admissibility failure (check only),
4 meshing error, 5 solver error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import analysis, fem, fileio, meshgen
from .config import K_GUARD, load_config, preset
from .errors import ConfigError, ConvergenceError, GeometryError, GradingError, NumericalError
from .geometry import analyze_domain, check_grading_conditions
from .problems import get_problem
from .study import run_study, solve_level

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_MESH, EXIT_SOLVER = 0, 2, 3, 4, 5


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", help="study configuration file")
    src.add_argument("--preset", help="built-in configuration (prism-case-1, prism-case-2, cube)")
    common.add_argument("--mu", type=float, help="override the grading exponent")
    common.add_argument("--out", help="output directory")
    common.add_argument("--allow-large", action="store_true",
                        help=f"permit levels above {K_GUARD}")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ventcel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="check grading admissibility")
    for name, text in (("mesh", "generate and export one mesh level"),
                       ("solve", "solve on one mesh level")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--level", type=int, required=True, help="k with h = 2^-k")
    sub.add_parser("study", parents=[common], help="multi-level convergence study")
    return p


def _load(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    if args.mu is not None:
        cfg.mu = args.mu
    if args.out:
        cfg.out_dir = args.out
    level = getattr(args, "level", None)
    if level is not None:
        if level < 1:
            raise ConfigError("--level: must be at least 1")
        if level > K_GUARD and not args.allow_large:
            raise ConfigError(f"--level: {level} exceeds desk-scale guard {K_GUARD}; "
                              "pass --allow-large to override")
    return cfg.validate(allow_large=args.allow_large)


def cmd_check(cfg) -> int:
    report = check_grading_conditions(cfg.mu, cfg.nu, analyze_domain(cfg.domain()))
    print(report.format_table())
    failed = sorted({r.condition for r in report.failures()})
    print("all conditions pass" if report.passed else f"FAILED conditions: {', '.join(failed)}")
    return EXIT_OK if report.passed else EXIT_ADMISSIBILITY


def cmd_mesh(cfg, k) -> int:
    domain = cfg.domain()
    spec = meshgen.GradingSpec.for_level(k, cfg.mu, cfg.R0)
    mesh = meshgen.generate_mesh(domain, spec)
    os.makedirs(cfg.out_dir, exist_ok=True)
    fileio.write_mesh_text(mesh, os.path.join(cfg.out_dir, f"mesh_k{k}.txt"))
    fileio.write_mesh_vtk(mesh, os.path.join(cfg.out_dir, f"mesh_k{k}.vtk"))
    meshgen.mesh_size_report(mesh, domain, spec).to_csv(
        os.path.join(cfg.out_dir, f"sizes_k{k}.csv"))
    print(f"N_tets={mesh.n_tets} n_free={int(mesh.free_mask.sum())} h={spec.h:g}")
    return EXIT_OK


def cmd_solve(cfg, k) -> int:
    problem = get_problem(cfg.data)
    sol = solve_level(cfg.domain(), k, cfg.mu, problem, cfg.R0, cfg.rel_tol, cfg.max_iter)
    os.makedirs(cfg.out_dir, exist_ok=True)
    fileio.write_vector(sol.values, os.path.join(cfg.out_dir, f"u_k{k}.txt"))
    fileio.write_solution_vtk(sol, os.path.join(cfg.out_dir, f"u_k{k}.vtk"))
    m = sol.meta
    line = (f"h={2.0 ** -k:g} n_free={m['n_free']} iterations={m['iterations']} "
            f"residual={m['residual']:.3e} max|u|={abs(sol.values).max():.6e}")
    if problem.has_exact:
        err = analysis.vnorm_error_exact(sol, problem.exact, problem.grad)
        line += f" vnorm_error={err:.6e}"
    print(line)
    return EXIT_OK


def cmd_study(cfg) -> int:
    report_ok = check_grading_conditions(cfg.mu, cfg.nu, analyze_domain(cfg.domain())).passed
    if not report_ok:
        print("warning: grading parameters violate admissibility conditions; "
              "first-order convergence is not expected", file=sys.stderr)
    problem = get_problem(cfg.data)
    if not problem.has_exact and cfg.k_max < cfg.k_min + 2:
        raise ConfigError("study.k_max: successive-difference rates need k_max >= k_min + 2")
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "study.csv")

    def flush(report):
        with open(path, "w") as fh:
            fh.write(report.to_csv())

    result = run_study(cfg.domain(), cfg.mu, cfg.k_min, cfg.k_max, problem, cfg.R0,
                       cfg.rel_tol, cfg.max_iter, on_level=flush)
    title = f"{result.report.kind}  face={cfg.ventcel_face}  mu={cfg.mu}  nu={cfg.nu}"
    print(result.report.format_table(title))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "mesh":
            return cmd_mesh(cfg, args.level)
        if args.command == "solve":
            return cmd_solve(cfg, args.level)
        return cmd_study(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GradingError, GeometryError) as exc:
        print(f"meshing error: {exc}", file=sys.stderr)
        return EXIT_MESH
    except (ConvergenceError, NumericalError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
