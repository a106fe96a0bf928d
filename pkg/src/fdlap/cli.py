"""Command-line harness: ``fdlap <subcommand> [options]``.

Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
3 numerical failure.

Settings are resolved as subcommand defaults, then the JSON ``--config``
file, then explicit flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .continuum import corpus
from .dirichlet import ConvergenceError, assemble, solve
from .experiments import (ConfigError, ExperimentConfig, dumps, emit, run_comparison, run_dirichlet_convergence,
                          run_extension, run_inequalities, run_kernel_validation, run_max_principle)
from .grid import read_grid_csv
from .kernels import TailToleranceError, kernel_csv
from .operators import frac_integral, frac_laplacian, frac_laplacian_by_semigroup, multiplier_oracle
from .quadrature import QuadratureError

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

# per-subcommand defaults, overridden by --config and then by flags
DEFAULTS = {
    "converge-operator": dict(corpus=["holder_0.6", "holder_0.9"], s=[0.1, 0.2], h=[3, 4, 5, 6, 7, 8, 9]),
    "converge-dirichlet": dict(alpha=[0.3], s=[0.2], h=[3, 4, 5, 6, 7]),
    "inequalities": dict(s=[0.2], h=[2, 3, 4, 5, 6, 7]),
    "extension": dict(s=[0.2, 0.4]),
    "max-principle": dict(s=[0.2, 0.5, 0.8], h=[2, 3, 4, 5]),
    "kernel": dict(),
}


def _common() -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--out", default=sup, help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=sup, help="output format")
    g.add_argument("--seed", type=int, default=sup, help="seed for randomised families")
    g.add_argument("--threads", type=int, default=sup, help="worker processes for independent cells")
    g.add_argument("--tol", type=float, default=sup, help="solver / quadrature tolerance")
    g.add_argument("--config", default=sup, help="JSON file mirroring ExperimentConfig")
    return p


def _sweep_flags(p: argparse.ArgumentParser, *, corpus_ids=False, alpha=False) -> None:
    sup = argparse.SUPPRESS
    p.add_argument("--s", type=float, nargs="+", default=sup, help="fractional orders")
    p.add_argument("--h", type=float, nargs="+", default=sup,
                   help="mesh exponents k (h = 2^-k), or sizes with --h-sizes")
    p.add_argument("--h-sizes", dest="h_exponents", action="store_false", default=sup,
                   help="read --h as mesh sizes")
    if corpus_ids:
        p.add_argument("--corpus", nargs="+", default=sup, help="corpus ids")
        p.add_argument("--window", type=float, default=sup, help="half-width of the evaluation window")
        p.add_argument("--quad-tol", dest="quad_tol", type=float, default=sup,
                       help="absolute tolerance of the continuous quadrature")
    if alpha:
        p.add_argument("--alpha", type=float, nargs="+", default=sup, help="Hölder exponents of the source")
        p.add_argument("--R-factor", dest="R_factor", type=float, default=sup,
                       help="R = factor * max(2 R0, h^-alpha)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fdlap", parents=[common],
                                     description="Fractional discrete Laplacian experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common], help="kernel table dump or three-way validation")
    p.add_argument("--s", dest="order", type=float, help="fractional order (table dump)")
    p.add_argument("--h", dest="mesh", type=float, default=1.0, help="mesh size")
    p.add_argument("--radius", type=int, default=100, help="largest |m| in the table")
    p.add_argument("--validate", action="store_true", help="run the kernel validation grid instead")

    p = sub.add_parser("apply", parents=[common], help="apply (-Delta_h)^{+-s} to a grid function CSV")
    p.add_argument("--s", dest="order", type=float, required=True)
    p.add_argument("--input", required=True, help="grid function CSV (j,x,value)")
    p.add_argument("--negative", action="store_true", help="apply (-Delta_h)^{-s} (s < 1/2)")
    p.add_argument("--window", dest="index_window", type=int, nargs=2, metavar=("LO", "HI"),
                   help="output index window")
    p.add_argument("--method", choices=("kernel", "semigroup", "multiplier"), default="kernel")

    p = sub.add_parser("solve", parents=[common], help="nonlocal Dirichlet problem on B_R^h")
    p.add_argument("--s", dest="order", type=float, required=True)
    p.add_argument("--h", dest="mesh", type=float, required=True)
    p.add_argument("--R", dest="radius", type=float, required=True)
    p.add_argument("--rhs", required=True, help="grid function CSV or a constant")
    p.add_argument("--exterior", default="zero", help="grid function CSV, a constant, or 'zero'")

    p = sub.add_parser("converge-operator", parents=[common], help="discrete vs continuous operator rates")
    _sweep_flags(p, corpus_ids=True)

    p = sub.add_parser("converge-dirichlet", parents=[common], help="Dirichlet solutions vs Riesz potential")
    _sweep_flags(p, alpha=True)

    p = sub.add_parser("inequalities", parents=[common], help="HLS, Sobolev and Poincaré scaling")
    _sweep_flags(p)
    p.add_argument("--p", type=float, default=argparse.SUPPRESS, help="Lebesgue exponent of the source")
    p.add_argument("--samples", type=int, default=argparse.SUPPRESS, help="random functions per mesh")

    p = sub.add_parser("extension", parents=[common], help="extension-problem limits on a delta")
    p.add_argument("--s", type=float, nargs="+", default=argparse.SUPPRESS)

    p = sub.add_parser("max-principle", parents=[common], help="maximum principle, barrier, a-priori bound")
    _sweep_flags(p)
    p.add_argument("--instances", type=int, default=50)

    sub.add_parser("corpus", parents=[common], help="list the test-function corpus")
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {"s", "alpha", "h", "h_exponents", "corpus", "window", "R_factor", "p", "samples",
                "tol", "quad_tol", "seed", "threads", "out", "format"}


def _config(args, command: str) -> ExperimentConfig:
    cfg = ExperimentConfig(**DEFAULTS.get(command, {}))
    if getattr(args, "config", None):
        # only the keys present in the file override the subcommand defaults
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if isinstance(data.get("config"), dict):
            data = data["config"]
        cfg = cfg.replace(**data)
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS and v is not None}
    if "h" in overrides and overrides.get("h_exponents", cfg.h_exponents):
        overrides["h"] = [int(v) if float(v).is_integer() else v for v in overrides["h"]]
    return cfg.replace(**overrides)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


def _status(line: str) -> None:
    print(line, file=sys.stderr)


def _number_or_csv(value: str, h: float):
    try:
        return float(value)
    except ValueError:
        pass
    try:
        g = read_grid_csv(value)
    except OSError as exc:
        raise ConfigError(f"cannot read {value}: {exc.strerror}") from None
    if not math.isclose(g.h, h, rel_tol=1e-12):
        raise ConfigError(f"{value} has h={g.h}, expected {h}")
    return g


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_kernel(args) -> int:
    cfg = _config(args, "kernel")
    if args.validate:
        rows = run_kernel_validation(cfg)
        _write(emit(rows, cfg.format, None, cfg), cfg.out)
        failed = [r for r in rows if not r["passed"]]
        for r in failed:
            _status(f"FAIL {r['experiment']} s={r['s']} h={r['h']}: {r['error']:.3e} > {r['threshold']:.0e}")
        _status(f"kernel validation: {len(rows) - len(failed)}/{len(rows)} checks pass")
        return EXIT_FAIL if failed else EXIT_PASS
    if args.order is None:
        raise ConfigError("kernel needs --s (or --validate)")
    if args.radius < 1:
        raise ConfigError("--radius must be positive")
    _write(kernel_csv(args.order, args.mesh, args.radius), cfg.out)
    return EXIT_PASS


def cmd_apply(args) -> int:
    cfg = _config(args, "apply")
    try:
        u = read_grid_csv(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc.strerror}") from None
    window = tuple(args.index_window) if args.index_window else None
    if args.negative:
        if args.method != "kernel":
            raise ConfigError("the negative power is applied by its kernel only")
        v = frac_integral(u, args.order, window=window)
    elif args.method == "kernel":
        v = frac_laplacian(u, args.order, window=window)
    elif args.method == "semigroup":
        v = frac_laplacian_by_semigroup(u, args.order, tol=cfg.tol, window=window)
    else:
        v = multiplier_oracle(u, args.order, window=window)
    _write(v.to_csv(), cfg.out)
    return EXIT_PASS


def cmd_solve(args) -> int:
    cfg = _config(args, "solve")
    f = _number_or_csv(args.rhs, args.mesh)
    g = None if args.exterior == "zero" else _number_or_csv(args.exterior, args.mesh)
    system = assemble(args.order, args.mesh, args.radius, f, g)
    rep = solve(system, cfg.tol)
    _status(f"solve: n={system.n} iterations={rep.iterations} residual={rep.residual:.3e}")
    _write(rep.solution.to_csv(), cfg.out)
    return EXIT_PASS


def _rate_command(reports, cfg: ExperimentConfig) -> int:
    _write(emit(reports, cfg.format, None, cfg), cfg.out)
    bad = 0
    for r in reports:
        band = "" if r.band is None else f" band [{r.band[0]:.2f}, {r.band[1]:.2f}]"
        _status(f"{r.status:>20}  {r.experiment}:{r.case} s={r.s:g} slope={r.slope:.3f}"
                f" residual={r.residual:.3f}{band}")
        bad += not r.passed
    return EXIT_FAIL if bad else EXIT_PASS


def cmd_converge_operator(args) -> int:
    cfg = _config(args, "converge-operator")
    return _rate_command(run_comparison(cfg), cfg)


def cmd_converge_dirichlet(args) -> int:
    cfg = _config(args, "converge-dirichlet")
    return _rate_command(run_dirichlet_convergence(cfg), cfg)


def cmd_inequalities(args) -> int:
    cfg = _config(args, "inequalities")
    res = run_inequalities(cfg)
    if cfg.format == "json":
        text = dumps(res, "json", cfg)
    else:
        rows = []
        for r in res["hls"]:
            for h, ratio in zip(r["h"], r["ratio"]):
                rows.append({"experiment": f"hls:q={r['q']:.6g}", "s": r["s"], "h": h, "error": ratio,
                             "residual": r["spread"]})
        for r in res["sobolev"]:
            rows.append({"experiment": "sobolev:max_over_median", "s": r["s"],
                         "error": r["sobolev_max_over_median"]})
            rows.append({"experiment": "poincare:max_over_median", "s": r["s"],
                         "error": r["poincare_max_over_median"]})
        text = dumps(rows, "csv")
    _write(text, cfg.out)
    for r in res["hls"]:
        _status(f"HLS s={r['s']:g} q={r['q']:.4g}: spread over h {r['spread']:.3f} (limit 0.10)")
    for r in res["sobolev"]:
        _status(f"Sobolev/Poincaré s={r['s']:g}: max/median {r['sobolev_max_over_median']:.2f}, "
                f"{r['poincare_max_over_median']:.2f} (limit 10)")
    return EXIT_PASS if res["passed"] else EXIT_FAIL


def cmd_extension(args) -> int:
    cfg = _config(args, "extension")
    rows = run_extension(cfg)
    _write(emit(rows, cfg.format, None, cfg), cfg.out)
    for r in rows:
        _status(f"{'pass' if r['passed'] else 'FAIL'} {r['experiment']} s={r['s']:g}: "
                f"deviation {r['error']:.3e} (limit {r['threshold']:.0e})")
    return EXIT_PASS if all(r["passed"] for r in rows) else EXIT_FAIL


def cmd_max_principle(args) -> int:
    cfg = _config(args, "max-principle")
    res = run_max_principle(cfg, args.instances)
    if cfg.format == "json":
        text = dumps(res, "json", cfg)
    else:
        rows = [{"experiment": "barrier", **r, "error": r["ratio"]} for r in res["barrier"]]
        rows += [{"experiment": "apriori", **r, "error": r["ratio"]} for r in res["apriori"]]
        text = dumps(rows, "csv")
    _write(text, cfg.out)
    _status(f"maximum principle on {len(res['instances'])} instances: "
            f"{'holds' if res['instances_hold'] else 'VIOLATED'}; barrier constant {res['barrier_constant']:.3f}; "
            f"a-priori max/median {res['apriori_max_over_median']:.3f}")
    return EXIT_PASS if res["passed"] else EXIT_FAIL


def cmd_corpus(args) -> int:
    cfg = _config(args, "corpus")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "class", "k", "alpha", "support", "decay", "kinks"])
    for U in corpus():
        kinks = ";".join(f"{x:g}:{e:g}" for x, e in U.kinks)
        w.writerow([U.id, U.klass, U.k, f"{U.alpha:g}", f"{U.support:g}", U.decay, kinks])
    _write(buf.getvalue(), cfg.out)
    return EXIT_PASS


COMMANDS = {
    "kernel": cmd_kernel,
    "apply": cmd_apply,
    "solve": cmd_solve,
    "converge-operator": cmd_converge_operator,
    "converge-dirichlet": cmd_converge_dirichlet,
    "inequalities": cmd_inequalities,
    "extension": cmd_extension,
    "max-principle": cmd_max_principle,
    "corpus": cmd_corpus,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which is already the config-error code
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        _status(f"configuration error: {exc}")
        return EXIT_CONFIG
    except (QuadratureError, ConvergenceError, TailToleranceError, FloatingPointError, ArithmeticError) as exc:
        _status(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        _status(f"configuration error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
