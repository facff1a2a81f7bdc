"""Command-line front end.

Subcommands::

    stencilcert weights  --config cfg.json [--points X.csv] [--z 0.5] [--out w.csv]
    stencilcert certify  --config cfg.json [--out report.json]
    stencilcert growth   --config cfg.json [--out growth.json]
    stencilcert converge --config cfg.json --levels 1,0.5,0.25,0.125 [--out conv.json]

Exit codes: 0 success, 1 configuration or I/O error, 2 inconsistent moment
system, 3 singular saddle-point system.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .accuracy import power_function
from .bounds import DEFAULT_SAMPLES, DEFAULT_SEED, assemble_error_bound, bound_parameters
from .config import SCHEMA_VERSION, ProblemConfig, load_config
from .convergence import TestFunction, run_convergence
from .errors import ConfigError, StencilCertError
from .growth import growth_dual
from .report import csv_text, dumps, write_text
from .stencil import StencilProblem, compute_weights

logger = logging.getLogger("stencilcert")


def _problem(cfg: ProblemConfig) -> StencilProblem:
    try:
        return StencilProblem(cfg.kernel, cfg.operator, cfg.point_set)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _header(cfg: ProblemConfig, command: str) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "kernel": cfg.kernel.describe(),
        "operator": cfg.operator.to_json(),
        "z": cfg.z.tolist(),
        "n_nodes": int(cfg.nodes.shape[0]),
    }


def _seed(cfg: ProblemConfig) -> int:
    return DEFAULT_SEED if cfg.seed is None else cfg.seed


def _sibling(path: str, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + suffix)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(out, text)


def cmd_weights(cfg: ProblemConfig) -> int:
    prob = _problem(cfg)
    res = compute_weights(prob)
    weights_csv = csv_text(res.weights)
    report = _header(cfg, "weights")
    report["weights"] = res.weights
    report["diagnostics"] = res.diagnostics
    if cfg.out is None:
        sys.stdout.write(weights_csv)
    else:
        write_text(cfg.out, weights_csv)
        write_text(_sibling(cfg.out, ".json"), dumps(report))
    return 0


def cmd_certify(cfg: ProblemConfig) -> int:
    prob = _problem(cfg)
    res = compute_weights(prob)
    pw = power_function(prob, res)
    bd = assemble_error_bound(
        prob,
        seminorm_mode=cfg.seminorm_mode,
        samples=cfg.seminorm_samples or DEFAULT_SAMPLES,
        seed=_seed(cfg),
        result=res,
        power=pw,
        q=cfg.q,
        mu=cfg.mu,
    )
    report = _header(cfg, "certify")
    report.update(
        {
            "p": pw.p,
            "rho": bd.to_json()["rho"],
            "rhs": bd.to_json()["rhs"],
            "certified": bd.certified,
            "weights": res.weights,
            "diagnostics": res.diagnostics,
            "power": pw.to_json(),
            "growth": bd.rho.to_json(),
            "bound": bd.to_json(),
        }
    )
    _emit(dumps(report), cfg.out)
    return 0


def cmd_growth(cfg: ProblemConfig) -> int:
    prob = _problem(cfg)
    q0, mu0 = bound_parameters(prob.kernel, prob.s)
    q = q0 if cfg.q is None else cfg.q
    mu = mu0 if cfg.mu is None else cfg.mu
    g = growth_dual(prob.ps, q, prob.D, mu)
    report = _header(cfg, "growth")
    report.update(g.to_json())
    if cfg.out is not None and g.finite:
        cert = _sibling(cfg.out, "_certificate.csv")
        write_text(cert, csv_text(g.dual_weights))
        report["certificate"] = cert.name
    _emit(dumps(report), cfg.out)
    return 0


def cmd_converge(cfg: ProblemConfig) -> int:
    if cfg.levels is None:
        raise ConfigError("converge needs --levels or a 'levels' field")
    prob = _problem(cfg)
    tf = cfg.test_function
    try:
        f = TestFunction(tf["name"], prob.ps.dim, tf.get("c"), tf.get("phase", 0.3))
        rep = run_convergence(
            prob.kernel,
            prob.D,
            prob.ps,
            cfg.levels,
            s=prob.s,
            test_function=f,
            seminorm_mode=cfg.seminorm_mode,
            samples=cfg.seminorm_samples or DEFAULT_SAMPLES,
            seed=_seed(cfg),
            q=cfg.q,
            mu=cfg.mu,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = _header(cfg, "converge")
    report.update(rep.to_json())
    if cfg.out is not None:
        rows = _sibling(cfg.out, "_rows.csv")
        write_text(rows, csv_text(rep.csv_rows(), header=["h", "error", "p", "rhs"]))
        report["rows_csv"] = rows.name
    _emit(dumps(report), cfg.out)
    return 0


COMMANDS = {
    "weights": cmd_weights,
    "certify": cmd_certify,
    "growth": cmd_growth,
    "converge": cmd_converge,
}


class _Parser(argparse.ArgumentParser):
    # usage errors map to exit code 1; argparse would use 2, which means
    # an inconsistent moment system here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stencilcert",
        description="Kernel-based differentiation stencils with certified error bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " subcommand")
        p.add_argument("--config", required=True, help="problem configuration (JSON)")
        p.add_argument("--points", help="node CSV, overrides the config")
        p.add_argument("--z", help="stencil center as comma-separated coordinates")
        p.add_argument("--out", help="output file; related artifacts are written alongside")
        p.add_argument("--seed", type=int, help="seed for sampled seminorm estimates")
        if name == "converge":
            p.add_argument("--levels", help='dilation factors, e.g. "1,0.5,0.25,0.125"')
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = load_config(
            args.config,
            points=args.points,
            z=args.z,
            seed=args.seed,
            out=args.out,
            levels=getattr(args, "levels", None),
        )
        return COMMANDS[args.command](cfg)
    except StencilCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
