"""Command-line interface.

Exit codes: 0 success (or no jump detected), 2 jump detected by
``jump-verdict``, 1 any validation or usage error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Sequence

import numpy as np

from . import report
from .config import Config, ConfigError, load_config
from .dgla import kuranishi_solve
from .errors import ModelError
from .hodge import hodge_data
from .jump import extend_class, extension_side, jump_verdict, obstruction_map_image
from .modelfile import ModelFile, dump, dumps, load
from .models.fixtures import FIXTURES, build_model
from .oracle import jump_oracle
from .series import check_integrability

EXIT_OK, EXIT_ERROR, EXIT_JUMP = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


_FLAG_SETTINGS = {
    "rank_tol": float,
    "hodge_tol": float,
    "obstruction_tol": float,
    "oracle_tol": float,
    "samples": int,
    "modulus_low": float,
    "modulus_high": float,
    "seed": int,
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="JSON file with configuration overrides")
    g.add_argument("--show-config", action="store_true", help="print the effective configuration and exit")
    g.add_argument("--format", choices=("text", "structured"), help="output format (default: text)")
    for name, kind in _FLAG_SETTINGS.items():
        g.add_argument("--" + name.replace("_", "-"), type=kind, metavar=kind.__name__.upper())
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(
        prog="cohjump",
        description="Decide order by order whether dim H^q jumps along a one-parameter deformation.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        return p

    p = cmd("validate", "check a model file and the integrability of its series")
    p.add_argument("model")
    p.add_argument("--order", type=int, help="truncation order for the integrability check")

    p = cmd("hodge-report", "Betti numbers and Hodge identity residuals of the complex")
    p.add_argument("model")

    p = cmd("mc-solve", "Kuranishi recursion on the DGLA section")
    p.add_argument("model")
    p.add_argument("--xi", required=True, help="index into the harmonic basis of L^1, or comma-separated coefficients")
    p.add_argument("--order", type=int)
    p.add_argument("--obstruction-factor", type=float, default=0.5, choices=(0.5, 1.0),
                   help="factor in front of H[x, x] (0.5 makes ob = 0 equivalent to Maurer-Cartan)")

    p = cmd("extend", "canonical extension of a closed class")
    p.add_argument("model")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--class", dest="klass", required=True,
                   help="index into the harmonic basis of H^q, or comma-separated coefficients")
    p.add_argument("--order", type=int)

    p = cmd("obstructions", "images of the truncated obstruction maps out of a degree")
    p.add_argument("model")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--order", type=int)

    p = cmd("jump-verdict", "scan both obstruction families (exit 2 on a jump)")
    p.add_argument("model")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--order", type=int)

    p = cmd("oracle-compare", "brute-force dimensions at sampled t against the verdict")
    p.add_argument("model")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--order", type=int)

    p = cmd("models", "build or list fixture models")
    msub = p.add_subparsers(dest="models_command", parser_class=_Parser)
    b = msub.add_parser("build", help="emit a model file for a built-in fixture or a nilmanifold spec file")
    b.add_argument("spec", help=f"fixture name ({', '.join(sorted(FIXTURES))}) or path to a spec file")
    b.add_argument("-o", "--output", help="write here instead of stdout")
    msub.add_parser("list", help="list built-in fixtures")
    return parser


def _config(args: argparse.Namespace) -> Config:
    flags = {k: getattr(args, k) for k in _FLAG_SETTINGS if hasattr(args, k)}
    order = getattr(args, "order", None)
    if order is not None:
        flags["order"] = order
    return load_config(getattr(args, "config", None), flags)


def parse_vector(text: str, basis: np.ndarray, what: str) -> np.ndarray:
    """An index into the columns of ``basis`` or explicit coefficients."""
    text = text.strip()
    if "," not in text:
        try:
            i = int(text)
        except ValueError:
            pass
        else:
            if not 0 <= i < basis.shape[1]:
                raise UsageError(f"{what}: index {i} out of range, the harmonic basis has {basis.shape[1]} elements")
            return basis[:, i].copy()
    try:
        v = np.array([complex(s.strip().replace(" ", "")) for s in text.split(",") if s.strip()], dtype=complex)
    except ValueError:
        raise UsageError(f"{what}: expected an index or comma-separated numbers such as '1,0,0.5j'") from None
    if v.shape != (basis.shape[0],):
        raise UsageError(f"{what}: expected {basis.shape[0]} coefficients, got {v.size}")
    return v


def _run(args: argparse.Namespace, cfg: Config) -> tuple[dict | None, int]:
    command = args.command
    if command == "models":
        if args.models_command == "list":
            for name in sorted(FIXTURES):
                print(name)
            return None, EXIT_OK
        if args.models_command != "build":
            raise UsageError("models needs a subcommand: build or list")
        m = build_model(args.spec)
        if args.output:
            dump(m, args.output)
        else:
            from .modelfile import model_to_doc

            sys.stdout.write(dumps(model_to_doc(m)))
        return None, EXIT_OK

    model: ModelFile = load(args.model, tol=cfg.hodge_tol, rank_tol=cfg.rank_tol)
    cx = model.complex
    N = cfg.order

    if command == "validate":
        integ = None
        if model.sources():
            P = model.series(N if model.polynomial else None)
            integ = check_integrability(P, cfg.hodge_tol, raise_on_fail=True)
        return report.envelope(command, model, cfg, report.validate_report(model, integ)), EXIT_OK

    if command == "hodge-report":
        hd = hodge_data(cx, cfg.rank_tol)
        return report.envelope(command, model, cfg, report.hodge_report(cx, hd)), EXIT_OK

    if command == "mc-solve":
        if model.dgla is None:
            raise UsageError("mc-solve needs a model with a dgla section")
        L = model.dgla
        xi = parse_vector(args.xi, L.hodge.harmonic_basis[1], "--xi")
        sol = kuranishi_solve(L, xi, N, obstruction_factor=args.obstruction_factor, tol=cfg.hodge_tol)
        return report.envelope(command, model, cfg, report.mc_report(L, xi, sol, cfg.obstruction_tol), N), EXIT_OK

    P = model.series(N)
    hd = hodge_data(cx, cfg.rank_tol)
    q = args.degree
    cx.check_degree(q)

    if command == "extend":
        alpha = parse_vector(args.klass, hd.harmonic_basis[q], "--class")
        ext = extend_class(P, hd, alpha, q, N, cfg.obstruction_tol, cfg.hodge_tol)
        return report.envelope(command, model, cfg, report.extension_report(P, hd, ext), N), EXIT_OK

    if command == "obstructions":
        check_integrability(P, cfg.hodge_tol, raise_on_fail=True)
        images = [obstruction_map_image(P, hd, q, n, cfg.obstruction_tol, cfg.rank_tol) for n in range(1, N + 1)]
        first, _ = extension_side(P, hd, q, N, cfg.obstruction_tol)
        return report.envelope(command, model, cfg, report.obstructions_report(images, first), N), EXIT_OK

    if command == "jump-verdict":
        v = jump_verdict(P, hd, q, N, cfg.obstruction_tol, cfg.rank_tol, cfg.hodge_tol)
        doc = report.envelope(command, model, cfg, report.verdict_doc(v), N)
        return doc, EXIT_JUMP if v.jump else EXIT_OK

    if command == "oracle-compare":
        o = jump_oracle(P, q, cfg.sample_spec, cfg.oracle_tol)
        v = jump_verdict(P, hd, q, N, cfg.obstruction_tol, cfg.rank_tol, cfg.hodge_tol)
        return report.envelope(command, model, cfg, report.compare_doc(o, v), N), EXIT_OK

    raise UsageError(f"unknown command {command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "show_config", False):
        for k, v in cfg.as_dict().items():
            print(f"{k} = {v}")
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("cohjump: error: a command is required", file=sys.stderr)
        return EXIT_ERROR
    fmt = getattr(args, "format", "text")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            doc, code = _run(args, cfg)
        except (ModelError, UsageError) as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        except OSError as exc:
            print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
            return EXIT_ERROR
    if doc is None:
        return code
    seen = []
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.append(msg)
    doc["warnings"] = seen
    if fmt == "structured":
        sys.stdout.write(dumps(doc))
    else:
        sys.stdout.write(report.render_text(doc))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
