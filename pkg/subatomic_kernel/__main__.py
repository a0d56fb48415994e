import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import uvicorn

from subatomic_kernel.app import app
from subatomic_kernel.config import config
from subatomic_kernel.errors import (
    ConfigurationError,
    KernelError,
    NotInterpretable,
    ParseError,
    SignatureError,
    SystemDefinitionError,
    TheoryError,
)
from subatomic_kernel.services.derivation_service import (
    check,
    is_proof,
    length_plus,
    parse_derivation,
    render_derivation,
    up_rule_steps,
)
from subatomic_kernel.services.formula import App, parse_path, render_formula, subterm_at
from subatomic_kernel.services.interpretation_service import (
    audit_preservable,
    builtin_map,
    builtin_map_names,
    export_ordinary,
    interpret_derivation,
    interpret_formula,
    parse_ordinary_derivation,
    render_ordinary,
    represent_derivation,
    represent_formula,
)
from subatomic_kernel.services.oracle_service import (
    CorpusSpec,
    SearchConfig,
    SearchStatus,
    prove,
    random_derivation,
    read_corpus,
    size_report,
    write_corpus,
)
from subatomic_kernel.services.splitting_service import (
    context_reduce,
    eliminate_cuts,
    shallow_split,
)
from subatomic_kernel.services.system_service import (
    SystemDef,
    builtin_names,
    lint_splittable,
    load_builtin,
    load_system,
    render_system,
    resolve_system,
)

logger = logging.getLogger("subatomic-kernel")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2

# Errors about the input itself rather than the question asked of it
_USAGE_ERRORS = (ParseError, SignatureError, SystemDefinitionError, TheoryError, ConfigurationError, OSError)


# ---------------------------------------------------------------------------
# Input and output helpers
# ---------------------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _system(ref: str) -> SystemDef:
    """A built-in name, a ``.sas`` file, or an inline document."""
    if ref in builtin_names():
        return load_builtin(ref)
    if "\n" in ref:
        return resolve_system(ref)
    path = Path(ref)
    if path.is_file():
        return load_system(path.read_text(), source=str(path))
    return resolve_system(ref)


def _formula_text(ref: str) -> str:
    path = Path(ref)
    if ref.endswith(".saf") and path.is_file():
        return path.read_text()
    return ref


def _derivation(args: argparse.Namespace, system: SystemDef):
    return parse_derivation(_read(args.derivation), system, args.derivation)


def _emit(args: argparse.Namespace, name: str, text: str) -> None:
    """Write ``text`` to ``name`` under ``--out-dir``, or print it with a header."""
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text.rstrip("\n") + "\n")
        logger.info("Wrote %s", out / name)
    else:
        print(f"; {name}")
        print(text.rstrip("\n"))


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2))


def _print_trace(trace: Optional[list[tuple[int, str]]]) -> None:
    for case, f in trace or []:
        print(f"# case {case}: {f}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_check(args: argparse.Namespace) -> int:
    system = _system(args.system)
    d = _derivation(args, system)
    check(d, system)
    payload = {
        "valid": True,
        "proof": is_proof(d, system),
        "premiss": render_formula(d.premiss),
        "conclusion": render_formula(d.conclusion),
        "length_plus": length_plus(d, system),
    }
    if args.json:
        _print_json(payload)
    else:
        kind = "proof" if payload["proof"] else "derivation"
        print(f"valid {kind} in {system.name}: {payload['premiss']} -> {payload['conclusion']}")
    return EXIT_OK


def _cmd_lint(args: argparse.Namespace) -> int:
    report = lint_splittable(_system(args.system))
    if args.json:
        _print_json(report.to_dict())
    else:
        print(report.render())
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def _cmd_split(args: argparse.Namespace) -> int:
    system = _system(args.system)
    d = _derivation(args, system)
    path = parse_path(args.at)
    node = subterm_at(d.conclusion, path)
    if not isinstance(node, App):
        raise ParseError(f"no connective at {args.at}")
    trace: Optional[list[tuple[int, str]]] = [] if args.trace else None
    result = shallow_split(d, node.conn, path, system, trace)
    _print_trace(trace)
    if args.json:
        _print_json(result.to_dict(system))
        return EXIT_OK
    print(f"Q1 = {render_formula(result.q1)}")
    print(f"Q2 = {render_formula(result.q2)}")
    for name, part in (("psi", result.psi), ("phi1", result.phi1), ("phi2", result.phi2)):
        _emit(args, f"{name}.sad", render_derivation(part))
    return EXIT_OK


def _cmd_ctxred(args: argparse.Namespace) -> int:
    system = _system(args.system)
    d = _derivation(args, system)
    trace: Optional[list[tuple[int, str]]] = [] if args.trace else None
    result = context_reduce(d, parse_path(args.at), system, trace)
    _print_trace(trace)
    if args.json:
        _print_json(result.to_dict())
        return EXIT_OK
    print(f"K = {render_formula(result.k)}")
    print(f"H = {render_formula(result.h.tree)}")
    _emit(args, "zeta.sad", render_derivation(result.zeta))
    _emit(args, "chi.sad", render_derivation(result.chi(result.a)))
    return EXIT_OK


def _cmd_cut_elim(args: argparse.Namespace) -> int:
    system = _system(args.system)
    d = _derivation(args, system)
    trace: Optional[list[tuple[int, str]]] = [] if args.trace else None
    cuts = len(up_rule_steps(d, system))
    out = eliminate_cuts(d, system, trace)
    _print_trace(trace)
    if args.json:
        _print_json({
            "cuts": cuts,
            "conclusion": render_formula(out.conclusion),
            "length_plus": length_plus(out, system),
            "proof": render_derivation(out),
        })
    elif args.out_dir:
        _emit(args, f"{Path(args.derivation).stem}.cutfree.sad", render_derivation(out))
    else:
        print(render_derivation(out))
    return EXIT_OK


def _cmd_interpret(args: argparse.Namespace) -> int:
    m = builtin_map(args.map)
    if args.formula is not None:
        try:
            image = interpret_formula(m.system.parse(_formula_text(args.formula), "formula"), m)
        except NotInterpretable as e:
            if args.json:
                _print_json({"interpretable": False, "path": e.path})
            else:
                print(f"not interpretable: {e}")
            return EXIT_NEGATIVE
        if args.json:
            _print_json({"interpretable": True, "ordinary": render_ordinary(image)})
        else:
            print(render_ordinary(image))
        return EXIT_OK
    d = parse_derivation(_read(args.derivation), m.system, args.derivation)
    print(export_ordinary(interpret_derivation(d, m), m), end="")
    return EXIT_OK


def _cmd_represent(args: argparse.Namespace) -> int:
    m = builtin_map(args.map)
    if args.formula is not None:
        print(render_formula(represent_formula(m.parse(_formula_text(args.formula), "formula"), m)))
        return EXIT_OK
    d = parse_ordinary_derivation(_read(args.derivation), m, args.derivation)
    print(render_derivation(represent_derivation(d, m)))
    return EXIT_OK


def _cmd_prove(args: argparse.Namespace) -> int:
    system = _system(args.system)
    f = system.parse(_formula_text(args.formula), "formula")
    result = prove(f, system, SearchConfig(depth=args.depth, budget=args.budget))
    if args.json:
        _print_json(result.to_dict())
    elif result.proof is not None:
        print(render_derivation(result.proof))
    else:
        print(f"{result.status.value}: no proof of {render_formula(f)} within depth {args.depth}")
    return EXIT_OK if result.status == SearchStatus.PROVED else EXIT_NEGATIVE


def _corpus_spec(args: argparse.Namespace) -> CorpusSpec:
    return CorpusSpec(
        system=args.system,
        seed=args.seed,
        min_nodes=args.min_nodes,
        max_nodes=args.max_nodes,
        atoms=args.atoms,
        cuts=args.cuts,
        steps=args.steps,
    )


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = _corpus_spec(args)
    if args.out_dir:
        manifest = write_corpus(spec, args.count, Path(args.out_dir))
        print(manifest)
        return EXIT_OK
    for i in range(args.count):
        proof = random_derivation(replace(spec, seed=spec.seed + i))
        print(render_derivation(proof))
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    m = builtin_map(args.map)
    report = audit_preservable(m.system, m, args.samples, args.seed)
    if args.json:
        _print_json(report.to_dict())
    else:
        print(report.render())
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.corpus:
        system, entries = read_corpus(Path(args.corpus))
    else:
        spec = _corpus_spec(args)
        system = _system(args.system)
        entries = [
            (f"{i:04d}", random_derivation(replace(spec, seed=spec.seed + i), system))
            for i in range(args.count)
        ]
    report = size_report(entries, system)
    if args.json:
        _print_json(report.to_dict())
    else:
        print(report.render())
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    logger.info("Starting subatomic-kernel server")
    logger.info("Enabled tool groups: %s", ", ".join(sorted(config.enabled_tools)))
    logger.info("Server: http://%s:%d", args.host, args.port)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _cmd_systems(args: argparse.Namespace) -> int:
    if args.name:
        print(render_system(_system(args.name)), end="")
    elif args.json:
        _print_json({"systems": builtin_names(), "maps": builtin_map_names()})
    else:
        for name in builtin_names():
            print(name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(prog="subatomic", description="Subatomic proof system kernel.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    def system_flag(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("-s", "--system", required=required, help="built-in name, .sas file or document")

    def out_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("-o", "--out-dir", help="write documents to this directory")

    def corpus_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=config.seed)
        p.add_argument("--count", type=int, default=1)
        p.add_argument("--cuts", type=int, default=0)
        p.add_argument("--min-nodes", type=int, default=1)
        p.add_argument("--max-nodes", type=int, default=15)
        p.add_argument("--atoms", type=int, default=2)
        p.add_argument("--steps", type=int, default=12)

    p = command("check", _cmd_check, "check a derivation")
    system_flag(p)
    p.add_argument("derivation", help=".sad file or - for stdin")

    p = command("lint", _cmd_lint, "check the splittability conditions")
    system_flag(p)

    for name, handler, help_text in (("split", _cmd_split, "shallow splitting"),
                                     ("ctxred", _cmd_ctxred, "context reduction")):
        p = command(name, handler, help_text)
        system_flag(p)
        p.add_argument("--at", required=True, help="position in the conclusion, e.g. l.r")
        p.add_argument("--trace", action="store_true", help="print dispatched cases on stderr")
        out_flag(p)
        p.add_argument("derivation")

    p = command("cut-elim", _cmd_cut_elim, "eliminate all cuts")
    system_flag(p)
    p.add_argument("--trace", action="store_true", help="print dispatched cases on stderr")
    out_flag(p)
    p.add_argument("derivation")

    for name, handler, help_text in (("interpret", _cmd_interpret, "ordinary reading"),
                                     ("represent", _cmd_represent, "subatomic representation")):
        p = command(name, handler, help_text)
        p.add_argument("-m", "--map", required=True, choices=builtin_map_names())
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--formula", help="formula text or .saf file")
        group.add_argument("derivation", nargs="?", help="derivation file")

    p = command("prove", _cmd_prove, "bounded proof search")
    system_flag(p)
    p.add_argument("-d", "--depth", type=int, default=config.search_depth)
    p.add_argument("--budget", type=int, default=config.step_budget)
    p.add_argument("formula", help="formula text or .saf file")

    p = command("gen", _cmd_gen, "generate random proofs")
    system_flag(p)
    corpus_flags(p)
    out_flag(p)

    p = command("audit", _cmd_audit, "sample the preservability conditions")
    p.add_argument("-m", "--map", required=True, choices=builtin_map_names())
    p.add_argument("--samples", type=int, default=config.audit_samples)
    p.add_argument("--seed", type=int, default=config.seed)

    p = command("bench", _cmd_bench, "cut-elimination size and runtime report")
    system_flag(p, required=False)
    corpus_flags(p)
    p.add_argument("--corpus", help="directory written by gen -o")

    p = command("serve", _cmd_serve, "run the MCP tool server")
    p.add_argument("--host", default=config.host)
    p.add_argument("--port", type=int, default=config.port)

    p = command("systems", _cmd_systems, "list built-in systems or print one")
    p.add_argument("name", nargs="?")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)

    if args.command == "bench" and not (args.corpus or args.system):
        print("bench needs --system or --corpus", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args)
    except _USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KernelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NEGATIVE


def main() -> None:
    # Configure logging to stderr (stdout carries documents and reports)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sys.exit(run())


if __name__ == "__main__":
    main()
