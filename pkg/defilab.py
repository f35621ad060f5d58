"""
Command-line front end for defilab.

Data goes to standard output, status lines and logs to standard error.
Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.
"""
import argparse
import json
import logging
import os
import random
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from config import Config
from errors import DefilabError, InvalidCertificateError, PreconditionError
from logic.cells import qf_evaluate, qfnf_text
from logic.evaluate import evaluate, witness_radii
from logic.formula import free_vars, quantifier_depth, render
from logic.parser import parse, parse_file
from logic.qe import eliminate
from models.complexity import block_table, growth_fit, recurrent_table, rect_count
from models.definability import classify_definability
from models.performance_tracker import performance_tracker
from models.periodicity import (
    NEIGHBORHOODS, global_periods_report, local_period_report, minimal_local_period,
    mh_classify_1d, muchnik_report, nivat_probe, repetitivity_report, tail_periods_1d,
    verify_local_periodicity,
)
from models.point_sets import EXAMPLES, GridSet, PointSet, SymbolicSet, get_example
from models.raster import Grid, from_json, rasterize, to_ascii, to_json, to_pbm
from models.schemas import LocalPeriodicityCert, PeriodSearchParams
from models.window import Window

logger = logging.getLogger("defilab")

FORMATS = ("text", "csv", "json", "ascii", "pbm")
_VARIABLE_RANK = {name: k for k, name in enumerate(("x", "y", "z", "w"))}
_POWER = re.compile(r"\(([01]+)\)\^(\d+)")
_NEGATIVE_VALUE = re.compile(r"^-\d")
_SWITCHES = {"--verbose", "--stats", "--stabilize", "--fit"}


class UsageError(Exception):
    """Well-formed arguments that do not fit the subcommand"""


# ---------------------------------------------------------------------- parsing helpers


def parse_vector(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(a) for a in text.strip("()[] ").split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_vectors(text: str) -> List[Tuple[int, ...]]:
    """'1,1;1,0' or '[[1,1],[1,0]]'"""
    if text.strip().startswith("["):
        try:
            return [tuple(int(a) for a in v) for v in json.loads(text)]
        except (ValueError, TypeError):
            raise UsageError(f"malformed vector list {text!r}") from None
    return [parse_vector(part) for part in text.split(";") if part.strip()]


def parse_n_range(text: str) -> range:
    """'A..B' or a single 'N'"""
    match = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", text)
    if not match:
        raise UsageError(f"expected --n A..B, got {text!r}")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) else lo
    if lo < 1 or hi < lo:
        raise UsageError(f"need 1 <= A <= B in --n {text}")
    return range(lo, hi + 1)


def expand_word(text: str) -> List[int]:
    """Binary word with optional powers: '0(01)^200'"""
    flat = _POWER.sub(lambda m: m.group(1) * int(m.group(2)), text.replace(" ", ""))
    if not flat or flat.strip("01"):
        raise UsageError(f"a word is made of 0, 1 and (u)^k powers, got {text!r}")
    return [int(c) for c in flat]


def formula_variables(formula) -> Tuple[str, ...]:
    """Free variables with x, y, z, w first, then by first appearance"""
    names = free_vars(formula)
    return tuple(sorted(names, key=lambda v: (_VARIABLE_RANK.get(v, len(_VARIABLE_RANK)), names.index(v))))


# ---------------------------------------------------------------------- source handling


def load_formula(args):
    if args.formula is not None:
        return parse(args.formula)
    if args.formula_file is not None:
        return parse_file(args.formula_file)
    raise UsageError("this subcommand needs --formula or --formula-file")


def load_set(args) -> PointSet:
    if args.example is not None:
        return get_example(args.example)
    if args.grid_json is not None:
        grid = from_json(Path(args.grid_json).read_text(encoding="utf-8"))
        return GridSet(grid, name=Path(args.grid_json).stem)
    if args.formula is None and args.formula_file is None:
        raise UsageError("give one of --formula, --formula-file, --example or --grid-json")
    formula = load_formula(args)
    variables = formula_variables(formula)
    q = eliminate(formula, variables, args.budget_cells, args.budget_bits)
    return SymbolicSet(q, "formula", formula)


def resolve_window(args, s: PointSet, required: bool = True) -> Optional[Window]:
    if args.window:
        return Window.parse(args.window, s.variables)
    if isinstance(s, GridSet):
        return s.grid.window
    if required:
        raise UsageError(f"{args.command} needs --window")
    return None


def grid_for(args, s: PointSet) -> Grid:
    if isinstance(s, GridSet) and not args.window:
        return s.grid
    return rasterize(s, resolve_window(args, s), args.threads)


def require(args, *names: str) -> None:
    missing = [name for name in names if getattr(args, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise UsageError(f"{args.command} needs {flags}")


# ---------------------------------------------------------------------- output


def status(message: str) -> None:
    print(message, file=sys.stderr)


def emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def emit_model(model) -> None:
    emit(model.model_dump_json(indent=2))


def emit_grid(grid: Grid, fmt: Optional[str]) -> None:
    if fmt == "json":
        emit(to_json(grid))
    elif fmt == "pbm":
        emit(to_pbm(grid).decode("ascii"))
    else:
        emit(to_ascii(grid))


def emit_table(table, fmt: Optional[str]) -> None:
    if fmt == "json":
        emit(json.dumps([row.model_dump() for row in table.rows], indent=2))
    elif fmt == "text":
        emit(table.to_text())
    else:
        emit(table.to_csv())


# ---------------------------------------------------------------------- subcommands


def cmd_parse(args) -> int:
    formula = load_formula(args)
    if args.format == "json":
        emit(json.dumps({"formula": render(formula), "free": formula_variables(formula),
                         "quantifier_depth": quantifier_depth(formula)}, indent=2))
    else:
        emit(render(formula))
    return 0


def cmd_qe(args) -> int:
    formula = load_formula(args)
    variables = formula_variables(formula)
    q = eliminate(formula, variables, args.budget_cells, args.budget_bits)
    emit(qfnf_text(q))
    if args.self_check:
        window = Window.parse(args.window, variables) if args.window else Window.centered(15, len(variables))
        radii = witness_radii(formula, variables, window.radius)
        rng = random.Random(args.seed)
        for _ in range(args.self_check):
            point = tuple(rng.randint(lo, hi) for lo, hi in window.bounds)
            expected = evaluate(formula, dict(zip(variables, point)), radii)
            if qf_evaluate(q, point) != expected:
                status(f"❌ self-check mismatch at {point}: bounded evaluation gives {expected}")
                return 1
        status(f"✅ self-check passed on {args.self_check} points of {window}")
    return 0


def cmd_eval(args) -> int:
    require(args, "point")
    s = load_set(args)
    emit("true" if s.membership(parse_vector(args.point)) else "false")
    return 0


def cmd_raster(args) -> int:
    s = load_set(args)
    emit_grid(grid_for(args, s), args.format)
    return 0


def cmd_complexity(args) -> int:
    require(args, "n")
    s = load_set(args)
    table = block_table(s, parse_n_range(args.n), resolve_window(args, s), args.threads)
    if args.fit:
        emit_model(growth_fit(table))
    else:
        emit_table(table, args.format)
    return 0


def cmd_recurrent(args) -> int:
    require(args, "n")
    s = load_set(args)
    window = resolve_window(args, s, required=not args.stabilize)
    table = recurrent_table(s, parse_n_range(args.n), window, args.stabilize, args.escape, args.threads)
    unstable = [row.n for row in table.rows if not row.stabilized]
    if args.stabilize and unstable:
        status(f"⚠️ counts for n = {unstable} did not stabilize and are lower bounds")
    if args.fit:
        emit_model(growth_fit(table, stabilized_only=args.stabilize))
    else:
        emit_table(table, args.format)
    return 0


def cmd_rect(args) -> int:
    require(args, "sizes")
    s = load_set(args)
    sizes = parse_vector(args.sizes)
    count = rect_count(s, sizes, resolve_window(args, s), args.threads)
    if args.format == "json":
        emit(json.dumps({"sizes": list(sizes), "count": count}))
    else:
        emit(str(count))
    return 0


def _emit_derived(args, derived: PointSet) -> None:
    if isinstance(derived, SymbolicSet) and not args.window:
        emit(qfnf_text(derived.qfnf))
        return
    if not args.window:
        raise UsageError(f"{args.command} of a non-symbolic set needs --window")
    emit_grid(rasterize(derived, Window.parse(args.window, derived.variables), args.threads), args.format)


def cmd_section(args) -> int:
    require(args, "axis", "value")
    s = load_set(args)
    _emit_derived(args, s.section(args.axis, args.value))
    return 0


def cmd_border(args) -> int:
    require(args, "vector")
    s = load_set(args)
    _emit_derived(args, s.border(parse_vector(args.vector)))
    return 0


def cmd_local_periods(args) -> int:
    s = load_set(args)
    if args.z is not None:
        require(args, "n", "m", "C")
        z = parse_vector(args.z)
        n = parse_n_range(args.n)[-1]
        try:
            params = PeriodSearchParams(C=args.C, n=n, m=args.m)
        except ValueError as e:
            raise PreconditionError(f"invalid search parameters: {e}") from e
        if args.window or isinstance(s, GridSet):
            grid = grid_for(args, s)
        else:
            grid = rasterize(s, Window(tuple((a - n - args.m, a + n + args.m) for a in z)), args.threads)
        report = local_period_report(grid, z, params)
        emit_model(report)
        return 0
    require(args, "point", "K")
    x = parse_vector(args.point)
    v = minimal_local_period(s, x, args.K, args.max_norm, args.neighborhood)
    emit(json.dumps({"x": list(x), "K": args.K, "v": list(v.v) if v else None,
                     "norm": v.norm if v else None}, indent=2))
    return 0


def load_cert(args) -> LocalPeriodicityCert:
    if args.cert is not None:
        text = args.cert
        if os.path.isfile(text):
            text = Path(text).read_text(encoding="utf-8")
        return LocalPeriodicityCert.from_json(text)
    require(args, "K", "V")
    try:
        return LocalPeriodicityCert(V=[list(v) for v in parse_vectors(args.V)], K=args.K, L=args.escape or 0)
    except ValueError as e:
        raise InvalidCertificateError(f"malformed certificate: {e}") from e


def cmd_verify_cert(args) -> int:
    s = load_set(args)
    cert = load_cert(args)
    report = verify_local_periodicity(s, cert, resolve_window(args, s), args.neighborhood, args.threads)
    if report.holds:
        status(f"✅ certificate holds on {report.checked} points")
    else:
        status(f"⚠️ certificate fails at {tuple(report.first_violation)}")
    emit_model(report)
    return 0


def cmd_muchnik(args) -> int:
    require(args, "K", "V")
    s = load_set(args)
    report = muchnik_report(s, args.K, parse_vectors(args.V), resolve_window(args, s), args.neighborhood,
                            args.threads)
    emit_model(report)
    return 0


def cmd_mh_check(args) -> int:
    n_max = parse_n_range(args.n)[-1] if args.n else 10
    if args.word is not None:
        verdict = mh_classify_1d(expand_word(args.word), n_max)
    else:
        s = load_set(args)
        window = resolve_window(args, s)
        if window.dim != 1:
            raise UsageError("mh-check reads a one-dimensional set or --word")
        verdict = mh_classify_1d(s.membership_grid(window, args.threads), n_max, start=window.lows[0])
    emit_model(verdict)
    return 0


def cmd_global_periods(args) -> int:
    s = load_set(args)
    grid = grid_for(args, s)
    emit_model(global_periods_report(grid, args.max_norm or 8))
    return 0


def cmd_repetitive(args) -> int:
    s = load_set(args)
    t = 1 if args.t is None else args.t
    emit_model(repetitivity_report(s, t, resolve_window(args, s), args.threads))
    return 0


def cmd_nivat(args) -> int:
    require(args, "sizes")
    s = load_set(args)
    emit_model(nivat_probe(s, parse_vector(args.sizes), resolve_window(args, s), args.threads))
    return 0


def cmd_tails(args) -> int:
    s = load_set(args)
    emit_model(tail_periods_1d(s, args.radius))
    return 0


def cmd_classify(args) -> int:
    s = load_set(args)
    window = resolve_window(args, s, required=False)
    report = classify_definability(s, args.depth, args.budget_seconds, window, args.seed, args.threads)
    marker = {"consistent-with-definable": "✅", "not-definable-evidence": "❌"}.get(report.verdict, "⚠️")
    status(f"{marker} {s.name}: {report.verdict}")
    emit_model(report)
    return 0


def cmd_example(args) -> int:
    if args.format == "json":
        emit(json.dumps({name: description for name, (_, description) in EXAMPLES.items()}, indent=2))
    else:
        width = max(len(name) for name in EXAMPLES)
        emit("".join(f"{name.ljust(width)}  {description}\n" for name, (_, description) in EXAMPLES.items()))
    return 0


COMMANDS = {
    "parse": (cmd_parse, "parse and pretty-print a formula"),
    "qe": (cmd_qe, "eliminate quantifiers and print the cell normal form"),
    "eval": (cmd_eval, "membership of --point"),
    "raster": (cmd_raster, "rasterize a set over --window"),
    "complexity": (cmd_complexity, "block complexity p(n) on --window"),
    "recurrent": (cmd_recurrent, "recurrent block complexity R(n)"),
    "rect": (cmd_rect, "rectangular block complexity for --sizes"),
    "section": (cmd_section, "section at --axis / --value"),
    "border": (cmd_border, "border along --vector"),
    "local-periods": (cmd_local_periods, "pigeonhole local period at --z, or minimal period at --point"),
    "verify-cert": (cmd_verify_cert, "check a local periodicity certificate"),
    "muchnik": (cmd_muchnik, "escape radius L for a period set on a window"),
    "mh-check": (cmd_mh_check, "Morse-Hedlund test of a binary word or 1-D set"),
    "global-periods": (cmd_global_periods, "global periods of a raster"),
    "repetitive": (cmd_repetitive, "repetitivity radius of t-patches"),
    "classify": (cmd_classify, "empirical definability verdict"),
    "example": (cmd_example, "list the built-in examples"),
    "nivat": (cmd_nivat, "rectangular complexity against n1 n2"),
    "tails": (cmd_tails, "eventual periods of both tails of a 1-D set"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--formula", help="formula text")
    source.add_argument("--formula-file", help="file holding a formula")
    source.add_argument("--example", help="built-in example name (see `defilab example`)")
    source.add_argument("--grid-json", help="grid JSON file")

    common.add_argument("--window", help="x=-20..20,y=-20..20 or -20..20,-20..20")
    common.add_argument("--n", help="block sizes A..B")
    common.add_argument("--format", choices=FORMATS, help="output format")
    common.add_argument("--seed", type=int, default=Config.SEED)
    common.add_argument("--threads", type=int, default=Config.THREADS)
    common.add_argument("--budget-cells", type=int, default=Config.QE_MAX_CELLS)
    common.add_argument("--budget-bits", type=int, default=Config.QE_MAX_BITS)
    common.add_argument("--budget-seconds", type=float, default=Config.CLASSIFY_MAX_SECONDS)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--stats", action="store_true", help="print timing statistics to stderr")

    common.add_argument("--neighborhood", choices=NEIGHBORHOODS)
    common.add_argument("--stabilize", action="store_true", help="double the radius until R(n) repeats")
    common.add_argument("--escape", type=int, help="escape radius L")
    common.add_argument("--fit", action="store_true", help="print the growth fit instead of the table")
    common.add_argument("--sizes", help="box sizes n1,n2")
    common.add_argument("--axis", type=int)
    common.add_argument("--value", type=int)
    common.add_argument("--vector")
    common.add_argument("--cert", help="certificate JSON or a file holding it")
    common.add_argument("--K", type=int)
    common.add_argument("--V", help="period vectors '1,1;1,0'")
    common.add_argument("--max-norm", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--t", type=int)
    common.add_argument("--z")
    common.add_argument("--m", type=int)
    common.add_argument("--C")
    common.add_argument("--point")
    common.add_argument("--word", help="binary word, powers allowed: 0(01)^200")
    common.add_argument("--radius", type=int, default=64)
    common.add_argument("--self-check", type=int, default=0, metavar="N")

    parser = argparse.ArgumentParser(prog="defilab", description="Presburger definability laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def configure_logging(verbose: int) -> None:
    level = {0: Config.LOG_LEVEL, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def bind_negative_values(argv: Sequence[str]) -> List[str]:
    """Join ``--flag -4..4`` into ``--flag=-4..4`` so argparse keeps the value"""
    bound: List[str] = []
    tokens = list(argv)
    k = 0
    while k < len(tokens):
        token = tokens[k]
        if (token.startswith("--") and "=" not in token and token not in _SWITCHES
                and k + 1 < len(tokens) and _NEGATIVE_VALUE.match(tokens[k + 1])):
            bound.append(f"{token}={tokens[k + 1]}")
            k += 2
        else:
            bound.append(token)
            k += 1
    return bound


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = bind_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    configure_logging(args.verbose)
    handler, _ = COMMANDS[args.command]
    try:
        code = handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        status(f"defilab {args.command}: error: {e}")
        return 2
    except DefilabError as e:
        status(f"❌ {e}")
        return 1
    if args.stats:
        status(json.dumps(performance_tracker.get_statistics(), indent=2))
    if Config.METRICS_FILE:
        performance_tracker.save_metrics()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
