"""Command-line front end.

Every subcommand prints its verdict on the first line, followed by an optional
witness in the frame, model or presheaf file formats.  ``--json`` prints one
JSON record instead.  Exit status: 0 positive verdict, 1 negative verdict,
2 usage or input error, 3 refused by a resource guard.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from contextlib import redirect_stdout
from typing import Sequence

from . import bimodal, fixpoint, heyting, kripke, presheaf
from .order import bits
from .parser import ParseError, parse, render
from .syntax import UnknownNameError, analyze, axiom, axiom_name, logic
from .verdict import ResourceLimitError, Verdict

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _emit(args: argparse.Namespace, record: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(record, sort_keys=True, ensure_ascii=False))
    else:
        for line in lines:
            print(line)


def _verdict(args: argparse.Namespace, v: Verdict, extra: Sequence[str] = ()) -> int:
    lines = [v.label, *extra]
    if v.witness is not None and hasattr(v.witness, "dump"):
        lines.append(v.witness.dump())
    _emit(args, v.to_dict(), lines)
    return EXIT_OK if v.holds else EXIT_NEGATIVE


# --- subcommands -------------------------------------------------------------------


def cmd_parse(args: argparse.Namespace) -> int:
    a = parse(args.formula)
    info = analyze(a)
    text = render(a)
    details = {
        "component": info.component,
        "variables": sorted(info.free_vars),
        "modal_depth": info.modal_depth,
        "subformulas": len(info.subformulas),
    }
    lines = [text] + [f"{k.replace('_', ' ')}: {' '.join(v) if isinstance(v, list) else v}" for k, v in details.items()]
    _emit(args, {"verdict": text, "holds": True, "analysis": details}, lines)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    if args.logic:
        lg = logic(args.logic)
        names = list(lg.axioms)
        head = lg.name
    else:
        if not args.names:
            raise UsageError("give axiom names or --logic")
        names = [axiom_name(n) for n in args.names]
        head = None
    pairs = [(n, render(axiom(n))) for n in names]
    lines = ([head] if head else []) + [f"{n}: {t}" if len(pairs) > 1 or head else t for n, t in pairs]
    verdict = head if head else pairs[0][1] if len(pairs) == 1 else "axioms"
    _emit(args, {"verdict": verdict, "holds": True, "axioms": dict(pairs)}, lines)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    f, val, world = kripke.parse_model_text(_read(args.model))
    a = parse(args.formula)
    kripke.check_valuation(f, val, a)
    truth = kripke.truth_set(f, val, a)
    worlds = list(bits(truth))
    if world is None:
        holds = truth == f.full
    else:
        holds = bool(truth >> world & 1)
    v = Verdict(holds, "holds" if holds else "fails")
    record = v.to_dict() | {"truth_set": worlds}
    _emit(args, record, [v.label, " ".join(["truth", *map(str, worlds)])])
    return EXIT_OK if holds else EXIT_NEGATIVE


def cmd_validity(args: argparse.Namespace) -> int:
    f = kripke.parse_frame_text(_read(args.frame))
    return _verdict(args, kripke.valid_on(f, parse(args.formula)))


def cmd_condition(args: argparse.Namespace) -> int:
    f = kripke.parse_frame_text(_read(args.frame))
    name = axiom_name(args.axiom)
    holds = kripke.frame_condition(f, name)
    valid = kripke.valid_on(f, axiom(name))
    v = Verdict(holds, "holds" if holds else "fails")
    record = v.to_dict() | {"axiom": name, "validity": valid.label}
    _emit(args, record, [v.label, f"validity {valid.label}"])
    return EXIT_OK if holds else EXIT_NEGATIVE


def cmd_countermodel(args: argparse.Namespace) -> int:
    cls = kripke.frame_class(args.logic)
    v = kripke.countermodel(parse(args.formula), cls, args.max, args.dedup)
    return _verdict(args, v, [f"bound {v.bound}"])


def cmd_fixpoint(args: argparse.Namespace) -> int:
    a = parse(args.formula)
    if args.shortcut:
        b = fixpoint.sl_fixpoint(a, args.var)
        default_logic = "SL^i"
    else:
        b = fixpoint.diag(a, args.var)
        default_logic = "GL^i"
    text = render(b)
    if args.verify is None:
        _emit(args, {"verdict": text, "holds": True}, [text])
        return EXIT_OK
    cls = kripke.frame_class(args.logic or default_logic)
    v = fixpoint.verify_fixpoint(a, args.var, b, cls, args.verify, args.dedup)
    record = {"verdict": text, "holds": v.holds, "check": v.label, "bound": v.bound}
    lines = [text, f"{v.label} {cls.name} bound {v.bound}"]
    if v.witness is not None:
        record["witness"] = v.witness.to_dict()
        lines.append(v.witness.dump())
    _emit(args, record, lines)
    return EXIT_OK if v.holds else EXIT_NEGATIVE


def cmd_translate(args: argparse.Namespace) -> int:
    a = parse(args.formula)
    b = bimodal.to_gl(a) if args.to_gl else bimodal.flat(a)
    text = render(b)
    _emit(args, {"verdict": text, "holds": True}, [text])
    return EXIT_OK


def _decide(fn):
    def run(args: argparse.Namespace) -> int:
        return _verdict(args, fn(parse(args.formula)))

    return run


def cmd_algebra(args: argparse.Namespace) -> int:
    rows = heyting.parse_poset_text(_read(args.poset))
    ha = heyting.from_poset(rows)
    op = heyting.coderivative(ha)
    flags = heyting.classify_operator(ha, op)
    everything = not (args.coderivative or args.classify or args.scattered)
    lines = ["scattered" if flags.km else "not scattered", f"elements {ha.m}"]
    record: dict = {"verdict": lines[0], "holds": flags.km, "elements": [ha.element_name(i) for i in range(ha.m)]}
    if everything or args.coderivative:
        lines += [f"coderivative {ha.element_name(i)} -> {ha.element_name(op(i))}" for i in range(ha.m)]
        record["coderivative"] = {ha.element_name(i): ha.element_name(op(i)) for i in range(ha.m)}
    if everything or args.classify:
        fl = flags.to_dict()
        lines.append("flags " + " ".join(f"{k}={'yes' if v else 'no'}" for k, v in fl.items()))
        record["flags"] = fl
    _emit(args, record, lines)
    return EXIT_OK if flags.km else EXIT_NEGATIVE


def cmd_presheaf(args: argparse.Namespace) -> int:
    text = _read(args.file)
    if args.strong_lob:
        # only the poset matters; a plain poset file is accepted too
        if any(line.split()[:1] == ["stage"] for line in text.splitlines()):
            poset = presheaf.parse_presheaf_text(text, os.path.dirname(os.path.abspath(args.file))).presheaf.poset
        else:
            poset = presheaf.FinPoset(heyting.parse_poset_text(text))
        holds = presheaf.check_strong_lob(poset, args.depth)
        return _verdict(args, Verdict(holds, "holds" if holds else "fails"))
    pf = presheaf.parse_presheaf_text(text, os.path.dirname(os.path.abspath(args.file)))
    x, f = pf.presheaf, pf.endomorphism
    if f is None:
        raise UsageError("the presheaf file has no nat lines")
    if args.maxst:
        r = presheaf.check_maxst(f)
        lines = ["holds" if r.holds else "fails", f"subterminal {'yes' if r.subterminal else 'no'}", f"maximal {'yes' if r.maximal else 'no'}"]
        if r.witness is not None:
            w, parts = r.witness
            lines.append(f"stage {x.poset.labels[w]}")
            for u in bits(x.poset.up(w)):
                lines.append(" ".join([f"subfunctor {x.poset.labels[u]}:", *(x.label(u, v) for v in bits(parts[u]))]))
        _emit(args, {"verdict": lines[0], "holds": r.holds, "witness": r.to_dict()}, lines)
        return EXIT_OK if r.holds else EXIT_NEGATIVE
    try:
        c = presheaf.banach_fixpoint(x, f)
    except presheaf.NotContractiveError:
        _emit(args, {"verdict": "not contractive", "holds": False}, ["not contractive"])
        return EXIT_NEGATIVE
    _emit(args, {"verdict": "fixpoint", "holds": True, "witness": c.to_dict()}, ["fixpoint", c.dump()])
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    cls = kripke.frame_class(args.logic)
    batch = kripke.frame_batch(args.n, cls, args.dedup)
    count = len(batch)
    lines = [str(count)]
    record: dict = {"verdict": str(count), "holds": True}
    if not args.count:
        frames = list(batch.frames())
        for f in frames:
            lines += ["", kripke.dump_frame(f)]
        record["frames"] = [{"leq": [list(p) for p in f.leq_pairs()], "prec": [list(p) for p in f.prec_pairs()]} for f in frames]
    _emit(args, record, lines)
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="imlk", description="Intuitionistic modal logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, description=help)
        sp.add_argument("--json", action="store_true", help="print a JSON record")
        sp.set_defaults(run=fn)
        return sp

    sp = add("parse", cmd_parse, "parse a formula and print it with minimal parentheses")
    sp.add_argument("formula")

    sp = add("render", cmd_render, "print catalog axioms")
    sp.add_argument("names", nargs="*")
    sp.add_argument("--logic")

    sp = add("check", cmd_check, "evaluate a formula in a model file")
    sp.add_argument("model")
    sp.add_argument("formula")

    sp = add("validity", cmd_validity, "frame validity with a countermodel on failure")
    sp.add_argument("frame")
    sp.add_argument("formula")

    sp = add("condition", cmd_condition, "first-order frame condition of a catalog axiom")
    sp.add_argument("frame")
    sp.add_argument("axiom")

    sp = add("countermodel", cmd_countermodel, "search the frames of a logic for a countermodel")
    sp.add_argument("formula")
    sp.add_argument("--logic", default="K^i")
    sp.add_argument("--max", type=int, default=3)
    sp.add_argument("--dedup", action="store_true", help="one frame per isomorphism class")

    sp = add("fixpoint", cmd_fixpoint, "explicit fixed point of a guarded formula")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--diag", action="store_true", help="general construction (default)")
    mode.add_argument("--shortcut", action="store_true", help="substitute top, valid with strong Löb")
    sp.add_argument("formula")
    sp.add_argument("var")
    sp.add_argument("--verify", type=int, metavar="N", help="model-check the fixpoint equation up to N worlds")
    sp.add_argument("--logic")
    sp.add_argument("--dedup", action="store_true")

    sp = add("translate", cmd_translate, "translate into the bimodal or GL language")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--flat", action="store_true")
    mode.add_argument("--to-gl", action="store_true")
    sp.add_argument("formula")

    for name, fn, help in (
        ("decide-gl", bimodal.decide_gl, "decide classical GL"),
        ("decide-km", bimodal.decide_km, "decide KM"),
        ("decide-km-lc", bimodal.decide_km_lc, "decide KM with the linearity axiom"),
    ):
        sp = add(name, _decide(fn), help)
        sp.add_argument("formula")

    sp = add("algebra", cmd_algebra, "up-set algebra of a poset: coderivative, classification, scatteredness")
    sp.add_argument("poset")
    sp.add_argument("--coderivative", action="store_true")
    sp.add_argument("--classify", action="store_true")
    sp.add_argument("--scattered", action="store_true")

    sp = add("presheaf", cmd_presheaf, "presheaf checks")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--strong-lob", action="store_true")
    mode.add_argument("--maxst", action="store_true")
    mode.add_argument("--banach", action="store_true")
    sp.add_argument("file")
    sp.add_argument("--depth", type=int, default=1, help="nesting depth of sampled formulas")

    sp = add("enumerate", cmd_enumerate, "list the frames of a logic with n worlds")
    sp.add_argument("n", type=int)
    sp.add_argument("--logic", default="K^i")
    sp.add_argument("--dedup", action="store_true")
    sp.add_argument("--count", action="store_true", help="print the count only")
    return p


_INPUT_ERRORS = (
    UsageError,
    ParseError,
    UnknownNameError,
    kripke.FrameError,
    kripke.UnsupportedError,
    kripke.UnboundVariableError,
    fixpoint.FixpointError,
    heyting.AlgebraError,
    presheaf.PresheafError,
)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return args.run(args)
    except ResourceLimitError as e:
        print(f"imlk: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except _INPUT_ERRORS as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"imlk: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Run the CLI and capture standard output."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
