"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 domain error (bad input, unsupported
model, ...), 3 counterexample found (check-equiv only).
"""

import argparse
import json
import sys

from .formulas import (
    Alphabet, parse, print_formula, depth, features, symbols_of,
    eval_formula, accepts, FormulaError, ParseError,
)
from .transforms import (
    desugar, normalize_to_minimal_basis, y_normal_form, neutral_letter_reduce,
)
from .fixedpoint import Precision, FixedError
from .transformer import (
    forward, accepts as model_accepts, load_model, save_model, ModelError, BOS,
)
from .compiler import compile_formula, decompile, CompileError
from .maj2 import (
    parse_maj2, print_maj2, eval_maj2, free_vars, tl_to_maj2_closed,
    maj2_to_tl, Maj2Error,
)
from . import languages
from .languages import (
    altplus_formula, jexpr_formula, dyck_formula, prediction_formula,
    altplus_dfa, sample_dataset, check_equiv,
)

DOMAIN_ERRORS = (FormulaError, ParseError, FixedError, ModelError,
                 CompileError, Maj2Error, OSError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_formula(path):
    return parse(_read(path))


def _emit(args, json_obj, text):
    if getattr(args, "json", False):
        print(json.dumps(json_obj, sort_keys=True))
    else:
        print(text)


def _check_word(word):
    if BOS in word:
        raise FormulaError("the BOS marker '^' is only meaningful to `simulate`")
    if not word:
        raise FormulaError("the empty word is outside the semantics")
    return word


def cmd_parse(args):
    phi = _load_formula(args.formula)
    text = print_formula(phi)
    _emit(args, {"formula": text, "depth": depth(phi),
                 "symbols": sorted(symbols_of(phi)),
                 "features": sorted(features(phi))}, text)
    return 0


def cmd_eval(args):
    phi = _load_formula(args.formula)
    w = _check_word(args.word)
    if args.position is not None:
        res = eval_formula(phi, w, args.position)
    else:
        res = accepts(phi, w)
    _emit(args, {"word": w, "result": res}, "true" if res else "false")
    return 0


def cmd_depth(args):
    d = depth(_load_formula(args.formula))
    _emit(args, {"depth": d}, str(d))
    return 0


def cmd_normalize(args):
    phi = _load_formula(args.formula)
    payload = {}
    if args.mode == "desugar":
        out = desugar(phi)
    elif args.mode == "minimal":
        out = normalize_to_minimal_basis(desugar(phi))
    elif args.mode == "ynf":
        alphabet = Alphabet(args.alphabet) if args.alphabet \
            else Alphabet("".join(sorted(symbols_of(phi))) or "a")
        out = y_normal_form(phi, alphabet)
    else:  # neutral-e
        e = args.mode_arg
        syms = sorted(symbols_of(phi) | {e})
        alphabet = Alphabet(args.alphabet) if args.alphabet else Alphabet("".join(syms))
        red = neutral_letter_reduce(phi, e, alphabet)
        out = red.reduced
        payload["padding"] = red.padding
    text = print_formula(out)
    payload["formula"] = text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    _emit(args, payload,
          text if "padding" not in payload else f"padding {payload['padding']}\n{text}")
    return 0


def _parse_precision(text):
    try:
        p, s = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError("--precision expects P,S (e.g. 12,4)") from None
    return Precision(p, s)


def cmd_compile(args):
    phi = _load_formula(args.formula)
    prec = _parse_precision(args.precision)
    alphabet = Alphabet(args.alphabet) if args.alphabet else None
    model = compile_formula(phi, prec, alphabet)
    save_model(model, args.out)
    _emit(args, {"out": args.out, "d": model.d, "layers": len(model.layers)},
          f"wrote {args.out}: width {model.d}, {len(model.layers)} layers")
    return 0


def cmd_decompile(args):
    model = load_model(args.model)
    phi = decompile(model)
    text = print_formula(phi)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _emit(args, {"out": args.out, "depth": depth(phi)}, f"wrote {args.out}")
    else:
        _emit(args, {"formula": text, "depth": depth(phi)}, text)
    return 0


def cmd_simulate(args):
    model = load_model(args.model)
    w = args.word
    if not w.startswith(BOS):
        raise ModelError("simulate expects a word starting with the BOS marker '^'")
    score, acts = forward(model, w, trace=args.trace)
    accepted = score.m > 0
    payload = {"score": str(score), "accepts": accepted}
    lines = [f"score {score}", "accepts" if accepted else "rejects"]
    if args.trace:
        payload["activations"] = [
            [[str(v) for v in vec] for vec in lvl] for lvl in acts.h]
        for lvl, rows in enumerate(acts.h):
            lines.append(f"h^{lvl}: " + " | ".join(
                ",".join(str(v) for v in vec) for vec in rows))
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_translate(args):
    if args.to == "maj2":
        phi = parse(_read(args.infile))
        out = print_maj2(tl_to_maj2_closed(phi))
    else:
        m = parse_maj2(_read(args.infile))
        if free_vars(m):
            raise Maj2Error("translation to the counting logic needs a closed formula")
        alphabet = args.alphabet or "ab"
        out = print_formula(maj2_to_tl(m, Alphabet(alphabet)))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
        _emit(args, {"out": args.out}, f"wrote {args.out}")
    else:
        _emit(args, {"formula": out}, out)
    return 0


def cmd_gen_data(args):
    try:
        lo, hi = (int(x) for x in args.bin.split(":"))
    except ValueError:
        raise UsageError("--bin expects LO:HI") from None
    records = sample_dataset(args.k, lo, hi, args.count, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")
    _emit(args, {"out": args.out, "count": len(records)},
          f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_langs(args):
    kind, _, param = args.emit.partition(":")
    if kind == "altplus":
        phi = altplus_formula(int(param))
    elif kind == "jexpr":
        phi = jexpr_formula(param)
    elif kind == "dyck":
        phi = dyck_formula()
    elif kind == "prediction":
        phi = prediction_formula(int(param))
    else:
        raise UsageError(f"unknown language {kind!r}")
    text = print_formula(phi)
    _emit(args, {"formula": text, "depth": depth(phi)}, text)
    return 0


def _acceptor(spec):
    """Returns (acceptor callable, alphabet string or None)."""
    tag, _, rest = spec.partition(":")
    if tag == "formula":
        phi = _load_formula(rest)
        return (lambda w: accepts(phi, w)), "".join(sorted(symbols_of(phi)))
    if tag == "dfa":
        kind, _, param = rest.partition(":")
        if kind == "altplus":
            dfa = altplus_dfa(int(param))
            return dfa.member, "ab"
        if kind == "dyck":
            return languages.dyck_member, "()"
        raise UsageError(f"unknown dfa spec {rest!r}")
    if tag == "model":
        model = load_model(rest)
        return (lambda w: model_accepts(model, BOS + w)), "".join(model.alphabet)
    if tag == "maj2":
        m = parse_maj2(_read(rest))
        if free_vars(m):
            raise Maj2Error("acceptor needs a closed majority formula")
        return (lambda w: eval_maj2(m, w)), None
    raise UsageError(f"unknown acceptor spec {spec!r}")


def cmd_check_equiv(args):
    acc_a, alpha_a = _acceptor(args.a)
    acc_b, alpha_b = _acceptor(args.b)
    alphabet = args.alphabet or alpha_a or alpha_b
    if not alphabet:
        raise UsageError("could not infer an alphabet; pass --alphabet")
    report = check_equiv(acc_a, acc_b, alphabet,
                         max_exhaustive_len=args.max_len,
                         random_samples=args.samples,
                         max_random_len=args.max_random_len,
                         seed=args.seed)
    if report.equivalent:
        _emit(args, report.to_json_dict(),
              f"equivalent on {report.checked_exhaustive} exhaustive"
              f" + {report.checked_random} random words")
        return 0
    _emit(args, report.to_json_dict(),
          f"counterexample: {report.counterexample!r}"
          f" (a={report.expected}, b={report.actual})")
    return 3


def build_parser():
    top = _Parser(prog="craspkit", description=__doc__)
    top.add_argument("--json", action="store_true", help="machine-readable output")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        # accept --json after the subcommand as well; SUPPRESS keeps the
        # top-level value when the flag is absent here
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                       help="machine-readable output")
        return p

    p = add("parse", cmd_parse, help="parse and pretty-print a formula")
    p.add_argument("--formula", required=True)

    p = add("eval", cmd_eval, help="evaluate a formula on a word")
    p.add_argument("--formula", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--position", type=int, help="evaluate at a position (default: last)")

    p = add("depth", cmd_depth, help="counting depth of a formula")
    p.add_argument("--formula", required=True)

    p = add("normalize", cmd_normalize, help="apply a normal-form transformation")
    p.add_argument("--formula", required=True)
    p.add_argument("--alphabet")
    p.add_argument("--out")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ynf", dest="mode", action="store_const", const="ynf")
    g.add_argument("--desugar", dest="mode", action="store_const", const="desugar")
    g.add_argument("--minimal", dest="mode", action="store_const", const="minimal")
    g.add_argument("--neutral-e", dest="mode_arg", metavar="SYM")
    p.set_defaults(mode=None)

    p = add("compile", cmd_compile, help="compile a formula to a model file")
    p.add_argument("--formula", required=True)
    p.add_argument("--precision", required=True, help="P,S")
    p.add_argument("--alphabet")
    p.add_argument("--out", required=True)

    p = add("decompile", cmd_decompile, help="recover a formula from a small model")
    p.add_argument("--model", required=True)
    p.add_argument("--out")

    p = add("simulate", cmd_simulate, help="run a model on a ^-prefixed word")
    p.add_argument("--model", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--trace", action="store_true")

    p = add("translate", cmd_translate, help="translate to/from the majority logic")
    p.add_argument("--to", choices=("maj2", "tl"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--alphabet")

    p = add("gen-data", cmd_gen_data, help="sample a next-token-prediction dataset")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bin", required=True, help="LO:HI inclusive length bin")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("langs", cmd_langs, help="emit a built-in language formula")
    p.add_argument("--emit", required=True,
                   help="altplus:K | jexpr:SYMS | dyck | prediction:K")

    p = add("check-equiv", cmd_check_equiv, help="compare two acceptors")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--max-random-len", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphabet")
    return top


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "normalize":
            if args.mode_arg is not None:
                if args.mode is not None:
                    raise UsageError("pick exactly one normalization mode")
                args.mode = "neutral"
            elif args.mode is None:
                raise UsageError("pick a normalization mode")
        return args.fn(args)
    except BrokenPipeError:
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
