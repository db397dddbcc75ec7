"""Command-line front end.

Exit codes: 0 success, 1 classification/synthesis/oracle failure, 2 usage
error. Errors go to stderr as ``error[CODE]: message`` with the codes below.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .alba import AlbaError, run_alba
from .classify import classify_analytic, eps_str
from .rulegen import (ROUTES, NotAnalytic, SynthesisError, check_analytic,
                      display_equivalent, format_rules, invertible_synthesis, latex_rule,
                      parse_rules, rule_to_inequality, same_rule, synthesize)
from .semantics import BatteryConfig, default_battery, equivalence_battery, load_battery
from .signature import NEG, POS, SignatureError, base_signature, full, load_signature
from .syntax import (NotPrimitive, NotSided, ParseError, latex, parse_inequality, show_ineq,
                     variables)

OK, FAIL, USAGE = 0, 1, 2

# stable error codes
E_USAGE = "E100"
E_IO = "E101"
E_SIG = "E102"
E_PARSE = "E103"
E_NOT_ANALYTIC = "E200"
E_ALBA = "E201"
E_SYNTH = "E202"
E_ORACLE = "E203"
E_CHECK = "E204"
E_DIFF = "E205"


@dataclass
class CliError(Exception):
    code: str
    message: str
    status: int = USAGE


def _fail(code, msg, status=FAIL):
    raise CliError(code, msg, status)


# ---------------------------------------------------------------- helpers

def _signature(args):
    if not args.sig:
        return full(base_signature())
    try:
        return full(load_signature(args.sig))
    except FileNotFoundError:
        _fail(E_IO, f"cannot read signature file {args.sig}", USAGE)
    except (SignatureError, ValueError, KeyError) as e:
        _fail(E_SIG, f"bad signature {args.sig}: {e}", USAGE)


def _ineq(text, sig):
    try:
        return parse_inequality(text, sig)
    except (ParseError, ValueError, KeyError) as e:
        _fail(E_PARSE, f"cannot parse inequality {text!r}: {e}", USAGE)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError:
        _fail(E_IO, f"cannot read {path}", USAGE)


def _rules(path, sig):
    text = _read(path)
    try:
        rules = parse_rules(text, sig)
    except (ParseError, ValueError, KeyError) as e:
        _fail(E_PARSE, f"cannot parse rule file {path}: {e}", USAGE)
    if not rules:
        _fail(E_PARSE, f"no rules in {path}", USAGE)
    return rules


def _eps(text, ineq):
    if text is None:
        return None
    names = sorted({v.name for v in variables(ineq.lhs) + variables(ineq.rhs)})
    if "=" in text:
        out = {}
        for part in text.split(","):
            k, _, v = part.partition("=")
            out[k.strip()] = POS if v.strip() == "1" else NEG
    else:
        vals = [x.strip() for x in text.split(",")]
        if len(vals) != len(names):
            _fail(E_USAGE, f"--eps needs {len(names)} entries for {', '.join(names)}", USAGE)
        out = {n: POS if v == "1" else NEG for n, v in zip(names, vals)}
    if set(out) != set(names) or not all(x in (POS, NEG) for x in out.values()):
        _fail(E_USAGE, f"--eps must give 1 or d for each of {', '.join(names)}", USAGE)
    return out


def _battery(args, sig):
    if getattr(args, "battery", None):
        try:
            return load_battery(args.battery, sig)
        except FileNotFoundError:
            _fail(E_IO, f"cannot read battery file {args.battery}", USAGE)
        except (ValueError, KeyError, json.JSONDecodeError) as e:
            _fail(E_PARSE, f"bad battery file {args.battery}: {e}", USAGE)
    return default_battery(sig, BatteryConfig(seed=args.seed))


def _show_rules(rules, sig, as_latex):
    if as_latex:
        return "\n\n".join(latex_rule(r, sig) for r in rules)
    return format_rules(rules, sig)


def _labels(labels: dict) -> str:
    if not labels:
        return "-"
    return " ".join(f"{''.join(map(str, p)) or 'root'}:{v}" for p, v in sorted(labels.items()))


# ---------------------------------------------------------------- commands

def cmd_classify(args, sig, out):
    q = _ineq(args.inequality, sig)
    c = classify_analytic(q, sig, eps=_eps(args.eps, q))
    out.append(f"input: {show_ineq(q, sig)}")
    out.append(f"class: {c.cls}")
    if c.witness is None:
        return FAIL
    w = c.witness
    out.append(f"eps: {eps_str(w.eps)} over {','.join(sorted(w.eps))}")
    out.append("omega: " + ("{}" if not w.omega else "{" + ", ".join(f"{a}<{b}" for a, b in sorted(w.omega)) + "}"))
    if w.chirality:
        out.append(f"chirality: {w.chirality}")
    out.append(f"lhs labels: {_labels(w.lhs_labels)}")
    out.append(f"rhs labels: {_labels(w.rhs_labels)}")
    if args.latex:
        out.append(f"latex: {latex(q.lhs, sig)} \\leq {latex(q.rhs, sig)}")
    return OK


def cmd_alba(args, sig, out):
    q = _ineq(args.inequality, sig)
    script = None
    if args.strategy == "interactive-script":
        if not args.script:
            _fail(E_USAGE, "--strategy interactive-script needs --script FILE", USAGE)
        try:
            script = [tuple(st) for st in json.loads(_read(args.script))]
        except json.JSONDecodeError as e:
            _fail(E_PARSE, f"bad script file: {e}", USAGE)
    try:
        res = run_alba(q, sig, strategy=args.strategy, constant_rules=not args.no_constant_rules,
                       script=script)
    except AlbaError as e:
        _fail(E_ALBA, str(e))
    out.append(f"input: {show_ineq(q, sig)}")
    out.append(res.report(sig, trace=args.trace))
    if not res.ok:
        raise CliError(E_ALBA, "ALBA did not reach a pure output", FAIL)
    if args.latex:
        for p in res.outputs():
            for c in list(p.antecedents) + ([p.inequality] if p.inequality else []):
                out.append(f"latex: {latex(c.lhs, sig)} \\leq {latex(c.rhs, sig)}")
    return OK


def cmd_synthesize(args, sig, out):
    q = _ineq(args.inequality, sig)
    try:
        syn = synthesize(q, sig, eps=_eps(args.eps, q), route=args.route)
    except NotAnalytic as e:
        _fail(E_NOT_ANALYTIC, str(e))
    except (SynthesisError, AlbaError, NotPrimitive, NotSided) as e:
        _fail(E_SYNTH, str(e))
    out.append(f"input: {show_ineq(q, sig)}")
    if args.latex:
        out.append(syn.report(sig, trace=args.trace).rsplit("\n\n", 1)[0])
        out.append("")
        out.append(_show_rules(syn.rules, sig, True))
    else:
        out.append(syn.report(sig, trace=args.trace))
    return OK


def cmd_rule2ineq(args, sig, out):
    rules = _rules(args.rules, sig)
    for r in rules:
        try:
            q = rule_to_inequality(r, sig)
        except (SynthesisError, ValueError) as e:
            _fail(E_SYNTH, str(e))
        out.append(f"{r.name or 'rule'}: " + (f"{latex(q.lhs, sig)} \\leq {latex(q.rhs, sig)}"
                                                 if args.latex else show_ineq(q, sig)))
    return OK


def cmd_check_analytic(args, sig, out):
    rules = _rules(args.rules, sig)
    status = OK
    for r in rules:
        rep = check_analytic(r, sig)
        out.append(f"{r.name or 'rule'}: {'analytic' if rep.ok else 'not analytic'}")
        out.append(rep.show())
        if not rep.ok:
            status = FAIL
    if status:
        raise CliError(E_CHECK, "some rule violates C1-C7", FAIL)
    return status


def _oracle_lines(q, rules, battery, sig):
    rep = equivalence_battery(q, rules, battery)
    lines = [f"algebras: {len(battery)}  agree: {len(rep.agree)}  disagree: {len(rep.disagree)}"]
    for label, a, b in rep.disagree:
        lines.append(f"  {label}: inequality {'valid' if a else 'invalid'}, rules {'valid' if b else 'invalid'}")
    lines.append(f"note: {rep.note}")
    return rep, lines


def cmd_oracle_check(args, sig, out):
    q = _ineq(args.inequality, sig)
    rules = _rules(args.rules, sig)
    battery = _battery(args, sig)
    rep, lines = _oracle_lines(q, rules, battery, sig)
    out.append(f"input: {show_ineq(q, sig)}")
    out.extend(lines)
    if not rep.ok:
        raise CliError(E_ORACLE, "rules and inequality disagree on the battery", FAIL)
    return OK


def cmd_compare(args, sig, out):
    q = _ineq(args.inequality, sig)
    try:
        a = synthesize(q, sig, route=args.route).rules
    except NotAnalytic as e:
        _fail(E_NOT_ANALYTIC, str(e))
    except (SynthesisError, AlbaError) as e:
        _fail(E_SYNTH, f"analytic_to_rules: {e}")
    try:
        b = invertible_synthesis(q, sig)
    except (SynthesisError, AlbaError) as e:
        _fail(E_SYNTH, f"invertible_synthesis: {e}")
    out.append(f"input: {show_ineq(q, sig)}")
    out.append("analytic_to_rules:")
    out.append(_show_rules(a, sig, args.latex))
    out.append("")
    out.append("invertible_synthesis:")
    out.append(_show_rules(b, sig, args.latex))
    out.append("")
    only_a = [r for r in a if not any(same_rule(r, s) for s in b)]
    only_b = [r for r in b if not any(same_rule(r, s) for s in a)]
    out.append(f"identical up to renaming: {'yes' if not only_a and not only_b else 'no'}")
    disp = len(a) == len(b) and all(any(display_equivalent(r, s, sig) for s in b) for r in a)
    out.append(f"display-equivalent: {'yes' if disp else 'no'}")
    battery = _battery(args, sig)
    ra = equivalence_battery(q, a, battery)
    rb = equivalence_battery(q, b, battery)
    out.append(f"oracle analytic_to_rules: {len(ra.agree)}/{len(battery)}")
    out.append(f"oracle invertible_synthesis: {len(rb.agree)}/{len(battery)}")
    if not (ra.ok and rb.ok):
        raise CliError(E_DIFF, "an output disagrees with the input on the battery", FAIL)
    return OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[{E_USAGE}]: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _globals(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--sig", default=d(None), help="signature JSON file (default: lattice only)")
    p.add_argument("--latex", action="store_true", default=d(False), help="LaTeX output")
    p.add_argument("--trace", action="store_true", default=d(False), help="print rule applications")
    p.add_argument("--seed", type=int, default=d(0), help="seed for the default battery")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dlecorr", description="Correspondence and rule synthesis for DLE logics.")
    _globals(p, False)
    common = _Parser(add_help=False)
    _globals(common, True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", parents=[common], help="most specific analytic class")
    s.add_argument("inequality")
    s.add_argument("--eps", help="order type, e.g. 1,1,d (sorted variables) or p=1,q=d")
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("alba", parents=[common], help="run ALBA to a pure output")
    s.add_argument("inequality")
    s.add_argument("--strategy", choices=("pipeline", "interactive-script"), default="pipeline")
    s.add_argument("--script", help="JSON list of steps for interactive-script")
    s.add_argument("--no-constant-rules", action="store_true")
    s.set_defaults(fn=cmd_alba)

    s = sub.add_parser("synthesize", parents=[common], help="analytic structural rules")
    s.add_argument("inequality")
    s.add_argument("--route", choices=ROUTES, default="auto")
    s.add_argument("--eps", help="fix the order type")
    s.set_defaults(fn=cmd_synthesize)

    s = sub.add_parser("rule2ineq", parents=[common], help="inequality of each rule in a file")
    s.add_argument("rules")
    s.set_defaults(fn=cmd_rule2ineq)

    s = sub.add_parser("check-analytic", parents=[common], help="check C1-C7")
    s.add_argument("rules")
    s.set_defaults(fn=cmd_check_analytic)

    s = sub.add_parser("oracle-check", parents=[common], help="compare an inequality and rules on finite algebras")
    s.add_argument("inequality")
    s.add_argument("rules")
    s.add_argument("--battery", help="battery description file (poset edges + seeds)")
    s.set_defaults(fn=cmd_oracle_check)

    s = sub.add_parser("compare-synthesis", parents=[common], help="diff the two synthesis methods")
    s.add_argument("inequality")
    s.add_argument("--route", choices=ROUTES, default="auto")
    s.add_argument("--battery", help="battery description file (poset edges + seeds)")
    s.set_defaults(fn=cmd_compare)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    out = []
    try:
        sig = _signature(args)
        status = args.fn(args, sig, out)
    except CliError as e:
        if out:
            print("\n".join(out), file=stdout)
        print(f"error[{e.code}]: {e.message}", file=stderr)
        return e.status
    print("\n".join(out), file=stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
