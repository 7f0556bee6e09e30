"""``presym`` command-line driver.

Exit codes: 0 success, 1 parse or usage error (and failed preconditions such
as an irregular level set), 2 stabilization bifurcation or generation cap,
3 when ``verify`` reports a failing row.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import modelfile
from .cartan import NotClosed, exterior_derivative, interior
from .gotay import BifurcationError, GenerationCapExceeded, stabilize
from .models import BUILTIN, get_model
from .momred import (
    kernel_span_certificate,
    build_momentum,
    level_set,
    pfaff_check,
    reduce,
    route_equivalence,
)
from .symexpr import ParseError

ROUTES = ("complete", "gauge-then-symplectic", "coisotropic", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _build_parser():
    p = _Parser(prog="presym", description="Presymplectic constraint and reduction engine.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--example", choices=sorted(BUILTIN), help="built-in model")
        g.add_argument("--model", metavar="FILE", help="model file (see docs/model-format.md)")
        sp.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
        sp.add_argument("--report", choices=("text", "json"), default="text")

    sp = sub.add_parser("stabilize", help="run the constraint algorithm")
    source(sp)
    sp.add_argument("--sode", action="store_true", help="require second-order solutions")

    sp = sub.add_parser("reduce", help="reduce a level set of the momentum map")
    source(sp)
    sp.add_argument("--mu", required=True, help="comma-separated rationals, one per generator")
    sp.add_argument("--point", default="auto", help="'auto' or 'x=1,y=-1/2,...'")
    sp.add_argument("--route", choices=ROUTES, default="complete")

    sp = sub.add_parser("verify", help="run the invariant battery")
    source(sp)
    sp.add_argument("--mu", help="level used by the Pfaff check (default: all zeros)")

    sp = sub.add_parser("examples", help="list built-in models or print one as a model file")
    sp.add_argument("--dump", metavar="NAME", choices=sorted(BUILTIN))
    return p


def _glue_negative_values(argv):
    """Let ``--mu -1,-1`` through argparse, which would read ``-1,-1`` as an option."""
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--mu", "--point"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _rationals(text, what):
    try:
        return [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"presym: error: {what} must be comma-separated rationals, got {text!r}") from None


def _point(text):
    if text == "auto":
        return None
    out = {}
    for item in text.split(","):
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"presym: error: --point entries read name=value, got {item!r}")
        out[k.strip()] = _rationals(v, "--point values")[0]
    return out


def _load(args):
    if args.example:
        return get_model(args.example), None
    with open(args.model, encoding="utf-8") as fh:
        src = modelfile.loads(fh.read())
    return src.build(), src


def _emit(obj, fmt):
    if fmt == "json":
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(obj)


def cmd_stabilize(args):
    model, _ = _load(args)
    report = stabilize(model.system, sode=args.sode, sode_pairing=model.sode_pairing,
                       sampler=model.sampler, seed=args.seed)
    sys.stdout.write(report.to_json() if args.report == "json" else report.to_text())
    return 0


def cmd_reduce(args):
    model, _ = _load(args)
    if model.action is None:
        raise UsageError("presym: error: the model declares no generators")
    mu = _rationals(args.mu, "--mu")
    if len(mu) != len(model.action.names):
        raise UsageError(
            f"presym: error: --mu needs {len(model.action.names)} values "
            f"({', '.join(model.action.names)}), got {len(mu)}"
        )
    point = _point(args.point)
    target, action = model.reduction_target()
    if point is not None:
        missing = [v for v in target.chart.variables if v not in point]
        if missing:
            raise UsageError(f"presym: error: --point leaves {', '.join(missing)} unbound")
    mm = build_momentum(target, action)
    if args.route == "complete":
        red = reduce(target, mm, mu, point, seed=args.seed)
        _emit(red.to_dict() if args.report == "json" else red.to_text(), args.report)
        return 0
    routes = route_equivalence(target, mm, mu, point, seed=args.seed)
    if args.route != "all":
        row = routes.results[args.route]
        if args.report == "json":
            _emit({"schema": 1, "route": args.route, **row}, "json")
        else:
            sys.stdout.write(f"route {args.route}: quotient dim {row['quotient_dim']}, "
                             f"reduced rank {row['reduced_rank']}, "
                             f"symplectic {str(row['symplectic']).lower()}\n")
        return 0
    sys.stdout.write(routes.to_json() if args.report == "json" else routes.to_text())
    return 0


def _battery(model, src, mu_text, seed):
    """Rows ``(check, passed, detail)``; later rows are skipped when the system cannot be built."""
    rows = []
    if src is not None:
        _, omega, *_ = src.raw_system()
        d = exterior_derivative(omega) if omega.chart.dim > 2 else None
        rows.append(("closedness", not d, "d(omega) = 0" if not d else f"d(omega) = {d}"))
        if d:
            return rows
    if model is None:
        return rows
    if src is None:
        d = exterior_derivative(model.system.omega)
        rows.append(("closedness", not d, "d(omega) = 0" if not d else f"d(omega) = {d}"))
    rank = model.system.rank
    rows.append(("constant rank", rank is not None,
                 f"rank {rank} at every sample point" if rank is not None else "no sample points"))
    if model.stage == "ambient":
        try:
            rep = model.stabilized()
            rows.append(("stabilization", True,
                         f"final dimension {rep.final_dim}, {len(rep.final)} constraints"))
        except (BifurcationError, GenerationCapExceeded) as exc:
            rows.append(("stabilization", False, str(exc)))
            return rows
    if model.action is None:
        return rows
    target, action = model.reduction_target()
    local_ok = True
    for name, X in action.generators:
        beta = interior(X, target.omega)
        ok = target.chart.dim < 2 or not exterior_derivative(beta)
        local_ok &= ok
        rows.append((f"locally hamiltonian {name}", ok,
                     "d i(X) omega = 0" if ok else "d i(X) omega is not zero"))
    if not local_ok:
        return rows
    mm = build_momentum(target, action)
    rows.append(("poissonian", mm.poissonian.verdict in ("strict", "weak"),
                 f"verdict {mm.poissonian.verdict}"))
    a2 = kernel_span_certificate(target, action, seed=seed)
    rows.append(("kernel inside generator span", bool(a2), f"verdict {a2.verdict}"))
    mu = _rationals(mu_text, "--mu") if mu_text else [0] * len(action.names)
    try:
        C = level_set(mm, mu, check_regular=False, seed=seed)
        pv = pfaff_check(mm, C)
        n = len(pv.checked)
        detail = (f"{n} level constraint{'' if n == 1 else 's'} match{'es' if n == 1 else ''} i(xi) omega" if pv
                  else f"d of the {pv.failed_name} constraint differs from i(xi) omega")
        rows.append(("pfaff", pv.passed, detail))
    except ValueError as exc:
        rows.append(("pfaff", False, str(exc)))
    return rows


def cmd_verify(args):
    model = src = None
    if args.example:
        model = get_model(args.example)
    else:
        with open(args.model, encoding="utf-8") as fh:
            src = modelfile.loads(fh.read())
        try:
            model = src.build()
        except NotClosed:
            model = None
    rows = _battery(model, src, args.mu, args.seed)
    if args.report == "json":
        _emit({"schema": 1, "checks": [{"check": c, "passed": ok, "detail": d} for c, ok, d in rows],
               "passed": all(ok for _, ok, _ in rows)}, "json")
    else:
        width = max(len(c) for c, _, _ in rows)
        for c, ok, d in rows:
            sys.stdout.write(f"{c:<{width}}  {'pass' if ok else 'FAIL'}  {d}\n")
    return 0 if all(ok for _, ok, _ in rows) else 3


def cmd_examples(args):
    if args.dump:
        sys.stdout.write(modelfile.dumps(get_model(args.dump)))
        return 0
    for name in sorted(BUILTIN):
        m = get_model(name)
        sys.stdout.write(f"{name:<16}{m.description}\n")
    return 0


COMMANDS = {
    "stabilize": cmd_stabilize,
    "reduce": cmd_reduce,
    "verify": cmd_verify,
    "examples": cmd_examples,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _build_parser().parse_args(_glue_negative_values(argv))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (modelfile.ModelFileError, ParseError) as exc:
        print(f"presym: parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"presym: {exc}", file=sys.stderr)
        return 1
    except (BifurcationError, GenerationCapExceeded) as exc:
        print(f"presym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"presym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
