"""Command-line front end.

Exit status: 0 when the computation finished, 2 when a hypothesis is not met
or the answer is inconclusive, 1 for malformed input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import catalog, functors, gmod, io, nilfilt, singer
from .parallel import workers

OK, INPUT_ERROR, NOT_MET = 0, 1, 2


class Inconclusive(Exception):
    """Raised to finish with exit status 2 and a report."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {"status": "inconclusive", "reason": message}


class TrustExhausted(Exception):
    def __init__(self, degree: int, lowest: int):
        super().__init__(f"trust exhausted: results are exact only through degree {degree}, "
                         f"below the lowest class in degree {lowest}")
        self.degree = degree


# -- inputs -------------------------------------------------------------------------

BUILTIN_HELP = ("builtin:rp2, builtin:rp:N, builtin:rpinf, builtin:hp2, builtin:free:N, builtin:sphere:N, "
                "builtin:nmod:T, builtin:zero")


def _window_hi(args, default: int = 32) -> int:
    return args.window[1] if getattr(args, "window", None) else default


def builtin_module(spec: str, dmax: int) -> gmod.GradedModule:
    parts = spec.split(":")[1:]
    name, rest = parts[0], parts[1:]
    try:
        nums = [int(x) for x in rest]
    except ValueError:
        raise io.InputError(f"bad builtin arguments in {spec!r}") from None
    table = {
        "rp2": (0, lambda: catalog.rp2()),
        "rp": (1, lambda: catalog.projective_range(1, nums[0])),
        "rpinf": (0, lambda: catalog.rp_infinity(dmax)),
        "hp2": (0, lambda: catalog.hp2()),
        "free": (1, lambda: gmod.free_unstable(nums[0], dmax)),
        "sphere": (1, lambda: catalog.sphere(nums[0])),
        "nmod": (1, lambda: catalog.n_module(nums[0])),
        "zero": (0, lambda: gmod.zero_module()),
    }
    if name not in table:
        raise io.InputError(f"unknown builtin {name!r}; known: {BUILTIN_HELP}")
    arity, make = table[name]
    if len(nums) != arity:
        raise io.InputError(f"builtin {name!r} takes {arity} argument(s)")
    return gmod.mark_unstable(make())


def load_module(spec: str, args) -> gmod.GradedModule:
    if spec.startswith("builtin:"):
        m = builtin_module(spec, _window_hi(args))
    else:
        m = io.load_module(spec)
    if getattr(args, "window", None):
        lo, hi = args.window
        try:
            m = m.with_window(lo, hi)
        except gmod.WindowError as exc:
            raise io.InputError(str(exc), "--window") from None
    return m


def load_algebra(spec: str, args):
    if spec.startswith("builtin:"):
        name = spec.split(":")[1:]
        if name == ["hp2"]:
            return functors.hp2_algebra()
        if len(name) == 2 and name[0] == "rp":
            return functors.truncated_polynomial_algebra(int(name[1]))
        raise io.InputError(f"unknown builtin algebra {spec!r}; known: builtin:rp:N, builtin:hp2")
    return io.algebra_from_dict(io.read_json(spec), spec)


def load_functor(spec: str, kmax: int):
    from .polyfunc import localize, standard
    if spec.startswith("l:"):
        m = load_module(spec[2:], argparse.Namespace(window=None))
        return localize(m, kmax).functor
    if Path(spec).suffix == ".json" or Path(spec).exists():
        f = io.load_functor(spec)
        if f.kmax != kmax:
            raise io.InputError(f"functor file has kmax={f.kmax}, but --kmax is {kmax}", spec)
        return f
    try:
        return standard(spec, kmax)
    except ValueError as exc:
        raise io.InputError(str(exc), spec) from None


# -- output ---------------------------------------------------------------------------

def module_report(m: gmod.GradedModule) -> dict:
    out = io.module_to_dict(m)
    out["summary"] = m.summary()
    return out


def apply_trust(m: gmod.GradedModule, args, report: dict) -> gmod.GradedModule:
    """Cut (strict) or flag (warn) the degrees above the trust degree."""
    if m.complete or m.trust is None or m.is_zero() or m.top() <= m.trust:
        return m
    if args.trust_policy == "warn":
        report.setdefault("warnings", []).append(f"degrees above {m.trust} are not trusted")
        return m
    if m.trust < m.bottom():
        raise TrustExhausted(m.trust, m.bottom())
    return m.with_window(dmax=max(m.trust, m.dmin))


def render(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(render(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_short(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(render(v, indent + 1))
            else:
                lines.append(f"{pad}- {_short(v)}")
    else:
        lines.append(f"{pad}{_short(obj)}")
    return lines


def _flat(v) -> bool:
    items = v.values() if isinstance(v, dict) else v
    return all(not isinstance(x, (dict, list)) for x in items) and len(v) <= 12


def _short(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(x)}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def emit(report: dict, args, out) -> None:
    if args.json:
        out.write(io.dumps(report))
    else:
        out.write("\n".join(render(report)) + "\n")


# -- commands -----------------------------------------------------------------------

def cmd_check_module(args) -> tuple[dict, int]:
    m = load_module(args.module, args)
    bad = gmod.validate(m, check_unstable=args.unstable)
    report = {"module": m.summary(), "trust": m.trust, "complete": m.complete,
              "unstable": gmod.is_unstable(m) if not bad else None,
              "violations": [v.as_dict() for v in bad]}
    return report, OK if not bad else INPUT_ERROR


def _require_valid(m: gmod.GradedModule, what: str):
    bad = gmod.validate(m, limit=1)
    if bad:
        v = bad[0]
        raise io.InputError(f"{v.kind} fails in degree {v.degree} for Sq{list(v.op)}", what)


def cmd_op(args) -> tuple[dict, int]:
    m = load_module(args.module, args)
    _require_valid(m, args.module)
    name = args.operation
    if name == "phi":
        out = functors.phi(m)
    elif name == "s2":
        out = functors.sym2(m)
    elif name == "lambda2":
        out = functors.ext2(m)
    elif name == "gamma2":
        out = functors.gamma2(m)
    elif name == "tensor":
        if not args.other:
            raise io.InputError("tensor needs a second module", "op tensor")
        other = load_module(args.other, args)
        _require_valid(other, args.other)
        out = gmod.tensor(m, other)
    elif name == "suspend":
        out = gmod.suspend(m, args.t)
    elif name == "loops":
        out = functors.loops_n(m, args.t or 1)[0]
    elif name == "destab":
        out = functors.destabilize(m, args.t)
    else:
        out = functors.f2bar_um(m).module
    report = {"operation": name}
    out = apply_trust(out, args, report)
    report["result"] = module_report(out)
    return report, OK


def cmd_singer(args) -> tuple[dict, int]:
    m = load_module(args.module, args)
    _require_valid(m, args.module)
    report: dict = {"operation": args.which}
    if args.which == "r1":
        s = singer.r1(m)
    elif args.which == "r1n":
        s = singer.r1_truncated(m, args.n)
    else:
        src, d, tgt = singer.residue_differential(m, args.n)
        report["source"] = {"summary": src.carrier.summary(), "trust": src.carrier.trust}
        report["target"] = {"summary": tgt.summary(), "trust": tgt.trust}
        report["differential"] = io.map_to_dict(d)
        report["steenrod_linear"] = d.is_linear()
        return report, OK
    carrier = apply_trust(s.carrier, args, report)
    report["result"] = module_report(carrier)
    report["u_action"] = {str(d): mat.to_bitstrings() for d, mat in sorted(s.u_action.items())
                          if mat.nrows and d <= (carrier.dmax)}
    return report, OK


def cmd_emodel(args) -> tuple[dict, int]:
    from .emodel import CertificateMissing, HypothesisError, IncompatibleLegs, algebraic_d1, e_model, two_column_page
    try:
        if args.which == "build":
            m = load_module(args.input, args)
            _require_valid(m, args.input)
            em = e_model(m, args.n)
            report = {"n": args.n}
            mod = apply_trust(em.module, args, report)
            report.update({"module": module_report(mod), "sequence_exact": em.is_exact(),
                           "dims_identity": em.dims_identity() if args.n >= 2 else None})
            return report, OK
        k = load_algebra(args.input, args)
        bad = k.violations()
        if bad:
            raise io.InputError(bad[0], args.input)
        if args.which == "d1":
            d = algebraic_d1(k, args.n)
            return {"n": args.n, "source": d.model.module.summary(), "target": d.d1.target.summary(),
                    "d1": io.map_to_dict(d.d1), "checks": d.checks}, OK
        res = two_column_page(k, args.n)
        return res.as_dict(), OK
    except (HypothesisError, CertificateMissing, IncompatibleLegs) as exc:
        raise Inconclusive(str(exc), {"n": args.n, "status": "hypothesis-not-met", "reason": str(exc)})


def cmd_nilfilt(args) -> tuple[dict, int]:
    m = load_module(args.module, args)
    _require_valid(m, args.module)
    rep = nilfilt.nil_filtration(gmod.mark_unstable(m), args.smax)
    out = {"module": m.summary(), "smax": args.smax}
    out.update(rep.as_dict())
    out["reduced_layers"] = {str(s): nilfilt.is_reduced(rep.layers[s]) for s in sorted(rep.layers)}
    if rep.trust is not None and m.bottom() is not None and rep.trust < m.bottom():
        if args.trust_policy == "strict":
            raise TrustExhausted(rep.trust, m.bottom())
        out.setdefault("warnings", []).append(f"socle series exact only through degree {rep.trust}")
    return out, OK


def cmd_delta(args) -> tuple[dict, int]:
    m = gmod.mark_unstable(load_module(args.module, args))
    _require_valid(m, args.module)
    verdict = nilfilt.in_nil_s(m, args.n)
    if verdict.status == nilfilt.NOT_MEMBER:
        raise Inconclusive(verdict.reason, {"n": args.n, "status": "hypothesis-not-met",
                                            "reason": f"not in Nil_{args.n}: {verdict.reason}"})
    dr = nilfilt.delta_n(m, args.n)
    report = {"n": args.n, "membership": verdict.status, "rho_n": dr.rho_n.summary(),
              "rho_n+1": dr.rho_n1.summary(), "nonzero": dr.nonzero, "delta": io.map_to_dict(dr.delta),
              "checks": dr.checks}
    return report, OK


def cmd_almost(args) -> tuple[dict, int]:
    m = load_module(args.module, args)
    _require_valid(m, args.module)
    w = nilfilt.certify_almost_unstable(m, tmax=args.tmax)
    report = {"module": m.summary(), "status": w.status, "reason": w.reason, "shifts": w.shifts,
              "steps": [{str(d): [format(v, "b") for v in vs] for d, vs in sorted(s.items())} for s in w.steps],
              "steps_verified": w.checked}
    return report, OK if w.status != nilfilt.INCONCLUSIVE else NOT_MET


def cmd_localize(args) -> tuple[dict, int]:
    from .polyfunc import LocalizationError, localize, poly_degree
    m = load_module(args.module, args)
    _require_valid(m, args.module)
    try:
        loc = localize(gmod.mark_unstable(m), args.kmax)
    except LocalizationError as exc:
        raise Inconclusive(str(exc)) from None
    deg = poly_degree(loc.functor)
    report = loc.as_dict()
    report["degree"] = deg.as_dict()
    report["functor"] = io.functor_to_dict(loc.functor) if args.full else None
    return report, OK if loc.stable else NOT_MET


def _ses_from_spec(spec: str, kmax: int):
    from .polyfunc import phi_ses, split_ses
    kind, _, rest = spec.partition(":")
    if kind == "phi":
        return phi_ses(load_functor(rest, kmax) if rest else None, kmax)
    if kind == "split":
        names = rest.split(",")
        if len(names) != 2:
            raise io.InputError("split needs two functors, as split:A,B", "--ses")
        return split_ses(load_functor(names[0], kmax), load_functor(names[1], kmax))
    raise io.InputError(f"unknown sequence {spec!r}; use phi[:F] or split:A,B", "--ses")


def _ext_from_spec(spec: str, kmax: int):
    from .polyfunc import e1_row, e1_tilde_row, split_two_extension
    kind, _, rest = spec.partition(":")
    base = load_functor(rest, kmax) if rest and kind != "split" else None
    if kind == "e1":
        return e1_row(base, kmax)
    if kind == "e1~":
        return e1_tilde_row(base, kmax)
    if kind == "split":
        names = rest.split(",")
        if len(names) != 2:
            raise io.InputError("split needs two functors, as split:A,B", "--class")
        return split_two_extension(load_functor(names[0], kmax), load_functor(names[1], kmax))
    raise io.InputError(f"unknown class {spec!r}; use e1[:F], e1~[:F] or split:A,B", "--class")


def cmd_functor(args) -> tuple[dict, int]:
    from .polyfunc import (DegreeHypothesis, HeadroomError, check_split_certificate, check_witness,
                           delta_functor, detection_functor, poly_degree, quadratic_map, ses_splits,
                           yoneda_class)
    kmax = args.kmax
    if args.which == "degree":
        f = load_functor(_need(args.functor, "--functor"), kmax)
        deg = poly_degree(f)
        report = {"functor": f.name, "dims": list(f.dims), "functorial": f.is_functorial()}
        report.update(deg.as_dict())
        return report, OK if deg.certified else NOT_MET
    if args.which == "delta":
        f = load_functor(_need(args.functor, "--functor"), kmax)
        try:
            d = delta_functor(f)
        except HeadroomError as exc:
            raise Inconclusive(str(exc)) from None
        return {"functor": f.name, "delta_dims": list(d.dims), "kmax": d.kmax,
                "delta": io.functor_to_dict(d)}, OK
    if args.which == "split":
        ses = _ses_from_spec(_need(args.ses, "--ses"), kmax)
        if not ses.is_exact():
            raise io.InputError("the sequence is not short exact", "--ses")
        rep = ses_splits(ses)
        report = {"sequence": ses.name}
        report.update(rep.as_dict())
        if not rep.splits:
            report["certificate_checked"] = check_split_certificate(ses, rep.certificate)
        return report, OK
    if args.which == "ext2":
        ext = _ext_from_spec(_need(args.ext_class, "--class"), kmax)
        if not ext.is_exact():
            raise io.InputError("the four-term sequence is not exact", "--class")
        cls = yoneda_class(ext)
        report = {"extension": ext.name}
        report.update(cls.as_dict())
        if cls.nonzero:
            report["witness_checked"] = check_witness(ext, cls)
        return report, OK
    try:
        eta = quadratic_map(_need(args.map, "--map"), kmax)
    except KeyError:
        raise io.InputError(f"unknown map {args.map!r}", "--map") from None
    try:
        chain = detection_functor(eta)
    except DegreeHypothesis as exc:
        raise Inconclusive(str(exc), {"map": args.map, "status": "hypothesis-not-met", "reason": str(exc)})
    report = {"map": args.map}
    report.update(chain.as_dict())
    return report, OK


def _need(value, flag: str):
    if value is None:
        raise io.InputError("this subcommand needs the flag", flag)
    return value


def _k_inclusion(n: int, f1, spec: str):
    from .polyfunc import S, compose_functors, identity_nat, image, subfunctor
    from .polyfunc.standard import FROBENIUS, whisker
    target = f1 if n >= 2 else compose_functors(S(2, f1.kmax), f1, name=f"S2o{f1.name}")
    if spec == "all":
        return identity_nat(target)
    if spec == "zero":
        return subfunctor(target, [[] for _ in range(target.kmax + 1)], "0")[1]
    if spec == "frobenius" and n == 1:
        return image(whisker(FROBENIUS, f1, f1, target), name=f"Frob({f1.name})")[1]
    raise io.InputError("K must be all, zero, or (for n = 1) frobenius", "--k")


def cmd_obstruction(args) -> tuple[dict, int]:
    from .polyfunc import NOT_MET as VERDICT_NOT_MET, module_obstruction, obstruction
    if args.n < 1:
        raise io.InputError("n must be positive", "--n")
    if args.module:
        m = gmod.mark_unstable(load_module(args.module, args))
        _require_valid(m, args.module)
        rep = module_obstruction(m, args.n, args.kmax)
    elif args.f1:
        f1 = load_functor(args.f1, args.kmax)
        rep = obstruction(args.n, f1, _k_inclusion(args.n, f1, args.k), mode="kernel")
    else:
        raise io.InputError("give --module or --f1", "obstruction")
    report = rep.as_dict()
    return report, NOT_MET if rep.verdict == VERDICT_NOT_MET else OK


def cmd_realizability(args) -> tuple[dict, int]:
    from .polyfunc import NOT_REALIZABLE, realizability
    m = gmod.mark_unstable(load_module(args.module, args))
    _require_valid(m, args.module)
    rep = realizability(m, args.n, args.kmax)
    return rep.as_dict(), OK if rep.verdict == NOT_REALIZABLE else NOT_MET


def cmd_export(args) -> tuple[dict, int]:
    if args.kind == "algebra":
        return io.algebra_to_dict(load_algebra(args.spec, args)), OK
    if args.kind == "functor":
        return io.functor_to_dict(load_functor(args.spec, args.kmax)), OK
    return io.module_to_dict(load_module(args.spec, args)), OK


# -- parser ---------------------------------------------------------------------------

def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("LO exceeds HI")
    return lo, hi


def _kmax(text: str) -> int:
    k = int(text)
    if not 1 <= k <= 4:
        raise argparse.ArgumentTypeError("kmax must be between 1 and 4")
    return k


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured JSON report")
    common.add_argument("--window", type=_window, metavar="LO,HI", help="degree window for input modules")
    common.add_argument("--trust-policy", choices=["strict", "warn"], default="strict",
                        help="cut results above the trust degree (strict) or keep and flag them (warn)")
    common.add_argument("--kmax", type=_kmax, default=3, help="largest vector-space dimension for functors")

    p = argparse.ArgumentParser(prog="nilops", description=__doc__.splitlines()[0],
                                epilog=f"Modules are JSON files or {BUILTIN_HELP}.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-module", parents=[common], help="validate a module presentation")
    s.add_argument("module")
    s.add_argument("--unstable", action="store_true", help="also check instability")
    s.set_defaults(run=cmd_check_module)

    s = sub.add_parser("op", parents=[common], help="apply a module functor")
    s.add_argument("operation", choices=["phi", "s2", "lambda2", "gamma2", "tensor", "suspend", "loops",
                                         "destab", "f2u"])
    s.add_argument("module")
    s.add_argument("other", nargs="?", help="second module for tensor")
    s.add_argument("--t", type=int, default=0, help="shift for suspend/destab, iterations for loops")
    s.set_defaults(run=cmd_op)

    s = sub.add_parser("singer", parents=[common], help="Singer construction")
    s.add_argument("which", choices=["r1", "r1n", "d1n"])
    s.add_argument("module")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_singer)

    s = sub.add_parser("emodel", parents=[common], help="extended-power model and its differential")
    s.add_argument("which", choices=["build", "d1", "two-column"])
    s.add_argument("input", help="a module for build, an algebra for d1 and two-column")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_emodel)

    s = sub.add_parser("nilfilt", parents=[common], help="nilpotent filtration and its layers")
    s.add_argument("module")
    s.add_argument("--smax", type=int, default=4)
    s.set_defaults(run=cmd_nilfilt)

    s = sub.add_parser("delta", parents=[common], help="the map from Phi rho_n to rho_(n+1)")
    s.add_argument("module")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_delta)

    s = sub.add_parser("almost", parents=[common], help="certify an almost unstable module")
    s.add_argument("module")
    s.add_argument("--tmax", type=int, default=8)
    s.set_defaults(run=cmd_almost)

    s = sub.add_parser("localize", parents=[common], help="the functor l(M)")
    s.add_argument("module")
    s.add_argument("--full", action="store_true", help="include the generator matrices")
    s.set_defaults(run=cmd_localize)

    s = sub.add_parser("functor", parents=[common], help="polynomial functor computations")
    s.add_argument("which", choices=["degree", "delta", "split", "ext2", "detect"])
    s.add_argument("--functor", help="standard name (Id, S2, L2, ...), a JSON file, or l:MODULE")
    s.add_argument("--ses", help="phi[:F] or split:A,B")
    s.add_argument("--class", dest="ext_class", help="e1[:F], e1~[:F] or split:A,B")
    s.add_argument("--map", help="a standard quadratic map, e.g. l2_to_t2")
    s.set_defaults(run=cmd_functor)

    s = sub.add_parser("obstruction", parents=[common], help="the realizability obstruction")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--module", help="run the module pipeline on this module")
    s.add_argument("--f1", help="functor F1 (instead of --module)")
    s.add_argument("--k", default="all", help="K with --f1: all, zero, or frobenius (n = 1)")
    s.set_defaults(run=cmd_obstruction)

    s = sub.add_parser("realizability", parents=[common], help="hypothesis gate, then the obstruction")
    s.add_argument("module")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(run=cmd_realizability)

    s = sub.add_parser("export", parents=[common], help="write a builtin object as JSON")
    s.add_argument("kind", choices=["module", "algebra", "functor"])
    s.add_argument("spec")
    s.set_defaults(run=cmd_export)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "export":
        args.json = True
    try:
        workers()
        for flag in ("n", "smax", "t", "tmax"):
            if getattr(args, flag, 0) is not None and getattr(args, flag, 0) < 0:
                raise io.InputError("must be non-negative", f"--{flag}")
        report, status = args.run(args)
    except io.InputError as exc:
        print(f"nilops: input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except TrustExhausted as exc:
        print(f"nilops: {exc}", file=sys.stderr)
        emit({"status": "trust-exhausted", "trust_degree": exc.degree}, args, out)
        return NOT_MET
    except Inconclusive as exc:
        print(f"nilops: {exc}", file=sys.stderr)
        emit(exc.report, args, out)
        return NOT_MET
    except (functors.NotUnstable, gmod.WindowError, OSError, ValueError) as exc:
        print(f"nilops: input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    emit(report, args, out)
    return status


if __name__ == "__main__":
    sys.exit(main())
