"""``mlab``: command-line front end.

Exit codes: 0 on success, 2 when the verdict is "arbitrage exists" (or no
measure / unbounded price, which mean the same thing), 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import arbitrage, hedging, oracle
from .errors import MlabError, NoMeasure, NotReplicable, UnboundedBelow
from .expectation import inf_expectation, strong_report, sublinear_expectation, weak_report
from .market import Measure, ShortSaleFlags, terminal_values
from .model_io import (fmt, fmt_vector, load_json, measure_to_dict, parse_model, strategy_from_dict,
                       strategy_to_dict)

OK, ERROR, ARBITRAGE = 0, 1, 2

COMMANDS = ("check-arbitrage", "find-measure", "check-weak", "check-strong", "eval-sup",
            "eval-inf", "replicate", "price", "superhedge", "dual-price", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(ERROR)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlab", description="Exact no-arbitrage and hedging under model uncertainty.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True, help="model document (JSON)")
    p.add_argument("--claim", help="claim name from the model's 'claims'")
    p.add_argument("--banned", help="comma-separated assets with short sales banned, or 'all'")
    p.add_argument("--mode", choices=(arbitrage.MARTINGALE, arbitrage.SUPERMARTINGALE))
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--family", choices=("actual", "pricing"),
                   help="family used by check-weak/strong and eval-sup/inf (default: pricing, "
                        "falling back to actual)")
    p.add_argument("--full", action="store_true", help="check every horizon pair t < u")
    p.add_argument("--certificate", help="report written by --format json (for verify)")
    return p


# -- helpers ------------------------------------------------------------------

def _flags(model, banned):
    if banned is None:
        return model.bans
    names = "all" if banned == "all" else [s.strip() for s in banned.split(",") if s.strip()]
    return ShortSaleFlags.from_names(model.tree.assets, names)


def _flag_names(tree, flags):
    return [a for a, b in zip(tree.assets, flags.banned) if b]


def _claim(model, name):
    if not model.claims:
        raise MlabError("the model defines no claims")
    if name is None:
        if len(model.claims) > 1:
            raise MlabError(f"several claims defined, pick one with --claim: {sorted(model.claims)}")
        name = next(iter(model.claims))
    if name not in model.claims:
        raise MlabError(f"unknown claim {name!r}; available: {sorted(model.claims)}")
    return name, model.claims[name]


def _family(model, name, default="pricing"):
    name = name or (default if default in model.families else "actual")
    if name not in model.families:
        raise MlabError(f"the model has no {name!r} family")
    return name, model.families[name]


def _state_dict(model, values):
    return dict(zip(model.state_names, fmt_vector(values)))


def _arbitrage_cert(model, arb, flags):
    return {"kind": "arbitrage", "bans": _flag_names(model.tree, flags),
            "strategy": strategy_to_dict(model.tree, arb.strategy),
            "terminal_values": _state_dict(model, arb.terminal_values),
            "positive_state": model.state_names[arb.positive_state]}


def _measure_cert(model, found, flags):
    return {"kind": "measure", "bans": _flag_names(model.tree, flags), "mode": found.mode,
            "measure": measure_to_dict(model.tree, found.measure), "epsilon": fmt(found.epsilon)}


# -- commands -----------------------------------------------------------------

def _decide(model, flags):
    actual = model.families["actual"]
    found = arbitrage.find_martingale_measure(model.tree, flags, actual)
    if found is not None:
        return {"verdict": "NO-ARBITRAGE", "certificate": _measure_cert(model, found, flags)}, OK
    arb = arbitrage.find_arbitrage(model.market, actual, flags)
    return {"verdict": "ARBITRAGE", "certificate": _arbitrage_cert(model, arb, flags)}, ARBITRAGE


def cmd_check_arbitrage(model, args):
    return _decide(model, _flags(model, args.banned))


def cmd_find_measure(model, args):
    flags = _flags(model, args.banned)
    if args.mode == arbitrage.MARTINGALE:
        flags = ShortSaleFlags.none(model.tree.m)
    elif args.mode == arbitrage.SUPERMARTINGALE and not flags.any:
        flags = ShortSaleFlags.all(model.tree.m)
    found = arbitrage.find_martingale_measure(model.tree, flags, model.families["actual"])
    if found is None:
        return {"verdict": "NO-MEASURE", "certificate": None}, ARBITRAGE
    return {"verdict": "FOUND", "certificate": _measure_cert(model, found, flags)}, OK


def _condition(model, args, strong):
    fname, family = _family(model, args.family)
    report = (strong_report if strong else weak_report)(
        family, model.tree, full=args.full)
    violations = [{"node": n, "asset": a, "t": t, "u": u, "extremum": fmt(x), "price": fmt(s)}
                  for n, a, t, u, x, s in report.violations]
    return {"verdict": "HOLDS" if report.holds else "FAILS",
            "certificate": {"kind": "condition", "strength": "strong" if strong else "weak",
                            "family": fname, "full": args.full, "violations": violations,
                            "skipped_nodes": report.skipped_nodes}}, OK


def cmd_check_weak(model, args):
    return _condition(model, args, strong=False)


def cmd_check_strong(model, args):
    return _condition(model, args, strong=True)


def _evaluate(model, args, sup):
    fname, family = _family(model, args.family)
    cname, claim = _claim(model, args.claim)
    fstar = claim.discounted(model.tree)
    value, idx = (sublinear_expectation if sup else inf_expectation)(
        family, fstar)
    return {"verdict": "VALUE", "value": fmt(value), "claim": cname,
            "certificate": {"kind": "expectation", "direction": "sup" if sup else "inf",
                            "family": fname, "member": idx,
                            "measure": measure_to_dict(model.tree, family.members[idx])}}, OK


def cmd_eval_sup(model, args):
    return _evaluate(model, args, sup=True)


def cmd_eval_inf(model, args):
    return _evaluate(model, args, sup=False)


def _hedge_cert(model, result, flags):
    return {"kind": "hedge", "mode": result.mode, "bans": _flag_names(model.tree, flags),
            "strategy": strategy_to_dict(model.tree, result.strategy),
            "slack": _state_dict(model, result.slack)}


def cmd_replicate(model, args):
    cname, claim = _claim(model, args.claim)
    result = hedging.replicate(model.tree, claim, model.families["actual"])
    if result is None:
        return {"verdict": "NOT-REPLICABLE", "claim": cname, "certificate": None}, OK
    return {"verdict": "REPLICABLE", "claim": cname, "price": fmt(result.price),
            "certificate": _hedge_cert(model, result, ShortSaleFlags.none(model.tree.m))}, OK


def cmd_price(model, args):
    cname, claim = _claim(model, args.claim)
    actual = model.families["actual"]
    try:
        price = hedging.hedge_price(model.tree, claim, actual)
    except NoMeasure:
        report, _ = _decide(model, ShortSaleFlags.none(model.tree.m))
        report["claim"] = cname
        return report, ARBITRAGE
    except NotReplicable:
        return {"verdict": "NOT-REPLICABLE", "claim": cname, "certificate": None}, OK
    found = arbitrage.find_martingale_measure(model.tree, None, actual)
    result = hedging.replicate(model.tree, claim, actual)
    cert = _hedge_cert(model, result, ShortSaleFlags.none(model.tree.m))
    cert["measure"] = measure_to_dict(model.tree, found.measure)
    return {"verdict": "PRICE", "claim": cname, "price": fmt(price), "certificate": cert}, OK


def cmd_superhedge(model, args):
    cname, claim = _claim(model, args.claim)
    flags = _flags(model, args.banned)
    try:
        result = hedging.superhedge(model.tree, claim, flags, model.families["actual"],
                                    model.families.get("pricing"))
    except UnboundedBelow:
        report, _ = _decide(model, flags)
        report["claim"] = cname
        return report, ARBITRAGE
    report = {"verdict": "PRICE", "claim": cname, "price": fmt(result.price),
              "certificate": _hedge_cert(model, result, flags)}
    if result.pricing_bound is not None:
        report["pricing_bound"] = fmt(result.pricing_bound)
    return report, OK


def cmd_dual_price(model, args):
    cname, claim = _claim(model, args.claim)
    flags = _flags(model, args.banned)
    try:
        dual = hedging.dual_superhedge(model.tree, claim, flags, model.families["actual"])
    except NoMeasure:
        return {"verdict": "NO-MEASURE", "claim": cname, "certificate": None}, ARBITRAGE
    return {"verdict": "PRICE", "claim": cname, "price": fmt(dual.price),
            "certificate": {"kind": "dual", "bans": _flag_names(model.tree, flags),
                            "measure": measure_to_dict(model.tree, dual.measure),
                            "boundary": dual.boundary}}, OK


def _leaf_vector(model, raw):
    return [Fraction(raw.get(s, "0")) for s in model.state_names]


def cmd_verify(model, args):
    if not args.certificate:
        raise MlabError("verify needs --certificate <report.json>")
    report = load_json(args.certificate)
    cert = report.get("certificate") if isinstance(report, dict) else None
    if not isinstance(cert, dict) or "kind" not in cert:
        raise MlabError("the report carries no certificate")
    tree, actual = model.tree, model.families["actual"]
    flags = ShortSaleFlags.from_names(tree.assets, cert.get("bans", []))
    kind = cert["kind"]
    claimed = report.get("verdict")
    if kind == "arbitrage":
        strategy = strategy_from_dict(tree, cert["strategy"])
        ok = oracle.verify_arbitrage(strategy, tree, actual, flags)
        ok = ok and _state_dict(model, terminal_values(tree, strategy)) == cert["terminal_values"]
        verdict, code = "ARBITRAGE", ARBITRAGE
    elif kind == "measure":
        q = Measure(_leaf_vector(model, cert["measure"]))
        ok = oracle.verify_measure(q, tree, flags, actual, Fraction(cert["epsilon"]))
        verdict, code = claimed if claimed in ("NO-ARBITRAGE", "FOUND") else "NO-ARBITRAGE", OK
    elif kind == "hedge":
        strategy = strategy_from_dict(tree, cert["strategy"])
        cname, claim = _claim(model, report.get("claim"))
        fstar = claim.discounted(tree)
        values = terminal_values(tree, strategy)
        live = [k for k in range(len(fstar)) if any(q[k] > 0 for q in actual)]
        banned_ok = all(not (b and x < 0) for h in strategy.risky_holdings.values()
                        for b, x in zip(flags.banned, h))
        rel = (lambda v, f: v == f) if cert["mode"] == hedging.REPLICATION else (lambda v, f: v >= f)
        ok = (banned_ok and all(rel(values[k], fstar[k]) for k in live)
              and fmt(strategy.initial_wealth) == report.get("price"))
        verdict, code = claimed, OK
    elif kind == "dual":
        cname, claim = _claim(model, report.get("claim"))
        q = _leaf_vector(model, cert["measure"])
        poly = oracle.Polytope.risk_neutral(tree, flags)
        live = [k for k in range(len(q)) if any(m[k] > 0 for m in actual)]
        ok = (poly.contains(q) and all(q[k] == 0 for k in range(len(q)) if k not in live)
              and fmt(sum(a * b for a, b in zip(q, claim.discounted(tree)))) == report.get("price"))
        verdict, code = claimed, OK
    elif kind in ("condition", "expectation"):
        ns = argparse.Namespace(family=cert["family"], full=cert.get("full", False),
                                claim=report.get("claim"))
        again, _ = (_condition(model, ns, cert["strength"] == "strong") if kind == "condition"
                    else _evaluate(model, ns, cert["direction"] == "sup"))
        ok = again == {k: v for k, v in report.items() if k != "command"}
        verdict, code = claimed, OK
    else:
        raise MlabError(f"unknown certificate kind {kind!r}")
    ok = ok and (claimed is None or claimed == verdict)
    if not ok:
        return {"verdict": "INVALID", "checked": kind, "certificate": cert}, ERROR
    return {"verdict": verdict, "checked": kind, "valid": True, "certificate": cert}, code


HANDLERS = {
    "check-arbitrage": cmd_check_arbitrage, "find-measure": cmd_find_measure,
    "check-weak": cmd_check_weak, "check-strong": cmd_check_strong,
    "eval-sup": cmd_eval_sup, "eval-inf": cmd_eval_inf, "replicate": cmd_replicate,
    "price": cmd_price, "superhedge": cmd_superhedge, "dual-price": cmd_dual_price,
    "verify": cmd_verify,
}


# -- output -------------------------------------------------------------------

def _rows(prefix, value):
    if isinstance(value, dict):
        if not value:
            return [(prefix, "{}")]
        out = []
        for k, v in value.items():
            out += _rows(f"{prefix}.{k}" if prefix else str(k), v)
        return out
    if isinstance(value, list):
        if all(not isinstance(v, (dict, list)) for v in value):
            return [(prefix, ", ".join(str(v) for v in value) or "-")]
        out = []
        for i, v in enumerate(value):
            out += _rows(f"{prefix}[{i}]", v)
        return out
    return [(prefix, "-" if value is None else str(value))]


def render_table(report: dict) -> str:
    rows = _rows("", report)
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def execute(args):
    """Run parsed arguments; returns ``(report, exit code)``."""
    model = parse_model(args.model)
    report, code = HANDLERS[args.command](model, args)
    return {"command": args.command, **report}, code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else ERROR
    try:
        report, code = execute(args)
    except (MlabError, OSError, KeyError, ValueError, TypeError) as exc:
        print(f"mlab: error: {exc}", file=sys.stderr)
        return ERROR
    print(json.dumps(report, indent=2) if args.format == "json" else render_table(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
