"""Replication and superhedging of contingent claims.

Everything is priced in discounted units.  Among optimal strategies the one
with the smallest total absolute holding is returned, found by a second LP
with the price pinned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import lp as lpx
from .arbitrage import _support_of, find_martingale_measure, measure_conditions
from .errors import NoMeasure, NotReplicable, UnboundedBelow
from .expectation import check_strong, expectation, sublinear_expectation
from .market import (Claim, EventTree, Measure, MeasureFamily, ShortSaleFlags, TradingStrategy,
                     as_tree, discounted_gain, gain_rows, holding_layout, resolve_flags,
                     strategy_from_vector)

REPLICATION = "replication"
SUPERHEDGE = "superhedge"


@dataclass(frozen=True)
class HedgeResult:
    price: Fraction
    strategy: TradingStrategy
    mode: str
    slack: tuple  # x + H.S*(T) - f* per leaf
    pricing_bound: Optional[Fraction] = None  # sup over a strong pricing family, if given


@dataclass(frozen=True)
class DualPrice:
    price: Fraction
    measure: Measure
    boundary: bool  # the maximiser puts zero weight on some support state


def _setup(tree, claim, flags, actual):
    tree = as_tree(tree)
    flags = resolve_flags(flags, tree.m)
    states = _support_of(tree, actual)
    fstar = claim.discounted(tree) if isinstance(claim, Claim) else Claim(claim).discounted(tree)
    layout = holding_layout(tree, states)
    return tree, flags, states, fstar, layout


def _min_norm(tree, layout, rows, states, fstar, price, relation, lower) -> list:
    """Holdings attaining ``price`` with minimal sum of absolute values.

    Variables: ``h`` (length n) then ``t >= |h|`` (length n).
    """
    n = len(layout) * tree.m
    cons = []
    for k in states:
        cons.append(lpx.Constraint(list(rows[k]) + [0] * n, relation, fstar[k] - price))
    for v in range(n):
        e = [0] * (2 * n)
        e[v], e[n + v] = -1, 1
        cons.append(lpx.Constraint(e, lpx.GE, 0))
        e = list(e)
        e[v] = 1
        cons.append(lpx.Constraint(e, lpx.GE, 0))
    bounds = [(lower[v], None) for v in range(n)] + [(0, None)] * n
    out = lpx.solve(lpx.LinearProgram([0] * n + [1] * n, cons, bounds))
    assert out.optimal, out.status
    return list(out.x[:n])


def _slack(tree, strategy, fstar) -> tuple:
    gains = discounted_gain(tree, strategy, tree.horizon)
    return tuple(strategy.initial_wealth + g - f for g, f in zip(gains, fstar))


def replicate(tree: EventTree, claim, family: Optional[MeasureFamily] = None) -> Optional[HedgeResult]:
    """Solve ``x + H.S*(T) = f*`` on the support; ``None`` when the claim is not replicable."""
    tree, _, states, fstar, layout = _setup(tree, claim, None, family)
    rows = gain_rows(tree, layout, states)
    n = len(layout) * tree.m
    # variables: x, h, t >= |h|
    cons = [lpx.Constraint([1] + list(rows[k]) + [0] * n, lpx.EQ, fstar[k]) for k in states]
    for v in range(n):
        e = [0] * (1 + 2 * n)
        e[1 + v], e[1 + n + v] = -1, 1
        cons.append(lpx.Constraint(e, lpx.GE, 0))
        e = list(e)
        e[1 + v] = 1
        cons.append(lpx.Constraint(e, lpx.GE, 0))
    out = lpx.solve(lpx.LinearProgram([0] * (1 + n) + [1] * n, cons,
                                      [(None, None)] * (1 + n) + [(0, None)] * n))
    if out.status is lpx.Status.INFEASIBLE:
        return None
    price = out.x[0]
    strategy = strategy_from_vector(tree, layout, out.x[1:1 + n], price)
    return HedgeResult(price, strategy, REPLICATION, _slack(tree, strategy, fstar))


def hedge_price(tree: EventTree, claim, family: Optional[MeasureFamily] = None) -> Fraction:
    """``E_Q[f*]`` under the certified martingale measure, for a replicable claim."""
    tree = as_tree(tree)
    cert = find_martingale_measure(tree, None, family)
    if cert is None:
        raise NoMeasure("the market admits arbitrage; no risk-neutral measure exists")
    rep = replicate(tree, claim, family)
    if rep is None:
        raise NotReplicable("claim cannot be replicated; use the superhedging price")
    claim = claim if isinstance(claim, Claim) else Claim(claim)
    price = expectation(cert.measure, claim.discounted(tree))
    if price != rep.price:
        raise AssertionError(f"replication cost {rep.price} differs from E_Q[f*] = {price}")
    return price


def superhedge(tree: EventTree, claim, flags: Optional[ShortSaleFlags] = None,
               actual: Optional[MeasureFamily] = None,
               pricing: Optional[MeasureFamily] = None) -> HedgeResult:
    """Cheapest ``x`` with a self-financing ``H`` such that ``x + H.S*(T) >= f*`` on the support.

    If ``pricing`` is given and satisfies the strong condition, its
    ``sup_Q E_Q[f*]`` is reported as ``pricing_bound`` (a lower bound on the price).
    """
    tree, flags, states, fstar, layout = _setup(tree, claim, flags, actual)
    rows = gain_rows(tree, layout, states)
    n = len(layout) * tree.m
    lower = [0 if flags.banned[j] else None for _ in layout for j in range(tree.m)]
    cons = [lpx.Constraint([1] + list(rows[k]), lpx.GE, fstar[k]) for k in states]
    out = lpx.solve(lpx.LinearProgram([1] + [0] * n, cons,
                                      [(None, None)] + [(lo, None) for lo in lower]))
    if out.status is lpx.Status.UNBOUNDED:
        raise UnboundedBelow("superhedging price is unbounded below")
    price = out.value
    h = _min_norm(tree, layout, rows, states, fstar, price, lpx.GE, lower)
    strategy = strategy_from_vector(tree, layout, h, price)
    bound = None
    if pricing is not None and check_strong(pricing, tree):
        bound = sublinear_expectation(pricing, fstar)[0]
    return HedgeResult(price, strategy, SUPERHEDGE, _slack(tree, strategy, fstar), bound)


def dual_superhedge(tree: EventTree, claim, flags: Optional[ShortSaleFlags] = None,
                    actual: Optional[MeasureFamily] = None) -> DualPrice:
    """Maximise ``E_Q[f*]`` over the closed (super)martingale polytope."""
    tree, flags, states, fstar, _ = _setup(tree, claim, flags, actual)
    n = len(states)
    cons = [lpx.Constraint([1] * n, lpx.EQ, 1)]
    cons += [lpx.Constraint(row, rel, 0) for row, rel in measure_conditions(tree, flags, states)]
    out = lpx.solve(lpx.LinearProgram([fstar[k] for k in states], cons, [(0, None)] * n,
                                      sense="max"))
    if out.status is lpx.Status.INFEASIBLE:
        raise NoMeasure("no (super)martingale measure exists, even allowing zero weights")
    weights = [Fraction(0)] * len(tree.leaves)
    for i, k in enumerate(states):
        weights[k] = out.x[i]
    return DualPrice(out.value, Measure(weights), any(w == 0 for w in out.x))


def dual_superhedge_price(tree: EventTree, claim, flags: Optional[ShortSaleFlags] = None,
                          actual: Optional[MeasureFamily] = None) -> Fraction:
    return dual_superhedge(tree, claim, flags, actual).price


def backward_superhedge(tree: EventTree, claim, flags: Optional[ShortSaleFlags] = None,
                        actual: Optional[MeasureFamily] = None) -> dict:
    """Superhedging value at every node carrying support leaves, by backward induction.

    Each internal node solves ``min y`` subject to
    ``y + h.dS*(c) >= value(c)`` over its live children ``c``.
    """
    tree, flags, states, fstar, layout = _setup(tree, claim, flags, actual)
    live = set(states)
    value = {}
    pos = {leaf: k for k, leaf in enumerate(tree.leaves)}
    for leaf in tree.leaves:
        if pos[leaf] in live:
            value[leaf] = fstar[pos[leaf]]
    m = tree.m
    for node in sorted(layout, key=lambda i: -tree.nodes[i].depth):
        kids = [c for c in tree.nodes[node].children if c in value]
        cons = [lpx.Constraint([1] + list(tree.increments(c)), lpx.GE, value[c]) for c in kids]
        bounds = [(None, None)] + [(0 if b else None, None) for b in flags.banned]
        out = lpx.solve(lpx.LinearProgram([1] + [0] * m, cons, bounds))
        if out.status is lpx.Status.UNBOUNDED:
            raise UnboundedBelow(f"one-period superhedge at node {tree.nodes[node].id!r} "
                                 "is unbounded below")
        value[node] = out.value
    return {tree.nodes[i].id: v for i, v in sorted(value.items())}
