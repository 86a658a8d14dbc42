"""Arbitrage detection and risk-neutral measure search.

Both searches are exact LPs.  The arbitrage LP caps risky holdings in
``[-1, 1]`` (``[0, 1]`` when short sales are banned): arbitrages form a cone,
so the box only normalises them and turns "arbitrage exists" into
"optimum > 0".  The measure LP maximises the smallest state weight ``eps``;
a strictly positive measure exists exactly when ``eps* > 0``.

States outside the support of the actual family are polar: they are dropped
from the arbitrage constraints and the objective, and measures put zero
weight on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from . import lp as lpx
from .errors import DimensionMismatch, EmptySupport
from .market import (EventTree, Measure, MeasureFamily, ShortSaleFlags, SinglePeriodMarket,
                     TradingStrategy, as_tree, gain_rows, holding_layout, resolve_flags,
                     strategy_from_vector, support, terminal_values)

MARTINGALE = "martingale"
SUPERMARTINGALE = "supermartingale"


@dataclass(frozen=True)
class Arbitrage:
    strategy: TradingStrategy
    positive_state: int  # leaf position where the terminal value is > 0
    terminal_values: tuple


@dataclass(frozen=True)
class NoArbitrage:
    measure: Measure
    epsilon: Fraction
    mode: str


Certificate = Union[Arbitrage, NoArbitrage]


def _support_of(tree: EventTree, family: Optional[MeasureFamily]) -> tuple:
    if family is None:
        return tuple(range(len(tree.leaves)))
    if family.k != len(tree.leaves):
        raise DimensionMismatch(f"family has {family.k} states, market has {len(tree.leaves)}")
    sup = support(family)
    if not sup:
        raise EmptySupport("every state is polar for the actual family")
    return sup


def _mode(flags: ShortSaleFlags) -> str:
    return SUPERMARTINGALE if flags.any else MARTINGALE


def _first_positive(values, states) -> Optional[int]:
    return next((k for k in states if values[k] > 0), None)


def find_arbitrage_single(market: SinglePeriodMarket, family: Optional[MeasureFamily] = None,
                          flags: Optional[ShortSaleFlags] = None) -> Optional[Arbitrage]:
    """Search ``(h_0, h_1..h_M)`` with ``V*_0 = 0`` and ``V*_1 >= 0`` on the support."""
    tree = as_tree(market)
    flags = resolve_flags(flags, tree.m)
    states = _support_of(tree, family)
    s0 = tree.discounted[0]
    s1 = [tree.discounted[leaf] for leaf in tree.leaves]
    m = tree.m

    # variables: h_0 (free), h_1..h_M (boxed)
    objective = [Fraction(len(states))] + [sum(s1[k][j] for k in states) for j in range(m)]
    cons = [lpx.Constraint([1] + list(s0), lpx.EQ, 0)]
    for k in states:
        cons.append(lpx.Constraint([1] + list(s1[k]), lpx.GE, 0))
    bounds = [(None, None)] + [(0 if b else -1, 1) for b in flags.banned]
    out = lpx.solve(lpx.LinearProgram(objective, cons, bounds, sense="max"))
    if out.value <= 0:
        return None
    strategy = TradingStrategy({tree.nodes[0].id: out.x[1:]}, 0)
    values = terminal_values(tree, strategy)
    return Arbitrage(strategy, _first_positive(values, states), values)


def find_risk_neutral_measure(market: SinglePeriodMarket, flags: Optional[ShortSaleFlags] = None,
                              family: Optional[MeasureFamily] = None) -> Optional[NoArbitrage]:
    """Strictly positive measure with ``E_Q[dS*_m] = 0`` (``<= 0`` for banned assets)."""
    return find_martingale_measure(as_tree(market), flags, family)


def find_arbitrage_multi(tree: EventTree, family: Optional[MeasureFamily] = None,
                         flags: Optional[ShortSaleFlags] = None) -> Optional[Arbitrage]:
    """Self-financing zero-cost strategy with ``V*(T) >= 0`` on the support, ``> 0`` somewhere.

    The initial wealth is fixed at zero, so ``V*(T)`` equals the accumulated
    discounted gain and the bond leg follows from self-financing.
    """
    tree = as_tree(tree)
    flags = resolve_flags(flags, tree.m)
    states = _support_of(tree, family)
    m = tree.m
    layout = holding_layout(tree, states)
    rows = gain_rows(tree, layout, states)
    nvar = len(layout) * m
    objective = [sum(rows[k][v] for k in states) for v in range(nvar)]
    cons = [lpx.Constraint(rows[k], lpx.GE, 0) for k in states]
    bounds = [(0 if flags.banned[j] else -1, 1) for _ in layout for j in range(m)]
    out = lpx.solve(lpx.LinearProgram(objective, cons, bounds, sense="max"))
    if out.value <= 0:
        return None
    strategy = strategy_from_vector(tree, layout, out.x)
    values = terminal_values(tree, strategy)
    return Arbitrage(strategy, _first_positive(values, states), values)


def measure_conditions(tree: EventTree, flags: ShortSaleFlags, states) -> list:
    """Linearised one-step conditions on leaf weights, one per (internal node, asset).

    Row entries for leaf ``k`` under child ``c`` of node ``n`` are
    ``S*_m(c) - S*_m(n)``; the row is ``== 0`` for tradable assets and
    ``<= 0`` for banned ones.  Returned as ``(row over states, relation)``.
    """
    pos = {k: i for i, k in enumerate(states)}
    rows = []
    for node in holding_layout(tree, states):
        for j in range(tree.m):
            row = [Fraction(0)] * len(states)
            for child in tree.nodes[node].children:
                d = tree.increments(child)[j]
                if not d:
                    continue
                for k in range(*tree.leaf_span[child]):
                    if k in pos:
                        row[pos[k]] = d
            if any(row):
                rows.append((row, lpx.LE if flags.banned[j] else lpx.EQ))
    return rows


def find_martingale_measure(tree: EventTree, flags: Optional[ShortSaleFlags] = None,
                            family: Optional[MeasureFamily] = None) -> Optional[NoArbitrage]:
    """Maximise ``eps`` over leaf weights ``Q >= eps`` satisfying the one-step conditions.

    Conditions at deeper horizons follow from the one-step ones by the tower
    property.  Polar leaves get weight zero and are excluded from ``Q >= eps``.
    """
    tree = as_tree(tree)
    flags = resolve_flags(flags, tree.m)
    states = _support_of(tree, family)
    n = len(states)
    cons = [lpx.Constraint([1] * n + [0], lpx.EQ, 1)]
    for i in range(n):
        row = [0] * (n + 1)
        row[i], row[n] = 1, -1
        cons.append(lpx.Constraint(row, lpx.GE, 0))
    for row, rel in measure_conditions(tree, flags, states):
        cons.append(lpx.Constraint(list(row) + [0], rel, 0))
    objective = [0] * n + [1]
    bounds = [(0, None)] * n + [(None, None)]
    out = lpx.solve(lpx.LinearProgram(objective, cons, bounds, sense="max"))
    if not out.optimal or out.value <= 0:
        return None
    weights = [Fraction(0)] * len(tree.leaves)
    for i, k in enumerate(states):
        weights[k] = out.x[i]
    return NoArbitrage(Measure(weights), out.value, _mode(flags))


def find_arbitrage(market, family=None, flags=None) -> Optional[Arbitrage]:
    if isinstance(market, SinglePeriodMarket):
        return find_arbitrage_single(market, family, flags)
    return find_arbitrage_multi(market, family, flags)


def certify(market, family: Optional[MeasureFamily] = None,
            flags: Optional[ShortSaleFlags] = None) -> Certificate:
    """Return whichever FTAP certificate exists for the market."""
    tree = as_tree(market)
    found = find_martingale_measure(tree, flags, family)
    if found is not None:
        return found
    arb = find_arbitrage(market, family, flags)
    if arb is None:
        raise AssertionError("neither an arbitrage nor a risk-neutral measure was found")
    return arb
