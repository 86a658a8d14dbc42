"""Linear, sublinear and conditional expectations; (super)martingale checks.

Families are finite lists, so suprema and infima are attained at a member and
are found by plain enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import DimensionMismatch, PreconditionFailed, ZeroMassNode
from .market import (EventTree, Measure, MeasureFamily, ShortSaleFlags, as_fraction, as_tree,
                     resolve_flags)


def expectation(measure: Measure, rv: Sequence) -> Fraction:
    if len(measure) != len(rv):
        raise DimensionMismatch(f"measure on {len(measure)} states, variable on {len(rv)}")
    return sum((q * as_fraction(x) for q, x in zip(measure, rv) if q), Fraction(0))


def sublinear_expectation(family: MeasureFamily, rv: Sequence) -> tuple:
    """``(sup_Q E_Q[rv], index of the first maximising member)``."""
    values = [expectation(q, rv) for q in family]
    best = max(values)
    return best, values.index(best)


def inf_expectation(family: MeasureFamily, rv: Sequence) -> tuple:
    """``(inf_Q E_Q[rv], index of the first minimising member)``."""
    values = [expectation(q, rv) for q in family]
    best = min(values)
    return best, values.index(best)


def node_mass(measure: Measure, tree: EventTree, node) -> Fraction:
    lo, hi = tree.leaf_span[tree.index(node)]
    return sum(measure.weights[lo:hi], Fraction(0))


def conditional_expectation(measure: Measure, tree: EventTree, rv: Sequence, node) -> Fraction:
    """``E_Q[rv | node]`` for a random variable on the leaves."""
    tree = as_tree(tree)
    if len(measure) != len(tree.leaves) or len(rv) != len(tree.leaves):
        raise DimensionMismatch("measure and variable must live on the tree's leaves")
    i = tree.index(node)
    lo, hi = tree.leaf_span[i]
    mass = sum(measure.weights[lo:hi], Fraction(0))
    if mass == 0:
        raise ZeroMassNode(f"node {tree.nodes[i].id!r} carries no mass")
    return sum((measure[k] * as_fraction(rv[k]) for k in range(lo, hi)), Fraction(0)) / mass


def _horizon_value(measure: Measure, tree: EventTree, node: int, u: int, asset: int) -> Fraction:
    """``E_Q[S*_asset(u) | node]`` via the depth-``u`` descendants of ``node``."""
    lo, hi = tree.leaf_span[node]
    mass = sum(measure.weights[lo:hi], Fraction(0))
    total = Fraction(0)
    stack = [node]
    while stack:
        i = stack.pop()
        nd = tree.nodes[i]
        if nd.depth == u:
            a, b = tree.leaf_span[i]
            w = sum(measure.weights[a:b], Fraction(0))
            if w:
                total += w * tree.discounted[i][asset]
        else:
            stack.extend(nd.children)
    return total / mass


def horizon_pairs(tree: EventTree, full: bool = False) -> list:
    """One-step pairs plus ``(0, T)``, or every ``t < u`` when ``full``."""
    T = tree.horizon
    if full:
        return [(t, u) for t in range(T) for u in range(t + 1, T + 1)]
    pairs = [(t, t + 1) for t in range(T)]
    if (0, T) not in pairs:
        pairs.append((0, T))
    return pairs


def is_risk_neutral(measure: Measure, market, flags: Optional[ShortSaleFlags] = None,
                    pairs: Optional[Iterable] = None) -> bool:
    """Conditional-expectation check, ``==`` for tradable and ``<=`` for banned assets.

    Nodes without mass under ``measure`` are skipped.
    """
    tree = as_tree(market)
    if len(measure) != len(tree.leaves):
        raise DimensionMismatch("measure must live on the tree's leaves")
    flags = resolve_flags(flags, tree.m)
    for t, u in (horizon_pairs(tree) if pairs is None else pairs):
        for i in tree.at_depth(t):
            if node_mass(measure, tree, i) == 0:
                continue
            for j in range(tree.m):
                diff = _horizon_value(measure, tree, i, u, j) - tree.discounted[i][j]
                if diff > 0 or (diff < 0 and not flags.banned[j]):
                    return False
    return True


def is_martingale_measure(measure: Measure, market, pairs=None) -> bool:
    tree = as_tree(market)
    return is_risk_neutral(measure, tree, ShortSaleFlags.none(tree.m), pairs)


def is_supermartingale_measure(measure: Measure, market, pairs=None) -> bool:
    tree = as_tree(market)
    return is_risk_neutral(measure, tree, ShortSaleFlags.all(tree.m), pairs)


@dataclass
class ConditionReport:
    holds: bool
    violations: list = field(default_factory=list)  # (node id, asset, t, u, extremum, price)
    skipped_nodes: list = field(default_factory=list)  # nodes no member charges

    def __bool__(self):
        return self.holds


def _check(family: MeasureFamily, market, pairs, full, pick) -> ConditionReport:
    tree = as_tree(market)
    if family.k != len(tree.leaves):
        raise DimensionMismatch(f"family has {family.k} states, market has {len(tree.leaves)}")
    polar = [tree.nodes[tree.leaves[k]].id for k in range(family.k)
             if all(q[k] == 0 for q in family)]
    if polar:
        raise PreconditionFailed(f"states {polar} carry zero weight under every member")
    report = ConditionReport(True)
    skipped = set()
    for t, u in (horizon_pairs(tree, full) if pairs is None else pairs):
        for i in tree.at_depth(t):
            charged = [q for q in family if node_mass(q, tree, i) > 0]
            if not charged:
                if i not in skipped:
                    skipped.add(i)
                    report.skipped_nodes.append(tree.nodes[i].id)
                continue
            for j in range(tree.m):
                extremum = pick(_horizon_value(q, tree, i, u, j) for q in charged)
                if extremum > tree.discounted[i][j]:
                    report.holds = False
                    report.violations.append(
                        (tree.nodes[i].id, tree.assets[j], t, u, extremum, tree.discounted[i][j]))
    return report


def weak_report(family, market, pairs=None, full=False) -> ConditionReport:
    """``inf_Q E_Q[S*_m(u) | F_t] <= S*_m(t)`` for every asset, node and horizon pair."""
    return _check(family, market, pairs, full, min)


def strong_report(family, market, pairs=None, full=False) -> ConditionReport:
    """``sup_Q E_Q[S*_m(u) | F_t] <= S*_m(t)`` for every asset, node and horizon pair."""
    return _check(family, market, pairs, full, max)


def check_weak(family: MeasureFamily, market, pairs=None, full: bool = False) -> bool:
    return weak_report(family, market, pairs, full).holds


def check_strong(family: MeasureFamily, market, pairs=None, full: bool = False) -> bool:
    return strong_report(family, market, pairs, full).holds
