"""Brute-force cross-checks that share no code path with the simplex engine.

Vertices are found by trying every choice of tight inequalities and solving
the resulting square system by exact Gaussian elimination; certificates are
checked by direct substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from . import lp as lpx
from .errors import TooLarge
from .market import EventTree, Measure, MeasureFamily, ShortSaleFlags, TradingStrategy, as_tree

MAX_STATES = 12


@dataclass(frozen=True)
class Polytope:
    """Probability vectors ``q`` on ``n`` states with extra linear conditions.

    ``q >= 0`` and ``sum(q) == 1`` are implicit.  ``equalities`` holds
    ``(row, rhs)`` meaning ``row.q == rhs``; ``inequalities`` means ``row.q <= rhs``.
    """

    n: int
    equalities: tuple = ()
    inequalities: tuple = ()

    def __post_init__(self):
        def norm(pairs):
            out = []
            for row, rhs in pairs:
                row = tuple(Fraction(a) for a in row)
                if len(row) != self.n:
                    raise ValueError(f"row of length {len(row)} in a polytope on {self.n} states")
                out.append((row, Fraction(rhs)))
            return tuple(out)

        object.__setattr__(self, "equalities", norm(self.equalities))
        object.__setattr__(self, "inequalities", norm(self.inequalities))

    def contains(self, q: Sequence) -> bool:
        if len(q) != self.n or any(x < 0 for x in q) or sum(q) != 1:
            return False
        if any(_dot(r, q) != b for r, b in self.equalities):
            return False
        return all(_dot(r, q) <= b for r, b in self.inequalities)

    @classmethod
    def risk_neutral(cls, tree: EventTree, flags: Optional[ShortSaleFlags] = None) -> "Polytope":
        """Closed set of leaf measures making discounted prices (super)martingales.

        Built leaf by leaf from each leaf's path, one row per (internal node, asset).
        """
        tree = as_tree(tree)
        banned = flags.banned if flags is not None else (False,) * tree.m
        k = len(tree.leaves)
        rows = {}
        for pos, leaf in enumerate(tree.leaves):
            path = tree.path(leaf)
            for t in range(len(path) - 1):
                node, nxt = path[t], path[t + 1]
                for j in range(tree.m):
                    step = tree.discounted[nxt][j] - tree.discounted[node][j]
                    row = rows.setdefault((node, j), [Fraction(0)] * k)
                    row[pos] = step
        eqs, ineqs = [], []
        for (node, j), row in sorted(rows.items()):
            if any(row):
                (ineqs if banned[j] else eqs).append((tuple(row), 0))
        return cls(k, tuple(eqs), tuple(ineqs))


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _solve_unique(rows: list, rhs: list, n: int) -> Optional[tuple]:
    """Unique solution of ``rows x = rhs`` or None (rank-deficient or inconsistent)."""
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_row = 0
    pivots = []
    for col in range(n):
        p = next((i for i in range(piv_row, len(a)) if a[i][col] != 0), None)
        if p is None:
            return None
        a[piv_row], a[p] = a[p], a[piv_row]
        pv = a[piv_row][col]
        a[piv_row] = [v / pv for v in a[piv_row]]
        for i in range(len(a)):
            if i != piv_row and a[i][col] != 0:
                f = a[i][col]
                a[i] = [v - f * w for v, w in zip(a[i], a[piv_row])]
        pivots.append(col)
        piv_row += 1
    if any(row[n] != 0 for row in a[piv_row:]):
        return None
    return tuple(a[i][n] for i in range(n))


def _rank(rows: list, n: int) -> int:
    a = [list(r) for r in rows]
    rank = 0
    for col in range(n):
        p = next((i for i in range(rank, len(a)) if a[i][col] != 0), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        for i in range(rank + 1, len(a)):
            if a[i][col] != 0:
                f = a[i][col] / a[rank][col]
                a[i] = [v - f * w for v, w in zip(a[i], a[rank])]
        rank += 1
    return rank


def enumerate_vertices(poly: Polytope) -> list:
    """All vertices as measures, deduplicated, in descending lexicographic order."""
    n = poly.n
    if n > MAX_STATES:
        raise TooLarge(f"vertex enumeration is capped at {MAX_STATES} states, got {n}")
    eq_rows = [(tuple(Fraction(1) for _ in range(n)), Fraction(1))] + list(poly.equalities)
    ineq = list(poly.inequalities) + [
        (tuple(Fraction(-1 if j == i else 0) for j in range(n)), Fraction(0)) for i in range(n)]
    r = _rank([row for row, _ in eq_rows], n)
    need = n - r
    found = set()
    for chosen in combinations(range(len(ineq)), need):
        rows = [row for row, _ in eq_rows] + [ineq[i][0] for i in chosen]
        rhs = [b for _, b in eq_rows] + [ineq[i][1] for i in chosen]
        x = _solve_unique(rows, rhs, n)
        if x is not None and poly.contains(x):
            found.add(x)
    return [Measure(v) for v in sorted(found, reverse=True)]


def brute_force_extremum(vertices: Sequence, rv: Sequence, direction: str = "max") -> Fraction:
    if not vertices:
        raise ValueError("no vertices")
    values = [_dot(list(v), [Fraction(x) for x in rv]) for v in vertices]
    if direction == "max":
        return max(values)
    if direction == "min":
        return min(values)
    raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")


def lp_extremum(poly: Polytope, rv: Sequence, direction: str = "max") -> Optional[Fraction]:
    """Same extremum computed by the simplex engine; None if the polytope is empty."""
    cons = [lpx.Constraint([1] * poly.n, lpx.EQ, 1)]
    cons += [lpx.Constraint(r, lpx.EQ, b) for r, b in poly.equalities]
    cons += [lpx.Constraint(r, lpx.LE, b) for r, b in poly.inequalities]
    out = lpx.solve(lpx.LinearProgram(list(rv), cons, [(0, None)] * poly.n, sense=direction))
    return out.value if out.optimal else None


def _support(family: Optional[MeasureFamily], k: int) -> list:
    if family is None:
        return list(range(k))
    return [i for i in range(k) if any(q[i] > 0 for q in family.members)]


def verify_arbitrage(strategy: TradingStrategy, tree, family: Optional[MeasureFamily] = None,
                     flags: Optional[ShortSaleFlags] = None) -> bool:
    """Zero cost, self-financing, nonnegative on the support, positive somewhere, bans respected."""
    tree = as_tree(tree)
    if strategy.initial_wealth != 0:
        return False
    banned = flags.banned if flags is not None else (False,) * tree.m
    held = {}
    for i in tree.internal:
        h = strategy.risky_holdings.get(tree.nodes[i].id)
        if h is None or len(h) != tree.m:
            return False
        if any(b and x < 0 for b, x in zip(banned, h)):
            return False
        held[i] = h
    # bond leg: zero initial wealth, then each rebalance paid for by the bond
    bond = {}
    for i in tree.internal:
        p = tree.nodes[i].parent
        s = tree.discounted[i]
        if p is None:
            bond[i] = -_dot(held[i], s)
        else:
            bond[i] = bond[p] - _dot([a - b for a, b in zip(held[i], held[p])], s)
    live = _support(family, len(tree.leaves))
    positive = False
    for k in live:
        leaf = tree.leaves[k]
        parent = tree.nodes[leaf].parent
        value = bond[parent] + _dot(held[parent], tree.discounted[leaf])
        path = tree.path(leaf)
        gain = sum((_dot(held[a], [x - y for x, y in zip(tree.discounted[b], tree.discounted[a])])
                    for a, b in zip(path, path[1:])), Fraction(0))
        if value != gain or value < 0:
            return False
        positive = positive or value > 0
    return positive


def verify_measure(measure, tree, flags: Optional[ShortSaleFlags] = None,
                   family: Optional[MeasureFamily] = None, epsilon=None) -> bool:
    """Probability, strictly positive on the support (``>= epsilon`` if given), zero on
    polar states, and every one-step conditional drift ``== 0`` (``<= 0`` if banned)."""
    tree = as_tree(tree)
    q = list(measure)
    k = len(tree.leaves)
    if len(q) != k or any(x < 0 for x in q) or sum(q) != 1:
        return False
    live = set(_support(family, k))
    floor = Fraction(epsilon) if epsilon is not None else None
    if floor is not None and floor <= 0:
        return False
    for i in range(k):
        if i in live:
            if q[i] <= 0 or (floor is not None and q[i] < floor):
                return False
        elif q[i] != 0:
            return False
    banned = flags.banned if flags is not None else (False,) * tree.m
    poly = Polytope.risk_neutral(tree, ShortSaleFlags(banned))
    return poly.contains(q)
