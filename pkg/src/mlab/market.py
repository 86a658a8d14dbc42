"""Market model: single-period markets, event trees, measures and strategies.

Everything is an immutable value holding exact rationals.  A single-period
market is handled by the multi-period machinery through
:meth:`SinglePeriodMarket.to_tree`, which yields a depth-1 tree.

Nodes of an :class:`EventTree` are stored in depth-first preorder; the leaves
in that order are the states, so a random variable on states is simply a tuple
indexed by leaf position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence, Union

from .errors import DimensionMismatch, MissingHoldings, ValidationError


def as_fraction(v) -> Fraction:
    if isinstance(v, float):
        raise ValidationError(f"floating point value {v!r}; write it as a rational")
    if isinstance(v, bool):
        raise ValidationError(f"boolean {v!r} is not a number")
    try:
        return Fraction(v)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational number: {v!r}") from exc


def _fractions(values) -> tuple:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class Node:
    id: str
    depth: int
    parent: Optional[int]
    children: tuple
    prices: tuple
    rate: Fraction = Fraction(0)  # simple rate over the period following this node


@dataclass(frozen=True)
class EventTree:
    nodes: tuple
    assets: tuple

    def __post_init__(self):
        nodes = self.nodes
        if not nodes:
            raise ValidationError("tree has no nodes")
        if not self.assets:
            raise ValidationError("at least one risky asset is required")
        ids = [nd.id for nd in nodes]
        if len(set(ids)) != len(ids):
            raise ValidationError("node ids must be unique")
        if nodes[0].parent is not None or nodes[0].depth != 0:
            raise ValidationError("first node must be the root")
        m = len(self.assets)
        leaf_depths = set()
        for i, nd in enumerate(nodes):
            if len(nd.prices) != m:
                raise ValidationError(
                    f"node {nd.id!r} has {len(nd.prices)} prices, expected {m}")
            if any(p < 0 for p in nd.prices):
                raise ValidationError(f"node {nd.id!r} has a negative price")
            if nd.children:
                if nd.rate < 0:
                    raise ValidationError(f"rate at node {nd.id!r} is negative")
                for c in nd.children:
                    if nodes[c].parent != i or nodes[c].depth != nd.depth + 1:
                        raise ValidationError(f"inconsistent links below node {nd.id!r}")
            else:
                leaf_depths.add(nd.depth)
        if any(p <= 0 for p in nodes[0].prices):
            raise ValidationError("initial prices must be strictly positive")
        if len(leaf_depths) != 1 or 0 in leaf_depths:
            raise ValidationError("every root-to-leaf path must have the same length T >= 1")

    @classmethod
    def build(cls, root: Mapping, assets: Sequence[str], rate=0) -> "EventTree":
        """Build from nested mappings ``{"id", "prices", "rate", "children"}``.

        ``id`` defaults to the child-index path ("0", "0.1", ...; the root is
        "root") and ``rate`` defaults to the global ``rate``.
        """
        nodes = []
        default_rate = as_fraction(rate)

        def visit(spec, parent, depth, path):
            idx = len(nodes)
            nid = spec.get("id") or (path if path else "root")
            nodes.append(None)
            kids = []
            for k, child in enumerate(spec.get("children") or ()):
                kids.append(visit(child, idx, depth + 1, f"{path}.{k}" if path else str(k)))
            r = spec.get("rate")
            nodes[idx] = Node(str(nid), depth, parent, tuple(kids),
                              _fractions(spec["prices"]),
                              default_rate if r is None else as_fraction(r))
            return idx

        visit(root, None, 0, "")
        return cls(tuple(nodes), tuple(assets))

    # -- structure -------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.assets)

    @cached_property
    def horizon(self) -> int:
        return self.nodes[self.leaves[0]].depth

    @cached_property
    def leaves(self) -> tuple:
        return tuple(i for i, nd in enumerate(self.nodes) if not nd.children)

    @cached_property
    def internal(self) -> tuple:
        return tuple(i for i, nd in enumerate(self.nodes) if nd.children)

    @cached_property
    def _index(self) -> dict:
        return {nd.id: i for i, nd in enumerate(self.nodes)}

    def index(self, node: Union[str, int]) -> int:
        if isinstance(node, int):
            return node
        try:
            return self._index[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    @cached_property
    def leaf_span(self) -> tuple:
        """``(start, stop)`` leaf positions under each node (preorder makes them contiguous)."""
        pos = {leaf: k for k, leaf in enumerate(self.leaves)}
        span = [None] * len(self.nodes)
        for i in reversed(range(len(self.nodes))):
            nd = self.nodes[i]
            if not nd.children:
                span[i] = (pos[i], pos[i] + 1)
            else:
                span[i] = (span[nd.children[0]][0], span[nd.children[-1]][1])
        return tuple(span)

    def at_depth(self, t: int) -> tuple:
        return tuple(i for i, nd in enumerate(self.nodes) if nd.depth == t)

    def path(self, node: Union[str, int]) -> tuple:
        """Node indices from the root down to ``node`` inclusive."""
        i = self.index(node)
        out = []
        while i is not None:
            out.append(i)
            i = self.nodes[i].parent
        return tuple(reversed(out))

    def ancestor_at(self, node: Union[str, int], t: int) -> int:
        return self.path(node)[t]

    # -- prices ----------------------------------------------------------

    @cached_property
    def bond(self) -> tuple:
        """Bond price per node: running product of ``1 + r`` along the path."""
        out = [Fraction(0)] * len(self.nodes)
        for i, nd in enumerate(self.nodes):
            out[i] = Fraction(1) if nd.parent is None else (
                out[nd.parent] * (1 + self.nodes[nd.parent].rate))
        return tuple(out)

    @cached_property
    def discounted(self) -> tuple:
        return tuple(tuple(p / b for p in nd.prices) for nd, b in zip(self.nodes, self.bond))

    def increments(self, child: int) -> tuple:
        """Discounted price change over the period ending at ``child``."""
        parent = self.nodes[child].parent
        return tuple(a - b for a, b in zip(self.discounted[child], self.discounted[parent]))


@dataclass(frozen=True)
class SinglePeriodMarket:
    initial_prices: tuple
    terminal_prices: tuple  # K rows of M prices
    rate: Fraction = Fraction(0)
    assets: Optional[tuple] = None
    states: Optional[tuple] = None

    def __post_init__(self):
        init = _fractions(self.initial_prices)
        term = tuple(_fractions(row) for row in self.terminal_prices)
        rate = as_fraction(self.rate)
        m, k = len(init), len(term)
        if m < 1 or k < 1:
            raise ValidationError("need at least one state and one risky asset")
        if any(p <= 0 for p in init):
            raise ValidationError("initial prices must be strictly positive")
        if any(len(row) != m for row in term):
            raise ValidationError(f"every terminal row needs {m} prices")
        if any(p < 0 for row in term for p in row):
            raise ValidationError("terminal prices must be nonnegative")
        if rate < 0:
            raise ValidationError("rate must be nonnegative")
        assets = tuple(self.assets) if self.assets else tuple(f"S{j + 1}" for j in range(m))
        states = tuple(self.states) if self.states else tuple(f"w{k_ + 1}" for k_ in range(k))
        if len(assets) != m:
            raise ValidationError(f"{len(assets)} asset names for {m} assets")
        if len(states) != k:
            raise ValidationError(f"{len(states)} state names for {k} terminal rows")
        for name, val in (("initial_prices", init), ("terminal_prices", term), ("rate", rate),
                          ("assets", assets), ("states", states)):
            object.__setattr__(self, name, val)

    @property
    def k(self) -> int:
        return len(self.terminal_prices)

    @property
    def m(self) -> int:
        return len(self.initial_prices)

    def to_tree(self) -> EventTree:
        leaves = [{"id": s, "prices": row} for s, row in zip(self.states, self.terminal_prices)]
        return EventTree.build({"id": "root", "prices": self.initial_prices, "children": leaves},
                               self.assets, rate=self.rate)


def as_tree(market: Union[EventTree, SinglePeriodMarket]) -> EventTree:
    return market.to_tree() if isinstance(market, SinglePeriodMarket) else market


@dataclass(frozen=True)
class Measure:
    weights: tuple

    def __post_init__(self):
        w = _fractions(self.weights)
        if not w:
            raise ValidationError("measure needs at least one state")
        if any(x < 0 for x in w):
            raise ValidationError("measure has a negative weight")
        if sum(w) != 1:
            raise ValidationError(f"measure weights sum to {sum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, k):
        return self.weights[k]

    def __iter__(self):
        return iter(self.weights)

    @classmethod
    def uniform(cls, k: int) -> "Measure":
        return cls((Fraction(1, k),) * k)

    @classmethod
    def point(cls, k: int, state: int) -> "Measure":
        return cls(tuple(Fraction(int(i == state)) for i in range(k)))


@dataclass(frozen=True)
class MeasureFamily:
    members: tuple

    def __post_init__(self):
        members = tuple(m if isinstance(m, Measure) else Measure(m) for m in self.members)
        if not members:
            raise ValidationError("measure family is empty")
        if len({len(m) for m in members}) != 1:
            raise ValidationError("family members live on different state sets")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def k(self) -> int:
        return len(self.members[0])

    @classmethod
    def uniform(cls, k: int) -> "MeasureFamily":
        return cls((Measure.uniform(k),))


@dataclass(frozen=True)
class ShortSaleFlags:
    banned: tuple

    def __post_init__(self):
        object.__setattr__(self, "banned", tuple(bool(b) for b in self.banned))

    @classmethod
    def none(cls, m: int) -> "ShortSaleFlags":
        return cls((False,) * m)

    @classmethod
    def all(cls, m: int) -> "ShortSaleFlags":
        return cls((True,) * m)

    @classmethod
    def from_names(cls, assets: Sequence[str], names) -> "ShortSaleFlags":
        if names == "all":
            return cls.all(len(assets))
        names = set(names)
        unknown = names - set(assets)
        if unknown:
            raise ValidationError(f"cannot ban unknown assets {sorted(unknown)}")
        return cls(tuple(a in names for a in assets))

    @property
    def any(self) -> bool:
        return any(self.banned)


def resolve_flags(flags: Optional[ShortSaleFlags], m: int) -> ShortSaleFlags:
    if flags is None:
        return ShortSaleFlags.none(m)
    if len(flags.banned) != m:
        raise DimensionMismatch(f"{len(flags.banned)} ban flags for {m} assets")
    return flags


@dataclass(frozen=True)
class Claim:
    payoffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "payoffs", _fractions(self.payoffs))

    def discounted(self, market) -> tuple:
        tree = as_tree(market)
        if len(self.payoffs) != len(tree.leaves):
            raise DimensionMismatch(
                f"claim has {len(self.payoffs)} payoffs for {len(tree.leaves)} states")
        return tuple(f / tree.bond[leaf] for f, leaf in zip(self.payoffs, tree.leaves))


@dataclass(frozen=True)
class TradingStrategy:
    """Risky holdings chosen at each internal node for the following period.

    The bond leg is never stored; :func:`bond_holdings` derives it from the
    initial wealth and the self-financing condition.
    """

    risky_holdings: Mapping = field(default_factory=dict)
    initial_wealth: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "risky_holdings",
                           {str(k): _fractions(v) for k, v in self.risky_holdings.items()})
        object.__setattr__(self, "initial_wealth", as_fraction(self.initial_wealth))

    def holdings(self, tree: EventTree, node: int) -> tuple:
        nid = tree.nodes[node].id
        try:
            h = self.risky_holdings[nid]
        except KeyError:
            raise MissingHoldings(f"strategy has no holdings at node {nid!r}") from None
        if len(h) != tree.m:
            raise DimensionMismatch(f"holdings at {nid!r} have {len(h)} entries, expected {tree.m}")
        return h

    @classmethod
    def zero(cls, tree: EventTree, initial_wealth=0) -> "TradingStrategy":
        return cls({tree.nodes[i].id: (0,) * tree.m for i in tree.internal}, initial_wealth)


# -- operations --------------------------------------------------------------

def discount_prices(market) -> dict:
    """Discounted risky prices keyed by node id."""
    tree = as_tree(market)
    return {nd.id: d for nd, d in zip(tree.nodes, tree.discounted)}


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _bond_along(tree: EventTree, strategy: TradingStrategy, path) -> dict:
    out = {}
    prev_h = prev_b = None
    for i in path:
        h = strategy.holdings(tree, i)
        s = tree.discounted[i]
        if prev_h is None:
            b = strategy.initial_wealth - _dot(h, s)
        else:
            # rebalancing at i is financed by the bond: db + dh.S*(i) = 0
            b = prev_b - _dot([a - c for a, c in zip(h, prev_h)], s)
        out[i] = b
        prev_h, prev_b = h, b
    return out


def bond_holdings(market, strategy: TradingStrategy, node=None):
    """Bond units held over the period after each internal node.

    Derived from the initial wealth and the self-financing condition.  Returns
    a dict keyed by node id, or the single value when ``node`` is given.
    """
    tree = as_tree(market)
    if node is not None:
        i = tree.index(node)
        if not tree.nodes[i].children:
            raise ValueError("bond holdings are defined at internal nodes only")
        return _bond_along(tree, strategy, tree.path(i))[i]
    out = {}
    for i in tree.internal:
        p = tree.nodes[i].parent
        h = strategy.holdings(tree, i)
        if p is None:
            out[i] = strategy.initial_wealth - _dot(h, tree.discounted[i])
        else:
            dh = [a - c for a, c in zip(h, strategy.holdings(tree, p))]
            out[i] = out[p] - _dot(dh, tree.discounted[i])
    return {tree.nodes[i].id: b for i, b in out.items()}


def portfolio_value(market, strategy: TradingStrategy, node) -> Fraction:
    """Discounted value at ``node`` of the portfolio carried in from its parent.

    At the root this is the initial wealth.
    """
    tree = as_tree(market)
    i = tree.index(node)
    p = tree.nodes[i].parent
    if p is None:
        return strategy.initial_wealth
    b = _bond_along(tree, strategy, tree.path(p))[p]
    return b + _dot(strategy.holdings(tree, p), tree.discounted[i])


def value_after_rebalance(market, strategy: TradingStrategy, node) -> Fraction:
    """Discounted value right after trading at ``node`` (equals the pre-trade value)."""
    tree = as_tree(market)
    i = tree.index(node)
    h = strategy.holdings(tree, i)
    return bond_holdings(tree, strategy, i) + _dot(h, tree.discounted[i])


def discounted_gain(market, strategy: TradingStrategy, t: int) -> tuple:
    """Accumulated discounted gain at every depth-``t`` node (preorder)."""
    tree = as_tree(market)
    if not 1 <= t <= tree.horizon:
        raise ValueError(f"t must lie in [1, {tree.horizon}]")
    out = []
    for i in tree.at_depth(t):
        path = tree.path(i)
        gain = Fraction(0)
        for parent, child in zip(path, path[1:]):
            h = strategy.holdings(tree, parent)
            gain += sum((hm * d for hm, d in zip(h, tree.increments(child))), Fraction(0))
        out.append(gain)
    return tuple(out)


def terminal_values(market, strategy: TradingStrategy) -> tuple:
    """Discounted portfolio value at every leaf, computed from the bond leg."""
    tree = as_tree(market)
    h0 = bond_holdings(tree, strategy)
    out = []
    for leaf in tree.leaves:
        parent = tree.nodes[leaf].parent
        h = strategy.holdings(tree, parent)
        out.append(h0[tree.nodes[parent].id] + _dot(h, tree.discounted[leaf]))
    return tuple(out)


def is_self_financing(market, strategy: TradingStrategy, bond: Mapping) -> bool:
    """Check ``bond`` (node id -> bond units) against the rebalancing identity.

    At the root the bond leg must absorb the initial wealth; at every later
    internal node the change in holdings must be worth zero at that node's
    discounted prices.
    """
    tree = as_tree(market)
    root = 0
    h = strategy.holdings(tree, root)
    if bond[tree.nodes[root].id] + _dot(h, tree.discounted[root]) != strategy.initial_wealth:
        return False
    for i in tree.internal:
        p = tree.nodes[i].parent
        if p is None:
            continue
        dh = [a - b for a, b in zip(strategy.holdings(tree, i), strategy.holdings(tree, p))]
        db = bond[tree.nodes[i].id] - bond[tree.nodes[p].id]
        if db + _dot(dh, tree.discounted[i]) != 0:
            return False
    return True


def holding_layout(tree: EventTree, states) -> list:
    """Internal nodes with at least one of ``states`` (leaf positions) underneath."""
    live = set(states)
    return [i for i in tree.internal if any(k in live for k in range(*tree.leaf_span[i]))]


def gain_rows(tree: EventTree, layout, states) -> dict:
    """Leaf position -> coefficients of the terminal discounted gain.

    Variables are the risky holdings at each node of ``layout``, ``M`` per
    node in layout order.
    """
    m = tree.m
    col = {node: c * m for c, node in enumerate(layout)}
    rows = {}
    for k in states:
        row = [Fraction(0)] * (len(layout) * m)
        path = tree.path(tree.leaves[k])
        for parent, child in zip(path, path[1:]):
            base = col[parent]
            for j, d in enumerate(tree.increments(child)):
                row[base + j] += d
        rows[k] = row
    return rows


def strategy_from_vector(tree: EventTree, layout, values, initial_wealth=0) -> TradingStrategy:
    """Holdings vector (layout order) to a strategy; nodes off the layout hold nothing."""
    m = tree.m
    holdings = {tree.nodes[i].id: (0,) * m for i in tree.internal}
    for c, node in enumerate(layout):
        holdings[tree.nodes[node].id] = tuple(values[c * m:(c + 1) * m])
    return TradingStrategy(holdings, initial_wealth)


def support(family: MeasureFamily) -> tuple:
    """States charged by at least one member; the rest are polar."""
    return tuple(k for k in range(family.k) if any(q[k] > 0 for q in family.members))


def binomial_tree(s0, up, down, periods: int, rate=0, asset: str = "S") -> EventTree:
    """Non-recombining multiplicative binomial tree with node ids like "u", "ud"."""
    up, down = as_fraction(up), as_fraction(down)

    def grow(price, label, depth):
        spec = {"id": label or "root", "prices": (price,)}
        if depth < periods:
            spec["children"] = [grow(price * up, label + "u", depth + 1),
                                grow(price * down, label + "d", depth + 1)]
        return spec

    return EventTree.build(grow(as_fraction(s0), "", 0), (asset,), rate=rate)
