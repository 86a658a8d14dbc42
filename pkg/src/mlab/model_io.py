"""Model documents (JSON) and exact serialisation of results.

A model document looks like::

    {
      "type": "single",                      # or "tree"
      "rate": "0",                           # scalar rate (tree: default per node)
      "assets": ["stock"],
      "states": ["up", "down"],              # single only, optional
      "prices": {"initial": ["4"], "terminal": [["8"], ["2"]]},
      "families": {"actual": [["1/2", "1/2"]], "pricing": [...]},
      "bans": ["stock"],                     # or "all"
      "claims": {"call": ["4", "0"]}
    }

For ``"type": "tree"``, ``prices`` is the root node
``{"id": ..., "prices": [...], "children": [...]}`` and ``rates`` may map node
ids to the rate over the period that follows them.  Measures and claims are
lists in state (leaf) order or objects keyed by state/leaf id; missing keys
mean zero.  Numbers are strings like ``"1/3"`` or JSON integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Union

from .errors import DimensionMismatch, ParseError, ValidationError
from .market import (Claim, EventTree, Measure, MeasureFamily, ShortSaleFlags, SinglePeriodMarket,
                     TradingStrategy, as_fraction)


@dataclass
class Model:
    market: Union[SinglePeriodMarket, EventTree]
    tree: EventTree
    families: dict = field(default_factory=dict)
    bans: ShortSaleFlags = None
    claims: dict = field(default_factory=dict)

    @property
    def state_names(self) -> list:
        return [self.tree.nodes[i].id for i in self.tree.leaves]


def _num(v, where: str) -> Fraction:
    if isinstance(v, float):
        raise ValidationError(f"{where}: {v!r} is a float; write exact rationals as strings")
    try:
        return as_fraction(v)
    except ValidationError:
        raise ValidationError(f"{where}: not a rational number: {v!r}") from None


def _state_vector(raw, names: list, where: str) -> tuple:
    if isinstance(raw, dict):
        unknown = set(raw) - set(names)
        if unknown:
            raise ValidationError(f"{where}: unknown states {sorted(unknown)}")
        return tuple(_num(raw.get(s, 0), f"{where}.{s}") for s in names)
    if not isinstance(raw, list):
        raise ValidationError(f"{where}: expected a list or an object keyed by state")
    if len(raw) != len(names):
        raise ValidationError(f"{where}: {len(raw)} entries for {len(names)} states")
    return tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(raw))


def _tree_spec(raw, where: str):
    if not isinstance(raw, dict) or "prices" not in raw:
        raise ValidationError(f"{where}: node needs an object with 'prices'")
    spec = {"prices": [_num(v, f"{where}.prices[{i}]") for i, v in enumerate(raw["prices"])]}
    if "id" in raw:
        spec["id"] = str(raw["id"])
    if "rate" in raw:
        spec["rate"] = _num(raw["rate"], f"{where}.rate")
    kids = raw.get("children") or []
    spec["children"] = [_tree_spec(c, f"{where}.children[{i}]")
                        for i, c in enumerate(kids)]
    return spec


def _apply_rates(tree: EventTree, rates: dict) -> EventTree:
    if not rates:
        return tree
    unknown = set(rates) - {n.id for n in tree.nodes}
    if unknown:
        raise ValidationError(f"rates: unknown nodes {sorted(unknown)}")
    nodes = tuple(
        type(nd)(nd.id, nd.depth, nd.parent, nd.children, nd.prices,
                 _num(rates[nd.id], f"rates.{nd.id}") if nd.id in rates else nd.rate)
        for nd in tree.nodes)
    return EventTree(nodes, tree.assets)


def model_from_dict(doc: dict) -> Model:
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")
    kind = doc.get("type")
    assets = doc.get("assets")
    if not isinstance(assets, list) or not assets:
        raise ValidationError("assets: expected a nonempty list of names")
    assets = [str(a) for a in assets]
    prices = doc.get("prices")
    rate = _num(doc.get("rate", 0), "rate")
    if kind == "single":
        if not isinstance(prices, dict) or "initial" not in prices or "terminal" not in prices:
            raise ValidationError("prices: single-period models need 'initial' and 'terminal'")
        init = [_num(v, f"prices.initial[{i}]") for i, v in enumerate(prices["initial"])]
        term = [[_num(v, f"prices.terminal[{k}][{j}]") for j, v in enumerate(row)]
                for k, row in enumerate(prices["terminal"])]
        states = doc.get("states")
        if states is not None and len(states) != len(term):
            raise ValidationError(
                f"prices.terminal: {len(term)} rows but {len(states)} states declared")
        market = SinglePeriodMarket(init, term, rate, assets, states)
        tree = market.to_tree()
    elif kind == "tree":
        spec = _tree_spec(prices, "prices")
        tree = _apply_rates(EventTree.build(spec, assets, rate=rate), doc.get("rates") or {})
        market = tree
    else:
        raise ValidationError(f"type: expected 'single' or 'tree', got {kind!r}")

    names = [tree.nodes[i].id for i in tree.leaves]
    families = {}
    for fname, members in (doc.get("families") or {}).items():
        if not isinstance(members, list) or not members:
            raise ValidationError(f"families.{fname}: expected a nonempty list of measures")
        ms = []
        for i, raw in enumerate(members):
            where = f"families.{fname}[{i}]"
            w = _state_vector(raw, names, where)
            try:
                ms.append(Measure(w))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from None
        families[fname] = MeasureFamily(ms)
    families.setdefault("actual", MeasureFamily.uniform(len(names)))

    bans = doc.get("bans", [])
    bans = ShortSaleFlags.from_names(assets, bans if bans == "all" else list(bans))
    claims = {name: Claim(_state_vector(raw, names, f"claims.{name}"))
              for name, raw in (doc.get("claims") or {}).items()}
    return Model(market, tree, families, bans, claims)


def parse_model(path) -> Model:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    try:
        return model_from_dict(doc)
    except (DimensionMismatch, KeyError, TypeError) as exc:
        raise ValidationError(str(exc)) from None


# -- serialisation -------------------------------------------------------------

def fmt(x) -> str:
    """Exact rational as a string: ``"2/3"``, ``"4"``."""
    return str(Fraction(x))


def fmt_vector(values) -> list:
    return [fmt(v) for v in values]


def strategy_to_dict(tree: EventTree, strategy: TradingStrategy) -> dict:
    holdings = {}
    for i in tree.internal:
        nid = tree.nodes[i].id
        h = strategy.risky_holdings.get(nid)
        if h is not None:
            holdings[nid] = dict(zip(tree.assets, fmt_vector(h)))
    return {"initial_wealth": fmt(strategy.initial_wealth), "holdings": holdings}


def strategy_from_dict(tree: EventTree, raw: dict) -> TradingStrategy:
    holdings = {}
    for nid, h in raw.get("holdings", {}).items():
        if isinstance(h, dict):
            h = [h.get(a, 0) for a in tree.assets]
        holdings[nid] = [_num(v, f"holdings.{nid}") for v in h]
    return TradingStrategy(holdings, _num(raw.get("initial_wealth", 0), "initial_wealth"))


def measure_to_dict(tree: EventTree, measure: Measure) -> dict:
    return {tree.nodes[leaf].id: fmt(w) for leaf, w in zip(tree.leaves, measure)}


def load_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


__all__ = ["Model", "parse_model", "model_from_dict", "fmt", "fmt_vector",
           "strategy_to_dict", "strategy_from_dict", "measure_to_dict", "load_json"]
