from fractions import Fraction
from random import Random

import pytest

from mlab import (Claim, MeasureFamily, ShortSaleFlags, SinglePeriodMarket, backward_superhedge,
                  binomial_tree, dual_superhedge, dual_superhedge_price, find_martingale_measure,
                  hedge_price, replicate, superhedge, terminal_values)
from mlab.errors import NoMeasure, NotReplicable, UnboundedBelow
from mlab.hedging import REPLICATION, SUPERHEDGE

from instances import random_claim, random_tree

F = Fraction
BINOMIAL = SinglePeriodMarket([4], [[8], [2]])
FALLING = SinglePeriodMarket([4], [[4], [2]])
TRINOMIAL = SinglePeriodMarket([4], [[8], [4], [2]])
TWO = binomial_tree(4, 2, F(1, 2), 2)


def test_replicate_binomial_call():
    res = replicate(BINOMIAL, Claim([4, 0]))
    assert res.mode == REPLICATION
    assert res.price == F(4, 3)
    assert res.strategy.risky_holdings["root"] == (F(2, 3),)
    assert res.slack == (0, 0)


def test_replicate_zero_claim():
    res = replicate(BINOMIAL, Claim([0, 0]))
    assert res.price == 0 and res.strategy.risky_holdings["root"] == (0,)


def test_trinomial_is_not_replicable():
    assert replicate(TRINOMIAL, Claim([1, 0, 0])) is None
    with pytest.raises(NotReplicable):
        hedge_price(TRINOMIAL, Claim([1, 0, 0]))


def test_hedge_prices():
    assert hedge_price(BINOMIAL, Claim([4, 0])) == F(4, 3)
    assert hedge_price(BINOMIAL, Claim([3, 3])) == 3
    assert hedge_price(SinglePeriodMarket([2], [[8], [2]], rate=1), Claim([6, 6])) == 3
    assert hedge_price(TWO, Claim([12, 0, 0, 0])) == F(4, 3)
    with pytest.raises(NoMeasure):
        hedge_price(SinglePeriodMarket([4], [[8], [5]]), Claim([1, 0]))


def test_banned_short_superhedge():
    banned = ShortSaleFlags.all(1)
    res = superhedge(FALLING, Claim([2, 0]), banned)
    assert res.mode == SUPERHEDGE
    assert res.price == 2
    assert res.strategy.risky_holdings["root"] == (0,)
    assert terminal_values(FALLING, res.strategy) == (2, 2)
    dual = dual_superhedge(FALLING, Claim([2, 0]), banned)
    assert dual.price == 2 and dual.measure.weights == (1, 0) and dual.boundary
    # without the ban shorting is an arbitrage, but its gain sits in the state
    # where the claim pays nothing, so the price stays at 2 and the closed
    # polytope still holds Q = (1, 0)
    assert superhedge(FALLING, Claim([2, 0])).price == 2
    assert dual_superhedge_price(FALLING, Claim([2, 0])) == 2


def test_unbounded_superhedge_under_arbitrage():
    rising = SinglePeriodMarket([4], [[8], [5]])
    with pytest.raises(UnboundedBelow):
        superhedge(rising, Claim([2, 0]))
    with pytest.raises(NoMeasure):
        dual_superhedge(rising, Claim([2, 0]))


def test_superhedge_equals_replication_when_replicable():
    assert superhedge(BINOMIAL, Claim([4, 0])).price == F(4, 3)
    assert dual_superhedge_price(BINOMIAL, Claim([4, 0])) == F(4, 3)


def test_trivial_claims():
    banned = ShortSaleFlags.all(1)
    assert superhedge(FALLING, Claim([0, 0]), banned).price == 0
    assert superhedge(FALLING, Claim([-1, -3]), banned).price <= 0
    assert dual_superhedge_price(TRINOMIAL, Claim([5, 5, 5])) == 5
    values = backward_superhedge(TWO, Claim([2, 2, 2, 2]))
    assert set(values.values()) == {2}


def test_backward_induction_on_two_period_call():
    values = backward_superhedge(TWO, Claim([12, 0, 0, 0]))
    assert values["root"] == F(4, 3)
    assert values["u"] == 4 and values["d"] == 0
    assert superhedge(TWO, Claim([12, 0, 0, 0])).price == F(4, 3)
    assert dual_superhedge_price(TWO, Claim([12, 0, 0, 0])) == F(4, 3)
    depth_one = backward_superhedge(TRINOMIAL, Claim([4, 1, 0]))
    assert depth_one["root"] == superhedge(TRINOMIAL, Claim([4, 1, 0])).price


def test_pricing_bound_reported_for_strong_family():
    q = find_martingale_measure(TWO).measure
    res = superhedge(TWO, Claim([12, 0, 0, 0]), pricing=MeasureFamily([q]))
    assert res.pricing_bound == F(4, 3)


def test_minimal_norm_tie_break():
    # any h in [0, 1] superhedges; the smallest is chosen
    res = superhedge(FALLING, Claim([2, 0]), ShortSaleFlags.all(1))
    assert res.strategy.risky_holdings["root"] == (0,)


@pytest.mark.parametrize("seed", range(4))
def test_three_routes_agree(seed):
    rng = Random(100 + seed)
    checked = 0
    while checked < 10:
        tree = random_tree(rng, drift=rng.random() < 0.5)
        flags = ShortSaleFlags.all(tree.m) if rng.random() < 0.5 else None
        if find_martingale_measure(tree, flags) is None:
            continue
        claim = random_claim(rng, len(tree.leaves))
        primal = superhedge(tree, claim, flags)
        assert all(s >= 0 for s in primal.slack)
        assert primal.price == dual_superhedge_price(tree, claim, flags)
        assert primal.price == backward_superhedge(tree, claim, flags)["root"]
        checked += 1
