from fractions import Fraction
from random import Random

import pytest

from mlab import (Measure, MeasureFamily, ShortSaleFlags, SinglePeriodMarket, TradingStrategy,
                  binomial_tree, find_martingale_measure)
from mlab.errors import TooLarge
from mlab.oracle import (Polytope, brute_force_extremum, enumerate_vertices, lp_extremum,
                         verify_arbitrage, verify_measure)

from instances import random_tree

F = Fraction
BINOMIAL = SinglePeriodMarket([4], [[8], [2]])


def weights(vertices):
    return [v.weights for v in vertices]


def test_simplex_vertices():
    assert weights(enumerate_vertices(Polytope(2))) == [(1, 0), (0, 1)]


def test_binomial_martingale_set_is_a_point():
    poly = Polytope.risk_neutral(BINOMIAL)
    assert weights(enumerate_vertices(poly)) == [(F(1, 3), F(2, 3))]


def test_supermartingale_set_with_falling_stock():
    falling = SinglePeriodMarket([4], [[4], [2]])
    poly = Polytope.risk_neutral(falling, ShortSaleFlags.all(1))
    assert weights(enumerate_vertices(poly)) == [(1, 0), (0, 1)]


def test_extrema():
    simplex = enumerate_vertices(Polytope(2))
    assert brute_force_extremum(simplex, [2, 0], "max") == 2
    assert brute_force_extremum(simplex, [2, 0], "min") == 0
    point = enumerate_vertices(Polytope.risk_neutral(BINOMIAL))
    assert brute_force_extremum(point, [4, 0], "max") == brute_force_extremum(point, [4, 0], "min")
    assert brute_force_extremum(point, [4, 0]) == F(4, 3)
    with pytest.raises(ValueError):
        brute_force_extremum(point, [4, 0], "sideways")


def test_cap_on_states():
    with pytest.raises(TooLarge):
        enumerate_vertices(Polytope(13))


def test_verify_arbitrage_examples():
    rising = SinglePeriodMarket([4], [[8], [5]])
    assert verify_arbitrage(TradingStrategy({"root": [1]}, 0), rising)
    assert not verify_arbitrage(TradingStrategy({"root": [0]}, 0), rising)
    falling = SinglePeriodMarket([4], [[4], [2]])
    short = TradingStrategy({"root": [-1]}, 0)
    assert not verify_arbitrage(short, falling, None, ShortSaleFlags.all(1))
    assert verify_arbitrage(short, falling)
    assert not verify_arbitrage(TradingStrategy({"root": [1]}, 1), rising)


def test_verify_measure_examples():
    q = Measure([F(1, 3), F(2, 3)])
    assert verify_measure(q, BINOMIAL, epsilon=F(1, 3))
    assert not verify_measure(q, BINOMIAL, epsilon=F(1, 2))
    assert not verify_measure(Measure([F(1, 2), F(1, 2)]), BINOMIAL)
    # zero weight on a non-polar state is not a certificate
    assert not verify_measure(Measure([1, 0]), SinglePeriodMarket([4], [[4], [2]]),
                              ShortSaleFlags.all(1))
    # but it is once that state is polar
    assert verify_measure(Measure([1, 0]), SinglePeriodMarket([4], [[4], [2]]),
                          ShortSaleFlags.all(1), MeasureFamily([Measure([1, 0])]))


def test_vertices_agree_with_lp_on_small_trees():
    rng = Random(3)
    done = 0
    while done < 25:
        tree = random_tree(rng, max_depth=2, drift=rng.random() < 0.5)
        if len(tree.leaves) > 8:
            continue
        flags = ShortSaleFlags.all(tree.m) if rng.random() < 0.5 else None
        poly = Polytope.risk_neutral(tree, flags)
        verts = enumerate_vertices(poly)
        if not verts:
            assert lp_extremum(poly, [0] * poly.n) is None
            continue
        assert all(poly.contains(list(v)) for v in verts)
        rv = [F(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(poly.n)]
        for direction in ("max", "min"):
            assert brute_force_extremum(verts, rv, direction) == lp_extremum(poly, rv, direction)
        done += 1


def test_certified_measure_lies_in_the_polytope():
    tree = binomial_tree(4, 2, F(1, 2), 2)
    q = find_martingale_measure(tree).measure
    assert Polytope.risk_neutral(tree).contains(list(q))
