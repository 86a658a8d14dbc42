"""Exact no-arbitrage, risk-neutral measures and superhedging for finite markets
under model uncertainty."""

from .arbitrage import (MARTINGALE, SUPERMARTINGALE, Arbitrage, NoArbitrage, certify,
                        find_arbitrage, find_arbitrage_multi, find_arbitrage_single,
                        find_martingale_measure, find_risk_neutral_measure)
from .errors import (DimensionMismatch, EmptySupport, MalformedProgram, MissingHoldings, MlabError,
                     NoMeasure, NotReplicable, ParseError, PreconditionFailed, TooLarge,
                     UnboundedBelow, ValidationError, ZeroMassNode)
from .expectation import (check_strong, check_weak, conditional_expectation, expectation,
                          inf_expectation, is_martingale_measure, is_risk_neutral,
                          is_supermartingale_measure, strong_report, sublinear_expectation,
                          weak_report)
from .hedging import (backward_superhedge, dual_superhedge, dual_superhedge_price, hedge_price,
                      replicate, superhedge)
from .market import (Claim, EventTree, Measure, MeasureFamily, ShortSaleFlags, SinglePeriodMarket,
                     TradingStrategy, binomial_tree, bond_holdings, discount_prices,
                     discounted_gain, is_self_financing, portfolio_value, terminal_values)
from .model_io import Model, parse_model

__version__ = "0.1.0"
