"""European options on stocks paying discrete cash dividends."""

from .baselines import bgs_price, bv_price, moment_match_price, terminal_moments
from .bs import BsInputs, bs_derivative, bs_price, d_values, norm_cdf
from .errors import (
    AdjustmentOverflowError,
    CapabilityError,
    DomainError,
    FitError,
    FormulaBreakdownError,
    NumericalDegeneracyError,
    PricingError,
)
from .market import (
    DividendSchedule,
    MarketParams,
    OptionSpec,
    apply_dividend,
    load_schedule_csv,
    pv_dividends,
    schedule_within,
)
from .oracles import GridConfig, McConfig, mc_price, pde_price
from .proxy import adjusted_terms, proxy_price
from .sensitivities import dividend_sensitivity, sensitivity, taylor_price

__version__ = "0.1.0"

__all__ = [
    "AdjustmentOverflowError",
    "BsInputs",
    "CapabilityError",
    "DividendSchedule",
    "DomainError",
    "FitError",
    "FormulaBreakdownError",
    "GridConfig",
    "MarketParams",
    "McConfig",
    "NumericalDegeneracyError",
    "OptionSpec",
    "PricingError",
    "adjusted_terms",
    "apply_dividend",
    "bgs_price",
    "bs_derivative",
    "bs_price",
    "bv_price",
    "d_values",
    "dividend_sensitivity",
    "load_schedule_csv",
    "mc_price",
    "moment_match_price",
    "norm_cdf",
    "pde_price",
    "proxy_price",
    "pv_dividends",
    "schedule_within",
    "sensitivity",
    "taylor_price",
    "terminal_moments",
]
