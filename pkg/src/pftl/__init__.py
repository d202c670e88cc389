"""Model checking of probabilistic frequency temporal logic on Markov chains."""

from .formula import (Comparator, Fragment, FormulaError, TimeInterval, classify_fragment,
                      format_formula, parse_formula, total_bound)
from .intervals import Interval, IntervalSet
from .model import Ctmc, Dtmc, ModelError, uniformize, validate_model
from .modelfile import format_model, load_model, parse_model
from .numerical import CheckOptions, CheckResult, check, check_state_formula
from .statistical import SprtConfig, StatisticalResult, run_statistical

__version__ = "0.1.0"

__all__ = [
    "CheckOptions", "CheckResult", "Comparator", "Ctmc", "Dtmc", "FormulaError", "Fragment",
    "Interval", "IntervalSet", "ModelError", "SprtConfig", "StatisticalResult", "TimeInterval",
    "check", "check_state_formula", "classify_fragment", "format_formula", "format_model",
    "load_model", "parse_formula", "parse_model", "run_statistical", "total_bound",
    "uniformize", "validate_model",
]
