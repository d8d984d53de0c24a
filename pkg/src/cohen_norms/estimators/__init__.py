"""Ratio evaluators, lower-bound search, domination upper bounds and oracles."""

from .brute import BudgetExceeded, brute_force_cohen_seq, brute_force_oracle
from .domination import GridConfig, dp_via_adjoint, pi_q_oracle, pietsch_upper_bound, solve_domination_lp
from .forms import form_norm, poly_form_norm, support_values
from .ratios import coh_ratio, dp_ratio, gamma_ratio, mcoh_ratio, padded_multi_index, pi_ratio, poly_ratio
from .search import FLAVORS, SearchConfig, lower_bound_search
from .types import DegenerateGrid, DiscreteMeasure, InconsistentRatio, NormBracket, WitnessData

__all__ = [
    "BudgetExceeded",
    "DegenerateGrid",
    "DiscreteMeasure",
    "FLAVORS",
    "GridConfig",
    "InconsistentRatio",
    "NormBracket",
    "SearchConfig",
    "WitnessData",
    "brute_force_cohen_seq",
    "brute_force_oracle",
    "coh_ratio",
    "dp_ratio",
    "dp_via_adjoint",
    "form_norm",
    "gamma_ratio",
    "lower_bound_search",
    "mcoh_ratio",
    "padded_multi_index",
    "pi_q_oracle",
    "pi_ratio",
    "pietsch_upper_bound",
    "poly_form_norm",
    "poly_ratio",
    "solve_domination_lp",
    "support_values",
]
