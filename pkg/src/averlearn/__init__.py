"""Averaging-plus-learning opinion dynamics: analysis, certificates and simulation."""
from .certify import (
    CertificateReport,
    Verdict,
    certify_impaired,
    certify_mixed_norm,
    certify_time_invariant,
    certify_vanishing_rates,
    fn_empirical,
    fn_lower_bound,
    fn_threshold,
    oe_infty_check,
    symmetric_overlearning_check,
)
from .dynamics import Scenario, Trajectory, fj_equilibrium, fj_simulate, simulate
from .errors import AverLearnError
from .graph_analysis import (
    anchors,
    build_digraph,
    index_of_contraction,
    is_condensely_anchored,
    is_condensely_aperiodic,
    strongly_connected_components,
)
from .matrix_core import (
    decompose_substochastic,
    induced_norm,
    matrix_power_limit,
    mixed_norm_1_to_inf,
    mixed_norm_inf_to_1,
    spectral_radius,
)
from .scenario_io import load_scenario, parse_scenario
from .stochastic import NoiseSpec, check_small_gain, empirical_w1_1d, simulate_noisy

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
