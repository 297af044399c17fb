"""Graded-network bee colony routing with a Jackson link-load model."""

from .abc import AbcParams, PathCandidate, ScoutPolicy, SearchResult, abc_search, path_is_valid
from .estimator import AbcRouter
from .exceptions import BeeRouteError, InvalidConfig
from .grading import Grade, QosSnapshot, grade_network, level1_grade, level2_select
from .harness import ExperimentConfig, emit_outputs, load_config, run_comparison, run_single
from .topology import Quadrant, Topology, TopologyConfig, generate_topology, quadrant_of
from .traffic import LinkState, TrafficParams, assign_flow_rates, link_load_closed_form

__version__ = "0.1.0"

__all__ = [
    "AbcParams", "AbcRouter", "BeeRouteError", "ExperimentConfig", "Grade", "InvalidConfig",
    "LinkState", "PathCandidate", "QosSnapshot", "Quadrant", "ScoutPolicy", "SearchResult",
    "Topology", "TopologyConfig", "TrafficParams", "abc_search", "assign_flow_rates",
    "emit_outputs", "generate_topology", "grade_network", "level1_grade", "level2_select",
    "link_load_closed_form", "load_config", "path_is_valid", "quadrant_of", "run_comparison",
    "run_single",
]
