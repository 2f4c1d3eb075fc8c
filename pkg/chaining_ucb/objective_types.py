from typing import Dict

from .shared.shared import ObjectiveKind

OBJECTIVE_TYPES: Dict[str, Dict[str, str | float | bool | None]] = {
    ObjectiveKind.SAMPLED_GP: {
        "name": "SE kernel",
        "domain_low": 0.0,
        "domain_high": 20.0,
        "bandwidth": 1.0,
        "select_bandwidth": False,
        "vector_space": True,
    },
    ObjectiveKind.HIMMELBLAU: {
        "name": "Himmelblau",
        "domain_low": -6.0,
        "domain_high": 6.0,
        "bandwidth": 1.0,
        "select_bandwidth": True,
        "vector_space": True,
    },
    ObjectiveKind.GRAPH_SPACE: {
        "name": "Graph kernel",
        "domain_low": None,
        "domain_high": None,
        "bandwidth": None,
        "select_bandwidth": False,
        "vector_space": False,
    },
}
