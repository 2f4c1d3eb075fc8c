from typing import Dict

from .shared.shared import PolicyName

POLICY_TYPES: Dict[str, Dict[str, str | bool]] = {
    PolicyName.CHAINING_UCB: {
        "name": "Chaining-UCB",
        "uses_hierarchy": True,
        "supports_bound": True,
    },
    PolicyName.GP_UCB: {
        "name": "GP-UCB",
        "uses_hierarchy": False,
        "supports_bound": False,
    },
    PolicyName.RANDOM: {
        "name": "Random",
        "uses_hierarchy": False,
        "supports_bound": False,
    },
}
