import hashlib
from enum import StrEnum

from opentelemetry.sdk.resources import Resource

from ..release_const import COMPONENT_VERSION, SERVICE_NAME


def config_digest(serialized_config: str) -> str:
    return hashlib.sha256(serialized_config.encode("utf-8")).hexdigest()


def get_resource(config_hash: str) -> Resource:
    resource = Resource.create(
        {
            "service.name": SERVICE_NAME,
            "service.version": COMPONENT_VERSION,
            "service.namespace": "chaining_ucb",
            "service.instance.id": config_hash,
        }
    )

    return resource


class ObjectiveKind(StrEnum):
    SAMPLED_GP = "sampled-gp"
    HIMMELBLAU = "himmelblau"
    GRAPH_SPACE = "graph-space"


class PolicyName(StrEnum):
    CHAINING_UCB = "chaining-ucb"
    GP_UCB = "gp-ucb"
    RANDOM = "random"
