from .const import COMPONENT_VERSION, DOMAIN
from .exceptions import (
    ChainingUcbError,
    ConfigError,
    InputError,
    NumericalError,
    RunFailedError,
)

__version__ = COMPONENT_VERSION

__all__ = [
    "DOMAIN",
    "ChainingUcbError",
    "ConfigError",
    "InputError",
    "NumericalError",
    "RunFailedError",
]
