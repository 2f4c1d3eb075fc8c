import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import voluptuous as vol

from .const import (
    CONF_AGGREGATE_FILE,
    CONF_BANDWIDTH,
    CONF_BANDWIDTH_GRID_SIZE,
    CONF_BANDWIDTH_MAX,
    CONF_BANDWIDTH_MIN,
    CONF_BASE_SEED,
    CONF_COMPUTE_BOUND,
    CONF_DELTA,
    CONF_DIMENSION,
    CONF_DOMAIN_HIGH,
    CONF_DOMAIN_LOW,
    CONF_GRAPH_EDGE_SCALE,
    CONF_GRAPH_FILE,
    CONF_GRAPH_MAX_NODES,
    CONF_GRAPH_MIN_NODES,
    CONF_HIMMELBLAU_SCALE,
    CONF_HIMMELBLAU_TREND_X,
    CONF_HIMMELBLAU_TREND_Y,
    CONF_JITTER,
    CONF_MAX_SAMPLED_SIZE,
    CONF_N_INIT,
    CONF_N_ITERS,
    CONF_N_RUNS,
    CONF_NOISE_SD,
    CONF_OBJECTIVE,
    CONF_OUT_DIR,
    CONF_POLICIES,
    CONF_SELECT_BANDWIDTH,
    CONF_SPACE_SIZE,
    CONF_TELEMETRY_ENDPOINT,
    CONF_TRACE_FILE,
    DEFAULT_BANDWIDTH_GRID_SIZE,
    DEFAULT_BANDWIDTH_MAX,
    DEFAULT_BANDWIDTH_MIN,
    DEFAULT_DELTA,
    DEFAULT_GRAPH_EDGE_SCALE,
    DEFAULT_GRAPH_MAX_NODES,
    DEFAULT_GRAPH_MIN_NODES,
    DEFAULT_JITTER,
    DEFAULT_MAX_SAMPLED_SIZE,
    DEFAULT_N_INIT,
    DEFAULT_N_ITERS,
    DEFAULT_N_RUNS,
    DEFAULT_NOISE_SD,
    DEFAULT_SPACE_SIZE,
    MAX_GRAPH_NODES,
)
from .exceptions import ConfigError, InputError
from .objective_types import OBJECTIVE_TYPES
from .shared.shared import ObjectiveKind, PolicyName

_LOGGER = logging.getLogger(__name__)


def parse_policies(value) -> tuple[PolicyName, ...]:
    if isinstance(value, (list, tuple)):
        names = [str(v).strip() for v in value]
    else:
        names = [v.strip() for v in str(value).split(",") if v.strip()]
    if not names:
        raise vol.Invalid("at least one policy is required")
    unknown = [n for n in names if n not in [p.value for p in PolicyName]]
    if unknown:
        raise vol.Invalid(f"unknown policies {unknown}")
    if len(set(names)) != len(names):
        raise vol.Invalid("policies must not repeat")
    return tuple(PolicyName(n) for n in names)


_POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_OBJECTIVE): vol.All(
            vol.Coerce(str), vol.In([kind.value for kind in ObjectiveKind]), vol.Coerce(ObjectiveKind)
        ),
        vol.Optional(CONF_SPACE_SIZE, default=DEFAULT_SPACE_SIZE): _POSITIVE_INT,
        vol.Optional(CONF_DIMENSION, default=2): _POSITIVE_INT,
        vol.Optional(CONF_DOMAIN_LOW): vol.Coerce(float),
        vol.Optional(CONF_DOMAIN_HIGH): vol.Coerce(float),
        vol.Optional(CONF_BANDWIDTH): _POSITIVE_FLOAT,
        vol.Optional(CONF_NOISE_SD, default=DEFAULT_NOISE_SD): _POSITIVE_FLOAT,
        vol.Optional(CONF_DELTA, default=DEFAULT_DELTA): vol.All(
            vol.Coerce(float),
            vol.Range(min=0, max=1, min_included=False, max_included=False),
        ),
        vol.Optional(CONF_N_INIT, default=DEFAULT_N_INIT): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_N_ITERS, default=DEFAULT_N_ITERS): _POSITIVE_INT,
        vol.Optional(CONF_N_RUNS, default=DEFAULT_N_RUNS): _POSITIVE_INT,
        vol.Optional(CONF_BASE_SEED, default=0): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=2**64 - 1)
        ),
        vol.Optional(CONF_POLICIES, default=",".join(p.value for p in PolicyName)): parse_policies,
        vol.Optional(CONF_COMPUTE_BOUND, default=False): vol.Boolean(),
        vol.Optional(CONF_JITTER, default=DEFAULT_JITTER): _POSITIVE_FLOAT,
        vol.Optional(CONF_MAX_SAMPLED_SIZE, default=DEFAULT_MAX_SAMPLED_SIZE): _POSITIVE_INT,
        vol.Optional(CONF_GRAPH_EDGE_SCALE, default=DEFAULT_GRAPH_EDGE_SCALE): _POSITIVE_FLOAT,
        vol.Optional(CONF_GRAPH_MIN_NODES, default=DEFAULT_GRAPH_MIN_NODES): vol.All(
            vol.Coerce(int), vol.Range(min=2, max=MAX_GRAPH_NODES)
        ),
        vol.Optional(CONF_GRAPH_MAX_NODES, default=DEFAULT_GRAPH_MAX_NODES): vol.All(
            vol.Coerce(int), vol.Range(min=2, max=MAX_GRAPH_NODES)
        ),
        vol.Optional(CONF_GRAPH_FILE): vol.Coerce(str),
        vol.Optional(CONF_HIMMELBLAU_SCALE, default=100.0): _POSITIVE_FLOAT,
        vol.Optional(CONF_HIMMELBLAU_TREND_X, default=1.0): vol.Coerce(float),
        vol.Optional(CONF_HIMMELBLAU_TREND_Y, default=1.0): vol.Coerce(float),
        vol.Optional(CONF_SELECT_BANDWIDTH): vol.Boolean(),
        vol.Optional(CONF_BANDWIDTH_GRID_SIZE, default=DEFAULT_BANDWIDTH_GRID_SIZE): _POSITIVE_INT,
        vol.Optional(CONF_BANDWIDTH_MIN, default=DEFAULT_BANDWIDTH_MIN): _POSITIVE_FLOAT,
        vol.Optional(CONF_BANDWIDTH_MAX, default=DEFAULT_BANDWIDTH_MAX): _POSITIVE_FLOAT,
        vol.Optional(CONF_OUT_DIR, default="."): vol.Coerce(str),
        vol.Optional(CONF_TRACE_FILE, default="traces.csv"): vol.Coerce(str),
        vol.Optional(CONF_AGGREGATE_FILE, default="aggregate.csv"): vol.Coerce(str),
        vol.Optional(CONF_TELEMETRY_ENDPOINT): vol.Coerce(str),
    }
)


@dataclass(frozen=True)
class ExperimentConfig:
    objective: ObjectiveKind
    space_size: int = DEFAULT_SPACE_SIZE
    dimension: int = 2
    domain_low: float | None = None
    domain_high: float | None = None
    bandwidth: float | None = None
    noise_sd: float = DEFAULT_NOISE_SD
    delta: float = DEFAULT_DELTA
    n_init: int = DEFAULT_N_INIT
    n_iters: int = DEFAULT_N_ITERS
    n_runs: int = DEFAULT_N_RUNS
    base_seed: int = 0
    policies: tuple[PolicyName, ...] = tuple(PolicyName)
    compute_bound: bool = False
    jitter: float = DEFAULT_JITTER
    max_sampled_size: int = DEFAULT_MAX_SAMPLED_SIZE
    graph_edge_scale: float = DEFAULT_GRAPH_EDGE_SCALE
    graph_min_nodes: int = DEFAULT_GRAPH_MIN_NODES
    graph_max_nodes: int = DEFAULT_GRAPH_MAX_NODES
    graph_file: str | None = None
    himmelblau_scale: float = 100.0
    himmelblau_trend_x: float = 1.0
    himmelblau_trend_y: float = 1.0
    select_bandwidth: bool | None = None
    bandwidth_grid_size: int = DEFAULT_BANDWIDTH_GRID_SIZE
    bandwidth_min: float = DEFAULT_BANDWIDTH_MIN
    bandwidth_max: float = DEFAULT_BANDWIDTH_MAX
    out_dir: str = "."
    trace_file: str = "traces.csv"
    aggregate_file: str = "aggregate.csv"
    telemetry_endpoint: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "objective", ObjectiveKind(self.objective))
        object.__setattr__(self, "policies", tuple(PolicyName(p) for p in self.policies))
        if not self.noise_sd > 0:
            raise InputError(f"noise_sd must be positive, got {self.noise_sd}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_init < 0 or self.n_iters < 1 or self.n_runs < 1:
            raise InputError("Expected n_init >= 0, n_iters >= 1 and n_runs >= 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        return cls(**CONFIG_SCHEMA(dict(data)))

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def _objective_default(self, key: str):
        return OBJECTIVE_TYPES[self.objective][key]

    @property
    def resolved_domain_low(self) -> float:
        return self.domain_low if self.domain_low is not None else self._objective_default("domain_low")

    @property
    def resolved_domain_high(self) -> float:
        return (
            self.domain_high if self.domain_high is not None else self._objective_default("domain_high")
        )

    @property
    def resolved_bandwidth(self) -> float:
        return self.bandwidth if self.bandwidth is not None else self._objective_default("bandwidth")

    @property
    def resolved_select_bandwidth(self) -> bool:
        if self.select_bandwidth is not None:
            return self.select_bandwidth
        return bool(self._objective_default("select_bandwidth"))

    @property
    def noise_var(self) -> float:
        return self.noise_sd**2


def _split_lines(text: str) -> tuple[dict[str, str], dict[str, int]]:
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{raw.strip()}'", line=line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("Missing key before '='", line=line_no)
        if key in values:
            raise ConfigError("Duplicate key", key=key, line=line_no)
        values[key] = value
        lines[key] = line_no
    return values, lines


def _check_consistency(config: ExperimentConfig, lines: dict[str, int]) -> None:
    if config.resolved_domain_low is not None and config.resolved_domain_high is not None:
        if not config.resolved_domain_low < config.resolved_domain_high:
            raise ConfigError(
                "domain_low must be below domain_high",
                key=CONF_DOMAIN_HIGH,
                line=lines.get(CONF_DOMAIN_HIGH, lines.get(CONF_DOMAIN_LOW)),
            )
    if config.graph_min_nodes > config.graph_max_nodes:
        raise ConfigError(
            "graph_min_nodes exceeds graph_max_nodes",
            key=CONF_GRAPH_MIN_NODES,
            line=lines.get(CONF_GRAPH_MIN_NODES),
        )
    if config.bandwidth_min > config.bandwidth_max:
        raise ConfigError(
            "bandwidth_min exceeds bandwidth_max",
            key=CONF_BANDWIDTH_MIN,
            line=lines.get(CONF_BANDWIDTH_MIN),
        )
    if config.resolved_select_bandwidth and not OBJECTIVE_TYPES[config.objective]["vector_space"]:
        raise ConfigError(
            "Bandwidth selection needs a vector space objective",
            key=CONF_SELECT_BANDWIDTH,
            line=lines.get(CONF_SELECT_BANDWIDTH),
        )
    if config.objective == ObjectiveKind.HIMMELBLAU and config.dimension != 2:
        raise ConfigError(
            "Himmelblau objective is two dimensional", key=CONF_DIMENSION, line=lines.get(CONF_DIMENSION)
        )


def parse_config(text: str) -> ExperimentConfig:
    values, lines = _split_lines(text)
    try:
        config = ExperimentConfig(**CONFIG_SCHEMA(values))
    except vol.MultipleInvalid as e:
        error = e.errors[0]
        key = str(error.path[0]) if error.path else None
        _LOGGER.error(f"Invalid configuration: {error}")
        raise ConfigError(error.msg, key=key, line=lines.get(key)) from e
    except InputError as e:
        raise ConfigError(str(e)) from e
    _check_consistency(config, lines)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}") from e
    return parse_config(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def serialize_config(config: ExperimentConfig) -> str:
    data = asdict(config)
    lines = [
        f"{field.name} = {_format_value(data[field.name])}"
        for field in sorted(fields(config), key=lambda f: f.name)
        if data[field.name] is not None
    ]
    return "\n".join(lines) + "\n"
