import math

from .release_const import COMPONENT_VERSION, SERVICE_NAME

DOMAIN = "chaining_ucb"

CONF_OBJECTIVE = "objective"
CONF_SPACE_SIZE = "space_size"
CONF_DIMENSION = "dimension"
CONF_DOMAIN_LOW = "domain_low"
CONF_DOMAIN_HIGH = "domain_high"
CONF_BANDWIDTH = "bandwidth"
CONF_NOISE_SD = "noise_sd"
CONF_DELTA = "delta"
CONF_N_INIT = "n_init"
CONF_N_ITERS = "n_iters"
CONF_N_RUNS = "n_runs"
CONF_BASE_SEED = "base_seed"
CONF_POLICIES = "policies"
CONF_COMPUTE_BOUND = "compute_bound"
CONF_JITTER = "jitter"
CONF_MAX_SAMPLED_SIZE = "max_sampled_size"
CONF_GRAPH_EDGE_SCALE = "graph_edge_scale"
CONF_GRAPH_MIN_NODES = "graph_min_nodes"
CONF_GRAPH_MAX_NODES = "graph_max_nodes"
CONF_GRAPH_FILE = "graph_file"
CONF_HIMMELBLAU_SCALE = "himmelblau_scale"
CONF_HIMMELBLAU_TREND_X = "himmelblau_trend_x"
CONF_HIMMELBLAU_TREND_Y = "himmelblau_trend_y"
CONF_SELECT_BANDWIDTH = "select_bandwidth"
CONF_BANDWIDTH_GRID_SIZE = "bandwidth_grid_size"
CONF_BANDWIDTH_MIN = "bandwidth_min"
CONF_BANDWIDTH_MAX = "bandwidth_max"
CONF_OUT_DIR = "out_dir"
CONF_TRACE_FILE = "trace_file"
CONF_AGGREGATE_FILE = "aggregate_file"
CONF_TELEMETRY_ENDPOINT = "telemetry_endpoint"

DEFAULT_NOISE_SD = 0.05
DEFAULT_DELTA = 0.05
DEFAULT_N_INIT = 10
DEFAULT_N_ITERS = 100
DEFAULT_N_RUNS = 32
DEFAULT_SPACE_SIZE = 2000
DEFAULT_JITTER = 1e-10
# dense prior sampling is O(|X|^3) time and O(|X|^2) memory
DEFAULT_MAX_SAMPLED_SIZE = 12000

# graphs of the benchmark space have fewer than 20 nodes
MAX_GRAPH_NODES = 20
DEFAULT_GRAPH_MIN_NODES = 2
DEFAULT_GRAPH_MAX_NODES = 19
DEFAULT_GRAPH_EDGE_SCALE = 2.0
MAX_GRAPH_RETRIES = 100
UNREACHABLE = -1

DEFAULT_BANDWIDTH_GRID_SIZE = 15
DEFAULT_BANDWIDTH_MIN = 0.1
DEFAULT_BANDWIDTH_MAX = 10.0

# above this many points the pseudo-distance is computed block by block
DENSE_DISTANCE_LIMIT = 3000
DISTANCE_BLOCK_ROWS = 512

# radii below 2^-30 sit under the resolution of d_n
BOUND_MAX_LEVEL = 30

SYMMETRY_TOLERANCE = 1e-12

PI4_OVER_36 = math.pi**4 / 36.0

CSV_FLOAT_FORMAT = "%.10g"
TRACE_COLUMNS = [
    "policy",
    "run",
    "t",
    "chosen",
    "y",
    "inst_regret",
    "simple_regret",
    "cum_regret",
    "bound",
]
AGGREGATE_COLUMNS = [
    "policy",
    "t",
    "mean_simple_regret",
    "sd_simple_regret",
    "mean_cum_regret",
]
ACQUISITION_COLUMNS = [
    "index",
    "truth",
    "mean",
    "sigma",
    "chaining_bonus",
    "gp_ucb_bonus",
    "chaining_ucb",
    "gp_ucb",
    "n_observed",
    "mean_observed",
]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

OT_INSECURE = True
OT_HEADERS: list[tuple[str, str]] = []
