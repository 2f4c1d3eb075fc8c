import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall as _csgraph_floyd_warshall

from ..const import MAX_GRAPH_NODES, MAX_GRAPH_RETRIES, UNREACHABLE
from ..exceptions import InputError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirectedGraph:
    """Unweighted directed graph without self-loops.

    Nodes are ``0 .. node_count - 1``; ``edges`` holds ordered ``(u, v)`` pairs.
    """

    node_count: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    graph_id: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise InputError(f"Graph needs at least one node, got {self.node_count}")
        if self.node_count > MAX_GRAPH_NODES:
            raise InputError(
                f"Graph has {self.node_count} nodes, the cap is {MAX_GRAPH_NODES}"
            )
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise InputError(f"Self-loop on node {u} is not allowed")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise InputError(
                    f"Edge ({u}, {v}) out of range for {self.node_count} nodes"
                )
        object.__setattr__(self, "edges", edges)

    def adjacency(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.node_count, self.node_count), dtype=np.int8)
        rows, cols = zip(*sorted(self.edges))
        data = np.ones(len(rows), dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(self.node_count,) * 2)

    @cached_property
    def sp_matrix(self) -> np.ndarray:
        return floyd_warshall(self)

    @cached_property
    def path_length_counts(self) -> np.ndarray:
        """Number of reachable ordered pairs ``u != v`` per shortest-path length.

        Index ``L`` counts pairs at distance ``L``; index 0 is always 0.
        """
        lengths = self.sp_matrix[self.sp_matrix > 0]
        return np.bincount(lengths, minlength=MAX_GRAPH_NODES).astype(np.int64)

    @property
    def reachable_pairs(self) -> int:
        return int(self.path_length_counts.sum())


def floyd_warshall(g: DirectedGraph) -> np.ndarray:
    """All-pairs shortest path lengths on unit edge weights.

    Unreachable pairs carry ``UNREACHABLE``.
    """
    dist = _csgraph_floyd_warshall(g.adjacency(), directed=True, unweighted=True)
    out = np.full(dist.shape, UNREACHABLE, dtype=np.int64)
    reachable = np.isfinite(dist)
    out[reachable] = dist[reachable].astype(np.int64)
    return out


def random_digraph(
    rng: np.random.Generator,
    min_nodes: int,
    max_nodes: int,
    edge_scale: float,
    graph_id: str | None = None,
) -> DirectedGraph:
    """Draw a digraph with at least one reachable pair.

    The node count is uniform in ``[min_nodes, max_nodes]`` and every ordered pair
    is an edge with probability ``min(1, edge_scale / node_count)``.
    """
    for attempt in range(MAX_GRAPH_RETRIES):
        node_count = int(rng.integers(min_nodes, max_nodes + 1))
        p = min(1.0, edge_scale / node_count)
        mask = rng.random((node_count, node_count)) < p
        np.fill_diagonal(mask, False)
        us, vs = np.nonzero(mask)
        if len(us) == 0:
            _LOGGER.warning(f"Resampling graph {graph_id}: no edges (attempt {attempt})")
            continue
        return DirectedGraph(node_count, frozenset(zip(us.tolist(), vs.tolist())), graph_id)
    raise InputError(
        f"Could not draw a graph with a reachable pair in {MAX_GRAPH_RETRIES} attempts"
    )


def parse_graphs(text: str) -> list[DirectedGraph]:
    """Parse blocks of ``graph <id> <node_count>`` followed by ``u v`` edge lines."""
    graphs: list[DirectedGraph] = []
    header: tuple[str, int] | None = None
    edges: list[tuple[int, int]] = []

    def flush():
        if header is not None:
            graphs.append(DirectedGraph(header[1], frozenset(edges), header[0]))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            flush()
            header, edges = None, []
            continue
        parts = line.split()
        try:
            if parts[0] == "graph":
                if len(parts) != 3:
                    raise ValueError("expected 'graph <id> <node_count>'")
                node_count = int(parts[2])
                if not 1 <= node_count <= MAX_GRAPH_NODES:
                    raise ValueError(f"node count {node_count} outside of [1, {MAX_GRAPH_NODES}]")
                flush()
                header, edges = (parts[1], node_count), []
            else:
                if header is None:
                    raise ValueError("edge line outside of a graph block")
                if len(parts) != 2:
                    raise ValueError("expected 'u v'")
                u, v = int(parts[0]), int(parts[1])
                if u == v or not (0 <= u < header[1] and 0 <= v < header[1]):
                    raise ValueError(f"invalid edge ({u}, {v}) for {header[1]} nodes")
                edges.append((u, v))
        except (ValueError, InputError) as e:
            raise InputError(f"Invalid graph file at line {line_no}: {e}") from e
    flush()
    return graphs


def load_graphs(path: str | Path) -> list[DirectedGraph]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot read graph file {path}: {e.strerror}") from e
    graphs = parse_graphs(text)
    _LOGGER.info(f"Loaded {len(graphs)} graphs from {path}")
    return graphs


def format_graphs(graphs: list[DirectedGraph]) -> str:
    blocks = []
    for index, g in enumerate(graphs):
        graph_id = g.graph_id if g.graph_id is not None else str(index)
        lines = [f"graph {graph_id} {g.node_count}"]
        lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def dump_graphs(graphs: list[DirectedGraph], path: str | Path) -> None:
    Path(path).write_text(format_graphs(graphs), encoding="utf-8")
