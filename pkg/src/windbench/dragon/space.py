"""Search-space definition: layer nodes, DAG graphs, candidate sampling."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import SearchSpaceExhausted, ValidationError

OPS_2D = ("conv2d", "avg_pool", "max_pool", "norm", "dropout", "spatial_attention", "identity")
OPS_1D = ("mlp", "self_attention", "conv1d", "pool1d", "identity")
ACTIVATIONS = ("relu", "gelu")
COMBINERS = ("add", "concat")

# Ordered hyperparameter domains; mutation steps move one position at a time.
HP_DOMAINS: dict[str, dict[str, tuple]] = {
    "conv2d": {"activation": ACTIVATIONS, "channels": (4, 8, 16, 32), "kernel": (3, 5)},
    "avg_pool": {},
    "max_pool": {},
    "norm": {},
    "dropout": {"rate": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)},
    "spatial_attention": {"heads": (1, 2, 4)},
    "identity": {},
    "mlp": {"activation": ACTIVATIONS, "width": (16, 32, 64, 128, 256)},
    "self_attention": {"heads": (1, 2, 4)},
    "conv1d": {"activation": ACTIVATIONS, "channels": (4, 8, 16, 32), "kernel": (3, 5)},
    "pool1d": {},
}
HEAD_DOMAINS: dict[str, tuple] = {"activation": ACTIVATIONS, "width": (16, 32, 64, 128, 256)}
LEARNING_RATE_DOMAIN = (0.0003, 0.001, 0.003)
BATCH_SIZE_DOMAIN = (64, 128, 256)


@dataclass(frozen=True)
class LayerNode:
    """One DAG node: an operation, its hyperparameters, and how multiple
    incoming branches are combined (`add` or `concat`)."""

    op_kind: str
    hp: tuple[tuple[str, object], ...]
    combiner: str = "add"

    def __post_init__(self):
        domain = HP_DOMAINS.get(self.op_kind)
        if domain is None:
            raise ValidationError(f"unknown op kind {self.op_kind!r}")
        keys = tuple(k for k, _ in self.hp)
        if keys != tuple(sorted(domain)):
            raise ValidationError(
                f"{self.op_kind}: hyperparameters {keys} do not match domain "
                f"{tuple(sorted(domain))}"
            )
        for key, value in self.hp:
            if value not in domain[key]:
                raise ValidationError(f"{self.op_kind}.{key}={value!r} outside domain")
        if self.combiner not in COMBINERS:
            raise ValidationError(f"unknown combiner {self.combiner!r}")

    def hp_dict(self) -> dict[str, object]:
        return dict(self.hp)

    def get(self, key: str):
        return dict(self.hp)[key]


def make_node(op_kind: str, combiner: str = "add", **hp) -> LayerNode:
    domain = HP_DOMAINS.get(op_kind)
    if domain is None:
        raise ValidationError(f"unknown op kind {op_kind!r}")
    filled = dict(hp)
    for key in domain:
        if key not in filled:
            filled[key] = domain[key][0]
    return LayerNode(op_kind, tuple(sorted(filled.items())), combiner)


@dataclass(frozen=True)
class DagGraph:
    """Directed acyclic graph over an ordered node list.

    Edges always point from a lower index to a higher one, so node order is
    a topological order. Node 0 is the single source, the last node the
    single sink; every node lies on a source-to-sink path.
    """

    stage: str  # "2d" or "1d"
    nodes: tuple[LayerNode, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))
        self.validate()

    def validate(self) -> None:
        if self.stage not in ("2d", "1d"):
            raise ValidationError(f"unknown graph stage {self.stage!r}")
        allowed = OPS_2D if self.stage == "2d" else OPS_1D
        n = len(self.nodes)
        if n < 1:
            raise ValidationError("graph needs at least one node")
        for node in self.nodes:
            if node.op_kind not in allowed:
                raise ValidationError(
                    f"op {node.op_kind!r} not allowed in the {self.stage} stage"
                )
        for u, v in self.edges:
            if not (0 <= u < v < n):
                raise ValidationError(f"edge ({u}, {v}) violates topological index order")
        indeg = [0] * n
        outdeg = [0] * n
        for u, v in self.edges:
            indeg[v] += 1
            outdeg[u] += 1
        for i in range(n):
            if i > 0 and indeg[i] == 0:
                raise ValidationError(f"node {i} unreachable from the source")
            if i < n - 1 and outdeg[i] == 0:
                raise ValidationError(f"node {i} cannot reach the sink")
        if indeg[0] != 0 or outdeg[n - 1] != 0:
            raise ValidationError("source must have in-degree 0, sink out-degree 0")
        self._topological_check()

    def _topological_check(self) -> None:
        # Kahn's algorithm; guaranteed to succeed given index-ordered edges,
        # but run on every construction as a structural assertion.
        n = len(self.nodes)
        indeg = [0] * n
        succs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            indeg[v] += 1
            succs[u].append(v)
        ready = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while ready:
            u = ready.pop()
            seen += 1
            for v in succs[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
        if seen != n:
            raise ValidationError("cycle detected in graph")

    def predecessors(self, idx: int) -> list[int]:
        return [u for u, v in self.edges if v == idx]

    def successors(self, idx: int) -> list[int]:
        return [v for u, v in self.edges if u == idx]


def chain_edges(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(n - 1))


@dataclass(frozen=True)
class CandidateArchitecture:
    """A full candidate: 2D graph, 1D graph, scalar head, training settings."""

    graph2d: DagGraph
    graph1d: DagGraph
    head_width: int
    head_activation: str
    learning_rate: float
    batch_size: int

    def __post_init__(self):
        if self.graph2d.stage != "2d" or self.graph1d.stage != "1d":
            raise ValidationError("graph stages are swapped")
        if self.head_width not in HEAD_DOMAINS["width"]:
            raise ValidationError(f"head width {self.head_width} outside domain")
        if self.head_activation not in HEAD_DOMAINS["activation"]:
            raise ValidationError(f"head activation {self.head_activation!r} outside domain")
        if self.learning_rate not in LEARNING_RATE_DOMAIN:
            raise ValidationError(f"learning rate {self.learning_rate} outside domain")
        if self.batch_size not in BATCH_SIZE_DOMAIN:
            raise ValidationError(f"batch size {self.batch_size} outside domain")


@dataclass(frozen=True)
class SearchSpace:
    """Bounds and validity probes for candidate sampling.

    `probe_dims` lists the (rows, cols) inputs an architecture must pass
    shape inference for; the search sets these to the region crop shapes.
    """

    min_nodes_2d: int = 1
    max_nodes_2d: int = 6
    min_nodes_1d: int = 1
    max_nodes_1d: int = 4
    probe_dims: tuple[tuple[int, int], ...] = ((17, 23),)
    extra_edge_prob: float = 0.2
    max_sample_retries: int = 200

    def __post_init__(self):
        if not (1 <= self.min_nodes_2d <= self.max_nodes_2d):
            raise ValidationError("bad 2d node bounds")
        if not (1 <= self.min_nodes_1d <= self.max_nodes_1d):
            raise ValidationError("bad 1d node bounds")
        if not self.probe_dims:
            raise ValidationError("need at least one probe input size")


def node_bounds(space: SearchSpace, stage: str) -> tuple[int, int]:
    if stage == "2d":
        return space.min_nodes_2d, space.max_nodes_2d
    return space.min_nodes_1d, space.max_nodes_1d


def sample_node(stage: str, rng: np.random.Generator) -> LayerNode:
    ops = OPS_2D if stage == "2d" else OPS_1D
    op = ops[int(rng.integers(len(ops)))]
    hp = {k: dom[int(rng.integers(len(dom)))] for k, dom in HP_DOMAINS[op].items()}
    combiner = COMBINERS[int(rng.integers(len(COMBINERS)))]
    return make_node(op, combiner=combiner, **hp)


def _sample_graph(stage: str, space: SearchSpace, rng: np.random.Generator) -> DagGraph:
    lo, hi = node_bounds(space, stage)
    n = int(rng.integers(lo, hi + 1))
    nodes = tuple(sample_node(stage, rng) for _ in range(n))
    edges = list(chain_edges(n))
    for i in range(n):
        for j in range(i + 2, n):
            if rng.random() < space.extra_edge_prob:
                edges.append((i, j))
    return DagGraph(stage, nodes, tuple(edges))


def architecture_is_valid(arch: CandidateArchitecture, space: SearchSpace) -> bool:
    """Graph invariants, node-count bounds, and shape inference on all probes."""
    from .shapes import infer_shapes  # local import to avoid a cycle

    try:
        arch.graph2d.validate()
        arch.graph1d.validate()
        for stage, graph in (("2d", arch.graph2d), ("1d", arch.graph1d)):
            lo, hi = node_bounds(space, stage)
            if not lo <= len(graph.nodes) <= hi:
                return False
        for dims in space.probe_dims:
            infer_shapes(arch, dims)
    except ValidationError:
        return False
    return True


def sample_architecture(space: SearchSpace, rng: np.random.Generator) -> CandidateArchitecture:
    """Sample until valid (bounded retries); raises SearchSpaceExhausted."""
    for _ in range(space.max_sample_retries):
        arch = CandidateArchitecture(
            graph2d=_sample_graph("2d", space, rng),
            graph1d=_sample_graph("1d", space, rng),
            head_width=HEAD_DOMAINS["width"][int(rng.integers(len(HEAD_DOMAINS["width"])))],
            head_activation=ACTIVATIONS[int(rng.integers(len(ACTIVATIONS)))],
            learning_rate=LEARNING_RATE_DOMAIN[int(rng.integers(len(LEARNING_RATE_DOMAIN)))],
            batch_size=BATCH_SIZE_DOMAIN[int(rng.integers(len(BATCH_SIZE_DOMAIN)))],
        )
        if architecture_is_valid(arch, space):
            return arch
    raise SearchSpaceExhausted(
        f"no valid architecture after {space.max_sample_retries} samples "
        f"for probe dims {space.probe_dims}"
    )


def with_graph(arch: CandidateArchitecture, graph: DagGraph) -> CandidateArchitecture:
    if graph.stage == "2d":
        return replace(arch, graph2d=graph)
    return replace(arch, graph1d=graph)
