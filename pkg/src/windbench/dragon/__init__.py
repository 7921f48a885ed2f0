"""DAG-encoded neural regressor search space.

Candidates follow a fixed composition: a 2D graph over the wind map, a
flatten step, a 1D graph over the flattened features, and a scalar MLP head.
Graphs are directed acyclic with a single source and sink; evolutionary
operators (mutation, segment crossover) stay inside the space by
construction.
"""

from .space import (
    ACTIVATIONS,
    CandidateArchitecture,
    DagGraph,
    LayerNode,
    OPS_1D,
    OPS_2D,
    SearchSpace,
    sample_architecture,
)
from .shapes import infer_shapes
from .encoding import arch_hash, arch_from_text, arch_to_text
from .operators import crossover_architectures, mutate_architecture
from .materialize import materialize

__all__ = [
    "ACTIVATIONS",
    "CandidateArchitecture",
    "DagGraph",
    "LayerNode",
    "OPS_1D",
    "OPS_2D",
    "SearchSpace",
    "sample_architecture",
    "infer_shapes",
    "arch_hash",
    "arch_from_text",
    "arch_to_text",
    "crossover_architectures",
    "mutate_architecture",
    "materialize",
]
