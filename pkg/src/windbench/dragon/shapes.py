"""Shape inference for candidate architectures.

Fixed semantics: stride-1 "same" padding for convolutions, floor division
for 2x2/stride-2 pooling, `add` combiners require equal spatial/length dims
(channels are auto-projected to the first input's), `concat` stacks channels
capped at CHANNEL_CAP, flatten maps (h, w, c) to a length h*w*c vector.

Resource guards are part of validity: attention stages are limited to
MAX_ATTENTION_TOKENS tokens, non-MLP 1D ops to MAX_1D_LENGTH inputs, the
flatten vector to MAX_FLATTEN_LENGTH, and the head input to
MAX_HEAD_FEATURES. Violations raise ShapeInferenceError naming the node.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ShapeInferenceError
from .space import CandidateArchitecture, DagGraph

CHANNEL_CAP = 64
MAX_ATTENTION_TOKENS = 1024
MAX_1D_LENGTH = 1024
MAX_FLATTEN_LENGTH = 32768
MAX_HEAD_FEATURES = 8192


@dataclass(frozen=True)
class Shape2D:
    h: int
    w: int
    c: int


@dataclass(frozen=True)
class Shape1D:
    length: int
    channels: int


def combine_2d(shapes: list[Shape2D], combiner: str, node: tuple[str, int]) -> Shape2D:
    first = shapes[0]
    for s in shapes[1:]:
        if (s.h, s.w) != (first.h, first.w):
            raise ShapeInferenceError(
                f"cannot combine spatial dims {(s.h, s.w)} with {(first.h, first.w)}",
                node=node,
            )
    if combiner == "add":
        return first  # differing channels are 1x1-projected to the first input's
    return Shape2D(first.h, first.w, min(sum(s.c for s in shapes), CHANNEL_CAP))


def combine_1d(shapes: list[Shape1D], combiner: str, node: tuple[str, int]) -> Shape1D:
    first = shapes[0]
    for s in shapes[1:]:
        if s.length != first.length:
            raise ShapeInferenceError(
                f"cannot combine lengths {s.length} and {first.length}", node=node
            )
    if combiner == "add":
        return first
    return Shape1D(first.length, min(sum(s.channels for s in shapes), CHANNEL_CAP))


def _apply_2d(shape: Shape2D, graph: DagGraph, idx: int) -> Shape2D:
    node = graph.nodes[idx]
    ref = ("2d", idx)
    kind = node.op_kind
    if kind == "conv2d":
        return Shape2D(shape.h, shape.w, int(node.get("channels")))
    if kind in ("avg_pool", "max_pool"):
        h, w = shape.h // 2, shape.w // 2
        if h < 1 or w < 1:
            raise ShapeInferenceError(f"pooling {shape.h}x{shape.w} collapses to zero", node=ref)
        return Shape2D(h, w, shape.c)
    if kind == "spatial_attention":
        if shape.h * shape.w > MAX_ATTENTION_TOKENS:
            raise ShapeInferenceError(
                f"{shape.h * shape.w} cells exceed the {MAX_ATTENTION_TOKENS}-token "
                "attention limit",
                node=ref,
            )
        return shape
    if kind in ("norm", "dropout", "identity"):
        return shape
    raise ShapeInferenceError(f"unknown 2d op {kind!r}", node=ref)


def _apply_1d(shape: Shape1D, graph: DagGraph, idx: int) -> Shape1D:
    node = graph.nodes[idx]
    ref = ("1d", idx)
    kind = node.op_kind
    if kind == "mlp":
        return Shape1D(int(node.get("width")), 1)
    if kind != "identity" and shape.length > MAX_1D_LENGTH:
        raise ShapeInferenceError(
            f"1d op {kind!r} on length {shape.length} exceeds the "
            f"{MAX_1D_LENGTH}-element limit",
            node=ref,
        )
    if kind == "conv1d":
        return Shape1D(shape.length, int(node.get("channels")))
    if kind == "pool1d":
        length = shape.length // 2
        if length < 1:
            raise ShapeInferenceError(f"pooling length {shape.length} collapses to zero", node=ref)
        return Shape1D(length, shape.channels)
    if kind == "self_attention":
        return shape
    if kind == "identity":
        return shape
    raise ShapeInferenceError(f"unknown 1d op {kind!r}", node=ref)


def infer_shapes(
    arch: CandidateArchitecture, input_dims: tuple[int, int]
) -> dict[tuple[str, int], object]:
    """Output shape per node for a (rows, cols) single-channel input map."""
    h, w = input_dims
    if h < 2 or w < 2:
        raise ShapeInferenceError(f"input map {h}x{w} too small")
    table: dict[tuple[str, int], object] = {}

    shapes2d: list[Shape2D] = []
    for idx in range(len(arch.graph2d.nodes)):
        preds = arch.graph2d.predecessors(idx)
        if not preds:
            incoming = Shape2D(h, w, 1)
        else:
            incoming = combine_2d(
                [shapes2d[p] for p in preds], arch.graph2d.nodes[idx].combiner, ("2d", idx)
            )
        out = _apply_2d(incoming, arch.graph2d, idx)
        shapes2d.append(out)
        table[("2d", idx)] = out

    sink2d = shapes2d[-1]
    flat_len = sink2d.h * sink2d.w * sink2d.c
    if flat_len > MAX_FLATTEN_LENGTH:
        raise ShapeInferenceError(
            f"flatten produces {flat_len} features, over the "
            f"{MAX_FLATTEN_LENGTH} limit",
            node=("2d", len(shapes2d) - 1),
        )
    table[("flatten", 0)] = Shape1D(flat_len, 1)

    shapes1d: list[Shape1D] = []
    for idx in range(len(arch.graph1d.nodes)):
        preds = arch.graph1d.predecessors(idx)
        if not preds:
            incoming = Shape1D(flat_len, 1)
        else:
            incoming = combine_1d(
                [shapes1d[p] for p in preds], arch.graph1d.nodes[idx].combiner, ("1d", idx)
            )
        out = _apply_1d(incoming, arch.graph1d, idx)
        shapes1d.append(out)
        table[("1d", idx)] = out

    sink1d = shapes1d[-1]
    head_in = sink1d.length * sink1d.channels
    if head_in > MAX_HEAD_FEATURES:
        raise ShapeInferenceError(
            f"head input of {head_in} features exceeds the {MAX_HEAD_FEATURES} limit",
            node=("1d", len(shapes1d) - 1),
        )
    table[("head", 0)] = 1
    return table
