"""Turn a candidate architecture into an executable torch regressor."""

from __future__ import annotations

import math

import torch
import torch.nn as nn

from .shapes import CHANNEL_CAP, Shape1D, Shape2D, infer_shapes
from .space import CandidateArchitecture, DagGraph


def _activation(name: str) -> nn.Module:
    return nn.ReLU() if name == "relu" else nn.GELU()


def _embed_dim(channels: int, heads: int) -> int:
    return heads * math.ceil(max(channels, 8) / heads)


class _TokenSelfAttention(nn.Module):
    """Residual multi-head self-attention over a token sequence.

    Channels are projected to a head-divisible embedding and back, so the
    block preserves its input shape.
    """

    def __init__(self, channels: int, heads: int):
        super().__init__()
        embed = _embed_dim(channels, heads)
        self.in_proj = nn.Linear(channels, embed)
        self.attn = nn.MultiheadAttention(embed, heads, batch_first=True)
        self.out_proj = nn.Linear(embed, channels)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:  # (B, T, C)
        t = self.in_proj(tokens)
        t, _ = self.attn(t, t, t, need_weights=False)
        return tokens + self.out_proj(t)


class _SpatialAttention(nn.Module):
    """Self-attention over map cells (no patching), preserving (B, C, H, W)."""

    def __init__(self, channels: int, heads: int):
        super().__init__()
        self.block = _TokenSelfAttention(channels, heads)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        tokens = x.flatten(2).transpose(1, 2)
        tokens = self.block(tokens)
        return tokens.transpose(1, 2).reshape(b, c, h, w)


class _SequenceAttention(nn.Module):
    """Self-attention over 1D positions, preserving (B, C, L)."""

    def __init__(self, channels: int, heads: int):
        super().__init__()
        self.block = _TokenSelfAttention(channels, heads)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        tokens = x.transpose(1, 2)
        tokens = self.block(tokens)
        return tokens.transpose(1, 2)


class _Mlp1D(nn.Module):
    """Dense layer over the flattened (C, L) features; output (B, 1, width)."""

    def __init__(self, in_features: int, width: int, activation: str):
        super().__init__()
        self.net = nn.Sequential(nn.Flatten(), nn.Linear(in_features, width), _activation(activation))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x).unsqueeze(1)


def _build_2d_op(node, in_shape: Shape2D) -> nn.Module:
    kind = node.op_kind
    if kind == "conv2d":
        k = int(node.get("kernel"))
        return nn.Sequential(
            nn.Conv2d(in_shape.c, int(node.get("channels")), k, padding=k // 2),
            _activation(str(node.get("activation"))),
        )
    if kind == "avg_pool":
        return nn.AvgPool2d(2)
    if kind == "max_pool":
        return nn.MaxPool2d(2)
    if kind == "norm":
        return nn.GroupNorm(1, in_shape.c, eps=1e-5)
    if kind == "dropout":
        return nn.Dropout(float(node.get("rate")))
    if kind == "spatial_attention":
        return _SpatialAttention(in_shape.c, int(node.get("heads")))
    return nn.Identity()


def _build_1d_op(node, in_shape: Shape1D) -> nn.Module:
    kind = node.op_kind
    if kind == "mlp":
        return _Mlp1D(in_shape.length * in_shape.channels, int(node.get("width")), str(node.get("activation")))
    if kind == "conv1d":
        k = int(node.get("kernel"))
        return nn.Sequential(
            nn.Conv1d(in_shape.channels, int(node.get("channels")), k, padding=k // 2),
            _activation(str(node.get("activation"))),
        )
    if kind == "pool1d":
        return nn.AvgPool1d(2)
    if kind == "self_attention":
        return _SequenceAttention(in_shape.channels, int(node.get("heads")))
    return nn.Identity()


class _Combine(nn.Module):
    """Merge multiple branch tensors entering one node.

    `add` projects every branch whose channel count differs from the first
    branch's via a 1x1 convolution; `concat` stacks channels and projects
    down only when the stack exceeds CHANNEL_CAP.
    """

    def __init__(self, combiner: str, in_channels: list[int], conv_cls):
        super().__init__()
        self.combiner = combiner
        self.projections = nn.ModuleDict()
        if combiner == "add":
            target = in_channels[0]
            for i, c in enumerate(in_channels):
                if c != target:
                    self.projections[str(i)] = conv_cls(c, target, 1)
        else:
            total = sum(in_channels)
            if total > CHANNEL_CAP:
                self.projections["cat"] = conv_cls(total, CHANNEL_CAP, 1)

    def forward(self, branches: list[torch.Tensor]) -> torch.Tensor:
        if self.combiner == "add":
            total = None
            for i, t in enumerate(branches):
                if str(i) in self.projections:
                    t = self.projections[str(i)](t)
                total = t if total is None else total + t
            return total
        out = torch.cat(branches, dim=1)
        if "cat" in self.projections:
            out = self.projections["cat"](out)
        return out


class _GraphModule(nn.Module):
    """Execute one DAG stage in topological (index) order."""

    def __init__(self, graph: DagGraph, shapes: dict, stage: str, build_op, conv_cls):
        super().__init__()
        self.preds = [graph.predecessors(i) for i in range(len(graph.nodes))]
        self.ops = nn.ModuleList()
        self.combines = nn.ModuleDict()
        for idx, node in enumerate(graph.nodes):
            preds = self.preds[idx]
            if preds:
                in_shapes = [shapes[(stage, p)] for p in preds]
                in_shape = _combined_shape(in_shapes, node.combiner)
                if len(preds) > 1:
                    channels = [s.c if stage == "2d" else s.channels for s in in_shapes]
                    self.combines[str(idx)] = _Combine(node.combiner, channels, conv_cls)
            else:
                in_shape = shapes[("input", 0)]
            self.ops.append(build_op(node, in_shape))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        outputs: list[torch.Tensor] = []
        for idx, op in enumerate(self.ops):
            preds = self.preds[idx]
            if not preds:
                value = x
            elif len(preds) == 1:
                value = outputs[preds[0]]
            else:
                value = self.combines[str(idx)]([outputs[p] for p in preds])
            outputs.append(op(value))
        return outputs[-1]


def _combined_shape(shapes, combiner):
    first = shapes[0]
    if len(shapes) == 1 or combiner == "add":
        return first
    if isinstance(first, Shape2D):
        return Shape2D(first.h, first.w, min(sum(s.c for s in shapes), CHANNEL_CAP))
    return Shape1D(first.length, min(sum(s.channels for s in shapes), CHANNEL_CAP))


class DagRegressor(nn.Module):
    """Scalar regressor over single-channel maps, per the fixed composition:
    2D graph -> flatten -> 1D graph -> MLP head."""

    def __init__(self, arch: CandidateArchitecture, input_dims: tuple[int, int]):
        super().__init__()
        self.input_dims = tuple(input_dims)
        table = infer_shapes(arch, input_dims)

        shapes2d = {("input", 0): Shape2D(input_dims[0], input_dims[1], 1)}
        shapes2d.update({k: v for k, v in table.items() if k[0] == "2d"})
        self.stage2d = _GraphModule(arch.graph2d, shapes2d, "2d", _build_2d_op, nn.Conv2d)

        flat: Shape1D = table[("flatten", 0)]
        shapes1d = {("input", 0): flat}
        shapes1d.update({k: v for k, v in table.items() if k[0] == "1d"})
        self.stage1d = _GraphModule(arch.graph1d, shapes1d, "1d", _build_1d_op, nn.Conv1d)

        sink: Shape1D = table[("1d", len(arch.graph1d.nodes) - 1)]
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(sink.length * sink.channels, arch.head_width),
            _activation(arch.head_activation),
            nn.Linear(arch.head_width, 1),
        )

    def forward(self, maps: torch.Tensor) -> torch.Tensor:
        """maps: (B, H, W) or (B, 1, H, W) -> (B,) scalar predictions."""
        if maps.dim() == 3:
            maps = maps.unsqueeze(1)
        x = self.stage2d(maps)
        x = x.flatten(1).unsqueeze(1)  # (B, 1, h*w*c)
        x = self.stage1d(x)
        return self.head(x).squeeze(-1)

    @property
    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def materialize(arch: CandidateArchitecture, input_dims: tuple[int, int]) -> DagRegressor:
    """Build the executable regressor; shape errors propagate unchanged."""
    return DagRegressor(arch, input_dims)
