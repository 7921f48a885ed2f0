"""Torch map regressors for the conv and patch-attention baselines.

All networks consume single-channel wind maps pre-scaled by 0.1 (speeds of
order 10 m/s land near unit range) and emit one capacity-scaled scalar.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn

from ..errors import ValidationError
from .specs import ModelSpec

INPUT_SCALE = 0.1


def _activation(name: str) -> nn.Module:
    return nn.ReLU() if name == "relu" else nn.GELU()


class ConvNet(nn.Module):
    """Stack of same-padding convolutions, flatten, small dense head."""

    def __init__(self, spec: ModelSpec):
        super().__init__()
        h, w = spec.input_dims
        layers = int(spec.get("layers", 2))
        kernel = int(spec.get("kernel", 3))
        channels = int(spec.get("channels", 16))
        act = str(spec.get("activation", "relu"))
        blocks: list[nn.Module] = []
        c_in = 1
        for _ in range(layers):
            blocks += [nn.Conv2d(c_in, channels, kernel, padding=kernel // 2), _activation(act)]
            c_in = channels
        self.features = nn.Sequential(*blocks)
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(channels * h * w, 64),
            _activation(act),
            nn.Linear(64, 1),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 3:
            x = x.unsqueeze(1)
        return self.head(self.features(x * INPUT_SCALE)).squeeze(-1)


def padded_dims(input_dims: tuple[int, int], patch_size: int) -> tuple[int, int]:
    h, w = input_dims
    return (
        patch_size * math.ceil(h / patch_size),
        patch_size * math.ceil(w / patch_size),
    )


class _EncoderBlock(nn.Module):
    def __init__(self, dim: int, heads: int, mlp_ratio: float):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        hidden = int(dim * mlp_ratio)
        self.mlp = nn.Sequential(nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        a, _ = self.attn(self.norm1(x), self.norm1(x), self.norm1(x), need_weights=False)
        x = x + a
        return x + self.mlp(self.norm2(x))


class PatchAttentionNet(nn.Module):
    """Patch embedding, self-attention blocks, mean pooling, linear head.

    Crops whose sides are not multiples of the patch size are padded with
    edge replication before patching.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__()
        h, w = spec.input_dims
        patch = int(spec.get("patch_size", 4))
        embed = int(spec.get("embed_dim", 32))
        heads = int(spec.get("heads", 2))
        blocks = int(spec.get("blocks", 2))
        mlp_ratio = float(spec.get("mlp_ratio", 2.0))
        if patch < 1:
            raise ValidationError("patch_size must be positive")
        if patch > h or patch > w:
            raise ValidationError(f"patch {patch} larger than crop {h}x{w}")
        ph, pw = padded_dims((h, w), patch)
        self.pad = nn.ReplicationPad2d((0, pw - w, 0, ph - h))
        self.n_patches = (ph // patch) * (pw // patch)
        self.split = nn.Unfold(kernel_size=patch, stride=patch)
        self.embed = nn.Linear(patch * patch, embed)
        self.pos = nn.Parameter(torch.zeros(1, self.n_patches, embed))
        self.blocks = nn.Sequential(*[_EncoderBlock(embed, heads, mlp_ratio) for _ in range(blocks)])
        self.norm = nn.LayerNorm(embed)
        self.head = nn.Linear(embed, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 3:
            x = x.unsqueeze(1)
        tokens = self.split(self.pad(x * INPUT_SCALE)).transpose(1, 2)
        tokens = self.embed(tokens) + self.pos
        tokens = self.blocks(tokens)
        return self.head(self.norm(tokens).mean(dim=1)).squeeze(-1)
