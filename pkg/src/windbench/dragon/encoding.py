"""Stable, diffable text encoding for architectures.

One line per node (`graph|index|op_kind|hyperparams|combiner`), one edge-list
line per graph, then head and training lines. The encoding round-trips
exactly and its hash identifies a candidate in search logs and reports.
"""

from __future__ import annotations

import hashlib

from ..errors import ValidationError
from .space import CandidateArchitecture, DagGraph, LayerNode


def _fmt_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _fmt_kv(pairs) -> str:
    return ",".join(f"{k}={_fmt_value(v)}" for k, v in pairs)


def _parse_kv(text: str) -> dict[str, object]:
    out: dict[str, object] = {}
    if not text:
        return out
    for item in text.split(","):
        key, _, raw = item.partition("=")
        if not key or not raw:
            raise ValidationError(f"bad key=value entry {item!r}")
        out[key] = _parse_value(raw)
    return out


def arch_to_text(arch: CandidateArchitecture) -> str:
    lines: list[str] = []
    for graph in (arch.graph2d, arch.graph1d):
        for idx, node in enumerate(graph.nodes):
            lines.append(
                f"{graph.stage}|{idx}|{node.op_kind}|{_fmt_kv(node.hp)}|{node.combiner}"
            )
        lines.append(
            f"edges|{graph.stage}|" + " ".join(f"{u}->{v}" for u, v in graph.edges)
        )
    lines.append(f"head|{_fmt_kv((('activation', arch.head_activation), ('width', arch.head_width)))}")
    lines.append(
        "train|"
        + _fmt_kv((("batch_size", arch.batch_size), ("learning_rate", arch.learning_rate)))
    )
    return "\n".join(lines) + "\n"


def arch_from_text(text: str) -> CandidateArchitecture:
    nodes: dict[str, list[LayerNode]] = {"2d": [], "1d": []}
    edges: dict[str, list[tuple[int, int]]] = {"2d": [], "1d": []}
    head: dict[str, object] | None = None
    train: dict[str, object] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("|")
        tag = parts[0]
        try:
            if tag in ("2d", "1d"):
                _, idx, op_kind, hp_text, combiner = parts
                if int(idx) != len(nodes[tag]):
                    raise ValidationError(f"node index {idx} out of order")
                hp = _parse_kv(hp_text)
                nodes[tag].append(
                    LayerNode(op_kind, tuple(sorted(hp.items())), combiner)
                )
            elif tag == "edges":
                _, stage, pairs = parts
                for item in pairs.split():
                    u, _, v = item.partition("->")
                    edges[stage].append((int(u), int(v)))
            elif tag == "head":
                head = _parse_kv(parts[1])
            elif tag == "train":
                train = _parse_kv(parts[1])
            else:
                raise ValidationError(f"unknown line tag {tag!r}")
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"architecture text line {lineno}: {exc}") from None
    if head is None or train is None:
        raise ValidationError("architecture text missing head or train line")
    if not nodes["2d"] or not nodes["1d"]:
        raise ValidationError("architecture text missing graph nodes")
    return CandidateArchitecture(
        graph2d=DagGraph("2d", tuple(nodes["2d"]), tuple(edges["2d"])),
        graph1d=DagGraph("1d", tuple(nodes["1d"]), tuple(edges["1d"])),
        head_width=int(head["width"]),
        head_activation=str(head["activation"]),
        learning_rate=float(train["learning_rate"]),
        batch_size=int(train["batch_size"]),
    )


def arch_hash(arch: CandidateArchitecture) -> str:
    return hashlib.sha256(arch_to_text(arch).encode("utf-8")).hexdigest()[:12]
