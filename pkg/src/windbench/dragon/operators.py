"""Evolutionary operators: single-step mutation and segment crossover.

Both return new architectures and never modify their inputs. Validity
(graph invariants plus shape inference on the space's probe inputs) is
preserved by retrying random choices and falling back across mutation
kinds; crossover falls back to parent clones when no compatible cut exists.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .space import (
    BATCH_SIZE_DOMAIN,
    HEAD_DOMAINS,
    HP_DOMAINS,
    LEARNING_RATE_DOMAIN,
    OPS_1D,
    OPS_2D,
    CandidateArchitecture,
    DagGraph,
    SearchSpace,
    architecture_is_valid,
    make_node,
    node_bounds,
    sample_node,
    with_graph,
)

MUTATION_KINDS = (
    "add_node",
    "remove_node",
    "swap_op",
    "perturb_hp",
    "add_edge",
    "remove_edge",
)
_TRIES_PER_KIND = 8
LAMBDA_MUTATION_PROB = 0.2  # training hyperparameters evolve alongside the graphs


def _graph_of(arch: CandidateArchitecture, stage: str) -> DagGraph:
    return arch.graph2d if stage == "2d" else arch.graph1d


def _repair_degrees(n: int, edges: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Chain-link any node missing a required in/out edge."""
    indeg = [0] * n
    outdeg = [0] * n
    for u, v in edges:
        indeg[v] += 1
        outdeg[u] += 1
    for i in range(1, n):
        if indeg[i] == 0:
            edges.add((i - 1, i))
            outdeg[i - 1] += 1
    for i in range(n - 1):
        if outdeg[i] == 0:
            edges.add((i, i + 1))
    return edges


def _try_add_node(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    n = len(graph.nodes)
    if n >= node_bounds(space, graph.stage)[1]:
        return None
    pos = int(rng.integers(1, n + 1))
    shifted = set()
    for u, v in graph.edges:
        shifted.add((u if u < pos else u + 1, v if v < pos else v + 1))
    node = sample_node(graph.stage, rng)
    if pos == n:
        shifted.add((n - 1, n))  # old sink feeds the new sink
    else:
        u = int(rng.integers(0, pos))
        v = int(rng.integers(pos + 1, n + 1))
        shifted.add((u, pos))
        shifted.add((pos, v))
    nodes = graph.nodes[:pos] + (node,) + graph.nodes[pos:]
    return DagGraph(graph.stage, nodes, tuple(_repair_degrees(n + 1, shifted)))


def _try_remove_node(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    n = len(graph.nodes)
    if n <= node_bounds(space, graph.stage)[0]:
        return None
    idx = int(rng.integers(0, n))
    preds = graph.predecessors(idx)
    succs = graph.successors(idx)
    edges = {(u, v) for u, v in graph.edges if u != idx and v != idx}
    edges |= {(u, v) for u in preds for v in succs}

    def shift(i: int) -> int:
        return i if i < idx else i - 1

    edges = {(shift(u), shift(v)) for u, v in edges}
    nodes = graph.nodes[:idx] + graph.nodes[idx + 1 :]
    return DagGraph(graph.stage, nodes, tuple(_repair_degrees(n - 1, edges)))


def _try_swap_op(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    idx = int(rng.integers(0, len(graph.nodes)))
    current = graph.nodes[idx]
    ops = tuple(k for k in (OPS_2D if graph.stage == "2d" else OPS_1D) if k != current.op_kind)
    op = ops[int(rng.integers(len(ops)))]
    hp = {k: dom[int(rng.integers(len(dom)))] for k, dom in HP_DOMAINS[op].items()}
    fresh = make_node(op, combiner=current.combiner, **hp)
    nodes = graph.nodes[:idx] + (fresh,) + graph.nodes[idx + 1 :]
    return DagGraph(graph.stage, nodes, graph.edges)


def _step(domain: tuple, value, rng: np.random.Generator):
    idx = domain.index(value)
    if len(domain) == 1:
        return value
    if idx == 0:
        return domain[1]
    if idx == len(domain) - 1:
        return domain[-2]
    return domain[idx + (1 if rng.random() < 0.5 else -1)]


def _try_perturb_hp(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    slots = [
        (idx, key)
        for idx, node in enumerate(graph.nodes)
        for key in HP_DOMAINS[node.op_kind]
        if len(HP_DOMAINS[node.op_kind][key]) > 1
    ]
    if not slots:
        return None
    idx, key = slots[int(rng.integers(len(slots)))]
    node = graph.nodes[idx]
    domain = HP_DOMAINS[node.op_kind][key]
    hp = node.hp_dict()
    hp[key] = _step(domain, hp[key], rng)
    nodes = (
        graph.nodes[:idx]
        + (replace(node, hp=tuple(sorted(hp.items()))),)
        + graph.nodes[idx + 1 :]
    )
    return DagGraph(graph.stage, nodes, graph.edges)


def _try_add_edge(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    n = len(graph.nodes)
    existing = set(graph.edges)
    candidates = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in existing]
    if not candidates:
        return None
    edge = candidates[int(rng.integers(len(candidates)))]
    return DagGraph(graph.stage, graph.nodes, graph.edges + (edge,))


def _try_remove_edge(graph: DagGraph, space: SearchSpace, rng: np.random.Generator) -> DagGraph | None:
    n = len(graph.nodes)
    indeg = [0] * n
    outdeg = [0] * n
    for u, v in graph.edges:
        indeg[v] += 1
        outdeg[u] += 1
    removable = [(u, v) for u, v in graph.edges if outdeg[u] >= 2 and indeg[v] >= 2]
    if not removable:
        return None
    drop = removable[int(rng.integers(len(removable)))]
    return DagGraph(graph.stage, graph.nodes, tuple(e for e in graph.edges if e != drop))


_KIND_FN = {
    "add_node": _try_add_node,
    "remove_node": _try_remove_node,
    "swap_op": _try_swap_op,
    "perturb_hp": _try_perturb_hp,
    "add_edge": _try_add_edge,
    "remove_edge": _try_remove_edge,
}


def _mutate_head(arch: CandidateArchitecture, rng: np.random.Generator) -> CandidateArchitecture:
    if rng.random() < 0.5:
        return replace(arch, head_width=_step(HEAD_DOMAINS["width"], arch.head_width, rng))
    return replace(
        arch, head_activation=_step(HEAD_DOMAINS["activation"], arch.head_activation, rng)
    )


def _mutate_lambda(arch: CandidateArchitecture, rng: np.random.Generator) -> CandidateArchitecture:
    if rng.random() < 0.5:
        return replace(arch, learning_rate=_step(LEARNING_RATE_DOMAIN, arch.learning_rate, rng))
    return replace(arch, batch_size=_step(BATCH_SIZE_DOMAIN, arch.batch_size, rng))


def mutate_architecture(
    space: SearchSpace, arch: CandidateArchitecture, rng: np.random.Generator
) -> CandidateArchitecture:
    """Apply one mutation, uniformly drawn, falling back across kinds.

    The structural edit targets one graph; `perturb_hp` may instead land on
    the output head. With probability LAMBDA_MUTATION_PROB the training
    hyperparameters also take one step. Returns a clone only if every kind
    fails on both graphs (practically unreachable).
    """
    mutated: CandidateArchitecture | None = None
    for kind in rng.permutation(MUTATION_KINDS):
        stages = ["2d", "1d"] if rng.random() < 0.5 else ["1d", "2d"]
        if kind == "perturb_hp" and rng.random() < 0.2:
            candidate = _mutate_head(arch, rng)
            if architecture_is_valid(candidate, space):
                mutated = candidate
                break
        for stage in stages:
            graph = _graph_of(arch, stage)
            for _ in range(_TRIES_PER_KIND):
                try:
                    new_graph = _KIND_FN[kind](graph, space, rng)
                except ValueError:
                    new_graph = None
                if new_graph is None:
                    break
                candidate = with_graph(arch, new_graph)
                if architecture_is_valid(candidate, space):
                    mutated = candidate
                    break
            if mutated is not None:
                break
        if mutated is not None:
            break
    if mutated is None:
        mutated = arch
    if rng.random() < LAMBDA_MUTATION_PROB:
        mutated = _mutate_lambda(mutated, rng)
    return mutated


def _swap_segment(
    base: DagGraph, donor: DagGraph, lo: int, hi: int
) -> DagGraph:
    """Replace base.nodes[lo:hi] with donor.nodes[lo:hi]; reconnect dangling
    edges to the segment boundary nodes."""
    n = len(base.nodes)
    nodes = base.nodes[:lo] + donor.nodes[lo:hi] + base.nodes[hi:]
    edges: set[tuple[int, int]] = set()
    for u, v in base.edges:
        u_in = lo <= u < hi
        v_in = lo <= v < hi
        if u_in and v_in:
            continue  # interior wiring comes from the donor
        if v_in:
            v = lo
        if u_in:
            u = hi - 1
        if u < v:
            edges.add((u, v))
    for u, v in donor.edges:
        if lo <= u < hi and lo <= v < hi:
            edges.add((u, v))
    return DagGraph(base.stage, nodes, tuple(_repair_degrees(n, edges)))


def crossover_architectures(
    space: SearchSpace,
    a: CandidateArchitecture,
    b: CandidateArchitecture,
    rng: np.random.Generator,
    max_retries: int = 16,
) -> tuple[CandidateArchitecture, CandidateArchitecture]:
    """Exchange a contiguous node segment between the parents' graphs.

    The same cut interval is applied to both parents (clipped to the smaller
    graph), so identical parents reproduce themselves exactly. Each child
    keeps its base parent's head and training hyperparameters. After bounded
    retries without a valid pair, returns clones of the parents.
    """
    for _ in range(max_retries):
        stages = [s for s in ("2d", "1d") if rng.random() < 0.5]
        if not stages:
            stages = ["2d" if rng.random() < 0.5 else "1d"]
        child_a, child_b = a, b
        ok = True
        for stage in stages:
            ga, gb = _graph_of(a, stage), _graph_of(b, stage)
            limit = min(len(ga.nodes), len(gb.nodes))
            lo = int(rng.integers(0, limit))
            hi = int(rng.integers(lo + 1, limit + 1))
            try:
                child_a = with_graph(child_a, _swap_segment(ga, gb, lo, hi))
                child_b = with_graph(child_b, _swap_segment(gb, ga, lo, hi))
            except Exception:
                ok = False
                break
        if ok and architecture_is_valid(child_a, space) and architecture_is_valid(child_b, space):
            return child_a, child_b
    return a, b
