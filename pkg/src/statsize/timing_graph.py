"""Single-source/single-sink timing DAG built from a netlist, with ASAP levels.

Nodes are nets plus a virtual source ``ns`` (id 0) and a virtual sink ``nf``
(last id).  Each gate input pin contributes one edge fanin-net -> output-net
owned by that gate; ``ns`` feeds every primary input and every primary output
feeds ``nf`` through zero-delay virtual edges.  Node ids are assigned in a
fixed order (``ns``, primary inputs, gate outputs in netlist order, ``nf``) so
ties broken by id are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .netlist_io import Netlist, find_cycle

NS_NAME = "__ns__"
NF_NAME = "__nf__"


class CycleError(ValueError):
    def __init__(self, nodes):
        self.nodes = list(nodes)
        super().__init__(f"combinational cycle through {self.nodes}")


@dataclass
class TimingGraph:
    names: list
    fanin: list             # node -> ascending tuple of fanin nodes (one per edge)
    fanout: list            # node -> ascending tuple of fanout nodes (one per edge)
    driver: list            # node -> index of driving gate, -1 for ns / PIs / nf
    gate_node: list         # gate index -> output node
    edges: list             # (u, v, gate index or -1)
    level: list
    implicit_outputs: list  # nets tied to nf only because nothing observes them

    @property
    def ns(self) -> int:
        return 0

    @property
    def nf(self) -> int:
        return len(self.names) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def topo_order(self) -> list:
        return sorted(range(self.n_nodes), key=lambda i: (self.level[i], i))

    def nodes_by_level(self) -> list:
        out = [[] for _ in range(max(self.level) + 1)]
        for i in range(self.n_nodes):
            out[self.level[i]].append(i)
        return out

    def fanin_gates(self, g: int) -> list:
        """Distinct gates driving an input of gate ``g``, with their pin multiplicity."""
        counts = {}
        for u in self.fanin[self.gate_node[g]]:
            d = self.driver[u]
            if d >= 0:
                counts[d] = counts.get(d, 0) + 1
        return sorted(counts.items())

    def to_dot(self) -> str:
        lines = ["digraph timing {", "  rankdir=LR;"]
        for i, n in enumerate(self.names):
            lines.append(f'  n{i} [label="{n}\\nL{self.level[i]}"];')
        for u, v, g in self.edges:
            style = ' [style=dashed]' if g < 0 else ""
            lines.append(f"  n{u} -> n{v}{style};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_graph(nl: Netlist) -> TimingGraph:
    cyc = find_cycle(nl)
    if cyc:
        raise CycleError(cyc)
    names = [NS_NAME] + list(nl.primary_inputs) + [g.name for g in nl.gates] + [NF_NAME]
    idx = {n: i for i, n in enumerate(names)}
    nf = len(names) - 1
    n_pi = len(nl.primary_inputs)

    edges = [(0, idx[p], -1) for p in nl.primary_inputs]
    for gi, g in enumerate(nl.gates):
        v = idx[g.name]
        for net in g.inputs:
            edges.append((idx[net], v, gi))
    observed = set(nl.primary_outputs)
    for net in nl.primary_outputs:
        edges.append((idx[net], nf, -1))

    has_fanout = [False] * len(names)
    for u, _, _ in edges:
        has_fanout[u] = True
    implicit = [names[i] for i in range(1, nf) if not has_fanout[i] and names[i] not in observed]
    for net in implicit:
        edges.append((idx[net], nf, -1))

    fanin = [[] for _ in names]
    fanout = [[] for _ in names]
    for u, v, _ in edges:
        fanin[v].append(u)
        fanout[u].append(v)
    driver = [-1] * len(names)
    gate_node = []
    for gi, g in enumerate(nl.gates):
        driver[idx[g.name]] = gi
        gate_node.append(idx[g.name])
    assert all(driver[1 + k] == -1 for k in range(n_pi))

    graph = TimingGraph(
        names=names,
        fanin=[tuple(sorted(f)) for f in fanin],
        fanout=[tuple(sorted(f)) for f in fanout],
        driver=driver,
        gate_node=gate_node,
        edges=edges,
        level=[0] * len(names),
        implicit_outputs=implicit,
    )
    graph.level = levelize(graph)
    return graph


def levelize(graph: TimingGraph) -> list:
    """ASAP longest-path levels: level(ns) = 0, level(v) = 1 + max level of fanins."""
    n = graph.n_nodes
    indeg = [len(f) for f in graph.fanin]
    level = [0] * n
    q = deque(i for i in range(n) if indeg[i] == 0)
    seen = 0
    while q:
        u = q.popleft()
        seen += 1
        for v in graph.fanout[u]:
            level[v] = max(level[v], level[u] + 1)
            indeg[v] -= 1
            if indeg[v] == 0:
                q.append(v)
    if seen != n:
        raise CycleError([graph.names[i] for i in range(n) if indeg[i] > 0])
    return level


def check_definition(graph: TimingGraph) -> None:
    """Assert the single-source/single-sink DAG properties."""
    sources = [i for i in range(graph.n_nodes) if not graph.fanin[i]]
    sinks = [i for i in range(graph.n_nodes) if not graph.fanout[i]]
    if sources != [graph.ns]:
        raise ValueError(f"expected a single source, found {sources}")
    if sinks != [graph.nf]:
        raise ValueError(f"expected a single sink, found {sinks}")
    for u, v, _ in graph.edges:
        if graph.level[v] <= graph.level[u]:
            raise ValueError(f"edge {u}->{v} violates level order")
