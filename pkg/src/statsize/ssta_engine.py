"""Block-based SSTA and deterministic STA over a :class:`TimingGraph`."""

from __future__ import annotations

from dataclasses import dataclass

from .cell_library import VariationModel, nominal_delay, truncated_gaussian
from .netlist_io import Netlist, check_cells
from .stat_dist import DiscreteDist, convolve, percentile, point_mass, stat_max
from .timing_graph import TimingGraph, build_graph


class OpCounter:
    """Counts elementary distribution operations (convolutions and maxima)."""

    __slots__ = ("conv", "max")

    def __init__(self):
        self.conv = 0
        self.max = 0

    @property
    def total(self) -> int:
        return self.conv + self.max


class TimingModel:
    """A netlist bound to a library, variation model and time grid.

    Sizes are handled as lists indexed by gate position in the netlist.
    """

    def __init__(self, netlist: Netlist, library, vm: VariationModel = None,
                 bin_width: float = None, po_load: float = None,
                 pi_arrival: dict = None, graph: TimingGraph = None):
        check_cells(netlist, library)
        self.netlist = netlist
        self.library = library
        self.vm = vm or VariationModel()
        self.bin_width = bin_width or library.default_bin_width()
        self.po_load = library.default_po_load() if po_load is None else po_load
        self.graph = graph or build_graph(netlist)
        g = self.graph
        self.cells = [library[gate.cell] for gate in netlist.gates]
        self.gate_names = [gate.name for gate in netlist.gates]
        # node -> reading gates, one entry per pin, netlist order
        self.readers = [[] for _ in range(g.n_nodes)]
        idx = g.index()
        for gi, gate in enumerate(netlist.gates):
            for net in gate.inputs:
                self.readers[idx[net]].append(gi)
        self.is_po = [False] * g.n_nodes
        for net in netlist.primary_outputs:
            self.is_po[idx[net]] = True
        pi_arrival = pi_arrival or {}
        self.pi_time = {idx[n]: float(pi_arrival.get(n, 0.0)) for n in netlist.primary_inputs}
        self._pi_dist = {i: point_mass(t, self.bin_width) for i, t in self.pi_time.items()}
        self._zero = point_mass(0.0, self.bin_width)

    # sizes -------------------------------------------------------------
    def sizes_list(self, sizes=None) -> list:
        sizes = self.netlist.sizes if sizes is None else sizes
        if isinstance(sizes, dict):
            return [float(sizes[n]) for n in self.gate_names]
        return [float(w) for w in sizes]

    def sizes_dict(self, sizes) -> dict:
        return dict(zip(self.gate_names, sizes))

    def area(self, sizes) -> float:
        total = 0.0
        for w, c in zip(sizes, self.cells):
            total += w * c.ccell_min
        return total

    # loads and delays ----------------------------------------------------
    def net_load(self, node: int, sizes) -> float:
        load = 0.0
        for gi in self.readers[node]:
            load += sizes[gi] * self.cells[gi].cin_min
        if self.is_po[node]:
            load += self.po_load
        return load

    def loads(self, sizes) -> list:
        return [self.net_load(i, sizes) for i in range(self.graph.n_nodes)]

    def nominal_gate_delay(self, gi: int, sizes, load: float = None) -> float:
        if load is None:
            load = self.net_load(self.graph.gate_node[gi], sizes)
        return nominal_delay(self.cells[gi], sizes[gi], load)

    def gate_delay_dist(self, gi: int, sizes, load: float = None) -> DiscreteDist:
        return truncated_gaussian(self.nominal_gate_delay(gi, sizes, load), self.vm, self.bin_width)

    def delay_dists(self, sizes) -> list:
        return [self.gate_delay_dist(gi, sizes) for gi in range(len(self.cells))]

    # propagation ---------------------------------------------------------
    def node_arrival(self, i: int, arrival_of, delay_of, ops: OpCounter = None) -> DiscreteDist:
        """Arrival at node ``i`` from its fanins: convolve each with the edge delay,
        then fold with the statistical max in ascending fanin order."""
        if i in self._pi_dist:
            return self._pi_dist[i]
        fanin = self.graph.fanin[i]
        if not fanin:
            return self._zero
        gi = self.graph.driver[i]
        d = delay_of(gi) if gi >= 0 else None
        acc = None
        for u in fanin:
            a = arrival_of(u)
            if d is not None:
                a = convolve(a, d)
                if ops is not None:
                    ops.conv += 1
            if acc is None:
                acc = a
            else:
                acc = stat_max(acc, a)
                if ops is not None:
                    ops.max += 1
        return acc

    def ssta(self, sizes=None, ops: OpCounter = None) -> "SstaResult":
        sizes = self.sizes_list(sizes)
        delays = self.delay_dists(sizes)
        arrival = [None] * self.graph.n_nodes
        for i in self.graph.topo_order():
            arrival[i] = self.node_arrival(i, arrival.__getitem__, delays.__getitem__, ops)
        return SstaResult(arrival=arrival, delay=delays, sizes=list(sizes), bin_width=self.bin_width)

    def sta(self, sizes=None):
        sizes = self.sizes_list(sizes)
        return deterministic_sta_model(self, sizes)


@dataclass
class SstaResult:
    arrival: list        # node -> DiscreteDist
    delay: list          # gate -> DiscreteDist
    sizes: list
    bin_width: float

    @property
    def sink(self) -> DiscreteDist:
        return self.arrival[-1]


def run_ssta(graph, netlist, library, sizes, vm, bin_width, po_load=None) -> SstaResult:
    model = TimingModel(netlist, library, vm, bin_width, po_load, graph=graph)
    return model.ssta(sizes)


def objective(result: SstaResult, p: float = 0.99) -> float:
    return percentile(result.sink, p)


@dataclass
class StaResult:
    arrival: list         # node -> nominal arrival time
    critical_path: list   # node ids from ns to nf
    delay: float

    def critical_gates(self, graph: TimingGraph) -> list:
        return [graph.driver[i] for i in self.critical_path if graph.driver[i] >= 0]


def deterministic_sta_model(model: TimingModel, sizes) -> StaResult:
    g = model.graph
    gd = [model.nominal_gate_delay(gi, sizes) for gi in range(len(model.cells))]
    arr = [0.0] * g.n_nodes
    for i in g.topo_order():
        if i in model.pi_time:
            arr[i] = model.pi_time[i]
            continue
        if not g.fanin[i]:
            continue
        d = gd[g.driver[i]] if g.driver[i] >= 0 else 0.0
        arr[i] = max(arr[u] for u in g.fanin[i]) + d
    path = [g.nf]
    while g.fanin[path[-1]]:
        # fanins are ascending, so max() keeps the lowest id on ties
        path.append(max(g.fanin[path[-1]], key=lambda u: arr[u]))
    path.reverse()
    return StaResult(arrival=arr, critical_path=path, delay=arr[g.nf])


def deterministic_sta(graph, netlist, library, sizes, po_load=None) -> StaResult:
    model = TimingModel(netlist, library, po_load=po_load, graph=graph)
    return deterministic_sta_model(model, model.sizes_list(sizes))
