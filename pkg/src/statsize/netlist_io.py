"""ISCAS-style ``.bench`` netlists: parsing, writing, loads and area."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

_IO_RE = re.compile(r"^(INPUT|OUTPUT)\s*\(\s*([^()\s]+)\s*\)$", re.IGNORECASE)
_GATE_RE = re.compile(r"^([^=\s]+)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)$")

FUNCTIONS = ("AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF")
_ALIASES = {"BUFF": "BUF", "INV": "NOT"}
_SEQUENTIAL = {"DFF", "LATCH", "DFFR", "DFFS"}
# function -> (2-input function used inside a decomposition tree, root function)
_TREE = {"AND": ("AND", "AND"), "NAND": ("AND", "NAND"), "OR": ("OR", "OR"),
         "NOR": ("OR", "NOR"), "XOR": ("XOR", "XOR"), "XNOR": ("XOR", "XNOR")}
_SINGLE = {"AND": "BUF", "OR": "BUF", "XOR": "BUF", "NAND": "NOT", "NOR": "NOT", "XNOR": "NOT"}


class BenchParseError(ValueError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


@dataclass(frozen=True)
class Gate:
    name: str            # output net; doubles as the gate id
    func: str
    inputs: tuple

    @property
    def cell(self) -> str:
        return cell_name(self.func, len(self.inputs))


@dataclass
class Netlist:
    primary_inputs: list
    primary_outputs: list
    gates: list
    sizes: dict = field(default_factory=dict)
    name: str = ""
    transforms: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self.sizes.setdefault(g.name, 1.0)

    def gate_index(self) -> dict:
        return {g.name: i for i, g in enumerate(self.gates)}

    def structure(self):
        """Everything except sizes and bookkeeping, for round-trip comparisons."""
        return (tuple(self.primary_inputs), tuple(self.primary_outputs), tuple(self.gates))


def cell_name(func: str, arity: int) -> str:
    if func in ("NOT", "BUF"):
        return func
    return f"{func}{arity}"


def _split_args(s):
    return [a.strip() for a in s.split(",") if a.strip()]


def parse_bench(text: str, max_arity: int = 4, name: str = "") -> Netlist:
    pis, pos, gates = [], [], []
    drivers = {}             # net -> line number of its driver
    uses = {}                # net -> first line using it
    transforms = []
    fresh = defaultdict(int)

    def new_net(base):
        fresh[base] += 1
        return f"{base}__d{fresh[base]}"

    def add_gate(out, func, ins, lineno):
        if out in drivers:
            raise BenchParseError(f"duplicate driver for net {out}", lineno)
        drivers[out] = lineno
        gates.append(Gate(out, func, tuple(ins)))

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _IO_RE.match(line)
        if m:
            kind, net = m.group(1).upper(), m.group(2)
            if kind == "INPUT":
                if net in drivers:
                    raise BenchParseError(f"duplicate driver for net {net}", lineno)
                drivers[net] = lineno
                pis.append(net)
            else:
                pos.append(net)
                uses.setdefault(net, lineno)
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise BenchParseError(f"cannot parse {raw.strip()!r}", lineno)
        out, func, args = m.group(1), m.group(2).upper(), _split_args(m.group(3))
        func = _ALIASES.get(func, func)
        if func in _SEQUENTIAL:
            raise BenchParseError(f"sequential element {func} not supported", lineno)
        if func not in FUNCTIONS:
            raise BenchParseError(f"unknown function {m.group(2)}", lineno)
        if not args:
            raise BenchParseError(f"gate {out} has no inputs", lineno)
        for a in args:
            uses.setdefault(a, lineno)
        if func in ("NOT", "BUF"):
            if len(args) != 1:
                raise BenchParseError(f"{func} takes one input, got {len(args)}", lineno)
            add_gate(out, func, args, lineno)
        elif len(args) == 1:
            add_gate(out, _SINGLE[func], args, lineno)
            transforms.append(f"{out}: 1-input {func} mapped to {_SINGLE[func]}")
        elif len(args) <= max_arity:
            add_gate(out, func, args, lineno)
        else:
            inner, root = _TREE[func]
            layer = list(args)
            while len(layer) > 2:
                nxt = []
                for i in range(0, len(layer) - 1, 2):
                    net = new_net(out)
                    add_gate(net, inner, layer[i:i + 2], lineno)
                    nxt.append(net)
                if len(layer) % 2:
                    nxt.append(layer[-1])
                layer = nxt
            add_gate(out, root, layer, lineno)
            transforms.append(f"{out}: {len(args)}-input {func} decomposed into 2-input tree")

    for net, lineno in uses.items():
        if net not in drivers:
            raise BenchParseError(f"undriven net {net}", lineno)
    nl = Netlist(pis, pos, gates, name=name, transforms=transforms)
    cyc = find_cycle(nl)
    if cyc:
        raise BenchParseError(f"combinational cycle through nets {cyc}")
    return nl


def find_cycle(nl: Netlist):
    """Return the nets of one combinational cycle, or None when acyclic."""
    driver = {g.name: g for g in nl.gates}
    state = {}
    for g in nl.gates:
        if g.name in state:
            continue
        stack = [(g.name, iter(driver[g.name].inputs))]
        state[g.name] = 1
        path = [g.name]
        while stack:
            net, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[net] = 2
                stack.pop()
                path.pop()
                continue
            if nxt not in driver:
                continue
            s = state.get(nxt)
            if s == 1:
                return path[path.index(nxt):] + [nxt]
            if s is None:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(driver[nxt].inputs)))
    return None


def read_bench(path, max_arity: int = 4) -> Netlist:
    path = Path(path)
    return parse_bench(path.read_text(), max_arity=max_arity, name=path.stem)


def write_bench(nl: Netlist) -> str:
    lines = []
    if nl.name:
        lines.append(f"# {nl.name}")
    lines.append(f"# {len(nl.primary_inputs)} inputs, {len(nl.primary_outputs)} outputs, "
                 f"{len(nl.gates)} gates")
    lines += [f"INPUT({n})" for n in nl.primary_inputs]
    lines += [f"OUTPUT({n})" for n in nl.primary_outputs]
    lines += [f"{g.name} = {g.func}({', '.join(g.inputs)})" for g in nl.gates]
    return "\n".join(lines) + "\n"


def net_readers(nl: Netlist) -> dict:
    """Net -> gate names reading it, one entry per input pin, in netlist order."""
    readers = {n: [] for n in nl.primary_inputs}
    for g in nl.gates:
        readers[g.name] = []
    for g in nl.gates:
        for n in g.inputs:
            readers[n].append(g.name)
    return readers


def net_load(readers, cells, sizes, is_po: bool, po_load: float) -> float:
    """Load of one net; summation order is fixed so results are reproducible bit for bit."""
    load = 0.0
    for gname in readers:
        load += sizes[gname] * cells[gname].cin_min
    if is_po:
        load += po_load
    return load


def compute_loads(nl: Netlist, library, sizes=None, po_load=None) -> dict:
    """Capacitive load on every net: fanout pin caps plus the primary-output load."""
    sizes = nl.sizes if sizes is None else sizes
    if po_load is None:
        po_load = library.default_po_load()
    cells = {g.name: library[g.cell] for g in nl.gates}
    pos = set(nl.primary_outputs)
    return {n: net_load(r, cells, sizes, n in pos, po_load)
            for n, r in net_readers(nl).items()}


def total_area(nl: Netlist, library, sizes=None) -> float:
    sizes = nl.sizes if sizes is None else sizes
    return float(sum(sizes[g.name] * library[g.cell].ccell_min for g in nl.gates))


def check_cells(nl: Netlist, library) -> None:
    missing = sorted({g.cell for g in nl.gates if g.cell not in library})
    if missing:
        raise BenchParseError(f"cells missing from library: {', '.join(missing)}")
