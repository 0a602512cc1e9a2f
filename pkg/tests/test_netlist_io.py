from pathlib import Path

import pytest

from statsize.netlist_io import (
    BenchParseError,
    compute_loads,
    parse_bench,
    read_bench,
    total_area,
    write_bench,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "statsize" / "data"


def test_smallest_netlist():
    nl = parse_bench("INPUT(1)\nINPUT(2)\nOUTPUT(3)\n3 = NAND(1, 2)")
    assert nl.primary_inputs == ["1", "2"]
    assert nl.primary_outputs == ["3"]
    assert len(nl.gates) == 1 and nl.gates[0].cell == "NAND2"
    assert nl.sizes == {"3": 1.0}


def test_undriven_net():
    with pytest.raises(BenchParseError, match="undriven net 9") as e:
        parse_bench("INPUT(1)\nOUTPUT(3)\n3 = NAND(1, 9)\n")
    assert e.value.lineno == 3


def test_parse_errors():
    with pytest.raises(BenchParseError, match="unknown function"):
        parse_bench("INPUT(a)\nOUTPUT(b)\nb = MUX(a, a)\n")
    with pytest.raises(BenchParseError, match="duplicate driver"):
        parse_bench("INPUT(a)\nOUTPUT(b)\nb = NOT(a)\nb = BUF(a)\n")
    with pytest.raises(BenchParseError, match="cycle"):
        parse_bench("INPUT(a)\nOUTPUT(c)\nb = NAND(a, c)\nc = NOT(b)\n")
    with pytest.raises(BenchParseError, match="sequential"):
        parse_bench("INPUT(a)\nOUTPUT(q)\nq = DFF(a)\n")
    with pytest.raises(BenchParseError, match="line 2"):
        parse_bench("INPUT(a)\nthis is not bench\n")


def test_aliases_and_single_input():
    nl = parse_bench("INPUT(a)\nOUTPUT(d)\nb = BUFF(a)\nc = NAND(b)\nd = INV(c)\n")
    assert [g.func for g in nl.gates] == ["BUF", "NOT", "NOT"]


def test_wide_gate_decomposition():
    ins = [f"i{k}" for k in range(9)]
    text = "".join(f"INPUT({i})\n" for i in ins) + "OUTPUT(y)\ny = NAND(" + ", ".join(ins) + ")\n"
    nl = parse_bench(text)
    assert nl.transforms
    assert all(len(g.inputs) == 2 for g in nl.gates)
    root = [g for g in nl.gates if g.name == "y"][0]
    assert root.func == "NAND"
    assert all(g.func == "AND" for g in nl.gates if g.name != "y")
    # the tree consumes every input exactly once
    used = [n for g in nl.gates for n in g.inputs if n.startswith("i")]
    assert sorted(used) == sorted(ins)


@pytest.mark.parametrize("path", sorted(DATA.glob("*.bench")), ids=lambda p: p.name)
def test_roundtrip_shipped(path):
    nl = read_bench(path)
    again = parse_bench(write_bench(nl))
    assert again.structure() == nl.structure()


def test_c432_counts(c432):
    assert len(c432.primary_inputs) == 36
    assert len(c432.primary_outputs) == 7
    assert len(c432.gates) == 171


def test_loads():
    text = "INPUT(a)\nOUTPUT(x)\nOUTPUT(y)\nOUTPUT(z)\nx = NOT(a)\ny = NOT(a)\nz = NOT(x)\n"
    from statsize.cell_library import load_library
    lib = load_library("cell NOT dint=0.1 k=1 ccell=2 cin=1 pins=1\n")
    nl = parse_bench(text)
    loads = compute_loads(nl, lib, po_load=0.5)
    assert loads["a"] == 2.0
    assert loads["y"] == 0.5
    assert loads["x"] == 1.5
    sizes = dict(nl.sizes, x=3.0)
    assert compute_loads(nl, lib, sizes, po_load=0.5)["a"] == 4.0


def test_loads_linear_in_size(c432, library):
    base = compute_loads(c432, library)
    g = c432.gates[40]
    sizes = dict(c432.sizes)
    sizes[g.name] = 2.0
    new = compute_loads(c432, library, sizes)
    cin = library[g.cell].cin_min
    for net in set(g.inputs):
        pins = g.inputs.count(net)
        assert new[net] == pytest.approx(base[net] + pins * cin)
    changed = {n for n in base if new[n] != base[n]}
    assert changed == set(g.inputs)


def test_total_area():
    from statsize.cell_library import load_library
    lib = load_library("cell NOT dint=0.1 k=1 ccell=2 cin=1 pins=1\n")
    nl = parse_bench("INPUT(a)\nOUTPUT(d)\nb = NOT(a)\nc = NOT(b)\nd = NOT(c)\n")
    assert total_area(nl, lib) == 6.0
    assert total_area(nl, lib, dict(nl.sizes, c=2.0)) == 8.0
