import pytest

from statsize import generators
from statsize.netlist_io import parse_bench
from statsize.timing_graph import NF_NAME, NS_NAME, CycleError, build_graph, check_definition, levelize


def test_single_nand_graph():
    g = build_graph(parse_bench("INPUT(1)\nINPUT(2)\nOUTPUT(3)\n3 = NAND(1, 2)"))
    assert g.names == [NS_NAME, "1", "2", "3", NF_NAME]
    assert sorted((u, v) for u, v, _ in g.edges) == [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]
    assert g.level == [0, 1, 1, 2, 3]


def test_chain_levels():
    g = build_graph(parse_bench(generators.chain(3)))
    # ns, a, c0, c1, c2, nf
    assert g.level == [0, 1, 2, 3, 4, 5]


def test_reconvergent_levels():
    text = "INPUT(a)\nOUTPUT(c)\nb1 = NOT(a)\nb2 = NOT(b1)\nd = NOT(a)\nc = NAND(b2, d)\n"
    g = build_graph(parse_bench(text))
    idx = g.index()
    assert g.level[idx["c"]] == 1 + g.level[idx["b2"]] == 4


def test_c432_definition(c432):
    g = build_graph(c432)
    check_definition(g)
    assert g.n_nodes == 1 + 36 + 171 + 1
    assert not g.implicit_outputs


def test_levels_respect_edges_on_corpus(c432):
    circuits = [c432] + [parse_bench(generators.random_dag(n, seed=s)) for n, s in ((60, 1), (150, 2))]
    for nl in circuits:
        g = build_graph(nl)
        check_definition(g)
        assert all(g.level[v] - g.level[u] >= 1 for u, v, _ in g.edges)
        order = g.topo_order()
        pos = {n: k for k, n in enumerate(order)}
        assert all(pos[u] < pos[v] for u, v, _ in g.edges)


def test_levelize_rejects_cycle(c17):
    g = build_graph(c17)
    # add a back edge by hand
    g.fanout = list(g.fanout)
    g.fanin = list(g.fanin)
    idx = g.index()
    a, b = idx["N1"], idx["N22"]   # N1 -> N10 -> N22, so N22 -> N1 closes a loop
    g.fanout[b] = g.fanout[b] + (a,)
    g.fanin[a] = g.fanin[a] + (b,)
    with pytest.raises(CycleError):
        levelize(g)


def test_dangling_net_tied_to_sink():
    g = build_graph(parse_bench("INPUT(a)\nOUTPUT(b)\nb = NOT(a)\nc = NOT(a)\n"))
    assert g.implicit_outputs == ["c"]
    check_definition(g)


def test_deterministic_and_dot(c17):
    g1, g2 = build_graph(c17), build_graph(c17)
    assert g1.edges == g2.edges and g1.names == g2.names
    dot = g1.to_dot()
    assert dot.startswith("digraph") and dot.count("->") == g1.n_edges
