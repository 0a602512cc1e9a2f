"""Synthetic ``.bench`` circuits used as a test corpus.

All generators are deterministic functions of their arguments and return
``.bench`` text, so the circuits can be written to disk and fed to the CLI.
"""

from __future__ import annotations

import numpy as np

_FUNCS = [("NAND", 2), ("NOR", 2), ("NAND", 3), ("AND", 2), ("OR", 2),
          ("NOT", 1), ("XOR", 2), ("NAND", 4), ("NOR", 3), ("AND", 3)]
_WEIGHTS = np.array([30, 14, 8, 8, 6, 14, 6, 4, 5, 5], dtype=float)


def _emit(name, pis, pos, gates):
    lines = [f"# {name}"]
    lines += [f"INPUT({p})" for p in pis]
    lines += [f"OUTPUT({p})" for p in pos]
    lines += [f"{o} = {f}({', '.join(ins)})" for o, f, ins in gates]
    return "\n".join(lines) + "\n"


def random_dag(n_gates: int, seed: int = 0, n_inputs: int = None, window: int = 24) -> str:
    """Random combinational DAG with locality-biased fanin selection.

    Fanins are drawn mostly from the ``window`` most recent nets so the logic
    has realistic depth; every primary input is used and every net without
    fanout becomes a primary output.
    """
    rng = np.random.default_rng(seed)
    if n_inputs is None:
        n_inputs = max(4, int(round(2 * np.sqrt(n_gates))))
    pis = [f"i{k}" for k in range(n_inputs)]
    nets = list(pis)
    unused_pis = list(pis)
    used = set()
    gates = []
    p = _WEIGHTS / _WEIGHTS.sum()
    for k in range(n_gates):
        func, arity = _FUNCS[rng.choice(len(_FUNCS), p=p)]
        ins = []
        while unused_pis and len(ins) < arity:
            ins.append(unused_pis.pop(0))
        while len(ins) < arity:
            if rng.random() < 0.8:
                lo = max(0, len(nets) - window)
                cand = nets[lo + rng.integers(len(nets) - lo)]
            else:
                cand = nets[rng.integers(len(nets))]
            if cand not in ins:
                ins.append(cand)
            elif len(set(nets)) <= len(ins):
                break
        out = f"g{k}"
        gates.append((out, func, ins))
        used.update(ins)
        nets.append(out)
    pos = [g[0] for g in gates if g[0] not in used]
    return _emit(f"random_dag n={n_gates} seed={seed}", pis, pos, gates)


def chain(n: int, func: str = "NOT") -> str:
    """``n`` single-input gates in series."""
    gates = []
    prev = "a"
    for k in range(n):
        gates.append((f"c{k}", func, [prev]))
        prev = f"c{k}"
    return _emit(f"chain n={n}", ["a"], [prev], gates)


def tree(depth: int, func: str = "NAND") -> str:
    """Complete binary tree of 2-input gates: fanout one everywhere, no reconvergence."""
    leaves = [f"i{k}" for k in range(2 ** depth)]
    layer = list(leaves)
    gates = []
    n = 0
    while len(layer) > 1:
        nxt = []
        for a, b in zip(layer[0::2], layer[1::2]):
            out = f"t{n}"
            n += 1
            gates.append((out, func, [a, b]))
            nxt.append(out)
        layer = nxt
    return _emit(f"tree depth={depth}", leaves, layer, gates)


def two_path(n_slow: int = 3, fanout_slow: int = 8, n_fast: int = 14) -> str:
    """Two reconverging paths with equal-ish nominal delay but unequal spread.

    The slow path has a few inverters each driving ``fanout_slow`` side loads,
    so its delay is concentrated in a handful of large (high-variance) edge
    delays.  The fast path is a long chain of lightly loaded inverters whose
    independent variations average out.  Nominal sizing equalizes the two
    means and then stalls on the tie; the p-percentile objective instead keeps
    shortening the high-variance path.
    """
    gates, side = [], []
    prev = "a"
    for s in range(n_slow):
        out = f"s{s}"
        gates.append((out, "NOT", [prev]))
        for k in range(fanout_slow):
            gates.append((f"{out}_l{k}", "NOT", [out]))
            side.append(f"{out}_l{k}")
        prev = out
    slow_end = prev
    prev = "b"
    for s in range(n_fast):
        gates.append((f"f{s}", "NOT", [prev]))
        prev = f"f{s}"
    gates.append(("y", "NAND", [slow_end, prev]))
    return _emit(f"two_path slow={n_slow}x{fanout_slow} fast={n_fast}", ["a", "b"],
                 ["y"] + side, gates)
