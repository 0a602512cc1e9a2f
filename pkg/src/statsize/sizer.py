"""Sensitivity-driven gate sizing.

Three optimizers share one coordinate-descent loop:

* ``stat``  - exact most-sensitive-gate search with perturbation-front pruning,
* ``brute`` - the same sensitivities computed by propagating every candidate's
  perturbation through its whole fanout cone,
* ``det``   - classic nominal-delay sizing restricted to the critical path.

A *perturbation front* follows the effect of upsizing one gate level by level
toward the sink.  The largest percentile shift seen on the front bounds the
sink's shift from above, so a candidate whose bound falls below the best
sensitivity already completed can be dropped without finishing its
propagation.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .ssta_engine import OpCounter, SstaResult, TimingModel
from .stat_dist import DiscreteDist, delta_p, max_delta, percentile

log = logging.getLogger(__name__)

MODES = ("stat", "brute", "det")
# sensitivities at or below this are float noise around zero, not improvements
S_EPS = 1e-12


@dataclass
class SizerConfig:
    p: float = 0.99
    delta_w: float = 1.0
    max_iterations: int = 1000
    area_budget: Optional[float] = None   # allowed fractional area increase
    mode: str = "stat"
    w_max: float = 16.0
    verify: bool = False
    # True prunes on sm + bin_width/dw < Max_S, which never drops the true maximum.
    # False prunes on sm < Max_S: cheaper, and the pick is within bin_width/dw of it.
    prune_guard: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not self.delta_w > 0:
            raise ValueError("delta_w must be positive")


@dataclass
class FrontEntry:
    node: int
    arrival: Optional[DiscreteDist]   # None until computed
    delta: float
    fo_count: int


@dataclass
class PerturbationFront:
    gate: int
    a_prime_set: dict
    curr_prop_level: int
    sm: float = float("inf")
    complete: bool = False
    s_x: Optional[float] = None
    perturbed_delay: Optional[dict] = None
    steps: int = 0

    def delta_mx(self) -> Optional[float]:
        ds = [e.delta for e in self.a_prime_set.values() if e.arrival is not None]
        return max(ds) if ds else None


@dataclass
class SearchResult:
    gate: Optional[int]
    sensitivity: float
    op_count: int
    completed: int = 0
    pruned: int = 0
    sensitivities: Optional[dict] = None   # brute force only: gate -> S


# -- fronts -------------------------------------------------------------------

def _perturbed_delays(model: TimingModel, sizes: list, x: int, dw: float) -> dict:
    """Delay distributions of ``x`` and its fanin gates with ``x`` upsized by ``dw``."""
    saved = sizes[x]
    sizes[x] = saved + dw
    try:
        pert = {x: model.gate_delay_dist(x, sizes)}
        for y, _ in model.graph.fanin_gates(x):
            pert[y] = model.gate_delay_dist(y, sizes)
    finally:
        sizes[x] = saved
    return pert


def initialize_front(model: TimingModel, ssta: SstaResult, x: int, config: SizerConfig,
                     ops: OpCounter = None) -> PerturbationFront:
    g = model.graph
    xn = g.gate_node[x]
    front = PerturbationFront(gate=x, a_prime_set={}, curr_prop_level=0)
    front.perturbed_delay = _perturbed_delays(model, list(ssta.sizes), x, config.delta_w)
    for n in (xn,) + g.fanin[xn]:
        if n not in front.a_prime_set:
            front.a_prime_set[n] = FrontEntry(n, None, 0.0, len(g.fanout[n]))
    front.curr_prop_level = min(g.level[n] for n in front.a_prime_set)
    while front.curr_prop_level <= g.level[xn] and not front.complete:
        propagate_one_level(model, ssta, front, config, ops)
    # every perturbed edge delay has been consumed by now
    front.perturbed_delay = None
    return front


def propagate_one_level(model: TimingModel, ssta: SstaResult, front: PerturbationFront,
                        config: SizerConfig, ops: OpCounter = None) -> PerturbationFront:
    if front.complete:
        raise RuntimeError(f"front of gate {front.gate} already reached the sink")
    g = model.graph
    aset = front.a_prime_set
    level = front.curr_prop_level
    pert = front.perturbed_delay or {}
    base_arr, base_delay = ssta.arrival, ssta.delay

    def arrival_of(u):
        e = aset.get(u)
        return e.arrival if e is not None else base_arr[u]

    def delay_of(gi):
        d = pert.get(gi)
        return d if d is not None else base_delay[gi]

    prop_list = sorted(n for n, e in aset.items() if e.arrival is None and g.level[n] == level)
    for i in prop_list:
        new = model.node_arrival(i, arrival_of, delay_of, ops)
        for k in g.fanin[i]:
            ek = aset.get(k)
            if ek is not None:
                ek.fo_count -= 1
                if ek.fo_count == 0:
                    del aset[k]
        old = base_arr[i]
        if new.same_as(old):
            # identical to the unperturbed arrival: nothing downstream can change through i
            del aset[i]
            continue
        entry = aset[i]
        entry.arrival = new
        entry.delta = max_delta(old, new)
        for j in g.fanout[i]:
            if j not in aset:
                aset[j] = FrontEntry(j, None, 0.0, len(g.fanout[j]))
        if i == g.nf:
            front.s_x = delta_p(old, new, config.p) / config.delta_w
    front.curr_prop_level += 1
    front.steps += 1

    if front.s_x is not None:
        front.complete = True
        front.sm = front.s_x
    elif not aset:
        # dead perturbation: the sink is bit-identical to the unperturbed one
        front.complete = True
        front.s_x = 0.0
        front.sm = 0.0
    else:
        dm = front.delta_mx()
        front.sm = dm / config.delta_w if dm is not None else float("inf")
    return front


def candidate_gates(model: TimingModel, sizes: list, config: SizerConfig,
                    area_limit: float = None) -> list:
    out = []
    area = model.area(sizes) if area_limit is not None else 0.0
    for gi, w in enumerate(sizes):
        if w + config.delta_w > config.w_max + 1e-12:
            continue
        if area_limit is not None and \
                area + config.delta_w * model.cells[gi].ccell_min > area_limit * (1 + 1e-12):
            continue
        out.append(gi)
    return out


def find_best_gate_pruned(model: TimingModel, ssta: SstaResult, config: SizerConfig,
                          candidates=None) -> SearchResult:
    if candidates is None:
        candidates = candidate_gates(model, ssta.sizes, config)
    ops = OpCounter()
    guard = model.bin_width / config.delta_w if config.prune_guard else 0.0
    max_s, best = 0.0, None
    completed = 0

    def consider(f):
        nonlocal max_s, best, completed
        completed += 1
        if f.s_x > max_s or (f.s_x == max_s and best is not None and f.gate < best):
            max_s, best = f.s_x, f.gate

    fronts = {}
    heap = []
    for x in candidates:
        f = initialize_front(model, ssta, x, config, ops)
        if f.complete:
            consider(f)
        else:
            fronts[x] = f
            heap.append((-f.sm, x))
    heapq.heapify(heap)
    while heap:
        neg_sm, x = heapq.heappop(heap)
        f = fronts[x]
        if f.sm + guard < max_s:
            # the head has the largest bound, so every remaining front is pruned too
            heap.append((neg_sm, x))
            break
        propagate_one_level(model, ssta, f, config, ops)
        if f.complete:
            consider(f)
            del fronts[x]
        else:
            heapq.heappush(heap, (-f.sm, x))
    return SearchResult(gate=best, sensitivity=max_s, op_count=ops.total,
                        completed=completed, pruned=len(heap))


def perturbation_cone(model: TimingModel, x: int) -> list:
    """Nodes downstream of gate ``x`` and of the gates driving it, in level order."""
    cache = model.__dict__.setdefault("_cone_cache", {})
    if x in cache:
        return cache[x]
    g = model.graph
    seeds = [g.gate_node[x]] + [g.gate_node[y] for y, _ in g.fanin_gates(x)]
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        u = stack.pop()
        for v in g.fanout[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    cone = sorted(seen, key=lambda i: (g.level[i], i))
    cache[x] = cone
    return cone


def gate_sensitivity_brute(model: TimingModel, ssta: SstaResult, x: int, config: SizerConfig,
                           ops: OpCounter = None) -> float:
    pert_delay = _perturbed_delays(model, list(ssta.sizes), x, config.delta_w)
    base = ssta.arrival
    pert_arr = {}

    def arrival_of(u):
        a = pert_arr.get(u)
        return a if a is not None else base[u]

    def delay_of(gi):
        d = pert_delay.get(gi)
        return d if d is not None else ssta.delay[gi]

    g = model.graph
    for i in perturbation_cone(model, x):
        gi = g.driver[i]
        if gi not in pert_delay and all(u not in pert_arr for u in g.fanin[i]):
            # identical inputs give a bit-identical result; count the ops, skip the work
            if ops is not None and g.fanin[i] and i not in model._pi_dist:
                n = len(g.fanin[i])
                ops.conv += n if gi >= 0 else 0
                ops.max += n - 1
            continue
        a = model.node_arrival(i, arrival_of, delay_of, ops)
        if a is not base[i] and not a.same_as(base[i]):
            pert_arr[i] = a
    nf = g.nf
    return delta_p(base[nf], arrival_of(nf), config.p) / config.delta_w


def find_best_gate_brute(model: TimingModel, ssta: SstaResult, config: SizerConfig,
                         candidates=None) -> SearchResult:
    if candidates is None:
        candidates = candidate_gates(model, ssta.sizes, config)
    ops = OpCounter()
    sens = {}
    best, best_s = None, None
    for x in candidates:
        s = gate_sensitivity_brute(model, ssta, x, config, ops)
        sens[x] = s
        if best_s is None or s > best_s:
            best, best_s = x, s
    if best_s is None:
        best_s = 0.0
    return SearchResult(gate=best, sensitivity=best_s, op_count=ops.total,
                        completed=len(candidates), sensitivities=sens)


# -- optimizers ----------------------------------------------------------------

@dataclass
class IterationRecord:
    iteration: int
    gate: Optional[str]
    sensitivity: Optional[float]
    delta_w: float
    area: float
    t99: float
    op_count: int = 0
    brute_op_count: Optional[int] = None
    completed: Optional[int] = None
    pruned: Optional[int] = None
    nominal_delay: Optional[float] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SizerRun:
    mode: str
    p: float
    records: list = field(default_factory=list)
    final_sizes: dict = field(default_factory=dict)
    stop_reason: str = ""
    mismatches: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def op_count(self) -> int:
        return sum(r.op_count for r in self.records)

    @property
    def brute_op_count(self) -> Optional[int]:
        vals = [r.brute_op_count for r in self.records[1:]]
        if not vals or any(v is None for v in vals):
            return None
        return sum(vals)

    def curve(self) -> list:
        return [(r.iteration, r.area, r.t99) for r in self.records]

    def curve_csv(self) -> str:
        rows = ["iteration,area,t99"]
        rows += [f"{i},{a:.12g},{t:.12g}" for i, a, t in self.curve()]
        return "\n".join(rows) + "\n"

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "mode": self.mode,
            "p": self.p,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "op_count": self.op_count,
            "brute_op_count": self.brute_op_count,
            "mismatches": self.mismatches,
            "records": [r.as_dict() for r in self.records],
            "final_sizes": self.final_sizes,
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d


def _area_limit(model, sizes, config):
    if config.area_budget is None:
        return None
    return model.area(sizes) * (1.0 + config.area_budget)


def statistical_gate_sizing(model: TimingModel, config: SizerConfig, sizes=None,
                            callback=None) -> SizerRun:
    """Coordinate descent on the p-percentile of the SSTA sink distribution."""
    t0 = time.perf_counter()
    sizes = model.sizes_list(sizes)
    limit = _area_limit(model, sizes, config)
    run = SizerRun(mode=config.mode, p=config.p)
    ssta = model.ssta(sizes)
    run.records.append(IterationRecord(0, None, None, 0.0, model.area(sizes),
                                       _t(ssta, config.p)))
    run.stop_reason = "max_iterations"
    for it in range(1, config.max_iterations + 1):
        cands = candidate_gates(model, sizes, config, limit)
        if not cands:
            run.stop_reason = "no_candidates"
            break
        if config.mode == "brute":
            res = find_best_gate_brute(model, ssta, config, cands)
            brute_ops = res.op_count
        else:
            res = find_best_gate_pruned(model, ssta, config, cands)
            brute_ops = None
            if config.verify:
                ref = find_best_gate_brute(model, ssta, config, cands)
                brute_ops = ref.op_count
                problem = compare_searches(res, ref, model.bin_width / config.delta_w)
                if problem:
                    run.mismatches.append({"iteration": it, **problem})
                    log.warning("iteration %d: pruned/brute mismatch %s", it, problem)
        if res.gate is None or not res.sensitivity > S_EPS:
            run.stop_reason = "no_positive_sensitivity"
            break
        sizes[res.gate] += config.delta_w
        ssta = model.ssta(sizes)
        rec = IterationRecord(it, model.gate_names[res.gate], res.sensitivity, config.delta_w,
                              model.area(sizes), _t(ssta, config.p), res.op_count, brute_ops,
                              res.completed, res.pruned)
        run.records.append(rec)
        if callback:
            callback(rec)
    run.final_sizes = model.sizes_dict(sizes)
    run.runtime = time.perf_counter() - t0
    return run


def compare_searches(pruned: SearchResult, brute: SearchResult, tol: float) -> Optional[dict]:
    """Describe a disagreement between the pruned and brute-force searches, if any.

    Gates may differ only when their brute-force sensitivities tie within ``tol``;
    a non-positive result counts as a sensitivity of zero.
    """
    b_best = brute.sensitivity if brute.gate is not None and brute.sensitivity > S_EPS else 0.0
    p_pos = pruned.gate is not None and pruned.sensitivity > S_EPS
    p_best = pruned.sensitivity if p_pos else 0.0
    problem = {"pruned_gate": pruned.gate, "brute_gate": brute.gate,
               "pruned_s": pruned.sensitivity, "brute_s": brute.sensitivity}
    if abs(p_best - b_best) > tol:
        return problem
    if p_pos and abs(brute.sensitivities.get(pruned.gate, float("-inf")) - b_best) > tol:
        return problem
    return None


def deterministic_sizing(model: TimingModel, config: SizerConfig, sizes=None,
                         callback=None) -> SizerRun:
    """Coordinate descent on nominal circuit delay over critical-path gates.

    The p-percentile of the SSTA distribution is logged for every solution
    but plays no part in the choice of gate.
    """
    t0 = time.perf_counter()
    sizes = model.sizes_list(sizes)
    limit = _area_limit(model, sizes, config)
    run = SizerRun(mode="det", p=config.p)
    sta = model.sta(sizes)
    run.records.append(IterationRecord(0, None, None, 0.0, model.area(sizes),
                                       _t(model.ssta(sizes), config.p),
                                       nominal_delay=sta.delay))
    run.stop_reason = "max_iterations"
    for it in range(1, config.max_iterations + 1):
        allowed = set(candidate_gates(model, sizes, config, limit))
        if not allowed:
            run.stop_reason = "no_candidates"
            break
        best, best_s = None, 0.0
        for gi in sorted(set(sta.critical_gates(model.graph)) & allowed):
            sizes[gi] += config.delta_w
            d = model.sta(sizes).delay
            sizes[gi] -= config.delta_w
            s = (sta.delay - d) / config.delta_w
            if s > best_s + S_EPS:
                best, best_s = gi, s
        if best is None:
            run.stop_reason = "no_positive_sensitivity"
            break
        sizes[best] += config.delta_w
        sta = model.sta(sizes)
        rec = IterationRecord(it, model.gate_names[best], best_s, config.delta_w,
                              model.area(sizes), _t(model.ssta(sizes), config.p),
                              nominal_delay=sta.delay)
        run.records.append(rec)
        if callback:
            callback(rec)
    run.final_sizes = model.sizes_dict(sizes)
    run.runtime = time.perf_counter() - t0
    return run


def optimize(model: TimingModel, config: SizerConfig, sizes=None, callback=None) -> SizerRun:
    if config.mode == "det":
        return deterministic_sizing(model, config, sizes, callback)
    return statistical_gate_sizing(model, config, sizes, callback)


def _t(ssta: SstaResult, p: float) -> float:
    return percentile(ssta.sink, p)
