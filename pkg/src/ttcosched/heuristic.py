"""Three-level constructive scheduler.

Activities are inserted one at a time in priority order, each placed by a
sub-model that minimises the sum of its job start times over the admissible
start-time domains left by the already-scheduled set.  When an activity does
not fit, level 1 unschedules a victim and retries; level 2 co-schedules the
two repeat offenders as a pair; level 3 restarts from an almost-empty
schedule keeping only previously level-3-scheduled activities and the pair's
predecessors.  A pair may enter level 3 only once, which bounds the loop.
"""

from __future__ import annotations

import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from .intervals import IntervalSet
from .model import DerivedBounds, Instance, derive_bounds
from .search import INCUMBENT, OPTIMAL, Engine
from .validation import Schedule, validate


@dataclass
class HeuristicConfig:
    # Two-period job windows match the solver's; the literal one-period
    # initialisation is kept for comparison runs.
    two_period_domains: bool = True
    debug_domains: bool = False
    pair_node_limit: int = 100_000
    iteration_limit_factor: int = 50


@dataclass
class HeuristicStats:
    level1: int = 0
    level2: int = 0
    level3: int = 0
    unschedules: int = 0
    wall: float = 0.0
    status: str = "ok"


class DomainStore:
    """Admissible start-time domains derived from the scheduled set.

    Keeps one sorted occupancy list per resource plus the scheduled start
    vectors; per-activity domains are computed on demand, so inserting or
    removing an activity costs only the occupancy-list edit.
    """

    def __init__(self, instance: Instance, bounds: DerivedBounds,
                 config: HeuristicConfig | None = None):
        self.instance = instance
        self.bounds = bounds
        self.config = config or HeuristicConfig()
        self.sched: dict[int, tuple[int, ...]] = {}
        # per resource: parallel sorted lists of (start, end, act)
        self._occ: dict[int, list[tuple[int, int, int]]] = {
            r: [] for r in range(instance.platform.resources)}

    def insert(self, act: int, starts) -> None:
        a = self.instance.activities[act]
        self.sched[act] = tuple(starts)
        occ = self._occ[a.resource]
        for s in starts:
            row = (s, s + a.exec_time, act)
            occ.insert(bisect_left(occ, row), row)

    def remove(self, acts) -> None:
        acts = set(acts)
        for act in acts:
            if act not in self.sched:
                continue
            a = self.instance.activities[act]
            occ = self._occ[a.resource]
            self._occ[a.resource] = [row for row in occ if row[2] != act]
            del self.sched[act]

    def window(self, act: int, job: int) -> tuple[int, int]:
        """Initial admissible interval of job ``job`` (1-based)."""
        a = self.instance.activities[act]
        tb = self.bounds.before[act]
        ta = self.bounds.after[act]
        lo = (job - 1) * a.period + tb
        if self.config.two_period_domains:
            hi = (job + 1) * a.period - ta - a.exec_time - 1
        else:
            hi = job * a.period - ta - a.exec_time - 1
        return lo, hi

    @staticmethod
    def _collect(forb, spans, lo, hi, e_self: int, shift: int, max_exec: int):
        """Append forbidden start ranges from occupied ``spans`` (shifted)."""
        if not spans:
            return
        # span (s, end) forbids starts in [s - e_self + 1, end - 1]; spans are
        # sorted by start and end - s <= max_exec, so begin just left of lo.
        k = bisect_left(spans, (lo - shift - max_exec, 0, 0))
        for s, end, _act in spans[k:]:
            s += shift
            end += shift
            if end - 1 < lo:
                continue
            if s - e_self + 1 > hi:
                break
            forb.append((s - e_self + 1, end - 1))

    @staticmethod
    def _complement(lo: int, hi: int, forb) -> IntervalSet:
        """Admissible set [lo, hi] minus the forbidden ranges, in one sweep."""
        out = []
        cur = lo
        forb.sort()
        for s, e in forb:
            if e < cur:
                continue
            if s > hi:
                break
            if s > cur:
                out.append((cur, s - 1))
            if e + 1 > cur:
                cur = e + 1
            if cur > hi:
                break
        if cur <= hi:
            out.append((cur, hi))
        dom = IntervalSet.__new__(IntervalSet)
        dom._ivs = out
        return dom

    def domains(self, act: int) -> list[IntervalSet]:
        """Current domain of every job of ``act`` given the scheduled set."""
        inst = self.instance
        a = inst.activities[act]
        n = self.bounds.jobs[act]
        hyper = self.bounds.hyper_period
        occ = self._occ[a.resource]
        max_exec = max((inst.activities[x].exec_time
                        for x in range(inst.n)
                        if inst.activities[x].resource == a.resource),
                       default=1)
        firsts = sorted((self.sched[x][0], self.sched[x][0] + inst.activities[x].exec_time, x)
                        for x in self.sched
                        if inst.activities[x].resource == a.resource)
        lasts = sorted((self.sched[x][-1], self.sched[x][-1] + inst.activities[x].exec_time, x)
                       for x in self.sched
                       if inst.activities[x].resource == a.resource)
        preds = [w for w in inst.dag.pred[act] if w in self.sched]
        out = []
        for j in range(1, n + 1):
            lo, hi = self.window(act, j)
            for w in preds:
                lo = max(lo, self.sched[w][j - 1] + inst.activities[w].exec_time)
            forb: list[tuple[int, int]] = []
            self._collect(forb, occ, lo, hi, a.exec_time, 0, max_exec)
            if j == 1:
                # wrap: this first job (+H) against last-period jobs, i.e.
                # last jobs shifted -H against this job.
                self._collect(forb, lasts, lo, hi, a.exec_time, -hyper, max_exec)
            if j == n:
                # wrap: first-period jobs (+H) against this last job.
                self._collect(forb, firsts, lo, hi, a.exec_time, hyper, max_exec)
            out.append(self._complement(lo, hi, forb))
        return out

    def check_consistency(self) -> bool:
        """Debug: occupancy lists must equal a from-scratch rebuild."""
        for res, occ in self._occ.items():
            fresh = sorted(
                (s, s + self.instance.activities[x].exec_time, x)
                for x, starts in self.sched.items()
                if self.instance.activities[x].resource == res
                for s in starts)
            if fresh != occ:
                return False
        return True


def sub_model(instance: Instance, bounds: DerivedBounds, store: DomainStore,
              a1: int, a2: int | None = None,
              config: HeuristicConfig | None = None,
              time_limit: float | None = None):
    """Place all jobs of ``a1`` (and ``a2``) minimising the start-time sum.

    Returns ``{act: starts}`` or None.  Non-jitter-critical single activities
    reduce to greedy earliest placement (the least solution of the
    precedence arcs); jitter-critical ones add the jitter arcs; pairs add the
    mutual resource disjunctions and search.
    """
    config = config or (store.config if store else HeuristicConfig())
    acts = [a1] if a2 is None else [a1, a2]
    doms: list[IntervalSet] = []
    index: dict[tuple[int, int], int] = {}
    for act in acts:
        d = store.domains(act)
        for j, dom in enumerate(d, start=1):
            if dom.is_empty():
                return None
            index[(act, j)] = len(doms)
            doms.append(dom)

    engine = Engine(doms)
    hyper = bounds.hyper_period
    for act in acts:
        a = instance.activities[act]
        n = bounds.jobs[act]
        for j in range(1, n):
            engine.add_arc(index[(act, j)], index[(act, j + 1)], a.exec_time)
        if n >= 2:
            engine.add_arc(index[(act, n)], index[(act, 1)], a.exec_time - hyper)
        # Jitter arcs are dropped only when the windows already cap the
        # deviation below the bound; the validator checks every activity.
        if n >= 2 and a.jitter < a.period + bounds.slack[act]:
            for j in range(1, n):
                u, v = index[(act, j)], index[(act, j + 1)]
                engine.add_arc(u, v, a.period - a.jitter)
                engine.add_arc(v, u, -(a.period + a.jitter))
            u1, un = index[(act, 1)], index[(act, n)]
            engine.add_arc(u1, un, hyper - a.period - a.jitter)
            engine.add_arc(un, u1, a.period - a.jitter - hyper)

    if a2 is not None:
        x, y = instance.activities[a1], instance.activities[a2]
        for i, l in ((a1, a2), (a2, a1)):
            if instance.dag.has_edge(i, l):
                e_i = instance.activities[i].exec_time
                for j in range(1, bounds.jobs[i] + 1):
                    engine.add_arc(index[(i, j)], index[(l, j)], e_i)
        if x.resource == y.resource:
            n1, n2 = bounds.jobs[a1], bounds.jobs[a2]
            for j in range(1, n1 + 1):
                for k in range(1, n2 + 1):
                    u, v = index[(a1, j)], index[(a2, k)]
                    if (doms[u].min() < doms[v].max() + y.exec_time
                            and doms[v].min() < doms[u].max() + x.exec_time):
                        engine.add_disjunction(u, v, x.exec_time, y.exec_time)
            # first-period (+H) against last-period wrap pairs
            u, v = index[(a1, 1)], index[(a2, n2)]
            engine.add_disjunction(u, v, x.exec_time + hyper, y.exec_time - hyper)
            u, v = index[(a2, 1)], index[(a1, n1)]
            engine.add_disjunction(u, v, y.exec_time + hyper, x.exec_time - hyper)

    status, values, _stats = engine.minimize_sum(
        time_limit=time_limit, node_limit=config.pair_node_limit)
    if status not in (OPTIMAL, INCUMBENT):
        return None
    result = {}
    for act in acts:
        n = bounds.jobs[act]
        result[act] = tuple(values[index[(act, j)]] for j in range(1, n + 1))
    return result


def choose_unschedule(instance: Instance, bounds: DerivedBounds,
                      sched: dict, a_c: int, thresh: int):
    """Pick the victim activity per the three-step rule, or None."""
    acts = instance.activities
    res = acts[a_c].resource
    banned = instance.dag.pred_closure[a_c]
    cands = [x for x in sched if acts[x].resource == res and x not in banned]
    if not cands:
        return None
    sched_succs = {x: sum(1 for s in instance.dag.succ_closure[x] if s in sched)
                   for x in cands}
    slack = bounds.slack
    step1 = [x for x in cands if sched_succs[x] == 0 and acts[x].jitter >= thresh]
    if step1:
        return min(step1, key=lambda x: (-slack[x], x))
    step2 = [x for x in cands if acts[x].jitter >= thresh]
    if step2:
        return min(step2, key=lambda x: (sched_succs[x], -slack[x], x))
    return min(cands, key=lambda x: (-bounds.inherited_jitter[x], -slack[x], x))


def run_3ls(instance: Instance, bounds: DerivedBounds | None = None,
            config: HeuristicConfig | None = None,
            time_limit: float | None = None):
    """Run the heuristic; returns (Schedule | None, HeuristicStats)."""
    t0 = time.monotonic()
    if bounds is None:
        bounds = derive_bounds(instance)
    config = config or HeuristicConfig()
    stats = HeuristicStats()
    n = instance.n
    store = DomainStore(instance, bounds, config)

    key = {a.id: (min(bounds.slack[a.id], bounds.inherited_jitter[a.id]),
                  max(bounds.slack[a.id], bounds.inherited_jitter[a.id]),
                  a.id)
           for a in instance.activities}
    thresh = min(a.period for a in instance.activities)
    pending = set(range(n))
    problematic: set[int] = set()
    scratch: set[int] = set()
    level3_pairs: set[frozenset] = set()
    solo_restarts: set[int] = set()
    retry: int | None = None
    iteration_limit = config.iteration_limit_factor * n + 1000

    def fail(reason: str):
        stats.status = reason
        stats.wall = time.monotonic() - t0
        return None, stats

    def ready_pop():
        best = None
        for x in pending:
            if any(w in pending for w in instance.dag.pred[x]):
                continue
            if best is None or key[x] < key[best]:
                best = x
        return best

    def do_insert(placements: dict):
        for act, starts in placements.items():
            store.insert(act, starts)
            pending.discard(act)
        if config.debug_domains:
            assert store.check_consistency(), "occupancy drifted from schedule"

    def do_unschedule(act: int):
        victims = {act} | {s for s in instance.dag.succ_closure[act]
                           if s in store.sched}
        store.remove(victims)
        pending.update(victims)
        stats.unschedules += 1
        if config.debug_domains:
            assert store.check_consistency(), "occupancy drifted from schedule"
        return victims

    iterations = 0
    while len(store.sched) < n:
        iterations += 1
        if iterations > iteration_limit:
            return fail("iteration_limit")
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            return fail("timeout")

        a_c = retry if retry is not None and retry in pending else ready_pop()
        retry = None
        if a_c is None:
            return fail("no_ready_activity")

        placement = sub_model(instance, bounds, store, a_c, None, config)
        if placement is not None:
            do_insert(placement)
            stats.level1 += 1
            continue

        a_u = choose_unschedule(instance, bounds, store.sched, a_c, thresh)
        problematic.add(a_c)
        if a_u is None:
            # nothing co-mapped to clear out: near-scratch restart for a_c alone
            if a_c in solo_restarts:
                return fail("level3_exhausted")
            solo_restarts.add(a_c)
            keep = scratch | set(instance.dag.pred_closure[a_c])
            do_unschedule_many = [x for x in list(store.sched) if x not in keep]
            store.remove(do_unschedule_many)
            pending.update(do_unschedule_many)
            placement = sub_model(instance, bounds, store, a_c, None, config)
            stats.level3 += 1
            if placement is None:
                return fail("fail")
            do_insert(placement)
            scratch |= {a_c} | set(instance.dag.pred_closure[a_c])
            continue

        do_unschedule(a_u)
        if a_u not in problematic:
            retry = a_c   # try a_c again without a_u in the way
            continue

        # level 2: co-schedule the two problematic activities
        placement = sub_model(instance, bounds, store, a_c, a_u, config)
        if placement is not None:
            do_insert(placement)
            stats.level2 += 1
            continue

        # level 3: almost from scratch
        pair = frozenset((a_c, a_u))
        if pair in level3_pairs:
            return fail("level3_exhausted")
        level3_pairs.add(pair)
        stats.level3 += 1
        assert stats.level3 <= n * n, "level-3 invocation bound exceeded"
        keep = (scratch | set(instance.dag.pred_closure[a_c])
                | set(instance.dag.pred_closure[a_u]))
        removed = [x for x in list(store.sched) if x not in keep]
        store.remove(removed)
        pending.update(removed)
        placement = sub_model(instance, bounds, store, a_c, a_u, config)
        if placement is None:
            return fail("fail")
        do_insert(placement)
        scratch |= ({a_c, a_u} | set(instance.dag.pred_closure[a_c])
                    | set(instance.dag.pred_closure[a_u]))

    rows = [store.sched[i] for i in range(n)]
    zj = tuple(a.jitter == 0 for a in instance.activities)
    schedule = Schedule(tuple(tuple(r) for r in rows), zj)
    report = validate(instance, schedule)
    assert report.ok, f"heuristic produced an invalid schedule: {report.violations[:3]}"
    stats.wall = time.monotonic() - t0
    return schedule, stats
