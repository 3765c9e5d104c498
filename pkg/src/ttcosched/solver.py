"""Complete feasibility solver for the job-start constraint system.

Builds the constraint model over integer job start times in either mode:

* ``jc`` - one variable per job, relative jitter bounded per activity;
* ``zj`` - one variable per activity, later jobs pinned at offset multiples.

With ``improvements`` enabled the build (a) tightens variable bounds by the
precedence-derived before/after sums, (b) drops resource pairs whose
occupancy windows cannot overlap, (c) restricts zero-jitter pairs to the lcm
of the two periods, and (d) keeps explicit jitter constraints only for
jitter-critical activities.  None of these changes the set of feasible
schedules, so verdicts match the plain model.

The native search additionally enforces jitter arcs for any activity whose
variable windows leave room to exceed its bound even when the model-surface
constraint was dropped by improvement (d); the dropped constraint is only
guaranteed redundant within one-period windows, while the variables range
over two periods.  This keeps every returned schedule consistent with the
independent validator.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .intervals import IntervalSet
from .model import DerivedBounds, Instance, derive_bounds
from .search import SAT, TIMEOUT, UNSAT, Engine, SearchStats
from .validation import Schedule, validate

ZJ = "zj"
JC = "jc"

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMED_OUT = "timeout"


class ModelInfeasible(ValueError):
    """A variable window is already empty at build time."""


@dataclass(frozen=True)
class JobVar:
    act: int
    job: int          # 1-based period index; ZJ mode always 1
    lb: int
    ub: int

    @property
    def width(self) -> int:
        return self.ub - self.lb


@dataclass(frozen=True)
class OrderingPair:
    """One resource disjunction: (u + a <= v) or (v + b <= u) over var indices."""

    u: int
    v: int
    a: int
    b: int
    wrap: bool
    jobs: tuple[tuple[int, int], tuple[int, int]]  # ((i, j), (l, k))


@dataclass
class BuiltModel:
    instance: Instance
    bounds: DerivedBounds
    mode: str
    improvements: bool
    job_vars: list[JobVar]
    var_of: dict[tuple[int, int], int]
    pairs: list[OrderingPair]
    prec_arcs: list[tuple[int, int, int, str]]  # (u, v, c, kind)
    jitter_kept: list[int]       # activities whose jitter rows stay in the model
    jitter_enforced: list[int]   # activities the native search constrains

    def var_expr(self, act: int, job: int) -> tuple[int, int]:
        """(variable index, constant offset) for the start of job ``job``."""
        if self.mode == ZJ:
            p = self.instance.activities[act].period
            return self.var_of[(act, 1)], (job - 1) * p
        return self.var_of[(act, job)], 0


@dataclass
class SolveResult:
    status: str
    schedule: Schedule | None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _windows_overlap(lb1, ub1, e1, lb2, ub2, e2) -> bool:
    """Can two jobs with start windows [lb, ub] and lengths e collide at all?"""
    return lb1 < ub2 + e2 and lb2 < ub1 + e1


def build_model(instance: Instance, bounds: DerivedBounds | None = None,
                mode: str = JC, improvements: bool = True) -> BuiltModel:
    if mode not in (ZJ, JC):
        raise ValueError(f"unknown mode {mode!r}")
    if bounds is None:
        bounds = derive_bounds(instance)
    acts = instance.activities
    hyper = bounds.hyper_period

    job_vars: list[JobVar] = []
    var_of: dict[tuple[int, int], int] = {}

    def add_var(i, j, lb, ub):
        if lb > ub:
            raise ModelInfeasible(
                f"activity {i} job {j}: window [{lb}, {ub}] is empty")
        var_of[(i, j)] = len(job_vars)
        job_vars.append(JobVar(i, j, lb, ub))

    for a in acts:
        tb = bounds.before[a.id] if improvements else 0
        ta = bounds.after[a.id] if improvements else 0
        if mode == ZJ:
            add_var(a.id, 1, tb, 2 * a.period - a.exec_time - ta)
        else:
            for j in range(1, bounds.jobs[a.id] + 1):
                add_var(a.id, j,
                        (j - 1) * a.period + tb,
                        (j + 1) * a.period - a.exec_time - ta)

    def window(i, j):
        if mode == ZJ:
            v = job_vars[var_of[(i, 1)]]
            off = (j - 1) * acts[i].period
            return v.lb + off, v.ub + off
        v = job_vars[var_of[(i, j)]]
        return v.lb, v.ub

    pairs: list[OrderingPair] = []

    def add_pair(i, j, l, k, shift_i, wrap):
        """Resource disjunction between job (i,j) shifted by shift_i and (l,k)."""
        lb1, ub1 = window(i, j)
        lb2, ub2 = window(l, k)
        e1, e2 = acts[i].exec_time, acts[l].exec_time
        if improvements and not _windows_overlap(
                lb1 + shift_i, ub1 + shift_i, e1, lb2, ub2, e2):
            return
        (u, ou), (v, ov) = (
            _expr(i, j), _expr(l, k))
        pairs.append(OrderingPair(
            u=u, v=v,
            a=e1 + ou + shift_i - ov,
            b=e2 + ov - ou - shift_i,
            wrap=wrap,
            jobs=((i, j), (l, k))))

    def _expr(i, j):
        if mode == ZJ:
            return var_of[(i, 1)], (j - 1) * acts[i].period
        return var_of[(i, j)], 0

    for res in range(instance.platform.resources):
        group = [a.id for a in acts if a.resource == res]
        for x in range(len(group)):
            for y in range(x + 1, len(group)):
                i, l = group[x], group[y]
                if mode == ZJ:
                    # constraints repeat every lcm of the two periods: jobs at
                    # the same relative offset share one constraint on the two
                    # offset variables, so deduplicate the grid by offset
                    seen: set[int] = set()
                    for j in range(1, bounds.jobs[i] + 1):
                        for k in range(1, bounds.jobs[l] + 1):
                            off = (j - 1) * acts[i].period - (k - 1) * acts[l].period
                            if off in seen:
                                continue
                            seen.add(off)
                            add_pair(i, j, l, k, 0, wrap=False)
                else:
                    for j in range(1, bounds.jobs[i] + 1):
                        for k in range(1, bounds.jobs[l] + 1):
                            add_pair(i, j, l, k, 0, wrap=False)
                # first-period jobs collide with last-period jobs (+H)
                add_pair(i, 1, l, bounds.jobs[l], hyper, wrap=True)
                add_pair(l, 1, i, bounds.jobs[i], hyper, wrap=True)

    prec_arcs: list[tuple[int, int, int, str]] = []
    for i, l in sorted(instance.dag.edges):
        e_i = acts[i].exec_time
        if mode == ZJ:
            prec_arcs.append((var_of[(i, 1)], var_of[(l, 1)], e_i, "dag"))
        else:
            for j in range(1, bounds.jobs[i] + 1):
                prec_arcs.append((var_of[(i, j)], var_of[(l, j)], e_i, "dag"))
    if mode == JC:
        for a in acts:
            n = bounds.jobs[a.id]
            for j in range(1, n):
                prec_arcs.append((var_of[(a.id, j)], var_of[(a.id, j + 1)],
                                  a.exec_time, "self"))
            if n >= 2:
                prec_arcs.append((var_of[(a.id, n)], var_of[(a.id, 1)],
                                  a.exec_time - hyper, "self_wrap"))

    jitter_kept: list[int] = []
    jitter_enforced: list[int] = []
    if mode == JC:
        for a in acts:
            if bounds.jobs[a.id] < 2:
                continue
            if not improvements or bounds.jitter_critical[a.id]:
                jitter_kept.append(a.id)
            v1 = job_vars[var_of[(a.id, 1)]]
            if a.jitter < v1.width:
                jitter_enforced.append(a.id)

    return BuiltModel(
        instance=instance, bounds=bounds, mode=mode, improvements=improvements,
        job_vars=job_vars, var_of=var_of, pairs=pairs, prec_arcs=prec_arcs,
        jitter_kept=jitter_kept, jitter_enforced=jitter_enforced)


def _jitter_arcs(model: BuiltModel, act: int):
    """Difference arcs for the relative-jitter constraints of one activity."""
    a = model.instance.activities[act]
    n = model.bounds.jobs[act]
    hyper = model.bounds.hyper_period
    arcs = []
    for j in range(1, n):
        u = model.var_of[(act, j)]
        v = model.var_of[(act, j + 1)]
        arcs.append((u, v, a.period - a.jitter))
        arcs.append((v, u, -(a.period + a.jitter)))
    if n >= 2:
        u1 = model.var_of[(act, 1)]
        un = model.var_of[(act, n)]
        arcs.append((u1, un, hyper - a.period - a.jitter))
        arcs.append((un, u1, a.period - a.jitter - hyper))
    return arcs


def _decode(model: BuiltModel, assignment: list[int]) -> Schedule:
    inst = model.instance
    rows = []
    for a in inst.activities:
        n = model.bounds.jobs[a.id]
        if model.mode == ZJ:
            s1 = assignment[model.var_of[(a.id, 1)]]
            rows.append(tuple(s1 + (j - 1) * a.period for j in range(1, n + 1)))
        else:
            rows.append(tuple(assignment[model.var_of[(a.id, j)]]
                              for j in range(1, n + 1)))
    zj = tuple(model.mode == ZJ or a.jitter == 0 for a in inst.activities)
    return Schedule(tuple(rows), zj)


def _pair_sort_key(model: BuiltModel):
    vars_ = model.job_vars
    acts = model.instance.activities

    def key(pair: OrderingPair):
        wu, wv = vars_[pair.u].width, vars_[pair.v].width
        (i, j), (l, k) = pair.jobs
        return (min(wu, wv), min(acts[i].period, acts[l].period),
                pair.wrap, i, j, l, k)

    return key


def _make_engine(model: BuiltModel, pairs) -> Engine:
    engine = Engine([IntervalSet.span(v.lb, v.ub) for v in model.job_vars])
    for u, v, c, _kind in model.prec_arcs:
        engine.add_arc(u, v, c)
    for act in model.jitter_enforced:
        for u, v, c in _jitter_arcs(model, act):
            engine.add_arc(u, v, c)
    for pair in pairs:
        engine.add_disjunction(pair.u, pair.v, pair.a, pair.b)
    return engine


def solve(model: BuiltModel, time_limit: float | None = None) -> SolveResult:
    """Depth-first search over ordering decisions with bounds propagation.

    Chronological search can get stuck behind one early misordering, so the
    node budget doubles across deterministic restarts that rotate which
    disjunctions are branched first.  Restarts never change the constraint
    set: SAT and UNSAT answers stay exact, and the wall limit caps the total.
    """
    pairs = sorted(model.pairs, key=_pair_sort_key(model))
    deadline = None if time_limit is None else time.monotonic() + time_limit
    rotations = random.Random(0x7734).sample(range(max(1, len(pairs))),
                                             k=min(64, max(1, len(pairs))))
    total = SearchStats()
    budget = 2048
    attempt = 0
    while True:
        remaining = None if deadline is None else deadline - time.monotonic()
        if remaining is not None and remaining <= 0:
            return SolveResult(TIMED_OUT, None, total)
        rot = 0 if attempt == 0 else rotations[attempt % len(rotations)]
        engine = _make_engine(model, pairs[rot:] + pairs[:rot])
        status, assignment, stats = engine.solve_feasible_limited(
            remaining, budget)
        total.nodes += stats.nodes
        total.propagations += stats.propagations
        total.wall += stats.wall
        if status == SAT:
            schedule = _decode(model, assignment)
            report = validate(model.instance, schedule)
            if not report.ok:  # pragma: no cover - soundness guard
                raise AssertionError(
                    f"solver produced an invalid schedule: {report.violations[:3]}")
            return SolveResult(FEASIBLE, schedule, total)
        if status == UNSAT:
            return SolveResult(INFEASIBLE, None, total)
        attempt += 1
        budget *= 2


def solve_instance(instance: Instance, mode: str = JC, improvements: bool = True,
                   time_limit: float | None = None,
                   bounds: DerivedBounds | None = None) -> SolveResult:
    """Build + solve, mapping an empty window straight to infeasible."""
    try:
        model = build_model(instance, bounds, mode, improvements)
    except ModelInfeasible:
        return SolveResult(INFEASIBLE, None)
    return solve(model, time_limit)
