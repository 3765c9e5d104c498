"""Independent brute-force oracles and tiny-instance generators for tests.

The enumerators below assign start times by direct recursion with incremental
constraint checks and confirm every accepted leaf with the validator.  They
share no code with the search engine, so they can arbitrate its verdicts.
"""

from __future__ import annotations

import random

from ttcosched.model import Activity, Instance, Platform, PrecedenceDAG
from ttcosched.validation import Schedule, validate


def _overlap(s1, e1, s2, e2):
    return s1 < s2 + e2 and s2 < s1 + e1


def brute_force_zj(instance: Instance):
    """First zero-jitter schedule by exhaustive offset enumeration, or None."""
    acts = instance.activities
    hyper = instance.hyper_period()
    topo = instance.dag.topo_order
    rows: dict[int, tuple[int, ...]] = {}

    def fits(i, row):
        a = acts[i]
        for w in instance.dag.pred[i]:
            if w in rows:
                for sw, si in zip(rows[w], row):
                    if sw + acts[w].exec_time > si:
                        return False
        for x, xrow in rows.items():
            if x == i or acts[x].resource != a.resource:
                continue
            ex = acts[x].exec_time
            for si in row:
                for sx in xrow:
                    if _overlap(si, a.exec_time, sx, ex):
                        return False
            if _overlap(row[0] + hyper, a.exec_time, xrow[-1], ex):
                return False
            if _overlap(xrow[0] + hyper, ex, row[-1], a.exec_time):
                return False
        return True

    def rec(k):
        if k == len(topo):
            sched = Schedule.from_offsets(
                instance, [rows[i][0] for i in range(instance.n)])
            assert validate(instance, sched).ok, "oracle accepted a bad leaf"
            return sched
        i = topo[k]
        a = acts[i]
        n = hyper // a.period
        for off in range(0, 2 * a.period - a.exec_time + 1):
            row = tuple(off + j * a.period for j in range(n))
            if fits(i, row):
                rows[i] = row
                found = rec(k + 1)
                if found:
                    return found
                del rows[i]
        return None

    return rec(0)


def brute_force_jc(instance: Instance):
    """First jitter-feasible schedule by per-job enumeration, or None."""
    acts = instance.activities
    hyper = instance.hyper_period()
    njobs = {a.id: hyper // a.period for a in acts}
    flat = [(i, j) for i in instance.dag.topo_order for j in range(njobs[i])]
    starts: dict[int, list[int]] = {i: [] for i in range(instance.n)}
    done: set[int] = set()

    def conflicts(i, j, s):
        a = acts[i]
        for x in range(instance.n):
            if x == i or acts[x].resource != a.resource:
                continue
            ex = acts[x].exec_time
            for sx in starts[x]:
                if _overlap(s, a.exec_time, sx, ex):
                    return True
            if j == 0 and x in done:
                if _overlap(s + hyper, a.exec_time, starts[x][-1], ex):
                    return True
            if j == njobs[i] - 1 and starts[x]:
                if _overlap(starts[x][0] + hyper, ex, s, a.exec_time):
                    return True
        return False

    def rec(k):
        if k == len(flat):
            sched = Schedule.from_lists([starts[i] for i in range(instance.n)])
            assert validate(instance, sched).ok, "oracle accepted a bad leaf"
            return sched
        i, j = flat[k]
        a = acts[i]
        lo = j * a.period
        hi = (j + 2) * a.period - a.exec_time
        if j > 0:
            prev = starts[i][j - 1]
            lo = max(lo, prev + a.exec_time, prev + a.period - a.jitter)
            hi = min(hi, prev + a.period + a.jitter)
        for w in instance.dag.pred[i]:
            if starts[w]:
                lo = max(lo, starts[w][j] + acts[w].exec_time)
        last = j == njobs[i] - 1
        for s in range(lo, hi + 1):
            if last and j > 0:
                first = starts[i][0]
                if s + a.exec_time > first + hyper:
                    continue
                if abs(first + hyper - a.period - s) > a.jitter:
                    continue
            if conflicts(i, j, s):
                continue
            starts[i].append(s)
            if last:
                done.add(i)
            found = rec(k + 1)
            if found:
                return found
            starts[i].pop()
            done.discard(i)
        return None

    return rec(0)


def brute_force(instance: Instance, mode: str):
    return brute_force_zj(instance) if mode == "zj" else brute_force_jc(instance)


def random_tiny_instance(rng: random.Random, jit_divisor: int = 5) -> Instance:
    """Unit-execution instance with <= 8 activities and hyper-period <= 24.

    Tasks on two cores, a couple of same-period chains routed through
    messages on the ports, job total capped so exhaustive enumeration stays
    cheap.
    """
    hyper = rng.choice([6, 8, 12, 16, 18, 24])
    divisors = [p for p in range(2, hyper + 1)
                if hyper % p == 0 and hyper // p <= 4]
    platform = Platform(cores=2)
    n_tasks = rng.randint(3, 6)
    specs = []
    total_jobs = 0
    for _ in range(n_tasks):
        p = rng.choice(divisors)
        if total_jobs + hyper // p > 12:
            p = hyper
        total_jobs += hyper // p
        specs.append((p, rng.randrange(2)))

    acts = []
    for tid, (p, core) in enumerate(specs):
        jit = p // jit_divisor
        acts.append(Activity(tid, "task", p, 1, jit, core))
    edges = set()
    chains = []
    by_period: dict[int, list[int]] = {}
    for tid, (p, _c) in enumerate(specs):
        by_period.setdefault(p, []).append(tid)
    pools = [g for g in by_period.values() if len(g) >= 2]
    for _ in range(rng.randint(0, 2)):
        if not pools or len(acts) >= 8:
            break
        pool = rng.choice(pools)
        a, b = sorted(rng.sample(pool, 2))
        pa = specs[a][0]
        if specs[a][1] != specs[b][1] and len(acts) < 8 and rng.random() < 0.7:
            mid = len(acts)
            acts.append(Activity(mid, "message", pa, 1, pa // jit_divisor,
                                 platform.port_of(specs[b][1]),
                                 size=8, sender=a, receiver=b))
            edges |= {(a, mid), (mid, b)}
            chains.append((a, mid, b))
        else:
            edges.add((a, b))
            chains.append((a, b))
    dag = PrecedenceDAG(len(acts), edges)
    return Instance(tuple(acts), platform, dag, tuple(chains),
                    name=f"tiny-{rng.random():.6f}")


def fig1_witness(e_msg_slow: int = 4, e_msg_fast: int = 3) -> Instance:
    """The motivating two-chain topology: periods 9 and 6 crossing cores.

    Execution times are the brute-force-derived witness making the instance
    zero-jitter infeasible yet jitter-feasible at jit = p/2.
    """
    platform = Platform(cores=3)
    acts = (
        Activity(0, "task", 9, 1, 4, 0),
        Activity(1, "task", 9, 1, 4, 2),
        Activity(2, "task", 6, 1, 3, 1),
        Activity(3, "task", 6, 1, 3, 2),
        Activity(4, "message", 9, e_msg_slow, 4, 5, size=400, sender=0, receiver=1),
        Activity(5, "message", 6, e_msg_fast, 3, 5, size=300, sender=2, receiver=3),
    )
    dag = PrecedenceDAG(6, [(0, 4), (4, 1), (2, 5), (5, 3)])
    return Instance(acts, platform, dag, ((0, 4, 1), (2, 5, 3)),
                    name="fig1-witness")
