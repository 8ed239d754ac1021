"""Make-or-buy supply chain: three component plants, a cyclic truck, and an
assembly plant.

Plants A, B, and C produce the per-order component quantities of every
internally fulfilled (MAKE) order, one unit at a time, FIFO in order-list
order. A truck departs plant D at time 0 and cycles A -> B -> C -> D forever,
at each stop loading every unit finished by its arrival (skipping the stop
when nothing is ready) and unloading at D. Plant D assembles an order once
all its components have arrived, one order at a time, FIFO by readiness.
Outsourced (BUY) orders are delivered on time by construction.

Revenue: on-time orders earn 100, late ones 50, and every outsourced order
costs 30 -- by default an outsourced order counts both as on time and as
outsourced, for a net 70.

All processing, travel, load/unload, and assembly times are uniform draws;
the default production range is calibrated so that making everything
overloads the plants and tail orders miss their deadlines, which is what
makes the make-or-buy decision non-trivial.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np

from .envs import Env, EnvSpec, FeatureSpec

MAKE = 0
BUY = 1


@dataclass(frozen=True)
class Order:
    """Component quantities and a deadline, in days from the start date."""

    id: int
    qty_a: int
    qty_b: int
    qty_c: int
    deadline_day: float

    def __post_init__(self):
        if min(self.qty_a, self.qty_b, self.qty_c) < 0:
            raise ValueError(f"order {self.id}: quantities must be >= 0")
        if self.deadline_day < 0:
            raise ValueError(f"order {self.id}: deadline_day must be >= 0")


@dataclass(frozen=True)
class MakeOrBuyParams:
    """Simulation distributions (uniform lo/hi, in days) and revenue terms.

    ``outsourced_count_on_time`` switches how outsourced orders enter the
    revenue counts: by default they appear in both n_on_time and
    n_outsourced; with False they appear in n_outsourced only (and the
    n_on_time + n_late == n identity then covers internal orders only).
    """

    production_a: tuple = (1.5, 2.5)
    production_b: tuple = (1.5, 2.5)
    production_c: tuple = (1.5, 2.5)
    travel: tuple = (0.1, 0.3)
    load: tuple = (0.02, 0.08)
    unload: tuple = (0.02, 0.08)
    assembly: tuple = (0.1, 0.2)
    on_time_revenue: float = 100.0
    late_revenue: float = 50.0
    outsource_cost: float = 30.0
    outsourced_count_on_time: bool = True
    start_date: datetime.date = datetime.date(2024, 6, 19)

    def __post_init__(self):
        for name in ("production_a", "production_b", "production_c",
                     "travel", "load", "unload", "assembly"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} range must satisfy 0 <= lo <= hi")
        if self.travel[0] <= 0:
            raise ValueError("travel time must be strictly positive")


def revenue(n_on_time: int, n_late: int, n_outsourced: int, *,
            on_time_revenue: float = 100.0, late_revenue: float = 50.0,
            outsource_cost: float = 30.0) -> float:
    """R = 100 * n_on_time + 50 * n_late - 30 * n_outsourced (defaults)."""
    if min(n_on_time, n_late, n_outsourced) < 0:
        raise ValueError("order counts must be >= 0")
    return (on_time_revenue * n_on_time + late_revenue * n_late
            - outsource_cost * n_outsourced)


@dataclass
class SimOutcome:
    n_on_time: int
    n_late: int
    n_outsourced: int
    revenue: float
    completion_day: list


class _UniformTape:
    """Block-buffered uniform draws with a fixed consumption order."""

    def __init__(self, rng, block: int = 1024):
        self._rng = rng
        self._block = block
        self._buf = rng.random(block)
        self._i = 0

    def draw(self, lo: float, hi: float) -> float:
        if self._i >= len(self._buf):
            self._buf = self._rng.random(self._block)
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return lo + (hi - lo) * float(u)


def simulate(orders, decisions, params: MakeOrBuyParams, seed) -> SimOutcome:
    """Run the supply chain once for a full decision vector.

    ``decisions[i]`` is 0 (MAKE) or 1 (BUY) for orders[i]. Internal orders
    complete when plant D finishes assembling them; an order is on time iff
    its completion day is <= its deadline day. Outsourced orders complete on
    their deadline. Draw order is fixed (production blocks for A, B, C, then
    truck legs/loads/unloads as the cycle unfolds, then assembly in service
    order), so a seed fully determines the outcome.
    """
    n = len(orders)
    if len(decisions) != n:
        raise ValueError("need exactly one decision per order")
    decisions = [int(d) for d in decisions]
    if any(d not in (MAKE, BUY) for d in decisions):
        raise ValueError("decisions must be 0 (MAKE) or 1 (BUY)")
    rng = np.random.default_rng(seed)
    internal = [i for i in range(n) if decisions[i] == MAKE]

    comp_qty = {
        "a": [orders[i].qty_a for i in internal],
        "b": [orders[i].qty_b for i in internal],
        "c": [orders[i].qty_c for i in internal],
    }
    ranges = {"a": params.production_a, "b": params.production_b,
              "c": params.production_c}
    done_times = {}
    need_cum = {}
    for comp in ("a", "b", "c"):
        total = int(sum(comp_qty[comp]))
        lo, hi = ranges[comp]
        done_times[comp] = np.cumsum(rng.uniform(lo, hi, total))
        need_cum[comp] = np.cumsum(comp_qty[comp])
    total_units = sum(len(done_times[comp]) for comp in ("a", "b", "c"))

    tape = _UniformTape(rng)
    arrive_t = {comp: [] for comp in ("a", "b", "c")}
    arrive_cum = {comp: [] for comp in ("a", "b", "c")}
    if total_units:
        picked = {comp: 0 for comp in ("a", "b", "c")}
        shipped = {comp: 0 for comp in ("a", "b", "c")}
        onboard = {comp: 0 for comp in ("a", "b", "c")}
        delivered = 0
        t = 0.0
        while delivered < total_units:
            for comp in ("a", "b", "c"):
                t += tape.draw(*params.travel)
                done = done_times[comp]
                k = picked[comp]
                while k < len(done) and done[k] <= t:
                    k += 1
                ready = k - picked[comp]
                if ready:  # empty stops are skipped with zero dwell
                    t += tape.draw(*params.load)
                    picked[comp] = k
                    onboard[comp] += ready
            t += tape.draw(*params.travel)
            if any(onboard.values()):
                t += tape.draw(*params.unload)
                for comp in ("a", "b", "c"):
                    if onboard[comp]:
                        shipped[comp] += onboard[comp]
                        arrive_t[comp].append(t)
                        arrive_cum[comp].append(shipped[comp])
                        delivered += onboard[comp]
                        onboard[comp] = 0

    ready_day = []
    for pos in range(len(internal)):
        r = 0.0
        for comp in ("a", "b", "c"):
            req = need_cum[comp][pos] if len(need_cum[comp]) else 0
            if comp_qty[comp][pos] == 0 or req == 0:
                continue
            idx = int(np.searchsorted(arrive_cum[comp], req, side="left"))
            r = max(r, arrive_t[comp][idx])
        ready_day.append(r)

    completion = [0.0] * n
    server = 0.0
    for pos in sorted(range(len(internal)), key=lambda p: (ready_day[p], p)):
        start = max(server, ready_day[pos])
        server = start + tape.draw(*params.assembly)
        completion[internal[pos]] = server

    n_outsourced = n - len(internal)
    internal_on_time = 0
    for i in internal:
        if completion[i] <= orders[i].deadline_day:
            internal_on_time += 1
    for i in range(n):
        if decisions[i] == BUY:
            completion[i] = float(orders[i].deadline_day)
    n_late = len(internal) - internal_on_time
    n_on_time = internal_on_time
    if params.outsourced_count_on_time:
        n_on_time += n_outsourced
    total = revenue(n_on_time, n_late, n_outsourced,
                    on_time_revenue=params.on_time_revenue,
                    late_revenue=params.late_revenue,
                    outsource_cost=params.outsource_cost)
    return SimOutcome(n_on_time=n_on_time, n_late=n_late,
                      n_outsourced=n_outsourced, revenue=total,
                      completion_day=completion)


class MakeOrBuyEnv(Env):
    """Episodic wrapper: step i observes order i as (qty_a, qty_b, qty_c,
    days_to_deadline) and decides MAKE (0) or BUY (1). The terminal step runs
    the simulation on a fresh seed and pays revenue / 100."""

    objective_scale = 100.0

    def __init__(self, orders, params: MakeOrBuyParams = None, seed=None):
        if not orders:
            raise ValueError("cannot build an environment without orders")
        self.orders = tuple(orders)
        self.params = params if params is not None else MakeOrBuyParams()
        self._rng = np.random.default_rng(seed)
        qa = [o.qty_a for o in self.orders]
        qb = [o.qty_b for o in self.orders]
        qc = [o.qty_c for o in self.orders]
        dd = [o.deadline_day for o in self.orders]
        self.spec = EnvSpec(
            features=(
                FeatureSpec("qty_a", 0, max(qa)),
                FeatureSpec("qty_b", 0, max(qb)),
                FeatureSpec("qty_c", 0, max(qc)),
                FeatureSpec("days_to_deadline", min(dd), max(dd)),
            ),
            action_count=2,
            episode_len=len(self.orders),
            stochastic=True,
            action_labels=("MAKE", "BUY"),
        )
        self._i = 0
        self._decisions = []
        self._sim_seed = 0
        self.last_outcome = None

    def _obs(self, i) -> np.ndarray:
        o = self.orders[i]
        return np.array([o.qty_a, o.qty_b, o.qty_c, o.deadline_day], dtype=float)

    def reset(self) -> np.ndarray:
        self._i = 0
        self._decisions = []
        self._sim_seed = int(self._rng.integers(2**63 - 1))
        return self._obs(0)

    def step(self, action: int):
        if int(action) not in (MAKE, BUY):
            raise ValueError(f"action must be 0 (MAKE) or 1 (BUY), got {action}")
        self._decisions.append(int(action))
        self._i += 1
        if self._i < len(self.orders):
            return self._obs(self._i), 0.0, False
        self.last_outcome = simulate(self.orders, self._decisions,
                                     self.params, self._sim_seed)
        return (np.zeros(len(self.spec.features)),
                self.last_outcome.revenue / 100.0, True)


def makeorbuy_env(orders, params: MakeOrBuyParams = None, seed=None) -> MakeOrBuyEnv:
    return MakeOrBuyEnv(orders, params, seed)
