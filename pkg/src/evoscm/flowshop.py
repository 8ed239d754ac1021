"""Hybrid flow shop scheduling with human-resource categories.

Jobs pass through their machine type's ordered phase list. Each phase needs
one unit of its category (M, E, or R) for its whole duration; every category
has a fixed capacity, and at most ``assembly_areas`` jobs may be open (between
first phase start and last phase end) at once. A job's first M phase cannot
start before its basement arrives, its first E phase not before its panels
arrive, and the finished machine ships after a constant transport time.

``decode_list_schedule`` is a serial list scheduler: jobs are placed one at a
time in permutation order, each phase at its earliest feasible start given
everything placed so far. The assembly-area constraint spans the whole job,
so a placement whose open interval would overflow the areas is retried with
the first phase pushed past the next area release.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .envs import Env, EnvSpec, FeatureSpec

CATEGORIES = ("M", "E", "R")

LT7_FAMILY = ("LT7", "LT7p", "LT7 INS", "LT7p INS")
LT8_FAMILY = ("LT8", "LT8p", "LT8 ULA", "LT8p ULA",
              "LT8 12", "LT8p 12", "LT8 12 ULA", "LT8p 12 ULA")
ALL_MACHINE_TYPES = LT7_FAMILY + LT8_FAMILY


@dataclass(frozen=True)
class Job:
    """One machine to build. Days are offsets from the scheduling origin."""

    id: int
    machine_type: str
    due_day: float
    basement_day: float
    panel_day: float

    def __post_init__(self):
        if self.basement_day < 0 or self.panel_day < 0:
            raise ValueError(f"job {self.id}: arrival days must be >= 0")
        if self.due_day < self.basement_day:
            raise ValueError(f"job {self.id}: due_day before basement_day")


def validate_type_specs(type_specs: dict):
    """Each machine type maps to a non-empty ordered (category, duration)
    phase list with known categories and positive durations."""
    for name, phases in type_specs.items():
        if not phases:
            raise ValueError(f"machine type {name!r} has no phases")
        for k, (category, duration) in enumerate(phases):
            if category not in CATEGORIES:
                raise ValueError(
                    f"machine type {name!r} phase {k}: unknown category {category!r}")
            if duration <= 0:
                raise ValueError(
                    f"machine type {name!r} phase {k}: duration must be > 0")


@dataclass(frozen=True)
class HfsInstance:
    jobs: tuple
    type_specs: dict
    capacities: dict = field(default_factory=lambda: {"M": 5, "E": 5, "R": 5})
    assembly_areas: int = 20
    transport_days: float = 2.0

    def __post_init__(self):
        validate_type_specs(self.type_specs)
        for category in CATEGORIES:
            if self.capacities.get(category, 0) < 1:
                raise ValueError(f"capacity for {category} must be >= 1")
        if self.assembly_areas < 1:
            raise ValueError("assembly_areas must be >= 1")
        if self.transport_days < 0:
            raise ValueError("transport_days must be >= 0")
        for job in self.jobs:
            if job.machine_type not in self.type_specs:
                raise ValueError(f"job {job.id}: unknown machine type {job.machine_type!r}")


@dataclass
class Schedule:
    """Phase assignments per job, in instance job order.

    ``phases[i]`` is a list of (category, start, end) for jobs[i];
    ``delivery[i]`` is its last phase end plus transport.
    """

    job_ids: list
    phases: list
    delivery: list


def makespan(schedule: Schedule) -> float:
    """Latest delivery across jobs (0 for an empty schedule)."""
    return max(schedule.delivery, default=0.0)


def save_schedule(schedule: Schedule, path):
    """Write one CSV row per phase: job_id,phase_index,category,start,end."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["job_id", "phase_index", "category", "start", "end"])
        for job_id, spans in zip(schedule.job_ids, schedule.phases):
            for k, (category, start, end) in enumerate(spans):
                writer.writerow([job_id, k, category, repr(float(start)),
                                 repr(float(end))])


def _first_phase_index(phases, category):
    for k, (cat, _) in enumerate(phases):
        if cat == category:
            return k
    return None


def _earliest_slot(intervals, cap, ready, dur):
    """Earliest t >= ready such that fewer than ``cap`` of the half-open
    ``intervals`` cover every instant of [t, t + dur)."""
    events = {}
    for s, e in intervals:
        if e <= ready:
            continue
        s = max(s, ready)
        events[s] = events.get(s, 0) + 1
        events[e] = events.get(e, 0) - 1
    candidate = ready
    usage = 0
    for t in sorted(events):
        if usage >= cap:
            candidate = t
        elif t - candidate >= dur:
            return candidate
        usage += events[t]
    return candidate


def _window_peak(windows, start, end):
    """Maximum number of half-open ``windows`` covering an instant of
    [start, end)."""
    events = {}
    for s, e in windows:
        s2, e2 = max(s, start), min(e, end)
        if e2 <= s2:
            continue
        events[s2] = events.get(s2, 0) + 1
        events[e2] = events.get(e2, 0) - 1
    usage = peak = 0
    for t in sorted(events):
        usage += events[t]
        if usage > peak:
            peak = usage
    return peak


def decode_list_schedule(instance: HfsInstance, permutation) -> Schedule:
    """Serial list scheduling: place jobs in permutation order, each phase at
    its earliest feasible start.

    Per job: phase k starts no earlier than phase k-1 ends; the first M phase
    waits for the basement, the first E phase for the panels; every instant
    respects the per-category capacity and the open-jobs area limit. Raises
    ValueError unless ``permutation`` is a bijection over 0..n-1.
    """
    n = len(instance.jobs)
    perm = [int(p) for p in permutation]
    if sorted(perm) != list(range(n)):
        raise ValueError("permutation must be a bijection over job indices 0..n-1")
    cat_intervals = {category: [] for category in CATEGORIES}
    job_windows = []
    placed = [None] * n
    for j in perm:
        job = instance.jobs[j]
        phases = instance.type_specs[job.machine_type]
        first_m = _first_phase_index(phases, "M")
        first_e = _first_phase_index(phases, "E")
        push = 0.0
        while True:
            spans = []
            prev_end = None
            for k, (category, dur) in enumerate(phases):
                lo = push if prev_end is None else prev_end
                if k == first_m:
                    lo = max(lo, job.basement_day)
                if k == first_e:
                    lo = max(lo, job.panel_day)
                start = _earliest_slot(cat_intervals[category],
                                       instance.capacities[category], lo, dur)
                spans.append((category, start, start + dur))
                prev_end = start + dur
            window = (spans[0][1], spans[-1][2])
            if _window_peak(job_windows, *window) < instance.assembly_areas:
                break
            releases = [e for _, e in job_windows if e > window[0]]
            if not releases:
                raise RuntimeError("area overflow with no pending release")
            push = min(releases)
        for category, start, end in spans:
            cat_intervals[category].append((start, end))
        job_windows.append((spans[0][1], spans[-1][2]))
        placed[j] = spans
    delivery = [placed[j][-1][2] + instance.transport_days for j in range(n)]
    return Schedule(job_ids=[job.id for job in instance.jobs],
                    phases=placed, delivery=delivery)


def check_feasible(instance: HfsInstance, schedule: Schedule) -> list:
    """Every constraint violation as a human-readable string (empty == ok)."""
    out = []
    n = len(instance.jobs)
    if len(schedule.phases) != n or len(schedule.delivery) != n:
        return [f"schedule covers {len(schedule.phases)} jobs, instance has {n}"]
    eps = 1e-9
    cat_events = {category: [] for category in CATEGORIES}
    windows = []
    for i, job in enumerate(instance.jobs):
        spec = instance.type_specs[job.machine_type]
        spans = schedule.phases[i]
        if len(spans) != len(spec):
            out.append(f"job {job.id}: {len(spans)} phases, type has {len(spec)}")
            continue
        first_m = _first_phase_index(spec, "M")
        first_e = _first_phase_index(spec, "E")
        prev_end = None
        for k, ((category, start, end), (want_cat, want_dur)) in enumerate(zip(spans, spec)):
            if category != want_cat:
                out.append(f"job {job.id} phase {k}: category {category}, expected {want_cat}")
            if abs((end - start) - want_dur) > eps:
                out.append(f"job {job.id} phase {k}: duration {end - start}, expected {want_dur}")
            if prev_end is not None and start < prev_end - eps:
                out.append(f"job {job.id} phase {k}: starts before phase {k - 1} ends")
            if k == first_m and start < job.basement_day - eps:
                out.append(f"job {job.id} phase {k}: first M phase before basement day "
                           f"({start} < {job.basement_day})")
            if k == first_e and start < job.panel_day - eps:
                out.append(f"job {job.id} phase {k}: first E phase before panel day "
                           f"({start} < {job.panel_day})")
            prev_end = end
            cat_events[category].append((start, 1, job.id, k))
            cat_events[category].append((end, -1, job.id, k))
        want_delivery = spans[-1][2] + instance.transport_days
        if abs(schedule.delivery[i] - want_delivery) > eps:
            out.append(f"job {job.id}: delivery {schedule.delivery[i]}, "
                       f"expected {want_delivery}")
        windows.append((spans[0][1], spans[-1][2], job.id))
    for category in CATEGORIES:
        cap = instance.capacities[category]
        usage = 0
        for t, delta, job_id, k in sorted(cat_events[category], key=lambda ev: (ev[0], ev[1])):
            usage += delta
            if usage > cap:
                out.append(f"job {job_id} phase {k}: category {category} over capacity "
                           f"{cap} at t={t}")
        # (ends sort before starts at equal t, matching half-open intervals)
    area_events = []
    for s, e, job_id in windows:
        if e > s:
            area_events.append((s, 1, job_id))
            area_events.append((e, -1, job_id))
    usage = 0
    for t, delta, job_id in sorted(area_events, key=lambda ev: (ev[0], ev[1])):
        usage += delta
        if usage > instance.assembly_areas:
            out.append(f"job {job_id}: assembly areas over capacity "
                       f"{instance.assembly_areas} at t={t}")
    return out


def lower_bounds(instance: HfsInstance) -> float:
    """Max of the category work/capacity bound and the per-job critical-path
    bound (earliest arrival + phase durations + transport)."""
    if not instance.jobs:
        return 0.0
    best = 0.0
    work = {category: 0.0 for category in CATEGORIES}
    for job in instance.jobs:
        phases = instance.type_specs[job.machine_type]
        first_m = _first_phase_index(phases, "M")
        first_e = _first_phase_index(phases, "E")
        t = 0.0
        for k, (category, dur) in enumerate(phases):
            if k == first_m:
                t = max(t, job.basement_day)
            if k == first_e:
                t = max(t, job.panel_day)
            t += dur
            work[category] += dur
        best = max(best, t + instance.transport_days)
    for category in CATEGORIES:
        if work[category] > 0:
            best = max(best, work[category] / instance.capacities[category]
                       + instance.transport_days)
    return best


def priorities_to_permutation(priorities, jobs) -> list:
    """Scheduling order from per-job priorities: descending priority, ties by
    earlier due date, then by input index."""
    if len(priorities) != len(jobs):
        raise ValueError("need exactly one priority per job")
    return sorted(range(len(jobs)),
                  key=lambda i: (-priorities[i], jobs[i].due_day, i))


class HfsEnv(Env):
    """Episodic wrapper: step i observes job i as (machine type code, due day,
    basement day, panel day) and assigns it a priority level. The terminal
    step decodes the resulting permutation and pays -makespan/1000."""

    objective_scale = -1000.0

    def __init__(self, instance: HfsInstance, seed=None, priority_levels: int = 10):
        if not instance.jobs:
            raise ValueError("cannot build an environment for an empty instance")
        self.instance = instance
        self.type_names = tuple(sorted(instance.type_specs))
        self._code = {name: i for i, name in enumerate(self.type_names)}
        dd = [job.due_day for job in instance.jobs]
        db = [job.basement_day for job in instance.jobs]
        de = [job.panel_day for job in instance.jobs]
        self.spec = EnvSpec(
            features=(
                FeatureSpec("machine_type", 0, len(self.type_names) - 1,
                            categories=self.type_names),
                FeatureSpec("due_day", min(dd), max(dd)),
                FeatureSpec("basement_day", min(db), max(db)),
                FeatureSpec("panel_day", min(de), max(de)),
            ),
            action_count=priority_levels,
            episode_len=len(instance.jobs),
            stochastic=False,
        )
        self._i = 0
        self._priorities = []
        self.last_schedule = None

    def _obs(self, i) -> np.ndarray:
        job = self.instance.jobs[i]
        return np.array([self._code[job.machine_type], job.due_day,
                         job.basement_day, job.panel_day], dtype=float)

    def reset(self) -> np.ndarray:
        self._i = 0
        self._priorities = []
        return self._obs(0)

    def step(self, action: int):
        if not 0 <= int(action) < self.spec.action_count:
            raise ValueError(f"priority {action} outside 0..{self.spec.action_count - 1}")
        self._priorities.append(int(action))
        self._i += 1
        if self._i < len(self.instance.jobs):
            return self._obs(self._i), 0.0, False
        perm = priorities_to_permutation(self._priorities, self.instance.jobs)
        self.last_schedule = decode_list_schedule(self.instance, perm)
        reward = -makespan(self.last_schedule) / 1000.0
        return np.zeros(len(self.spec.features)), reward, True


def hfs_env(instance: HfsInstance, seed=None) -> HfsEnv:
    """Factory matching the (instance, seed) signature used everywhere; the
    environment itself is deterministic."""
    return HfsEnv(instance, seed)
