"""Dataset generators and CSV IO for both problems.

Make-or-buy order lists: component quantities uniform on {0..20}, deadlines
uniform on {800..1500} days. Flow-shop job lists come in four variants:

* d1: all twelve machine types, arrivals in days 1..20
* d2: the LT7 family only
* d3: the LT8 family only
* d4: all types, with each job assigned to one of five 73-day groups of the
  year and its basement/panel arrivals drawn inside that group's window

Due dates are always basement day + uniform {20..50}. CSV loading reports
structured errors (file, row, column) instead of stack traces.
"""

from __future__ import annotations

import csv
import importlib.resources
from pathlib import Path

import numpy as np

from .flowshop import (ALL_MACHINE_TYPES, LT7_FAMILY, LT8_FAMILY, HfsInstance,
                       Job, validate_type_specs)
from .makeorbuy import Order

HFS_VARIANTS = ("d1", "d2", "d3", "d4")

# d4 splits the year into five equal 73-day groups.
D4_GROUP_WINDOWS = ((1, 73), (74, 146), (147, 219), (220, 292), (293, 365))


class DataError(ValueError):
    """A dataset file problem, with enough context to fix it."""


def gen_makeorbuy(n: int, seed) -> list:
    """n orders: quantities ~ U{0..20} per component, deadline ~ U{800..1500}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    qty = rng.integers(0, 21, size=(n, 3))
    deadline = rng.integers(800, 1501, size=n)
    return [Order(id=i, qty_a=int(qty[i, 0]), qty_b=int(qty[i, 1]),
                  qty_c=int(qty[i, 2]), deadline_day=float(deadline[i]))
            for i in range(n)]


def default_machine_types() -> dict:
    """The packaged machine-type table: name -> ((category, duration), ...)."""
    path = importlib.resources.files("evoscm").joinpath("data/machine_types.csv")
    with path.open("r", encoding="utf-8") as fh:
        return _read_machine_types(fh, "evoscm/data/machine_types.csv")


def load_machine_types(path) -> dict:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _read_machine_types(fh, str(path))


def _read_machine_types(fh, name) -> dict:
    reader = csv.DictReader(fh)
    needed = {"machine_type", "phase_index", "category", "duration_days"}
    if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
        missing = sorted(needed - set(reader.fieldnames or ()))
        raise DataError(f"{name}: missing columns {missing}")
    rows = {}
    for lineno, row in enumerate(reader, start=2):
        mt = row["machine_type"].strip()
        try:
            idx = int(row["phase_index"])
            cat = row["category"].strip()
            dur = float(row["duration_days"])
        except (TypeError, ValueError) as exc:
            raise DataError(f"{name}, line {lineno}: {exc}") from None
        rows.setdefault(mt, {})
        if idx in rows[mt]:
            raise DataError(f"{name}, line {lineno}: duplicate phase {idx} for {mt!r}")
        rows[mt][idx] = (cat, dur)
    specs = {}
    for mt, phases in rows.items():
        if sorted(phases) != list(range(len(phases))):
            raise DataError(f"{name}: phase indices for {mt!r} are not 0..k-1")
        specs[mt] = tuple(phases[k] for k in range(len(phases)))
    validate_type_specs(specs)
    return specs


def gen_hfs(variant: str, n: int, seed, type_specs: dict = None,
            capacities: dict = None, assembly_areas: int = 20,
            transport_days: float = 2.0) -> HfsInstance:
    """Generate a flow-shop instance for variants d1..d4."""
    if variant not in HFS_VARIANTS:
        raise ValueError(f"variant must be one of {HFS_VARIANTS}, got {variant!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if type_specs is None:
        type_specs = default_machine_types()
    if capacities is None:
        capacities = {"M": 5, "E": 5, "R": 5}
    families = {"d1": ALL_MACHINE_TYPES, "d2": LT7_FAMILY,
                "d3": LT8_FAMILY, "d4": ALL_MACHINE_TYPES}
    family = families[variant]
    jobs = []
    for i in range(n):
        mt = family[int(rng.integers(0, len(family)))]
        if variant == "d4":
            lo, hi = D4_GROUP_WINDOWS[int(rng.integers(0, len(D4_GROUP_WINDOWS)))]
            basement = int(rng.integers(lo, hi + 1))
            panel = int(rng.integers(lo, hi + 1))
        else:
            basement = int(rng.integers(1, 21))
            panel = int(rng.integers(1, 21))
        due = basement + int(rng.integers(20, 51))
        jobs.append(Job(id=i, machine_type=mt, due_day=float(due),
                        basement_day=float(basement), panel_day=float(panel)))
    return HfsInstance(jobs=tuple(jobs), type_specs=type_specs,
                       capacities=dict(capacities),
                       assembly_areas=assembly_areas,
                       transport_days=transport_days)


def save_makeorbuy(orders, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "qty_a", "qty_b", "qty_c", "deadline_day"])
        for o in orders:
            writer.writerow([o.id, o.qty_a, o.qty_b, o.qty_c, _num(o.deadline_day)])


def load_makeorbuy(path) -> list:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"id", "qty_a", "qty_b", "qty_c", "deadline_day"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            missing = sorted(needed - set(reader.fieldnames or ()))
            raise DataError(f"{path}: missing columns {missing}")
        orders = []
        for lineno, row in enumerate(reader, start=2):
            try:
                orders.append(Order(
                    id=int(row["id"]),
                    qty_a=int(row["qty_a"]),
                    qty_b=int(row["qty_b"]),
                    qty_c=int(row["qty_c"]),
                    deadline_day=float(row["deadline_day"]),
                ))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}, line {lineno}: {exc}") from None
    if not orders:
        raise DataError(f"{path}: no orders")
    return orders


def save_hfs(instance: HfsInstance, path):
    """Write the job list; capacities/areas/transport are load parameters."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "machine_type", "due_day", "basement_day", "panel_day"])
        for job in instance.jobs:
            writer.writerow([job.id, job.machine_type, _num(job.due_day),
                             _num(job.basement_day), _num(job.panel_day)])


def load_hfs(path, type_specs: dict = None, capacities: dict = None,
             assembly_areas: int = 20, transport_days: float = 2.0) -> HfsInstance:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    if type_specs is None:
        type_specs = default_machine_types()
    if capacities is None:
        capacities = {"M": 5, "E": 5, "R": 5}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"id", "machine_type", "due_day", "basement_day", "panel_day"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            missing = sorted(needed - set(reader.fieldnames or ()))
            raise DataError(f"{path}: missing columns {missing}")
        jobs = []
        for lineno, row in enumerate(reader, start=2):
            mt = (row["machine_type"] or "").strip()
            if mt not in type_specs:
                raise DataError(f"{path}, line {lineno}: unknown machine type {mt!r}")
            try:
                jobs.append(Job(
                    id=int(row["id"]),
                    machine_type=mt,
                    due_day=float(row["due_day"]),
                    basement_day=float(row["basement_day"]),
                    panel_day=float(row["panel_day"]),
                ))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}, line {lineno}: {exc}") from None
    if not jobs:
        raise DataError(f"{path}: no jobs")
    return HfsInstance(jobs=tuple(jobs), type_specs=type_specs,
                       capacities=dict(capacities),
                       assembly_areas=assembly_areas,
                       transport_days=transport_days)


def _num(x: float) -> str:
    f = float(x)
    return str(int(f)) if f == int(f) else repr(f)
