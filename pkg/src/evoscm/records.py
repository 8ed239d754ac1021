"""Run records shared by every optimizer and the benchmark harness."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class RunRecord:
    """One optimizer run.

    ``trace`` holds the best-so-far objective after each consumed episode, so
    its length equals ``episodes``. ``solution`` is a serialized final
    solution (bit string, permutation, or one-line policy). ``wall_time`` and
    ``artifacts`` are informational only: excluded from equality, so records
    with equal semantic content compare equal (the determinism contract).
    """

    algo: str
    seed: int
    trace: list
    final_objective: float
    solution: str
    episodes: int
    params: dict = field(default_factory=dict)
    problem: str = ""
    dataset: str = ""
    wall_time: float = field(default=0.0, compare=False)
    artifacts: dict = field(default_factory=dict, compare=False, repr=False)


class BestTrace:
    """Per-episode best-so-far trace.

    An evaluation that cost ``count`` episodes finishes before its result is
    known, so it appends count-1 entries at the previous best and one entry
    at the updated best. The trace is monotone in the optimization direction.
    """

    def __init__(self, maximize: bool = True):
        self.maximize = maximize
        self.values: list = []
        self.best = None
        self.best_payload = None

    def improves(self, value: float) -> bool:
        if self.best is None:
            return True
        return value > self.best if self.maximize else value < self.best

    def record(self, value: float, count: int = 1, payload=None):
        if count < 1:
            raise ValueError("an evaluation must consume at least one episode")
        value = float(value)
        previous = value if self.best is None else self.best
        if self.improves(value):
            self.best = value
            self.best_payload = payload
        self.values.extend([previous] * (count - 1))
        self.values.append(self.best)
