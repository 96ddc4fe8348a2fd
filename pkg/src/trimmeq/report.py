"""Run reports: which gates a pipeline passed and where it stopped."""

from __future__ import annotations


class RunReport:
    """Accumulates gate names as a pipeline run progresses."""

    def __init__(self, seed=None):
        self.seed = seed
        self.gates_passed: list[str] = []
        self.failed_gate: str | None = None
        self.pit_trials = 0
        self.wall_time = 0.0

    def gate(self, name: str):
        self.gates_passed.append(name)

    def fail(self, name: str):
        self.failed_gate = name

    def to_dict(self):
        return {
            "seed": self.seed,
            "gates_passed": self.gates_passed,
            "failed_gate": self.failed_gate,
            "pit_trials": self.pit_trials,
            "wall_time_s": round(self.wall_time, 3),
        }


def _gate(report, name: str):
    if report is not None:
        report.gate(name)


def _fail(report, name: str):
    if report is not None:
        report.fail(name)
