"""Benchmark and task definitions.

Two built-in benchmarks:

* ``gridpp``   - 4 objects x 4 target pads = 16 pickplace tasks, one
  held-out (object, target) pair.
* ``gridpush`` - 2 objects x 2 push directions = 4 tasks, one held-out
  (object, direction) pair. Initial frames carry no direction cue, so
  the held-out direction can only be solved by following the demo.
"""
from __future__ import annotations

from dataclasses import dataclass

FORWARD = "forward"
BACKWARD = "backward"

PICKPLACE_TEST_PAIR = (3, 3)
PUSH_TEST_PAIR = (1, BACKWARD)


@dataclass(frozen=True)
class TaskSpec:
    family: str              # "pickplace" | "push"
    object_id: int
    target_id: object        # pad index for pickplace, direction for push
    split: str               # "train" | "test"

    @property
    def task_id(self) -> str:
        if self.family == "pickplace":
            return f"o{self.object_id}-t{self.target_id}"
        return f"o{self.object_id}-{'fwd' if self.target_id == FORWARD else 'bwd'}"


def pickplace_tasks():
    out = []
    for obj in range(4):
        for tgt in range(4):
            split = "test" if (obj, tgt) == PICKPLACE_TEST_PAIR else "train"
            out.append(TaskSpec("pickplace", obj, tgt, split))
    return out


def push_tasks():
    out = []
    for obj in range(2):
        for direction in (FORWARD, BACKWARD):
            split = "test" if (obj, direction) == PUSH_TEST_PAIR else "train"
            out.append(TaskSpec("push", obj, direction, split))
    return out


BENCHMARKS = {
    "gridpp": pickplace_tasks,
    "gridpush": push_tasks,
}


def benchmark_tasks(name):
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; expected one of {sorted(BENCHMARKS)}")
    return BENCHMARKS[name]()


def benchmark_family(name):
    return {"gridpp": "pickplace", "gridpush": "push"}[name]


def task_by_id(benchmark, task_id):
    for t in benchmark_tasks(benchmark):
        if t.task_id == task_id:
            return t
    raise KeyError(f"no task {task_id!r} in benchmark {benchmark!r}")


def push_direction_vector(direction):
    if direction == FORWARD:
        return (0.0, 1.0)
    if direction == BACKWARD:
        return (0.0, -1.0)
    raise ValueError(f"unknown push direction {direction!r}")
