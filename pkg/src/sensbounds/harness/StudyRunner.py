from collections.abc import Callable, Iterable
from dataclasses import dataclass
from queue import Queue
from threading import Condition, Thread
from typing import Generic, TypeVar

from sortedcontainers import SortedDict

R = TypeVar("R")


@dataclass(slots=True, frozen=True, order=True)
class RowTask:
    """One (mesh, ξ) point of a study. Ordering is coarse mesh first, then ξ."""

    divisions: int
    xi: float


class StudyRunner(Generic[R]):
    """
    Evaluates study rows on worker threads and hands them back in task order.

    Results accumulate in a SortedDict keyed by :class:`RowTask`, so the
    aggregated order is coarsest mesh first (h descending), then ξ ascending,
    whatever order the workers finish in.

    Thread Safety:
        - submit() and wait() may be called from any thread
        - A single Condition (_done_signal) guards the result store
        - ``evaluate`` runs unlocked and must not raise; row failures are
          expected to be folded into the returned row

    Example:
        runner = StudyRunner(evaluate_row, workers=4)
        rows = runner.run(RowTask(n, xi) for n in meshes for xi in xis)

    With ``workers=1`` every task is evaluated inline in submit().
    """

    def __init__(self, evaluate: Callable[[RowTask], R], workers: int = 1):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self._evaluate = evaluate
        self._results: SortedDict = SortedDict()
        self._pending = 0
        self._submitted: set[RowTask] = set()
        self._done_signal = Condition()
        self._queue: Queue[RowTask | None] = Queue()
        self._threads: list[Thread] = []
        if workers > 1:
            self._threads = [
                Thread(target=self._worker, daemon=True) for _ in range(workers)
            ]
            for thread in self._threads:
                thread.start()

    def submit(self, task: RowTask) -> None:
        with self._done_signal:
            if task in self._submitted:
                raise ValueError(f"Duplicate study row {task}")
            self._submitted.add(task)
            self._pending += 1
        if self._threads:
            self._queue.put(task)
        else:
            self._store(task, self._evaluate(task))

    def wait(self) -> list[R]:
        """Block until every submitted task reported; rows in key order."""
        with self._done_signal:
            self._done_signal.wait_for(lambda: self._pending == 0)
            return list(self._results.values())

    def close(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join()
        self._threads = []

    def run(self, tasks: Iterable[RowTask]) -> list[R]:
        try:
            for task in tasks:
                self.submit(task)
            return self.wait()
        finally:
            self.close()

    def _store(self, task: RowTask, row: R) -> None:
        with self._done_signal:
            self._results[task] = row
            self._pending -= 1
            self._done_signal.notify_all()

    def _worker(self) -> None:
        while True:
            task = self._queue.get()
            if task is None:
                return
            self._store(task, self._evaluate(task))
