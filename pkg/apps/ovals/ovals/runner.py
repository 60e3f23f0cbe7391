import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Tuple

logger = logging.getLogger(__name__)


class SweepJob:
    """
    One independent element of a sweep: a picklable module-level function and
    its arguments.

    :param fn:
    :param args:
    """

    def __init__(self, fn: Callable, args: Tuple):
        self.fn = fn
        self.args = args
        self.index: int = None

    def __call__(self) -> Any:
        return self.fn(*self.args)

    def __str__(self):
        return f"Job {self.index}: {getattr(self.fn, '__name__', self.fn)}{self.args}"


def _execute(job: SweepJob) -> Any:
    return job()


class SweepRunner:
    """
    Class to handle running each of the jobs of a sweep.

    Jobs run on a process pool when `threads` > 1 and in-process otherwise;
    results are collected by this single owner and returned in the order the
    jobs were added, so the output does not depend on scheduling.
    """

    # log a progress line every `status_every` completed jobs
    status_every: int = 1

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self.jobs: List[SweepJob] = []

    def add_job(self, fn: Callable, *args) -> SweepJob:
        """
        Add a job to the SweepRunner. `fn` must be importable by the worker
        processes (a module-level function) and `args` picklable.
        """
        job = SweepJob(fn, args)
        job.index = len(self.jobs)
        self.jobs.append(job)
        return job

    def run(self) -> List[Any]:
        """
        The main function to run the sweep.

        :return: results in job order
        """
        if not self.jobs:
            return []
        for job in self.jobs:
            logger.debug("[SWEEP] queued %s", job)
        if self.threads == 1 or len(self.jobs) == 1:
            results = []
            for job in self.jobs:
                results.append(job())
                self._report(len(results))
        else:
            workers = min(self.threads, len(self.jobs))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = []
                for result in pool.map(_execute, self.jobs):
                    results.append(result)
                    self._report(len(results))
        logger.info("[SWEEP] All %d jobs complete.", len(self.jobs))
        return results

    def _report(self, done: int) -> None:
        if done % self.status_every == 0:
            logger.info("[SWEEP] %d/%d jobs complete", done, len(self.jobs))
