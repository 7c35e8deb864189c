# -*- coding: utf-8 -*-
"""Execute independent jobs (Monte Carlo blocks, optimization grid
points, sweep rows) serially or on local worker processes.

Results always come back ordered by job number, whatever order the
workers finish in.
"""
import logging
import traceback
import multiprocessing
import pickle
from collections import namedtuple

from .util import try_pickle_dumps

logger = logging.getLogger(__name__)


class Job(namedtuple("Job", ["job_no", "name", "func", "args", "kwargs"])):
    """A unit of work: ``func(*args, **kwargs)``.

    :param job_no: The position of this job; results are ordered by it.
    :type job_no: int

    :param name: A short description shown by reporters.
    :type name: str
    """
    pass


class JobResult(namedtuple("JobResult", ["job_no", "error", "value"])):
    """The result of a job's execution.

    :param job_no: The number of the job that produced this result.
    :type: int

    :param error: The error generated by executing the job. None if
      the job was successful.
    :type: str or None

    :param value: What the job returned. None if the job failed.
    """
    pass


class JobFailed(Exception):
    def __init__(self, msg, job_no):
        self.job_no = job_no
        super(JobFailed, self).__init__(msg)


class BaseRunner(object):
    def __init__(self, reporter=None):
        self.reporter = reporter

    def run_jobs(self, jobs):
        raise NotImplementedError()

    def _report(self, hook, *args):
        if self.reporter is not None:
            getattr(self.reporter, hook)(*args)

    def _handle_result(self, result):
        if result.error:
            self._report("job_failed", result)
        else:
            self._report("job_completed", result)


class SerialRunner(BaseRunner):

    def run_jobs(self, jobs):
        jobs = list(jobs)
        logger.debug("Running %i jobs serially", len(jobs))
        self._report("started", jobs)
        results = []
        for job in jobs:
            self._report("job_started", job)
            result = _run_job_locally(job)
            self._handle_result(result)
            results.append(result)
        self._report("finished")
        return sorted(results, key=lambda r: r.job_no)


def worker_run_loop(work_q, result_q, run_job):
    logger.debug("Starting worker")
    while True:
        try:
            pkl = work_q.get()
        except (IOError, EOFError) as e:
            logger.debug("Received %s from work_q", type(e).__name__)
            break
        if type(pkl) is dict and pkl.get("stop", False):
            logger.debug("Received sentinel, stopping")
            break
        try:
            job = pickle.loads(pkl)
        except Exception as e:
            result_q.put_nowait(exception_result(e))
            logger.debug("Failed to deserialize job")
            continue
        logger.debug("Running job %s", job.job_no)
        result_q.put_nowait(run_job(job))


def _run_job_locally(job):
    try:
        value = job.func(*job.args, **job.kwargs)
    except Exception:
        msg = ("Error executing job {} ({}). "
               "Original Exception: \n{}")
        return exception_result(
            JobFailed(msg.format(job.job_no, job.name, traceback.format_exc()), job.job_no))
    return JobResult(job.job_no, None, value)


class ParallelWorker(multiprocessing.Process):

    def __init__(self, work_q, result_q):
        super(ParallelWorker, self).__init__()
        self.work_q = work_q
        self.result_q = result_q
        self.daemon = True

    def run(self):
        return worker_run_loop(self.work_q, self.result_q, _run_job_locally)


class ParallelRunner(BaseRunner):

    def __init__(self, jobs, reporter=None):
        super(ParallelRunner, self).__init__(reporter)
        self.n_workers = jobs

    def run_jobs(self, jobs):
        jobs = list(jobs)
        self.work_q = multiprocessing.Queue()
        self.result_q = multiprocessing.Queue()
        self.workers = [ParallelWorker(self.work_q, self.result_q)
                        for _ in range(min(self.n_workers, max(len(jobs), 1)))]
        logger.debug("Running %i jobs in parallel with %i workers",
                     len(jobs), len(self.workers))
        self._report("started", jobs)
        for job in jobs:
            try:
                pkl = try_pickle_dumps(job)
            except Exception as e:
                msg = ("Unable to serialize job `{}'. "
                       "Original error was `{}'.")
                raise ValueError(msg.format(job.name, e))
            self._report("job_started", job)
            self.work_q.put(pkl)
        for w in self.workers:
            w.start()

        results = []
        while len(results) < len(jobs):
            try:
                result = self.result_q.get()
            except (SystemExit, KeyboardInterrupt):
                logger.info("Terminating due to SystemExit or Ctrl-C")
                self.terminate()
                raise
            except Exception as e:
                logger.error("Terminating due to unhandled exception")
                logger.exception(e)
                self.terminate()
                raise
            self._handle_result(result)
            results.append(result)

        self.cleanup()
        self._report("finished")
        return sorted(results, key=lambda r: (r.job_no is None, r.job_no))

    def terminate(self):
        logger.debug("Terminating all workers")
        for worker in self.workers:
            worker.terminate()
        for worker in self.workers:
            worker.join()

    def cleanup(self):
        for w in self.workers:
            logger.debug("giving stop sentinel to worker %s", w)
            self.work_q.put({"stop": True})
        for w in self.workers:
            w.join()
        logger.debug("successfully cleaned up parallel runner")


def default(jobs, reporter=None):
    if jobs < 2:
        return SerialRunner(reporter)
    else:
        return ParallelRunner(jobs, reporter)


def collect(results):
    """The values of ``results`` in job order.

    :raises JobFailed: for the first failed job
    """
    values = []
    for result in results:
        if result.error:
            raise JobFailed(result.error, result.job_no)
        values.append(result.value)
    return values


def exception_result(exc):
    return JobResult(getattr(exc, "job_no", None), str(exc), None)
