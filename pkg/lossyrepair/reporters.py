# -*- coding: utf-8 -*-
import os
import sys
import logging
import collections

from .util import mkdirp

#: Marks logged option values so :meth:`LoggerReporter.read_log` finds them.
OPTION_MARKER = "Option: "
#: Marks logged result summaries.
SUMMARY_MARKER = "Summary: "


def default(log_level=None, log_file=None, progress=False):
    """The reporters used by the command line: a :class:`LoggerReporter`
    and, if ``progress`` is set, a :class:`ConsoleReporter`."""
    reporters = [LoggerReporter(log_level, log_file)]
    if progress:
        reporters.append(ConsoleReporter())
    return ReporterGroup(reporters)


class BaseReporter(object):

    """The base reporter defines the hooks a runner calls while it works
    through a list of jobs. Every hook does nothing by default.
    """

    def started(self, jobs):
        """Executed when a runner starts.

        :param jobs: The jobs that are about to run.
        :type jobs: list of :class:`lossyrepair.runners.Job`
        """
        pass

    def job_started(self, job):
        """Executed when a job is handed to a worker.

        :type job: :class:`lossyrepair.runners.Job`
        """
        pass

    def job_failed(self, result):
        """Executed when a job raises.

        :param result: The result, whose ``error`` holds the traceback.
        :type result: :class:`lossyrepair.runners.JobResult`
        """
        pass

    def job_completed(self, result):
        """Executed when a job returns without error.

        :type result: :class:`lossyrepair.runners.JobResult`
        """
        pass

    def finished(self):
        """Executed when every job has a result."""
        pass


class ReporterGroup(BaseReporter):
    """Pass every hook on to several reporters in order.

    :param other_reporters: The reporters to group together.
    :type other_reporters: list of :class:`BaseReporter`
    """

    def __init__(self, other_reporters):
        self.reporters = list(other_reporters)

    def started(self, jobs):
        for r in self.reporters:
            r.started(jobs)

    def job_started(self, job):
        for r in self.reporters:
            r.job_started(job)

    def job_failed(self, result):
        for r in self.reporters:
            r.job_failed(result)

    def job_completed(self, result):
        for r in self.reporters:
            r.job_completed(result)

    def finished(self):
        for r in self.reporters:
            r.finished()

    def log_options(self, options):
        for r in self.reporters:
            if hasattr(r, "log_options"):
                r.log_options(options)

    def log_summary(self, summary):
        for r in self.reporters:
            if hasattr(r, "log_summary"):
                r.log_summary(summary)


class ConsoleReporter(BaseReporter):
    """Prints out job progress to stderr.
    An example readout is as follows:

    ::

      (+)[  3/ 10 -  30.00%] block 2

    The status in parentheses is `` `` for a started job, ``+`` for a
    completed one and ``!`` for a failure.
    """

    msg_str = "({:.1})[{:3}/{:3} - {:6.2f}%] {:.57}"

    class stats:
        fail = "!"
        done = "+"
        start = " "

    def __init__(self, stream=None):
        self.stream = stream
        self.names = {}
        self.failed_results = list()
        self.n_tasks = 0
        self.n_complete = 0

    def _write(self, s):
        (self.stream or sys.stderr).write(s)

    def _msg(self, status, name):
        percent = (float(self.n_complete) / self.n_tasks) * 100 if self.n_tasks else 100.0
        self._write(self.msg_str.format(status, self.n_complete, self.n_tasks,
                                        percent, name) + "\n")

    def started(self, jobs):
        self.names = dict((job.job_no, job.name) for job in jobs)
        self.failed_results = list()
        self.n_tasks = len(self.names)
        self.n_complete = 0

    def job_started(self, job):
        self._msg(self.stats.start, job.name)

    def job_failed(self, result):
        self.n_complete += 1
        name = self.names.get(result.job_no, str(result.job_no))
        self.failed_results.append((name, result))
        self._msg(self.stats.fail, name)

    def job_completed(self, result):
        self.n_complete += 1
        self._msg(self.stats.done, self.names.get(result.job_no, str(result.job_no)))

    def finished(self):
        for name, result in self.failed_results:
            self._write("Job {} failed\n".format(result.job_no))
            self._write("  Name: " + name + "\n")
            self._write("  Original error: \n")
            for line in result.error.split("\n"):
                self._write("  " + line + "\n")


class LoggerReporter(BaseReporter):
    """A reporter that uses :mod:`logging`.

    :param loglevel_str: The logging level. Valid levels: DEBUG, INFO,
      WARNING, ERROR, CRITICAL. Defaults to WARNING.
    :type loglevel_str: str

    :param logfile: The file to log to. Defaults to stderr.
    :type logfile: str or file-like

    :param fmt_str: The log format. See :mod:`logging` for more
      information
    :type fmt_str: str

    """

    FORMAT = "%(asctime)s\t%(name)s\t%(funcName)s\t%(levelname)s: %(message)s"

    def __init__(self, loglevel_str=None, logfile=None, fmt_str=None):
        if logfile and not hasattr(logfile, "write"):
            mkdirp(os.path.dirname(os.path.abspath(logfile)))
        self.logger = logging.getLogger(self.__class__.__name__)
        self.loglevel_str = (loglevel_str or "WARNING").upper()
        loglevel = getattr(logging, self.loglevel_str)
        logkwds = {"format": fmt_str or self.FORMAT,
                   "level": loglevel}
        if logfile and hasattr(logfile, "write"):
            logkwds["stream"] = logfile
        elif logfile:
            logkwds["filename"] = logfile
        logging.basicConfig(**logkwds)
        self.names = {}
        self.any_failed = False

    @classmethod
    def read_log(cls, file, type):
        """Read the options or the summaries back out of a log file.

        :param type: ``"options"`` for an ordered mapping of option name
          to value, ``"summary"`` for the list of summary lines
        """
        with open(file) as file_handle:
            lines = file_handle.readlines()

        if type == "options":
            log_info = collections.OrderedDict()
            for line in lines:
                if OPTION_MARKER in line and " = " in line:
                    data = line.rstrip("\n").split(OPTION_MARKER, 1)[-1]
                    name, value = data.split(" = ", 1)
                    log_info[name] = value
        elif type == "summary":
            log_info = [line.rstrip("\n").split(SUMMARY_MARKER, 1)[-1]
                        for line in lines if SUMMARY_MARKER in line]
        else:
            raise ValueError("Unknown log record type `{}'".format(type))
        return log_info

    def log_options(self, options):
        for name, value in options.items():
            self.logger.info("%s%s = %s", OPTION_MARKER, name, value)

    def log_summary(self, summary):
        self.logger.info("%s%s", SUMMARY_MARKER, summary)

    def started(self, jobs):
        self.names = dict((job.job_no, job.name) for job in jobs)
        self.any_failed = False
        self.logger.info("Starting %i jobs", len(self.names))

    def job_started(self, job):
        self.logger.debug("job %s, %s : started", job.job_no, job.name)

    def job_failed(self, result):
        self.logger.error("job %s, %s : Failed! Error message : %s", result.job_no,
                          self.names.get(result.job_no), result.error)
        self.any_failed = True

    def job_completed(self, result):
        self.logger.debug("job %s, %s : completed successfully", result.job_no,
                          self.names.get(result.job_no))

    def finished(self):
        if self.any_failed:
            self.logger.error("Jobs finished with errors.")
        else:
            self.logger.info("Jobs finished.")
