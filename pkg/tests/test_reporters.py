# -*- coding: utf-8 -*-
import os
import shutil
import unittest
from io import StringIO
from collections import OrderedDict

from lossyrepair import runners
from lossyrepair.reporters import LoggerReporter, ConsoleReporter, ReporterGroup
from lossyrepair.reporters import BaseReporter


class CountingReporter(BaseReporter):

    def __init__(self):
        self.completed = 0
        self.options = None

    def job_completed(self, result):
        self.completed += 1

    def log_options(self, options):
        self.options = options


class TestReporters(unittest.TestCase):

    def setUp(self):
        self.workdir = "/tmp/lossyrepair_testdir"
        # create the work directory
        if not os.path.isdir(self.workdir):
            os.mkdir(self.workdir)

        # create a demo log file
        self.demo_log_text = """
            2026-03-02 10:12:01,101\tLoggerReporter\tlog_options\tINFO: Option: command = optimize
            2026-03-02 10:12:01,101\tLoggerReporter\tlog_options\tINFO: Option: n = 10
            2026-03-02 10:12:01,102\tLoggerReporter\tlog_options\tINFO: Option: p = 0.01:0.1:0.01
            2026-03-02 10:12:01,102\tLoggerReporter\tlog_options\tINFO: Option: delta = 1e-4
            2026-03-02 10:12:01,103\tLoggerReporter\tstarted\tINFO: Starting 15 jobs
            2026-03-02 10:12:04,377\tlossyrepair.optimizer\toptimize_plan\tINFO: p=1/100: best split d1=7 d2=0 t=18 bandwidth=126/5 (15 of 15 pairs feasible)
            2026-03-02 10:12:04,378\tLoggerReporter\tfinished\tINFO: Jobs finished.
            2026-03-02 10:12:04,379\tLoggerReporter\tlog_summary\tINFO: Summary: 10 erasure probabilities, 10 feasible
            2026-03-02 10:12:04,379\tLoggerReporter\tlog_summary\tINFO: Summary: written to sweep.csv
        """
        # write the log to a temp file
        self.demo_log_file = os.path.join(self.workdir, "demo.log")
        with open(self.demo_log_file, "wb") as file_handle:
            file_handle.write(self.demo_log_text.encode("utf-8"))

    def tearDown(self):
        # remove temp files
        if os.path.isdir(self.workdir):
            shutil.rmtree(self.workdir)

    def test_read_log_options(self):
        options = LoggerReporter.read_log(self.demo_log_file, "options")
        expected_options = OrderedDict([("command", "optimize"), ("n", "10"),
                                        ("p", "0.01:0.1:0.01"), ("delta", "1e-4")])
        self.assertEqual(options, expected_options)
        self.assertEqual(list(options), list(expected_options))

    def test_read_log_summary(self):
        summary = LoggerReporter.read_log(self.demo_log_file, "summary")
        self.assertEqual(summary, ["10 erasure probabilities, 10 feasible",
                                   "written to sweep.csv"])

    def test_read_log_unknown(self):
        with self.assertRaises(ValueError):
            LoggerReporter.read_log(self.demo_log_file, "versions")

    def test_console_reporter(self):
        stream = StringIO()
        jobs = [runners.Job(0, "block 0", pow, (2, 3), {}),
                runners.Job(1, "block 1", int, ("x",), {})]
        runners.SerialRunner(ConsoleReporter(stream)).run_jobs(jobs)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], "( )[  0/  2 -   0.00%] block 0")
        self.assertEqual(lines[1], "(+)[  1/  2 -  50.00%] block 0")
        self.assertEqual(lines[3], "(!)[  2/  2 - 100.00%] block 1")
        self.assertIn("Job 1 failed", lines)
        self.assertIn("ValueError", stream.getvalue())

    def test_reporter_group(self):
        first, second = CountingReporter(), CountingReporter()
        group = ReporterGroup([first, second, BaseReporter()])
        runners.SerialRunner(group).run_jobs([runners.Job(i, str(i), pow, (3, i), {})
                                              for i in range(5)])
        self.assertEqual((first.completed, second.completed), (5, 5))
        group.log_options({"k": 5})
        self.assertEqual(second.options, {"k": 5})


if __name__ == '__main__':
    unittest.main()
