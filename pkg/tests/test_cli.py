# -*- coding: utf-8 -*-
import os
import csv
import json
import shutil
import unittest
from io import StringIO
from unittest import mock
from fractions import Fraction

import lossyrepair.cli
from lossyrepair import commands, codesim
from lossyrepair.util import capture


FILE_OPTIONS = ["--n", "10", "--k", "5", "--M", "70"]


def run(argv):
    """Run the command line, returning (exit code, stdout, stderr)."""
    out, err = StringIO(), StringIO()
    with capture(stderr=err, stdout=out):
        config = lossyrepair.cli.build_configuration().ask_user(argv=argv)
        status = commands.run(config)
    return status, out.getvalue(), err.getvalue()


def read_rows(text):
    return list(csv.DictReader(StringIO(text)))


class TestConfiguration(unittest.TestCase):

    def setUp(self):
        self.workdir = "/tmp/lossyrepair_testdir"
        if not os.path.isdir(self.workdir):
            os.mkdir(self.workdir)

    def tearDown(self):
        if os.path.isdir(self.workdir):
            shutil.rmtree(self.workdir)

    def write_config(self, text):
        path = os.path.join(self.workdir, "options.ini")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_Configuration_instantiate(self):
        c = lossyrepair.cli.Configuration(prompt_user=False)
        self.assertIs(type(c), lossyrepair.cli.Configuration)
        self.assertTrue(hasattr(c, "description"))
        self.assertTrue(hasattr(c, "version"))
        self.assertFalse(hasattr(c, "__getitem__"))

    def test_Configuration_add(self):
        c = lossyrepair.cli.Configuration(defaults=False, prompt_user=False)
        ret = c.add("alpha_prime", desc="repairing node storage", default="3", short="-a")
        self.assertIs(ret, c)
        self.assertTrue("alpha_prime" in c._user_arguments)
        o = c._user_arguments["alpha_prime"]
        self.assertEqual(o.long, "--alpha-prime")
        self.assertEqual(o.short, "-a")
        self.assertIn("a", c._shorts)
        self.assertEqual(o.keywords["help"], "repairing node storage\n[default: %(default)s]")
        self.assertEqual(o.keywords["default"], "3")
        c.add("d1", desc="code helpers")
        self.assertEqual(c._user_arguments["d1"].long, "--d1")

    def test_Configuration_remove(self):
        c = lossyrepair.cli.Configuration(prompt_user=False)
        c.remove("output")
        self.assertFalse("output" in c._arguments)
        self.assertFalse("o" in c._shorts)
        c.ask_user()
        self.assertIs(c.get("output"), None)

    def test_Configuration_defaults(self):
        c = lossyrepair.cli.Configuration(defaults=True)
        self.assertGreater(len(c._arguments), 1)
        self.assertGreater(len(c._shorts), 1)
        c.ask_user(argv=[])
        self.assertEqual(c.jobs, 1)
        self.assertEqual(c.format, "csv")
        self.assertEqual(c.log_level, "WARNING")

    def test_Configuration_ask_user(self):
        c = lossyrepair.cli.Configuration(defaults=True, remove_options=["output"],
                                          commands=["psr"])
        c.add("beta", desc="packets", default="2")
        c.ask_user(argv=["psr", "--beta", "3", "-j", "4"])
        self.assertEqual(c.command, "psr")
        self.assertEqual(c.beta, "3")
        self.assertEqual(c.jobs, 4)
        self.assertTrue(c._user_asked)
        values = c.get_option_values()
        self.assertEqual(list(values)[0], "command")
        self.assertEqual(values["beta"], "3")

    def test_bad_command(self):
        err = StringIO()
        with capture(stderr=err):
            with self.assertRaises(SystemExit) as cm:
                lossyrepair.cli.build_configuration().ask_user(argv=["decode"])
        self.assertEqual(cm.exception.code, 2)

    def test_config_file(self):
        path = self.write_config("[lossyrepair]\nn = 10\nk = 5\nd = 9\nM = 70\n"
                                 "printed-g = yes\n")
        c = lossyrepair.cli.build_configuration().ask_user(
            argv=["tradeoff", "--config", path, "--d", "8"])
        self.assertEqual(c.n, "10")
        self.assertEqual(c.d, "8")
        self.assertEqual(c.M, "70")
        self.assertIs(c.printed_g, True)

    def test_config_file_unknown_key(self):
        path = self.write_config("[lossyrepair]\nalpha_prim = 3\n")
        err = StringIO()
        with capture(stderr=err):
            with self.assertRaises(SystemExit) as cm:
                lossyrepair.cli.build_configuration().ask_user(
                    argv=["tradeoff", "--config", path])
        self.assertEqual(cm.exception.code, 2)
        self.assertIn("Unknown option `alpha_prim'", err.getvalue())
        self.assertIn("alpha_prime", err.getvalue())

    def test_config_file_missing(self):
        err = StringIO()
        with capture(stderr=err):
            with self.assertRaises(SystemExit):
                lossyrepair.cli.build_configuration().ask_user(
                    argv=["tradeoff", "--config", os.path.join(self.workdir, "none.ini")])


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.workdir = "/tmp/lossyrepair_testdir"
        if not os.path.isdir(self.workdir):
            os.mkdir(self.workdir)

    def tearDown(self):
        if os.path.isdir(self.workdir):
            shutil.rmtree(self.workdir)

    def test_tradeoff(self):
        status, out, err = run(["tradeoff", "--d", "9"] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], "gamma_prime,alpha,segment_index,p")
        self.assertEqual(lines[1], "18,18,4,0")
        self.assertEqual(lines[-1], "126/5,14,0,0")
        self.assertEqual(len(lines), 6)
        self.assertIn("tradeoff: 5 points", err)

    def test_tradeoff_json_and_helper_storage(self):
        status, out, err = run(["tradeoff", "--d", "8", "--h", "1", "--helper-storage",
                                "--format", "json"] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_OK)
        records = json.loads(out)
        self.assertEqual(records[0]["alpha"], 18)
        self.assertEqual(records[0]["segment_index"], 4)
        self.assertIn("minimum alpha'=10", err)

    def test_capacity(self):
        status, out, err = run(["capacity", "--d", "9", "--alpha", "18", "--beta", "2",
                                "--p", "0,3/10"] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_OK)
        rows = read_rows(out)
        self.assertEqual([r["capacity"] for r in rows], ["70", "70"])
        self.assertEqual(rows[1]["beta_sent"], "20/7")
        for r in rows:
            self.assertEqual(r["capacity"], r["min_cut"])

    def test_flowgraph(self):
        status, out, err = run(["flowgraph", "--n", "4", "--k", "2", "--d", "2",
                                "--alpha", "2", "--beta", "1"])
        self.assertEqual(status, commands.EXIT_OK)
        doc = json.loads(out)
        self.assertEqual(doc["cut"], "3")
        self.assertIn("S", doc["source_side"])
        self.assertIn("DC", doc["sink_side"])
        self.assertEqual(len(doc["dc_nodes"]), 2)

        path = os.path.join(self.workdir, "schedule.json")
        with open(path, "w") as f:
            json.dump({"stages": [{"failed": 0, "helpers": [1, 2]}], "dc_nodes": [0, 3]}, f)
        status, out, err = run(["flowgraph", "--n", "4", "--k", "2", "--d", "2",
                                "--alpha", "2", "--beta", "1", "--schedule", path])
        self.assertEqual(status, commands.EXIT_OK)
        self.assertEqual(json.loads(out)["dc_nodes"], [0, 3])

    def test_psr_reproducible(self):
        argv = ["psr", "--d", "9", "--beta", "2", "--p", "0.3", "--q", "256",
                "--tmin", "4", "--tmax", "5", "--trials", "1000", "--seed", "7"]
        status, first, _ = run(argv)
        self.assertEqual(status, commands.EXIT_OK)
        _, second, _ = run(argv)
        self.assertEqual(first, second)
        rows = read_rows(first)
        self.assertEqual([r["t"] for r in rows], ["4", "5"])
        self.assertAlmostEqual(float(rows[0]["p_beta"]), .915256, places=6)
        self.assertNotEqual(rows[0]["p_s_empirical"], "")

    def test_psr_simulates_by_default(self):
        with mock.patch.object(commands, "PSR_TRIALS", 2000):
            status, out, err = run(["psr", "--d", "4", "--beta", "2", "--p", "0.1",
                                    "--seed", "3"])
        self.assertEqual(status, commands.EXIT_OK)
        row = read_rows(out)[0]
        self.assertNotEqual(row["p_s_empirical"], "")
        self.assertNotEqual(row["ci_halfwidth"], "")
        status, out, err = run(["psr", "--d", "4", "--beta", "2", "--trials", "0"])
        self.assertEqual(read_rows(out)[0]["p_s_empirical"], "")

    def test_psr_prints_seed(self):
        status, out, err = run(["psr", "--d", "4", "--beta", "2", "--trials", "10"])
        self.assertEqual(status, commands.EXIT_OK)
        self.assertIn("Using seed", err)

    def test_optimize(self):
        status, out, err = run(["optimize", "--dtot", "9", "--p", "0.3", "--delta", "0.01"]
                               + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_OK)
        rows = read_rows(out)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]["p"], "3/10")
        self.assertLessEqual(Fraction(rows[0]["bandwidth"]), 45)
        self.assertGreaterEqual(float(rows[0]["ps_analytic"]), 0.99)

    def test_optimize_infeasible(self):
        status, out, err = run(["optimize", "--dtot", "6", "--p", "0.9", "--q", "2",
                                "--t-cap", "20"] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_INFEASIBLE)
        self.assertIn("p=9/10", err)
        self.assertEqual(read_rows(out), [])

    def test_sweep(self):
        path = os.path.join(self.workdir, "out", "sweep.csv")
        status, out, err = run(["sweep", "--dtot", "9", "--p", "0,0.9", "--q", "2",
                                "--t-cap", "40", "-o", path] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_OK)
        self.assertIn("sweep: 2 probabilities, 1 infeasible", out)
        with open(path) as f:
            rows = read_rows(f.read())
        self.assertEqual([r["status"] for r in rows], ["ok", "infeasible"])
        self.assertEqual(rows[1]["d1"], "")

    def test_construct_and_repair(self):
        path = os.path.join(self.workdir, "state.json")
        status, out, err = run(["construct", "--n", "4", "--k", "2", "--mode", "msr", "-o", path])
        self.assertEqual(status, commands.EXIT_OK)
        self.assertIn("GF(13)", out)
        repaired = os.path.join(self.workdir, "repaired.json")
        status, out, err = run(["repair", "--state", path, "--stages", "8", "--seed", "1",
                                "-o", repaired])
        self.assertEqual(status, commands.EXIT_OK)
        with open(repaired) as f:
            doc = json.load(f)
        self.assertEqual(doc["stage"], 8)
        self.assertEqual([t["stage"] for t in doc["transcripts"]], list(range(1, 9)))
        last = codesim.RepairTranscript.from_json(doc["transcripts"][-1])
        self.assertEqual(last.failed, 3)
        self.assertEqual(codesim.StorageState.from_json(doc).stage, 8)

    def test_short_repairing_storage(self):
        path = os.path.join(self.workdir, "state.json")
        status, _, _ = run(["construct", "--n", "6", "--k", "3", "--d", "5", "--beta", "1",
                            "--alpha-prime", "2", "--seed", "7", "-o", path])
        self.assertEqual(status, commands.EXIT_OK)
        status, out, err = run(["repair", "--state", path, "--stages", "8", "--seed", "7"])
        self.assertEqual(status, commands.EXIT_CONSTRUCTION)
        self.assertIn("lossyrepair: error:", err)

    def test_usage_errors(self):
        status, out, err = run(["tradeoff", "--d", "3"] + FILE_OPTIONS)
        self.assertEqual(status, commands.EXIT_USAGE)
        self.assertIn("lossyrepair: error:", err)
        status, _, err = run(["tradeoff", "--n", "10", "--k", "5", "--d", "9"])
        self.assertEqual(status, commands.EXIT_USAGE)
        status, _, err = run(["repair", "--state", os.path.join(self.workdir, "none.json")])
        self.assertEqual(status, commands.EXIT_USAGE)


if __name__ == "__main__":
    unittest.main()
