# -*- coding: utf-8 -*-
"""The subcommands of the ``lossyrepair`` command line.

Each handler takes the parsed :class:`lossyrepair.cli.Configuration`
and a runner and returns an :class:`Output`: either a table (written
as CSV or as a JSON array of records) or a JSON document.

Exit codes: 0 success, 1 a parallel job crashed, 2 invalid input,
3 infeasible, 4 random construction failed.
"""
import os
import sys
import csv
import logging
from fractions import Fraction
from collections import namedtuple, OrderedDict

import numpy as np

from . import SystemParams, DomainError, UnsupportedError, InfeasibleError, ConstructionError
from . import analysis, flowgraph, codesim, channel, optimizer
from . import runners, reporters
from .field import FieldSpec
from .util import as_fraction, as_count, parse_values, format_exact, format_probability
from .util import serialize, deserialize, mkdirp, SerializationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_JOB_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_CONSTRUCTION = 4

DEFAULT_Q = 256
PSR_TRIALS = 100000

TRADEOFF_COLUMNS = ["gamma_prime", "alpha", "segment_index", "p"]
CAPACITY_COLUMNS = ["p", "beta_sent", "capacity", "min_cut"]
PSR_COLUMNS = ["t", "p_beta", "p_s_analytic", "p_s_empirical", "ci_halfwidth"]
OPTIMIZE_COLUMNS = ["p", "d1", "d2", "t", "gamma_hat", "ps_analytic", "ps_empirical",
                    "beta", "scale", "bandwidth"]
SWEEP_COLUMNS = OPTIMIZE_COLUMNS + ["status"]


class Output(namedtuple("Output", ["columns", "rows", "document", "summary", "status"])):
    """What a subcommand produced.

    :param columns: Column names of a table, or None for a document.
    :param rows: Table rows, each a list in column order.
    :param document: A JSON-serializable mapping, or None for a table.
    :param summary: The one-line summary.
    :param status: The exit code.
    """
    pass


def table(columns, rows, summary, status=EXIT_OK):
    return Output(columns, rows, None, summary, status)


def document(doc, summary, status=EXIT_OK):
    return Output(None, None, doc, summary, status)


###
# option helpers

def _value(config, name, required=True, default=None):
    value = getattr(config, name, None)
    if value is None or value == "":
        if required and default is None:
            raise DomainError("Missing required option --{}".format(name.replace("_", "-")))
        return default
    return value


def _fraction(config, name, required=True, default=None):
    value = _value(config, name, required, default)
    return None if value is None else as_fraction(value, name)


def _count(config, name, required=True, default=None):
    value = _value(config, name, required, default)
    return None if value is None else as_count(value, name)


def _values(config, name, default=None):
    values = parse_values(_value(config, name, default=default))
    if not values:
        raise DomainError("Option --{} has no values".format(name))
    return values


def _single(config, name, default=None):
    values = _values(config, name, default)
    if len(values) != 1:
        raise DomainError("Option --{} takes a single value here, got {}".format(name, len(values)))
    return values[0]


def _field(config, default=DEFAULT_Q):
    return FieldSpec(_count(config, "q", default=default))


def _params(config, *names, **overrides):
    """SystemParams from n, k, d and the named optional options."""
    values = dict(overrides)
    for name in ("n", "k", "d"):
        if name not in values:
            values[name] = _count(config, name)
    if "h" not in values:
        values["h"] = _count(config, "h", default=0)
    for name in names:
        if name not in values:
            values[name] = _fraction(config, name, required=False)
    return SystemParams(**values)


def _seed(config):
    if config.seed is not None:
        return config.seed
    seed = int(np.random.SeedSequence().entropy % (2 ** 31))
    sys.stderr.write("Using seed {}\n".format(seed))
    logger.info("Selected seed %i", seed)
    return seed


def _read_json(path, what):
    try:
        with open(path) as handle:
            return deserialize(from_fp=handle)
    except (IOError, OSError) as e:
        raise DomainError("Unable to read {} file {}: {}".format(what, path, e))
    except ValueError as e:
        raise DomainError("The {} file {} is not valid JSON: {}".format(what, path, e))


###
# subcommands

def tradeoff(config, runner):
    """Rows of the bandwidth-storage tradeoff for each erasure probability."""
    rows = []
    p_values = _values(config, "p", "0")
    gammas = parse_values(config.gamma) if config.gamma else None
    extra = ""
    for p in p_values:
        params = _params(config, "M", "alpha_prime", p=p)
        params.require("M")
        points = gammas if gammas is not None else sorted(set(analysis.breakpoints(params)))
        for gamma_prime in points:
            alpha, segment = analysis.tradeoff_point(gamma_prime, params, config.printed_g)
            rows.append([gamma_prime, alpha, segment, p])
    if config.helper_storage:
        storage = analysis.min_helper_storage(config.mode, params)
        extra = "; minimum alpha'={} ({} times smaller than alpha)".format(
            storage.alpha_prime, storage.ratio)
    return table(TRADEOFF_COLUMNS, rows, "tradeoff: {} points for {} erasure probabilities{}".format(
        len(rows), len(p_values), extra))


def capacity(config, runner):
    """Closed-form capacity next to the min-cut of the worst-case graph."""
    rows = []
    p_values = _values(config, "p", "0")
    for p in p_values:
        params = _params(config, "alpha", "beta", "M", "alpha_prime", p=p)
        params.require("alpha", "beta")
        beta_sent = params.beta / (1 - p)
        schedule, dc_nodes = flowgraph.worst_case_schedule(
            params, _count(config, "stages", default=params.k))
        graph = flowgraph.build_repair_graph(params, schedule, dc_nodes, beta_sent,
                                             refresh_repairing=config.refresh_repairing)
        rows.append([p, beta_sent, analysis.capacity(params, beta_sent), flowgraph.min_cut(graph)])
    mismatched = sum(1 for row in rows if row[2] != row[3])
    summary = "capacity: {} erasure probabilities, {} where the min-cut differs".format(
        len(rows), mismatched)
    return table(CAPACITY_COLUMNS, rows, summary)


def flow_graph(config, runner):
    """A minimum cut of a repair schedule, given as a file or the worst case."""
    params = _params(config, "alpha", "beta", "M", "alpha_prime", p=_single(config, "p", "0"))
    if config.schedule:
        data = _read_json(config.schedule, "schedule")
        try:
            schedule = flowgraph.RepairSchedule.from_json(data)
            dc_nodes = data["dc_nodes"]
        except (KeyError, TypeError) as e:
            raise DomainError("Schedule files need `stages' and `dc_nodes': {}".format(e))
    else:
        schedule, dc_nodes = flowgraph.worst_case_schedule(
            params, _count(config, "stages", default=params.k))
    graph = flowgraph.build_repair_graph(params, schedule, dc_nodes,
                                         refresh_repairing=config.refresh_repairing)
    cut = flowgraph.minimum_partition(graph)
    doc = OrderedDict([("cut", cut.value), ("source_side", cut.source_side),
                       ("sink_side", cut.sink_side), ("dc_nodes", list(dc_nodes)),
                       ("schedule", schedule.to_json())])
    return document(doc, "flowgraph: {} stages, min-cut {}".format(len(schedule), cut.value))


def construct(config, runner):
    """A Vandermonde MSR code (``--mode msr``) or a random MBR code with
    one repairing storage node (``--mode mbr``)."""
    n, k = _count(config, "n"), _count(config, "k")
    if config.mode == "msr":
        field = FieldSpec(_count(config, "q")) if config.q else None
        state = codesim.construct_msr_vandermonde(n, k, field)
    else:
        alpha_prime = _fraction(config, "alpha_prime", required=False)
        state = codesim.init_mbr_helper_code(
            n, k, _count(config, "d"), _count(config, "beta"), _field(config), _seed(config),
            alpha_prime=None if alpha_prime is None else int(alpha_prime))
    passed, subset = codesim.check_reconstruction(state)
    if not passed:
        raise ConstructionError("Nodes {} cannot rebuild the file".format(subset), q=state.field.q)
    summary = "construct: {} code with n={}, k={}, M={} over GF({})".format(
        config.mode.upper(), n, k, state.file_dim, state.field.q)
    return document(state.to_json(), summary)


def _repairer(state, transcripts):
    if state.reserves:
        def repair(state, stage, failed, seed):
            return codesim.mbr_helper_lifecycle(state, stage, failed, seed,
                                                transcripts=transcripts)
        return repair
    if state.params.h == 1 and codesim.REPAIRING_ID in state.helpers:
        def repair(state, stage, failed, seed):
            return codesim.vandermonde_repair(state, failed, seed, transcripts=transcripts)
        return repair

    def repair(state, stage, failed, seed):
        helpers = codesim.default_helpers(state, failed)
        new_state, transcript = codesim.functional_repair(state, failed, helpers, seed)
        transcripts.append(transcript)
        return new_state
    return repair


def repair(config, runner):
    """Apply repairs to a stored code state: the nodes in ``--failed`` in
    turn, or ``--stages`` round-robin failures. The new state carries the
    transcript of every repair under ``transcripts``."""
    state = codesim.StorageState.from_json(_read_json(_value(config, "state"), "state"))
    n = state.params.n
    if config.failed:
        failures = [as_count(v, "failed") for v in parse_values(config.failed)]
    else:
        failures = [(state.stage + s) % n for s in range(_count(config, "stages", default=1))]
    seed = _seed(config)
    transcripts = []
    repair_fn = _repairer(state, transcripts)
    for failed in failures:
        state = repair_fn(state, state.stage + 1, failed, seed)
    passed, subset = codesim.check_reconstruction(state)
    if not passed:
        raise ConstructionError("Nodes {} cannot rebuild the file".format(subset), q=state.field.q)
    doc = state.to_json()
    doc["transcripts"] = [t.to_json() for t in transcripts]
    return document(doc, "repair: {} repairs, now at stage {}, any {} nodes rebuild the file".format(
        len(failures), state.stage, state.params.k))


def psr(config, runner):
    """Analytic and simulated probability of successful repair against ``t``."""
    d1 = _count(config, "d1", default=config.d)
    d2 = _count(config, "d2", default=0)
    beta = _count(config, "beta")
    p = _single(config, "p", "0")
    field = _field(config)
    tmin = _count(config, "tmin", default=beta)
    tmax = _count(config, "tmax", default=tmin)
    trials = _count(config, "trials", default=PSR_TRIALS)
    seed = _seed(config) if trials else None
    rows = []
    for t in range(tmin, tmax + 1):
        analytic = channel.analytic_result(d1, d2, t, beta, p, field.q)
        empirical, half_width = None, None
        if trials:
            result = channel.simulate_repair(None, (d1, d2, t), field, trials, seed, p=p,
                                             beta=beta, stream=t, runner=runner)
            empirical, half_width = result.p_s, result.half_width
        rows.append([t, analytic.p_beta, analytic.p_s, empirical, half_width])
    return table(PSR_COLUMNS, rows, "psr: t from {} to {}, d1={}, d2={}, beta={}, p={}, q={}".format(
        tmin, tmax, d1, d2, beta, p, field.q))


def _plan_row(p, plan, empirical):
    return [p, plan.d1, plan.d2, plan.t, plan.gamma_hat, plan.achieved_ps, empirical,
            plan.beta, plan.scale, plan.bandwidth]


def _optimizer_inputs(config):
    dtot = _count(config, "dtot")
    params = _params(config, "M", d=dtot, h=0)
    params.require("M")
    verify = _count(config, "verify_trials", default=0) or _count(config, "trials", default=0)
    return dict(dtot=dtot, params=params, delta=_fraction(config, "delta"),
                q=_field(config).q, t_cap=_count(config, "t_cap", required=False),
                verify=verify, seed=_seed(config) if verify else None)


def optimize(config, runner):
    """The best helper split for each erasure probability; exits 3 if
    any probability has none."""
    inputs = _optimizer_inputs(config)
    rows, infeasible = [], 0
    for index, p in enumerate(_values(config, "p", "0")):
        try:
            plan = optimizer.optimize_plan(inputs["delta"], inputs["dtot"], inputs["params"],
                                           config.mode, p=p, q=inputs["q"],
                                           t_cap=inputs["t_cap"], runner=runner)
        except InfeasibleError as e:
            sys.stderr.write("p={}: {}\n".format(p, e))
            infeasible += 1
            continue
        empirical = None
        if inputs["verify"]:
            empirical = optimizer.verify_plan(plan, p, inputs["q"], inputs["verify"],
                                              inputs["seed"], runner, stream=index).p_s
        rows.append(_plan_row(p, plan, empirical))
    summary = "optimize: {} plans, {} infeasible".format(len(rows), infeasible)
    return table(OPTIMIZE_COLUMNS, rows, summary, EXIT_INFEASIBLE if infeasible else EXIT_OK)


def sweep(config, runner):
    """Like :func:`optimize` over ascending probabilities, marking
    infeasible rows instead of failing."""
    inputs = _optimizer_inputs(config)
    result = optimizer.sweep(_values(config, "p", "0"), inputs["delta"], inputs["dtot"],
                             inputs["params"], config.mode, q=inputs["q"],
                             t_cap=inputs["t_cap"], runner=runner,
                             verify_trials=inputs["verify"] or None, seed=inputs["seed"])
    rows = []
    for row in result:
        if row.plan is None:
            rows.append([row.p] + [None] * (len(OPTIMIZE_COLUMNS) - 1) + ["infeasible"])
        else:
            rows.append(_plan_row(row.p, row.plan, row.ps_empirical) + ["ok"])
    infeasible = sum(1 for row in result if row.plan is None)
    return table(SWEEP_COLUMNS, rows, "sweep: {} probabilities, {} infeasible".format(
        len(rows), infeasible))


HANDLERS = OrderedDict([
    ("tradeoff", tradeoff),
    ("capacity", capacity),
    ("flowgraph", flow_graph),
    ("construct", construct),
    ("repair", repair),
    ("psr", psr),
    ("optimize", optimize),
    ("sweep", sweep),
])


###
# output

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format_probability(value)
    if isinstance(value, Fraction):
        return format_exact(value)
    return str(value)


def _record_value(value):
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else str(value)
    return value


def write_output(output, fmt, stream):
    if output.document is not None:
        stream.write(serialize(output.document))
        stream.write("\n")
    elif fmt == "json":
        records = [OrderedDict((c, _record_value(v)) for c, v in zip(output.columns, row))
                   for row in output.rows]
        stream.write(serialize(records))
        stream.write("\n")
    else:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(output.columns)
        for row in output.rows:
            writer.writerow([_cell(v) for v in row])


def _error(msg):
    sys.stderr.write("lossyrepair: error: {}\n".format(msg))


def run(config):
    """Run the configured subcommand, write its results and return the
    exit code."""
    progress = config.log_level in ("DEBUG", "INFO")
    reporter = reporters.default(config.log_level, config.log, progress=progress)
    reporter.log_options(config.get_option_values())
    runner = runners.default(config.jobs, reporter)
    logger.info("Running %s", config.command)

    try:
        output = HANDLERS[config.command](config, runner)
    except (DomainError, UnsupportedError) as e:
        _error(e)
        return EXIT_USAGE
    except InfeasibleError as e:
        _error(e)
        return EXIT_INFEASIBLE
    except ConstructionError as e:
        _error(e)
        return EXIT_CONSTRUCTION
    except runners.JobFailed as e:
        _error(e)
        return EXIT_JOB_FAILED

    try:
        if config.output:
            directory = os.path.dirname(os.path.abspath(config.output))
            mkdirp(directory)
            with open(config.output, "w") as handle:
                write_output(output, config.format, handle)
            sys.stdout.write(output.summary + "\n")
        else:
            write_output(output, config.format, sys.stdout)
            sys.stderr.write(output.summary + "\n")
    except SerializationError as e:
        _error(e)
        return EXIT_USAGE
    reporter.log_summary(output.summary)
    return output.status
