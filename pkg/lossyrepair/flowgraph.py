# -*- coding: utf-8 -*-
"""Information flow graphs of a storage system going through a sequence
of failures and repairs, and their min-cuts.

The graph has a source ``S``, one ``in(i,s)``/``out(i,s)`` vertex pair
per storage node ``i`` and stage ``s`` (stage 0 holds the original
nodes, stage ``s`` the newcomer of the s-th repair), one
``hin(j)``/``hout(j)`` pair per repairing storage node and a data
collector ``DC``. Capacities are exact Fractions; edges without a
``capacity`` attribute are infinite, which is how :mod:`networkx`
flow functions read them.
"""
import logging
import itertools
from fractions import Fraction
from collections import namedtuple
from math import gcd

import numpy as np
import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from . import DomainError
from .util import INFINITY, as_fraction

logger = logging.getLogger(__name__)

SOURCE = "S"
SINK = "DC"

#: The brute-force oracle refuses graphs with more inner vertices than this.
BRUTE_FORCE_LIMIT = 20


def in_label(node, stage):
    return "in({},{})".format(node, stage)


def out_label(node, stage):
    return "out({},{})".format(node, stage)


def repairing_labels(j, stage=None):
    if stage is None:
        return "hin({})".format(j), "hout({})".format(j)
    return "hin({},{})".format(j, stage), "hout({},{})".format(j, stage)


class RepairStage(namedtuple("RepairStage", ["failed", "helpers", "repairing"])):
    """One failure and its repair.

    :param failed: The id of the failed node; the newcomer takes its id.
    :type failed: int

    :param helpers: The ids of the complete nodes that send repair data.
    :type helpers: tuple of int

    :param repairing: Whether the repairing storage nodes also help.
    :type repairing: bool
    """

    def to_json(self):
        return {"failed": self.failed, "helpers": list(self.helpers),
                "repairing": self.repairing}


class RepairSchedule(object):
    """An ordered sequence of :class:`RepairStage`."""

    def __init__(self, stages):
        self.stages = tuple(RepairStage(int(s.failed), tuple(int(h) for h in s.helpers),
                                        bool(s.repairing))
                            for s in stages)

    def __len__(self):
        return len(self.stages)

    def __iter__(self):
        return iter(self.stages)

    def validate(self, params):
        """Check the schedule against ``params``.

        :raises DomainError: for unknown node ids, a wrong helper count,
          a failed node among its own helpers, or a node failing twice
        """
        seen = set()
        for number, stage in enumerate(self.stages, 1):
            ids = (stage.failed,) + stage.helpers
            unknown = [i for i in ids if not 0 <= i < params.n]
            if unknown:
                raise DomainError("Stage {} references unknown node(s) {}".format(number, unknown))
            if len(set(stage.helpers)) != len(stage.helpers):
                raise DomainError("Stage {} lists a helper twice".format(number))
            if len(stage.helpers) != params.d:
                raise DomainError("Stage {} has {} helpers, d={}".format(
                    number, len(stage.helpers), params.d))
            if stage.failed in stage.helpers:
                raise DomainError("Stage {}: failed node {} cannot help its own repair".format(
                    number, stage.failed))
            if stage.repairing and params.h == 0:
                raise DomainError("Stage {} uses repairing nodes but h=0".format(number))
            if stage.failed in seen:
                raise DomainError("Node {} fails twice in the schedule".format(stage.failed))
            seen.add(stage.failed)
        return self

    def to_json(self):
        return {"stages": [s.to_json() for s in self.stages]}

    @classmethod
    def from_json(cls, data):
        stages = data["stages"] if isinstance(data, dict) else data
        return cls(RepairStage(s["failed"], s["helpers"], s.get("repairing", False))
                   for s in stages)


def worst_case_schedule(params, stages=None):
    """Nodes ``0, 1, ...`` fail in turn and every newcomer downloads from
    all earlier newcomers first, then from the lowest-numbered other
    survivors. The data collector of this schedule is the set of the
    last ``k`` newcomers.

    :returns: ``(schedule, dc_nodes)``
    """
    stages = params.k if stages is None else stages
    if stages > params.n:
        raise DomainError("The worst-case schedule has at most n={} stages".format(params.n))
    result = []
    for s in range(stages):
        survivors = list(range(s)) + list(range(s + 1, params.n))
        result.append(RepairStage(s, tuple(survivors[:params.d]), params.h > 0))
    dc_nodes = tuple(range(max(0, stages - params.k), stages))
    if len(dc_nodes) < params.k:
        dc_nodes = dc_nodes + tuple(range(stages, stages + params.k - len(dc_nodes)))
    return RepairSchedule(result), dc_nodes


def round_robin_schedule(params, stages, start=0):
    """Node ``(start + s) mod n`` fails at stage ``s``; the next ``d``
    nodes in cyclic order help."""
    result = []
    for s in range(stages):
        failed = (start + s) % params.n
        helpers = tuple((failed + j) % params.n for j in range(1, params.d + 1))
        result.append(RepairStage(failed, helpers, params.h > 0))
    return RepairSchedule(result)


class FlowGraph(object):
    """A frozen :class:`networkx.DiGraph` with exact capacities."""

    def __init__(self, graph):
        self.graph = nx.freeze(graph)

    @property
    def vertices(self):
        return list(self.graph.nodes)

    @property
    def edges(self):
        return [(u, v, attrs.get("capacity", INFINITY))
                for u, v, attrs in self.graph.edges(data=True)]

    def to_json(self):
        return {"vertices": self.vertices,
                "edges": [[u, v, str(c)] for u, v, c in self.edges]}


def _add_node_pair(graph, tail, head, capacity):
    graph.add_edge(SOURCE, tail, capacity=capacity)
    graph.add_edge(tail, head, capacity=capacity)


def build_repair_graph(params, schedule, dc_nodes, beta_sent=None,
                       refresh_repairing=False):
    """Build the information flow graph of ``schedule``.

    :param params: Needs ``alpha`` and ``beta``; ``alpha_prime`` too when
      ``h > 0``.
    :type params: :class:`lossyrepair.SystemParams`

    :param schedule: The repairs, validated against ``params``.
    :type schedule: :class:`RepairSchedule`

    :param dc_nodes: The ``k`` node ids the data collector connects to
      after the last stage.

    :keyword beta_sent: Packets each helper sends; defaults to
      ``beta/(1-p)``. Helper edges carry ``(1-p)*beta_sent``.

    :keyword refresh_repairing: Give every stage its own
      source-connected repairing node instead of one shared node.
    """
    params.require("alpha", "beta")
    if params.h > 0:
        params.require("alpha_prime")
    schedule.validate(params)
    dc_nodes = tuple(int(i) for i in dc_nodes)
    if len(set(dc_nodes)) != params.k:
        raise DomainError("The data collector needs {} distinct nodes, got {}".format(
            params.k, list(dc_nodes)))
    unknown = [i for i in dc_nodes if not 0 <= i < params.n]
    if unknown:
        raise DomainError("Data collector references unknown node(s) {}".format(unknown))

    if beta_sent is None:
        beta_sent = params.beta / (1 - params.p)
    delivered = (1 - params.p) * as_fraction(beta_sent, "beta_sent")

    graph = nx.DiGraph()
    graph.add_node(SOURCE)
    graph.add_node(SINK)
    current = {}
    for i in range(params.n):
        _add_node_pair(graph, in_label(i, 0), out_label(i, 0), params.alpha)
        current[i] = 0
    if not refresh_repairing:
        for j in range(params.h):
            _add_node_pair(graph, *repairing_labels(j), capacity=params.alpha_prime)

    for s, stage in enumerate(schedule, 1):
        newcomer = in_label(stage.failed, s)
        graph.add_edge(newcomer, out_label(stage.failed, s), capacity=params.alpha)
        for helper in stage.helpers:
            graph.add_edge(out_label(helper, current[helper]), newcomer, capacity=delivered)
        if stage.repairing:
            for j in range(params.h):
                if refresh_repairing:
                    tail, head = repairing_labels(j, s)
                    _add_node_pair(graph, tail, head, params.alpha_prime)
                else:
                    head = repairing_labels(j)[1]
                graph.add_edge(head, newcomer, capacity=delivered)
        current[stage.failed] = s

    for i in dc_nodes:
        graph.add_edge(out_label(i, current[i]), SINK)
    logger.debug("Built flow graph with %i vertices and %i edges",
                 graph.number_of_nodes(), graph.number_of_edges())
    return FlowGraph(graph)


class CutResult(namedtuple("CutResult", ["value", "source_side", "sink_side"])):
    """A minimum cut: its capacity and the two vertex sets."""
    pass


def min_cut(g):
    """The max-flow from ``S`` to ``DC``, equal to the min-cut capacity.
    Returns :data:`lossyrepair.util.INFINITY` when every cut crosses an
    infinite edge and 0 when ``DC`` is unreachable."""
    try:
        value = nx.maximum_flow_value(g.graph, SOURCE, SINK, flow_func=edmonds_karp)
    except nx.NetworkXUnbounded:
        return INFINITY
    return Fraction(value)


def minimum_partition(g):
    """A minimum cut with the vertices on each side."""
    try:
        value, (reachable, rest) = nx.minimum_cut(g.graph, SOURCE, SINK,
                                                  flow_func=edmonds_karp)
    except nx.NetworkXUnbounded:
        return CutResult(INFINITY, None, None)
    return CutResult(Fraction(value), sorted(reachable), sorted(rest))


def _lcm(a, b):
    return a * b // gcd(a, b)


def brute_force_min_cut(g, limit=BRUTE_FORCE_LIMIT):
    """Minimum cut by enumerating every vertex partition.

    Vertices that lie on no ``S``-to-``DC`` path are dropped first; they
    never change the minimum.

    :raises DomainError: if more than ``limit`` vertices remain
    """
    graph = g.graph
    if not nx.has_path(graph, SOURCE, SINK):
        return Fraction(0)
    keep = (nx.descendants(graph, SOURCE) & nx.ancestors(graph, SINK)) - {SOURCE, SINK}
    inner = sorted(keep)
    if len(inner) > limit:
        raise DomainError("Brute force refuses {} vertices (limit {})".format(len(inner), limit))

    index = dict((v, i) for i, v in enumerate(inner))
    edges = [(u, v, attrs.get("capacity", INFINITY))
             for u, v, attrs in graph.edges(data=True)
             if (u == SOURCE or u in index) and (v == SINK or v in index)]
    scale = 1
    for _, _, c in edges:
        if c is not INFINITY:
            scale = _lcm(scale, Fraction(c).denominator)

    masks = np.arange(2 ** len(inner), dtype=np.int64)

    def on_source_side(v):
        if v == SOURCE:
            return np.ones(masks.shape, dtype=bool)
        if v == SINK:
            return np.zeros(masks.shape, dtype=bool)
        return ((masks >> index[v]) & 1).astype(bool)

    total = np.zeros(masks.shape, dtype=np.int64)
    valid = np.ones(masks.shape, dtype=bool)
    for u, v, c in edges:
        crossing = on_source_side(u) & ~on_source_side(v)
        if c is INFINITY:
            valid &= ~crossing
        else:
            total[crossing] += int(Fraction(c) * scale)
    if not valid.any():
        return INFINITY
    return Fraction(int(total[valid].min()), scale)


def enumerate_dc_placements(params, schedule, **kwargs):
    """The smallest min-cut over every ``k``-subset of nodes as data
    collector, for small systems.

    :returns: ``(value, dc_nodes)``
    """
    best = None
    for dc_nodes in itertools.combinations(range(params.n), params.k):
        value = min_cut(build_repair_graph(params, schedule, dc_nodes, **kwargs))
        if best is None or value < best[0]:
            best = (value, dc_nodes)
    return best
