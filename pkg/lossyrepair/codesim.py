# -*- coding: utf-8 -*-
"""Code-level simulation of storage repair over GF(q).

A node is represented by the global encoding vectors of the packets it
stores: an ``alpha x M`` matrix whose rows are combinations of the
``M`` file packets. Actual payload bytes are never needed. Repairs are
random linear (functional) repairs; every random draw comes from a
:class:`numpy.random.Generator` seeded by ``(seed, stage, ...)`` so a
run is reproducible.

Repairing storage nodes live in ``StorageState.helpers`` under string
ids (``"r0"``, ``"r1"``, ...) and are never part of a data collector's
reconstruction.
"""
import logging
import itertools
from collections import namedtuple

import numpy as np

from . import SystemParams, DomainError, InfeasibleError, ConstructionError
from .analysis import cut_value
from .field import FieldSpec, FqMatrix, stack, batch_rank, vandermonde, smallest_field

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPTS = 32
REPAIRING_ID = "r0"

# distinct generator streams under one seed
_REPAIR_STREAM = 0
_BLOCK_STREAM = 1
_INIT_STREAM = 2

# subsets checked per batched elimination
_SUBSET_CHUNK = 256


def _rng(seed, *stream):
    return np.random.default_rng([int(seed)] + [int(s) for s in stream])


def _integer(value, name):
    if value is None or value.denominator != 1:
        raise DomainError("{} must be an integer number of packets for code simulation, got {}".format(
            name, value))
    return int(value)


class StorageState(namedtuple(
        "StorageState", ["file_dim", "nodes", "helpers", "reserves",
                         "field", "params", "stage"])):
    """The coded content of a storage system at one point in time.

    :param file_dim: ``M``, the number of file packets.
    :param nodes: node id -> :class:`~lossyrepair.field.FqMatrix` of
      ``alpha`` rows for every complete node.
    :param helpers: repairing node id -> matrix of ``alpha_prime`` rows.
    :param reserves: repairing node id -> the full-size content a
      repairing node draws its first stored blocks from (empty unless
      the state comes from :func:`init_mbr_helper_code`).
    :param field: :class:`~lossyrepair.field.FieldSpec`
    :param params: :class:`~lossyrepair.SystemParams`
    :param stage: The number of repairs applied so far.

    States are values: operations return new states and never mutate
    the mappings of an existing one.
    """

    def replace_node(self, node, matrix, **kwargs):
        nodes = dict(self.nodes)
        nodes[node] = matrix
        return self._replace(nodes=nodes, **kwargs)

    def to_json(self):
        def mats(mapping):
            return dict((str(key), m.to_json()) for key, m in mapping.items())
        return {"file_dim": self.file_dim, "q": self.field.q,
                "params": self.params.to_json(), "stage": self.stage,
                "nodes": mats(self.nodes), "helpers": mats(self.helpers),
                "reserves": mats(self.reserves)}

    @classmethod
    def from_json(cls, data):
        def mats(mapping, key_type):
            return dict((key_type(key), FqMatrix.from_json(m)) for key, m in mapping.items())
        return cls(int(data["file_dim"]), mats(data["nodes"], int),
                   mats(data.get("helpers", {}), str), mats(data.get("reserves", {}), str),
                   FieldSpec(data["q"]), SystemParams.from_json(data["params"]),
                   int(data.get("stage", 0)))


class RepairTranscript(namedtuple(
        "RepairTranscript", ["stage", "failed", "sent", "mixing"])):
    """What happened in one repair.

    :param stage: The stage number of this repair.
    :param failed: The id of the replaced node.
    :param sent: helper id -> matrix of the packets (encoding vectors) it sent.
    :param mixing: The coefficients the newcomer used on the stacked
      received packets.
    """

    def to_json(self):
        return {"stage": self.stage, "failed": self.failed,
                "sent": dict((str(key), m.to_json()) for key, m in self.sent.items()),
                "mixing": self.mixing.to_json()}

    @classmethod
    def from_json(cls, data):
        def helper_id(key):
            return int(key) if key.isdigit() else key
        sent = dict((helper_id(key), FqMatrix.from_json(m)) for key, m in data["sent"].items())
        return cls(int(data["stage"]), int(data["failed"]), sent,
                   FqMatrix.from_json(data["mixing"]))


def check_reconstruction(state):
    """Check that every ``k`` complete nodes together span the file.

    :returns: ``(passed, failing_subset)`` with ``failing_subset`` the
      first subset (in lexicographic order) whose stacked rows have rank
      below ``M``, or ``None``
    """
    k = state.params.k
    ids = sorted(state.nodes)
    GF = state.field.GF
    subsets = itertools.combinations(ids, k)
    while True:
        chunk = list(itertools.islice(subsets, _SUBSET_CHUNK))
        if not chunk:
            return True, None
        stacks = [np.concatenate([state.nodes[i].array.view(np.ndarray) for i in subset])
                  for subset in chunk]
        ranks = batch_rank(GF(np.stack(stacks)))
        short = np.nonzero(ranks < state.file_dim)[0]
        if short.size:
            subset = chunk[int(short[0])]
            logger.debug("Subset %s has rank %i < %i", subset, ranks[short[0]], state.file_dim)
            return False, subset


def init_random_code(params, field, seed, attempts=DEFAULT_ATTEMPTS):
    """Draw every node's ``alpha`` rows uniformly at random, retrying
    until any ``k`` nodes can rebuild the file. Repairing nodes, if any,
    get ``alpha_prime`` random rows.

    :raises ConstructionError: after ``attempts`` failed draws
    """
    params.require("alpha", "M")
    alpha = _integer(params.alpha, "alpha")
    M = _integer(params.M, "M")
    for attempt in range(attempts):
        rng = _rng(seed, _INIT_STREAM, attempt)
        nodes = dict((i, FqMatrix(field, field.random((alpha, M), rng)))
                     for i in range(params.n))
        helpers = {}
        if params.h and params.alpha_prime is not None:
            alpha_prime = _integer(params.alpha_prime, "alpha_prime")
            helpers = dict(("r{}".format(j), FqMatrix(field, field.random((alpha_prime, M), rng)))
                           for j in range(params.h))
        state = StorageState(M, nodes, helpers, {}, field, params, 0)
        passed, subset = check_reconstruction(state)
        if passed:
            logger.debug("Random code found after %i attempt(s)", attempt + 1)
            return state
        logger.debug("Attempt %i failed on subset %s", attempt, subset)
    raise ConstructionError(
        "No random code with the reconstruction property after {} attempts over GF({}); "
        "the field is likely too small".format(attempts, field.q), q=field.q)


def functional_repair(state, failed, helpers, seed, sent_override=None,
                      attempts=DEFAULT_ATTEMPTS):
    """Replace node ``failed`` by a newcomer built from random
    combinations of what ``helpers`` send.

    Every helper sends ``beta`` random combinations of its rows (a helper
    holding exactly ``beta`` rows sends them as they are); the newcomer
    stores ``alpha`` random combinations of everything received. The
    draw is repeated until the reconstruction property holds.

    :param helpers: complete node ids and repairing node ids
    :keyword sent_override: helper id -> matrix the helper sends instead
      of a random draw

    :returns: ``(new_state, transcript)``
    :raises InfeasibleError: if the helpers cannot carry ``M`` packets
      to a data collector, checked before anything random happens
    :raises ConstructionError: after ``attempts`` failed draws
    """
    params = state.params
    beta = _integer(params.beta, "beta")
    alpha = _integer(params.alpha, "alpha")
    sent_override = sent_override or {}
    if failed not in state.nodes:
        raise DomainError("Unknown node {}".format(failed))
    helpers = list(helpers)
    if len(set(helpers)) != len(helpers):
        raise DomainError("A helper is listed twice: {}".format(helpers))
    if failed in helpers:
        raise DomainError("Node {} cannot help its own repair".format(failed))
    complete = [h for h in helpers if h in state.nodes]
    repairing = [h for h in helpers if h in state.helpers]
    unknown = set(helpers) - set(complete) - set(repairing)
    if unknown:
        raise DomainError("Unknown helper(s) {}".format(sorted(map(str, unknown))))

    contributors = len(complete) + len(repairing)
    deliverable = cut_value(params.k, alpha, beta, contributors)
    if deliverable < state.file_dim:
        raise InfeasibleError(
            "{} helpers sending {} packets each carry at most {} < M={} packets".format(
                contributors, beta, deliverable, state.file_dim),
            diagnostics={"contributors": contributors, "capacity": deliverable})

    stage = state.stage + 1
    field = state.field
    for attempt in range(attempts):
        rng = _rng(seed, _REPAIR_STREAM, stage, attempt)
        sent = {}
        for h in helpers:
            rows = state.nodes[h] if h in state.nodes else state.helpers[h]
            if h in sent_override:
                sent[h] = sent_override[h]
            elif rows.rows == beta:
                sent[h] = rows
            else:
                sent[h] = FqMatrix(field, field.random((beta, rows.rows), rng) @ rows.array)
        received = stack([sent[h] for h in helpers], field)
        mixing = FqMatrix(field, field.random((alpha, received.rows), rng))
        newcomer = mixing @ received
        candidate = state.replace_node(failed, newcomer, stage=stage)
        passed, subset = check_reconstruction(candidate)
        if passed:
            logger.debug("Stage %i: node %s repaired after %i attempt(s)", stage, failed, attempt + 1)
            return candidate, RepairTranscript(stage, failed, sent, mixing)
        logger.debug("Stage %i attempt %i broke subset %s", stage, attempt, subset)
    raise ConstructionError(
        "Repair of node {} at stage {} failed {} times over GF({})".format(
            failed, stage, attempts, field.q), q=field.q)


def construct_msr_vandermonde(n, k, field=None):
    """An MSR code with one repairing storage node cut out of a single
    Vandermonde matrix with ``r = n(n-k+1)+1`` rows and ``c = k(n-k+1)``
    columns. Node ``i`` stores rows ``i(n-k+1)`` to ``(i+1)(n-k+1)-1``
    and the repairing node stores the last row.

    :keyword field: Defaults to the smallest field with ``q >= r``.
    :raises DomainError: if ``q < r``
    """
    if not 1 <= k <= n - 1:
        raise DomainError("1 <= k <= n-1 violated: n={}, k={}".format(n, k))
    alpha = n - k + 1
    r = n * alpha + 1
    c = k * alpha
    if field is None:
        field = smallest_field(r)
    if field.q < r:
        raise DomainError("The construction needs q >= {}, got q={}".format(r, field.q))
    G = vandermonde(r, c, range(r), field).array
    nodes = dict((i, FqMatrix(field, G[i * alpha:(i + 1) * alpha])) for i in range(n))
    helpers = {REPAIRING_ID: FqMatrix(field, G[r - 1:r])}
    params = SystemParams(n=n, k=k, d=n - 1, alpha=alpha, beta=1, M=c,
                          h=1, alpha_prime=1)
    logger.info("Vandermonde MSR code: n=%i, k=%i, M=%i over GF(%i)", n, k, c, field.q)
    return StorageState(c, nodes, helpers, {}, field, params, 0)


def default_helpers(state, failed):
    return [i for i in sorted(state.nodes) if i != failed] + sorted(state.helpers)


def vandermonde_repair(state, failed, seed, helpers=None, attempts=DEFAULT_ATTEMPTS,
                       transcripts=None):
    """Repair a node of a :func:`construct_msr_vandermonde` code: the
    ``n-1`` survivors send one random combination each, the repairing
    node sends its stored row and the newcomer keeps ``n-k+1``
    combinations of the ``n`` packets.

    :keyword transcripts: A list the :class:`RepairTranscript` is
      appended to.
    :returns: the new state
    """
    if REPAIRING_ID not in state.helpers or state.params.h != 1:
        raise DomainError("State was not built by construct_msr_vandermonde")
    if helpers is None:
        helpers = default_helpers(state, failed)
    new_state, transcript = functional_repair(state, failed, helpers, seed, attempts=attempts)
    if transcripts is not None:
        transcripts.append(transcript)
    return new_state


def init_mbr_helper_code(n, k, d, beta, field, seed, alpha_prime=None,
                         attempts=DEFAULT_ATTEMPTS):
    """An MBR code for ``n`` complete nodes and one repairing storage node.

    The code is drawn for ``n+1`` nodes at repair degree ``d+1``, so
    ``alpha = (d+1)beta`` and ``M`` is the sum over ``i < k`` of
    ``(d+1-i)beta``. Node ``n`` becomes the reserve the repairing node
    takes its first blocks from; the repairing node starts empty.

    :keyword alpha_prime: Storage of the repairing node, ``k*beta`` by
      default.
    """
    alpha = (d + 1) * beta
    M = sum((d + 1 - i) * beta for i in range(k))
    if alpha_prime is None:
        alpha_prime = k * beta
    augmented = SystemParams(n=n + 1, k=k, d=d + 1, alpha=alpha, beta=beta, M=M)
    code = init_random_code(augmented, field, seed, attempts)
    nodes = dict((i, code.nodes[i]) for i in range(n))
    params = SystemParams(n=n, k=k, d=d, alpha=alpha, beta=beta, M=M,
                          h=1, alpha_prime=alpha_prime)
    helpers = {REPAIRING_ID: FqMatrix(field, field.zeros((alpha_prime, M)))}
    reserves = {REPAIRING_ID: code.nodes[n]}
    return StorageState(M, nodes, helpers, reserves, field, params, 0)


def mbr_helper_lifecycle(state, stage, failed, seed, helpers=None,
                         attempts=DEFAULT_ATTEMPTS, transcripts=None):
    """One repair of an :func:`init_mbr_helper_code` system.

    In stages ``1..alpha'/beta`` the repairing node sends ``beta``
    combinations of its reserve, the packets a complete helper would
    send, and keeps them as its stage-th block. Afterwards it sends
    ``beta`` random combinations of all its stored rows. The repair is
    then a :func:`functional_repair` with the ``d`` complete helpers and
    the repairing node.

    :param stage: Must be ``state.stage + 1``.
    :keyword transcripts: A list the :class:`RepairTranscript` is
      appended to.
    :returns: the new state
    """
    if stage != state.stage + 1:
        raise DomainError("Stage {} does not follow the state at stage {}".format(
            stage, state.stage))
    params = state.params
    beta = _integer(params.beta, "beta")
    alpha_prime = _integer(params.alpha_prime, "alpha_prime")
    stored = state.helpers[REPAIRING_ID]
    field = state.field
    rng = _rng(seed, _BLOCK_STREAM, stage)
    if stage <= alpha_prime // beta:
        reserve = state.reserves[REPAIRING_ID]
        block = field.random((beta, reserve.rows), rng) @ reserve.array
        rows = stored.array.copy()
        rows[(stage - 1) * beta:stage * beta] = block
        stored = FqMatrix(field, rows)
        sent = FqMatrix(field, block)
    else:
        sent = FqMatrix(field, field.random((beta, stored.rows), rng) @ stored.array)
    helper_map = dict(state.helpers)
    helper_map[REPAIRING_ID] = stored
    state = state._replace(helpers=helper_map)
    if helpers is None:
        helpers = default_helpers(state, failed)
    new_state, transcript = functional_repair(state, failed, helpers, seed,
                                              sent_override={REPAIRING_ID: sent},
                                              attempts=attempts)
    if transcripts is not None:
        transcripts.append(transcript)
    return new_state


def round_robin_repairs(state, count, seed, repair=None):
    """Fail nodes ``0, 1, ..., n-1, 0, ...`` in turn ``count`` times.

    :keyword repair: ``repair(state, stage, failed, seed) -> state``;
      defaults to a functional repair from every other node.
    :returns: the list of states after each stage
    """
    if repair is None:
        def repair(state, stage, failed, seed):
            return functional_repair(state, failed, default_helpers(state, failed), seed)[0]
    n = state.params.n
    states = []
    for _ in range(count):
        stage = state.stage + 1
        state = repair(state, stage, (stage - 1) % n, seed)
        states.append(state)
    return states
