# -*- coding: utf-8 -*-
"""Practical repair bandwidth: how many packets each helper must send so
that a repair over lossy links succeeds with probability at least
``1 - delta``, and the split of the available helpers into ``d1`` nodes
the code is built for plus ``d2`` redundant ones that minimizes it.
"""
import math
import logging
from fractions import Fraction
from collections import namedtuple

from . import DomainError, InfeasibleError, check_mode
from .analysis import extreme_point
from .channel import p_beta, psr, simulate_repair
from .field import FieldSpec
from .util import as_fraction, as_count
from . import runners

logger = logging.getLogger(__name__)

#: ``t_cap`` defaults to this many times ``ceil(beta/(1-p))``.
T_CAP_FACTOR = 50


class PracticalPlan(namedtuple(
        "PracticalPlan", ["d1", "d2", "t", "gamma_hat", "achieved_ps", "delta",
                          "beta", "scale", "bandwidth"])):
    """A repair plan meeting a reliability target.

    :param d1: Helpers the code is designed for.
    :type d1: int

    :param d2: Redundant helpers.
    :type d2: int

    :param t: Packets each helper transmits.
    :type t: int

    :param gamma_hat: ``(d1 + d2) * t``, in packets of the scaled file.
    :type gamma_hat: int

    :param achieved_ps: The probability of successful repair at ``t``.
    :type achieved_ps: float

    :param delta: The tolerated failure probability.
    :type delta: fractions.Fraction

    :param beta: Packets each helper must get through, an integer.
    :type beta: int

    :param scale: The factor the file size was multiplied by to make
      ``alpha`` and ``beta`` integers; 1 when they already are.
    :type scale: int

    :param bandwidth: ``gamma_hat / scale``, comparable across plans
      with different scales.
    :type bandwidth: fractions.Fraction
    """
    pass


class SweepRow(namedtuple("SweepRow", ["p", "plan", "error", "ps_empirical"])):
    """One erasure probability of a sweep: its plan, or the reason
    there is none, and optionally a simulated success probability."""
    pass


def default_t_cap(beta, p):
    return T_CAP_FACTOR * math.ceil(Fraction(beta) / (1 - as_fraction(p, "p")))


def _check_delta(delta):
    delta = as_fraction(delta, "delta")
    if not 0 <= delta <= 1:
        raise DomainError("0 <= delta <= 1 violated: delta={}".format(delta))
    return delta


def practical_bandwidth(delta, d1, d2, beta, p, q, t_cap=None, scale=1):
    """The smallest ``t >= beta`` whose probability of successful repair
    reaches ``1 - delta``.

    Success probability is nondecreasing in ``t``, so the search gallops
    up from ``beta`` and then bisects. The comparison is exact.

    :raises InfeasibleError: if no ``t <= t_cap`` is enough; ``best_ps``
      holds the probability at ``t_cap``
    :rtype: :class:`PracticalPlan`
    """
    delta = _check_delta(delta)
    d1 = as_count(d1, "d1")
    d2 = as_count(d2, "d2")
    beta = as_count(beta, "beta")
    p = as_fraction(p, "p")
    if beta < 1:
        raise DomainError("beta must be at least 1, got {}".format(beta))
    if d1 < 1:
        raise DomainError("d1 must be at least 1, got {}".format(d1))
    if not 0 <= p < 1:
        raise DomainError("0 <= p < 1 violated: p={}".format(p))
    q = FieldSpec(q).q
    t_cap = default_t_cap(beta, p) if t_cap is None else as_count(t_cap, "t_cap")
    target = 1 - delta

    cache = {}

    def success(t):
        if t not in cache:
            cache[t] = psr(d1, d2, p_beta(t, beta, p, q, exact=True), exact=True)
        return cache[t]

    def infeasible(best):
        return InfeasibleError(
            "No t <= {} reaches P_s >= {} (d1={}, d2={}, beta={}, p={}, q={}); best {:.6g}".format(
                t_cap, float(target), d1, d2, beta, p, q, float(best)),
            best_ps=best, diagnostics={"t_cap": t_cap, "d1": d1, "d2": d2})

    if t_cap < beta:
        raise infeasible(Fraction(0))
    lo, t, step = beta - 1, beta, 1
    while not success(t) >= target:
        if t == t_cap:
            raise infeasible(success(t))
        lo = t
        t = min(t + step, t_cap)
        step *= 2
    hi = t
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if success(mid) >= target:
            hi = mid
        else:
            lo = mid
    logger.debug("d1=%i d2=%i beta=%i p=%s: t=%i after %i evaluations",
                 d1, d2, beta, p, hi, len(cache))
    gamma_hat = (d1 + d2) * hi
    return PracticalPlan(d1, d2, hi, gamma_hat, float(success(hi)), delta,
                         beta, scale, Fraction(gamma_hat, scale))


def scaled_beta(params, mode, d1):
    """``beta`` of the code built for ``d1`` helpers, made an integer by
    the least multiple of the file size that also makes ``alpha`` one.

    :returns: ``(beta, scale)``
    """
    point = extreme_point(mode, params.replace(d=d1, h=0, alpha_prime=None), lossy=False)
    a, b = point.alpha.denominator, point.beta.denominator
    scale = a * b // math.gcd(a, b)
    return int(point.beta * scale), scale


def evaluate_pair(delta, d1, d2, beta, p, q, t_cap, scale):
    """Plan one ``(d1, d2)`` pair. Returns the plan, or a dict describing
    why there is none, so results survive a trip through a worker."""
    try:
        return practical_bandwidth(delta, d1, d2, beta, p, q, t_cap, scale)
    except InfeasibleError as e:
        return {"d1": d1, "d2": d2, "best_ps": float(e.best_ps), "error": str(e)}


def plan_key(plan):
    return (plan.bandwidth, plan.t, plan.d1 + plan.d2, -plan.d1)


def candidate_pairs(k, d_tot):
    return [(d1, d2) for d1 in range(k, d_tot + 1) for d2 in range(0, d_tot - d1 + 1)]


def optimize_plan(delta, d_tot, params, mode, p=None, q=256, t_cap=None,
                  candidates=None, runner=None):
    """Search every ``k <= d1 <= d_tot``, ``0 <= d2 <= d_tot - d1`` for
    the plan with the least bandwidth.

    Ties are broken by smaller ``t``, then fewer helpers in total, then
    more code helpers, so the result does not depend on search order.

    :keyword p: erasure probability, ``params.p`` by default
    :keyword candidates: ``(d1, d2)`` pairs to search instead of all
    :keyword runner: a :mod:`lossyrepair.runners` runner for the pairs
    :raises InfeasibleError: if no pair reaches the target
    """
    mode = check_mode(mode)
    params.require("M")
    d_tot = as_count(d_tot, "d_tot")
    if not params.k <= d_tot <= params.n - 1:
        raise DomainError("k <= d_tot <= n-1 violated: k={}, d_tot={}, n={}".format(
            params.k, d_tot, params.n))
    delta = _check_delta(delta)
    p = params.p if p is None else as_fraction(p, "p")
    pairs = candidate_pairs(params.k, d_tot) if candidates is None else list(candidates)
    for d1, d2 in pairs:
        if d1 < params.k or d2 < 0 or d1 + d2 > d_tot:
            raise DomainError("({}, {}) is not a valid helper split for k={}, d_tot={}".format(
                d1, d2, params.k, d_tot))

    scaled = dict((d1, scaled_beta(params, mode, d1)) for d1 in set(d1 for d1, _ in pairs))
    jobs = []
    for job_no, (d1, d2) in enumerate(pairs):
        beta, scale = scaled[d1]
        jobs.append(runners.Job(job_no, "d1={} d2={}".format(d1, d2), evaluate_pair,
                                (delta, d1, d2, beta, p, q, t_cap, scale), {}))
    results = runners.collect((runner or runners.SerialRunner()).run_jobs(jobs))

    plans = [r for r in results if isinstance(r, PracticalPlan)]
    if not plans:
        best = max((r["best_ps"] for r in results), default=0.0)
        raise InfeasibleError(
            "No helper split reaches P_s >= {} at p={} (best {:.6g})".format(
                float(1 - delta), p, best),
            best_ps=best, diagnostics={"pairs": results})
    best = min(plans, key=plan_key)
    logger.info("p=%s: best split d1=%i d2=%i t=%i bandwidth=%s (%i of %i pairs feasible)",
                p, best.d1, best.d2, best.t, best.bandwidth, len(plans), len(pairs))
    return best


def verify_plan(plan, p, q, trials, seed, runner=None, stream=0):
    """Simulate ``trials`` repairs with ``plan`` and return the
    :class:`lossyrepair.channel.PsrResult`."""
    return simulate_repair(None, plan, FieldSpec(q), trials, seed, p=p,
                           beta=plan.beta, stream=stream, runner=runner)


def sweep(p_values, delta, d_tot, params, mode, q=256, t_cap=None, runner=None,
          verify_trials=None, seed=None):
    """One :func:`optimize_plan` per erasure probability.

    An infeasible probability does not stop the sweep; its row carries
    the error instead of a plan.

    :param p_values: ascending erasure probabilities
    :keyword verify_trials: simulate this many repairs per plan
    :rtype: list of :class:`SweepRow`
    """
    p_values = [as_fraction(p, "p") for p in p_values]
    if any(b < a for a, b in zip(p_values, p_values[1:])):
        raise DomainError("p values must be sorted ascending")
    if verify_trials and seed is None:
        raise DomainError("A seed is required to verify plans")
    rows = []
    for index, p in enumerate(p_values):
        try:
            plan = optimize_plan(delta, d_tot, params, mode, p=p, q=q, t_cap=t_cap,
                                 runner=runner)
        except InfeasibleError as e:
            logger.warning("p=%s: %s", p, e)
            rows.append(SweepRow(p, None, str(e), None))
            continue
        empirical = None
        if verify_trials:
            empirical = verify_plan(plan, p, q, verify_trials, seed, runner, stream=index).p_s
        rows.append(SweepRow(p, plan, None, empirical))
    return rows
