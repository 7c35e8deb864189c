# -*- coding: utf-8 -*-
"""Probability of successful repair when every helper sends ``t`` random
combinations of its ``beta`` repair packets over a link that erases
each packet independently with probability ``p``.

The analytic side is exact: binomial coefficients and powers of ``q``
are big integers and the sums are Fractions, converted to float only
on the way out. The Monte Carlo side draws coefficients and erasures
in fixed blocks of trials, each block with its own generator seeded by
``(seed, stream, block)``, so results do not depend on how blocks are
spread over workers.
"""
import math
import logging
from fractions import Fraction
from collections import namedtuple

import numpy as np
from scipy import stats

from . import DomainError
from .field import FieldSpec, batch_rank
from .util import as_fraction, as_count, memoized
from . import runners

logger = logging.getLogger(__name__)

#: Trials per independently seeded block.
BLOCK_SIZE = 1000

#: Two-sided confidence level of reported half-widths.
CONFIDENCE = 0.99


class ChannelSpec(namedtuple("ChannelSpec", ["p", "t", "q", "independence"])):
    """An i.i.d. packet erasure link.

    :param p: Erasure probability in ``[0, 1)``.
    :param t: Packets each helper transmits.
    :param q: Order of the coding field.
    :param independence: Always True; erasures are i.i.d. Bernoulli.
    """

    def __new__(cls, p, t, q, independence=True):
        p = as_fraction(p, "p")
        if not 0 <= p < 1:
            raise DomainError("0 <= p < 1 violated: p={}".format(p))
        if not independence:
            raise DomainError("Only independent erasures are modelled")
        return super(ChannelSpec, cls).__new__(cls, p, as_count(t, "t"),
                                               FieldSpec(q).q, True)

    def p_beta(self, beta, exact=False):
        return p_beta(self.t, beta, self.p, self.q, exact)


class PsrResult(namedtuple(
        "PsrResult", ["p_beta", "p_s", "mode", "trials", "half_width"])):
    """A probability of successful repair.

    :param p_beta: Probability that one link delivers ``beta``
      independent packets.
    :param p_s: Probability that the repair succeeds.
    :param mode: ``"analytic"`` or ``"empirical"``.
    :param trials: Number of simulated repairs (empirical only).
    :param half_width: Half-width of the confidence interval around
      ``p_s`` (empirical only).
    """
    pass


def full_rank_probability(i, beta, q):
    """Probability that ``i`` uniform random vectors of length ``beta``
    over GF(q) span the whole space, as a Fraction."""
    if i < beta:
        return Fraction(0)
    numerator = 1
    for l in range(beta):
        numerator *= q ** i - q ** l
    return Fraction(numerator, q ** (beta * i))


@memoized
def _p_beta_exact(t, beta, p, q):
    if t < beta:
        return Fraction(0)
    # integer numerator over the common denominator b^t q^(beta t), p = a/b
    a, b = p.numerator, p.denominator
    numerator = 0
    for i in range(beta, t + 1):
        spanning = 1
        for l in range(beta):
            spanning *= q ** i - q ** l
        numerator += (math.comb(t, i) * (b - a) ** i * a ** (t - i)
                      * spanning * q ** (beta * (t - i)))
    return Fraction(numerator, b ** t * q ** (beta * t))


def p_beta(t, beta, p, q, exact=False):
    """Probability that ``beta`` packets are recovered from ``t``
    transmissions: the sum over ``i >= beta`` received packets of
    ``C(t,i)(1-p)^i p^(t-i)`` times the full-rank probability of ``i``
    random combinations; 0 when ``t < beta``.

    :keyword exact: return a Fraction instead of a float
    """
    t = as_count(t, "t")
    beta = as_count(beta, "beta")
    p = as_fraction(p, "p")
    if not 0 <= p <= 1:
        raise DomainError("0 <= p <= 1 violated: p={}".format(p))
    value = _p_beta_exact(t, beta, p, int(q))
    return value if exact else float(value)


def psr(d1, d2, pb, exact=False):
    """Probability that at least ``d1`` of ``d1 + d2`` links succeed when
    each succeeds with probability ``pb``; ``pb^d1`` when ``d2 = 0``."""
    d1 = as_count(d1, "d1")
    d2 = as_count(d2, "d2")
    pb = as_fraction(pb, "pb")
    if not 0 <= pb <= 1:
        raise DomainError("0 <= pb <= 1 violated: pb={}".format(pb))
    if d2 == 0:
        value = pb ** d1
    else:
        links = d1 + d2
        value = sum((math.comb(links, i) * pb ** i * (1 - pb) ** (links - i)
                     for i in range(d1, links + 1)), Fraction(0))
    return value if exact else float(value)


def analytic_result(d1, d2, t, beta, p, q):
    pb = p_beta(t, beta, p, q, exact=True)
    return PsrResult(float(pb), psr(d1, d2, pb), "analytic", None, None)


def z_value(confidence=CONFIDENCE):
    return float(stats.norm.ppf(0.5 + confidence / 2))


def half_width(p_hat, trials, confidence=CONFIDENCE):
    """Normal-approximation half-width of a binomial proportion."""
    return z_value(confidence) * math.sqrt(p_hat * (1 - p_hat) / trials)


def within_confidence(result, analytic, confidence=CONFIDENCE):
    """Whether an empirical ``p_s`` is consistent with ``analytic``.

    The interval is centred on the analytic value with its own variance,
    widened by the continuity correction ``1/(2N)``, so that empirical
    frequencies of exactly 0 or 1 are judged sensibly.
    """
    analytic = float(analytic)
    trials = result.trials
    allowed = (z_value(confidence) * math.sqrt(analytic * (1 - analytic) / trials)
               + 1.0 / (2 * trials))
    return abs(result.p_s - analytic) <= allowed


def _plan_links(plan):
    if isinstance(plan, tuple) and not hasattr(plan, "d1"):
        d1, d2, t = plan
    else:
        d1, d2, t = plan.d1, plan.d2, plan.t
    return as_count(d1, "d1"), as_count(d2, "d2"), as_count(t, "t")


def _simulate_block(q, beta, p, d1, d2, t, seed, stream, block, size):
    """Successful repairs and successful links among ``size`` trials."""
    field = FieldSpec(q)
    rng = np.random.default_rng([seed, stream, block])
    links = d1 + d2
    if t < beta:
        return 0, 0
    coefficients = field.random((size, links, t, beta), rng)
    erased = rng.random((size, links, t)) < p
    coefficients[erased] = 0
    ranks = batch_rank(coefficients.reshape(size * links, t, beta)).reshape(size, links)
    delivered = ranks == beta
    return int((delivered.sum(axis=1) >= d1).sum()), int(delivered.sum())


def simulate_repair(params, plan, field, trials, seed, p=None, beta=None,
                    stream=0, runner=None):
    """Monte Carlo estimate of the probability of successful repair.

    Each trial sends ``t`` packets over each of ``d1 + d2`` links; every
    packet carries fresh uniform coefficients over its helper's ``beta``
    packets and is erased with probability ``p``. A link succeeds when
    the packets that arrive have rank ``beta``; the trial succeeds when
    at least ``d1`` links do.

    :param plan: ``(d1, d2, t)`` or any object with those attributes
    :keyword p: erasure probability, ``params.p`` by default; ``p = 1``
      is allowed here
    :keyword beta: defaults to ``plan.beta`` if present, else ``params.beta``
    :keyword stream: separates independent simulations under one seed
    :keyword runner: a :mod:`lossyrepair.runners` runner for the blocks
    :rtype: :class:`PsrResult`
    """
    d1, d2, t = _plan_links(plan)
    trials = as_count(trials, "trials")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if beta is None:
        beta = getattr(plan, "beta", None) or getattr(params, "beta", None)
    beta = as_count(beta, "beta")
    p = getattr(params, "p", 0) if p is None else as_fraction(p, "p")
    if not 0 <= p <= 1:
        raise DomainError("0 <= p <= 1 violated: p={}".format(p))

    jobs = []
    for block, start in enumerate(range(0, trials, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, trials - start)
        jobs.append(runners.Job(block, "block {}".format(block), _simulate_block,
                                (field.q, beta, float(p), d1, d2, t, int(seed),
                                 int(stream), block, size), {}))
    logger.debug("Simulating %i trials in %i blocks (d1=%i, d2=%i, t=%i, beta=%i, p=%s)",
                 trials, len(jobs), d1, d2, t, beta, p)
    counts = runners.collect((runner or runners.SerialRunner()).run_jobs(jobs))
    successes = sum(c[0] for c in counts)
    delivered = sum(c[1] for c in counts)
    p_s = successes / float(trials)
    return PsrResult(delivered / float(trials * (d1 + d2)), p_s, "empirical", trials,
                     half_width(p_s, trials))


def full_rank_frequency(i, beta, field, trials, seed):
    """Fraction of ``trials`` random ``i x beta`` matrices with rank ``beta``.

    :returns: ``(frequency, half_width)``
    """
    rng = np.random.default_rng([seed, i, beta])
    ranks = batch_rank(field.random((trials, i, beta), rng))
    frequency = float((ranks == beta).mean())
    return frequency, half_width(frequency, trials)
