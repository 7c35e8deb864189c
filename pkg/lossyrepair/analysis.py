# -*- coding: utf-8 -*-
"""Closed-form capacity and bandwidth-storage tradeoff of regenerating
codes whose repair links erase packets with probability ``p``.

Every function works on exact :class:`fractions.Fraction` values. With
``h`` repairing storage nodes the repair degree in every formula is
``d + h``; helpers send ``beta' = beta/(1-p)`` packets so that ``beta``
arrive on average, which scales every bandwidth by ``1/(1-p)``.
"""
import logging
from fractions import Fraction
from collections import namedtuple

from . import DomainError, UnsupportedError, InfeasibleError
from . import MSR, check_mode
from .util import as_fraction

logger = logging.getLogger(__name__)


class TradeoffPoint(namedtuple(
        "TradeoffPoint", ["alpha", "gamma", "beta", "beta_prime", "lossy"])):
    """A point on the optimal bandwidth-storage tradeoff.

    :param alpha: Storage per node.
    :type alpha: fractions.Fraction

    :param gamma: Total repair bandwidth, in packets sent.
    :type gamma: fractions.Fraction

    :param beta: Packets each helper must deliver.
    :type beta: fractions.Fraction

    :param beta_prime: Packets each helper sends, ``beta/(1-p)`` when
      ``lossy`` and ``beta`` otherwise.
    :type beta_prime: fractions.Fraction

    :param lossy: Whether the ``1/(1-p)`` inflation is applied.
    :type lossy: bool
    """
    pass


class HelperStorage(namedtuple(
        "HelperStorage", ["alpha_prime", "ratio", "feasible"])):
    """Minimum storage of a single repairing storage node.

    :param alpha_prime: The least storage that keeps repair possible.
    :param ratio: Storage of a complete node divided by ``alpha_prime``.
    :param feasible: Whether the queried ``alpha_prime`` (if one was
      given in the parameters) is at least the minimum.
    """
    pass


def cut_value(k, alpha, beta_sent, contributors, p=0):
    """Sum over ``i < k`` of ``min(alpha, (contributors - i)(1-p) beta_sent)``."""
    alpha = as_fraction(alpha, "alpha")
    beta_sent = as_fraction(beta_sent, "beta_sent")
    p = as_fraction(p, "p")
    if beta_sent < 0:
        raise DomainError("beta_sent must be non-negative, got {}".format(beta_sent))
    delivered = (1 - p) * beta_sent
    return sum((min(alpha, max(contributors - i, 0) * delivered) for i in range(k)),
               Fraction(0))


def capacity(params, beta_sent):
    """The information a data collector can receive after any number of
    failures and repairs when each helper sends ``beta_sent`` packets.
    """
    params.require("alpha")
    return cut_value(params.k, params.alpha, beta_sent, params.contributors, params.p)


def _f(i, M, D, k):
    return Fraction(2 * M * D, (2 * k - i - 1) * i + 2 * k * (D - k + 1))


def _g(i, D, k, printed=False):
    if printed:
        return Fraction((2 * D + 2 * k + i + 1) * i, 2 * D)
    return Fraction((2 * D - 2 * k + i + 1) * i, 2 * D)


def breakpoints(params):
    """The bandwidths ``f(i)/(1-p)``, ``i = 0..k-1``, where the tradeoff
    changes segment, from the minimum-storage end down to the
    minimum-bandwidth end."""
    params.require("M")
    D = params.contributors
    return [_f(i, params.M, D, params.k) / (1 - params.p) for i in range(params.k)]


def tradeoff_point(gamma_prime, params, printed_g=False):
    """Like :func:`tradeoff_alpha` but also return the segment index:
    0 on the flat minimum-storage part, ``i`` on the segment
    ``[f(i)/(1-p), f(i-1)/(1-p))``.

    :returns: ``(alpha, segment)``
    """
    params.require("M")
    gamma_prime = as_fraction(gamma_prime, "gamma_prime")
    M, k, p = params.M, params.k, params.p
    D = params.contributors
    gamma = gamma_prime * (1 - p)
    if gamma < _f(k - 1, M, D, k):
        raise InfeasibleError(
            "gamma'={} is below the minimum-bandwidth repair point {}".format(
                gamma_prime, _f(k - 1, M, D, k) / (1 - p)))
    if gamma >= _f(0, M, D, k):
        return M / k, 0
    for i in range(1, k):
        if gamma >= _f(i, M, D, k):
            return (M - _g(i, D, k, printed_g) * gamma) / (k - i), i
    raise AssertionError("f(i) is decreasing in i")


def tradeoff_alpha(gamma_prime, params, printed_g=False):
    """The least per-node storage ``alpha`` that supports repair
    bandwidth ``gamma_prime`` (packets sent, erasures included).

    :keyword printed_g: Use ``g(i) = (2d+2k+i+1)i/(2d)`` instead of the
      continuous ``(2d-2k+i+1)i/(2d)``. Only for comparison; the result
      is not on the tradeoff curve.
    :raises InfeasibleError: below the minimum-bandwidth point
    """
    return tradeoff_point(gamma_prime, params, printed_g)[0]


def extreme_point(mode, params, lossy=True):
    """The minimum-storage (MSR) or minimum-bandwidth (MBR) point.

    :param mode: ``"msr"`` or ``"mbr"``
    :keyword lossy: Apply the ``1/(1-p)`` inflation to ``gamma``.
    :rtype: :class:`TradeoffPoint`
    """
    mode = check_mode(mode)
    params.require("M")
    M, k = params.M, params.k
    D = params.contributors
    if mode == MSR:
        alpha = M / k
        gamma = Fraction(M * D) / (k * (D - k + 1))
    else:
        alpha = Fraction(2 * M * D) / (k * (2 * D - k + 1))
        gamma = alpha
    beta = gamma / D
    if lossy:
        return TradeoffPoint(alpha, gamma / (1 - params.p), beta,
                             beta / (1 - params.p), True)
    return TradeoffPoint(alpha, gamma, beta, beta, False)


def min_helper_storage(mode, params):
    """The least storage ``alpha'`` of one repairing storage node: ``beta``
    for MSR codes and ``k*beta`` for MBR codes, with the code's ``beta``
    taken at repair degree ``d + 1``.

    :raises UnsupportedError: if ``params.h != 1``
    """
    mode = check_mode(mode)
    if params.h != 1:
        raise UnsupportedError(
            "Helper storage is only characterised for h=1, got h={}".format(params.h))
    point = extreme_point(mode, params, lossy=False)
    needed = point.beta if mode == MSR else params.k * point.beta
    feasible = params.alpha_prime is None or params.alpha_prime >= needed
    if not feasible:
        logger.info("alpha'=%s is below the minimum %s for %s codes",
                    params.alpha_prime, needed, mode.upper())
    return HelperStorage(needed, point.alpha / needed, feasible)


def monotonicity_check(mode, params, hmax):
    """Repair bandwidth of the code for ``d, d+1, ..., d+hmax`` helpers.
    The sequence is nonincreasing.
    """
    mode = check_mode(mode)
    if params.d + hmax > params.n - 1:
        raise DomainError("d + hmax <= n-1 violated: d={}, hmax={}, n={}".format(
            params.d, hmax, params.n))
    return [extreme_point(mode, params.replace(d=params.d + j)).gamma
            for j in range(hmax + 1)]


def overhead_ratio(practical, asymptotic):
    """How much a finite-transmission bandwidth exceeds the asymptotic one."""
    return as_fraction(practical, "practical") / as_fraction(asymptotic, "asymptotic")
