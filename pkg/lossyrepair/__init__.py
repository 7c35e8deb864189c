# -*- coding: utf-8 -*-
from collections import namedtuple

__version__ = "0.1.0"

MSR = "msr"
MBR = "mbr"
MODES = (MSR, MBR)


class DomainError(ValueError):
    """Raised when an input violates a precondition or an invariant,
    e.g. ``k > d``, an erasure probability outside ``[0, 1)`` or the
    inverse of zero."""
    pass


class UnsupportedError(ValueError):
    """Raised for queries outside what the closed forms cover (such as
    helper storage for more than one repairing node)."""
    pass


class InfeasibleError(ValueError):
    """Raised when no solution exists under the given constraints.

    :param best_ps: The best success probability that was reached, if
      the failure came from a reliability target.
    :type best_ps: fractions.Fraction or None

    :param diagnostics: Extra information about what was tried.
    :type diagnostics: dict
    """

    def __init__(self, msg, best_ps=None, diagnostics=None):
        self.best_ps = best_ps
        self.diagnostics = diagnostics or {}
        super(InfeasibleError, self).__init__(msg)


class ConstructionError(RuntimeError):
    """Raised when the retry budget for drawing random coefficients is
    exhausted. This usually means the field is too small.

    :param q: The order of the field the draws were made in.
    :type q: int
    """

    def __init__(self, msg, q=None):
        self.q = q
        super(ConstructionError, self).__init__(msg)


from .util import as_fraction, as_count


def check_mode(mode):
    mode = str(mode).lower()
    if mode not in MODES:
        raise DomainError("Unknown code mode `{}'; use one of {}".format(
            mode, ", ".join(MODES)))
    return mode


class SystemParams(namedtuple(
        "SystemParams", ["n", "k", "d", "alpha", "beta", "M",
                         "p", "h", "alpha_prime"])):
    """The parameters of a regenerating-code storage system.

    :param n: The number of storage nodes.
    :type n: int

    :param k: Any ``k`` nodes are enough to reconstruct the file.
    :type k: int

    :param d: The number of complete nodes that help one repair.
    :type d: int

    :param alpha: Storage per node in packets. Optional for queries
      that only need the file size.
    :type alpha: fractions.Fraction or None

    :param beta: Packets each helper delivers during a repair.
    :type beta: fractions.Fraction or None

    :param M: The file size in packets.
    :type M: fractions.Fraction or None

    :param p: The packet erasure probability of every link, in ``[0, 1)``.
    :type p: fractions.Fraction

    :param h: The number of repairing storage nodes.
    :type h: int

    :param alpha_prime: Storage of each repairing storage node. Only
      allowed when ``h > 0``.
    :type alpha_prime: fractions.Fraction or None

    Numbers may be given as ints, floats, Fractions or strings such as
    ``"3/10"`` or ``"1e-4"``; they are stored as exact Fractions.
    """

    def __new__(cls, n, k, d, alpha=None, beta=None, M=None, p=0, h=0,
                alpha_prime=None):
        n = as_count(n, "n")
        k = as_count(k, "k")
        d = as_count(d, "d")
        h = as_count(h, "h")
        if k < 1:
            raise DomainError("k must be at least 1, got k={}".format(k))
        if not k <= d <= n - 1:
            raise DomainError(
                "k <= d <= n-1 violated: n={}, k={}, d={}".format(n, k, d))
        values = {}
        for name, value in (("alpha", alpha), ("beta", beta), ("M", M),
                            ("alpha_prime", alpha_prime)):
            value = as_fraction(value, name)
            if value is not None and value <= 0:
                raise DomainError("{} must be positive, got {}".format(name, value))
            values[name] = value
        p = as_fraction(p, "p")
        if not 0 <= p < 1:
            raise DomainError("0 <= p < 1 violated: p={}".format(p))
        if h == 0 and values["alpha_prime"] is not None:
            raise DomainError("alpha_prime is only defined when h > 0")
        return super(SystemParams, cls).__new__(
            cls, n, k, d, values["alpha"], values["beta"], values["M"],
            p, h, values["alpha_prime"])

    def replace(self, **kwargs):
        """Return a copy with some fields changed, validated again."""
        fields = self._asdict()
        fields.update(kwargs)
        return SystemParams(**fields)

    @property
    def contributors(self):
        """Nodes sending repair traffic in one repair: ``d + h``."""
        return self.d + self.h

    def require(self, *names):
        """Raise :class:`DomainError` unless every named field is set."""
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise DomainError("Missing system parameter(s): " + ", ".join(missing))
        return self

    def to_json(self):
        return dict((name, None if value is None else str(value))
                    for name, value in self._asdict().items())

    @classmethod
    def from_json(cls, data):
        return cls(**data)
