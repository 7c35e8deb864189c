# -*- coding: utf-8 -*-
"""Finite field arithmetic and linear algebra over GF(q).

Prime fields and binary extension fields GF(2^m), ``m <= 16``, are
supported. Each binary field uses one fixed reduction polynomial so
that every random draw and every matrix is reproducible bit for bit.
All arithmetic is delegated to :mod:`galois`; nothing here touches
floating point.
"""
import logging
from collections import namedtuple

import numpy as np
import galois

from . import DomainError
from .util import memoized

logger = logging.getLogger(__name__)

#: Reduction polynomials for GF(2^m), as integers with bit i the
#: coefficient of x^i. GF(2^8) uses x^8+x^4+x^3+x+1.
REDUCTION_POLYNOMIALS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11B,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_DEGREE = max(REDUCTION_POLYNOMIALS)


@memoized
def _galois_field(q, poly):
    logger.debug("Building GF(%i) with reduction polynomial %s", q, poly)
    if poly is None:
        return galois.GF(q)
    return galois.GF(q, irreducible_poly=poly)


class FieldSpec(namedtuple("FieldSpec", ["q", "poly"])):
    """The field GF(q).

    :param q: The field order: a prime, or ``2^m`` with ``2 <= m <= 16``.
    :type q: int

    ``poly`` is filled in from :data:`REDUCTION_POLYNOMIALS` for binary
    extension fields and is ``None`` for prime fields. GF(2) is the
    prime field.
    """

    def __new__(cls, q):
        try:
            q = int(q)
        except (TypeError, ValueError):
            raise DomainError("Field order must be an integer, got {!r}".format(q))
        if q < 2:
            raise DomainError("Field order must be at least 2, got {}".format(q))
        if galois.is_prime(q):
            return super(FieldSpec, cls).__new__(cls, q, None)
        if q & (q - 1) == 0:
            m = q.bit_length() - 1
            if m > MAX_DEGREE:
                raise DomainError(
                    "GF(2^{}) is not supported; the largest binary field is GF(2^{})".format(m, MAX_DEGREE))
            return super(FieldSpec, cls).__new__(cls, q, REDUCTION_POLYNOMIALS[m])
        raise DomainError("Field order must be a prime or a power of 2, got {}".format(q))

    def __getnewargs__(self):
        return (self.q,)

    @property
    def degree(self):
        return 1 if self.poly is None else self.q.bit_length() - 1

    @property
    def GF(self):
        """The :mod:`galois` array class of this field."""
        return _galois_field(self.q, self.poly)

    def __call__(self, values):
        """Wrap integers (or an array of them) as field elements."""
        values = np.asarray(values, dtype=np.int64)
        if values.size and (values.min() < 0 or values.max() >= self.q):
            raise DomainError("Field elements of GF({}) lie in [0, {})".format(self.q, self.q))
        return self.GF(values)

    def random(self, shape, rng):
        """Uniform random elements drawn from ``rng``, a
        :class:`numpy.random.Generator`."""
        return self.GF.Random(shape, seed=rng)

    def zeros(self, shape):
        return self.GF.Zeros(shape)


def smallest_field(r):
    """The smallest supported field with at least ``r`` elements."""
    q = max(2, int(r))
    while True:
        if galois.is_prime(q) or (q & (q - 1) == 0 and q.bit_length() - 1 <= MAX_DEGREE):
            return FieldSpec(q)
        q += 1


def fq_mul_inv(a, b, field):
    """Multiply two elements and invert the first one.

    :returns: ``(a*b, a^-1)`` as ints
    :raises DomainError: if ``a`` is zero or an element is out of range
    """
    x, y = field([a, b])
    if int(x) == 0:
        raise DomainError("0 has no multiplicative inverse in GF({})".format(field.q))
    return int(x * y), int(np.reciprocal(x))


class FqMatrix(object):
    """A read-only matrix over GF(q).

    :param field: The field of the entries.
    :type field: :class:`FieldSpec`

    :param array: The entries, either a 2-d :mod:`galois` array of
      ``field`` or anything :mod:`numpy` turns into a 2-d int array.
    """

    __slots__ = ("field", "_array", "_rank")

    def __init__(self, field, array):
        if not isinstance(array, field.GF):
            array = field(array)
        if array.ndim != 2:
            raise DomainError("A matrix needs two dimensions, got shape {}".format(array.shape))
        array = array.copy()
        array.setflags(write=False)
        self.field = field
        self._array = array
        self._rank = None

    @classmethod
    def from_entries(cls, field, rows, cols, entries):
        entries = list(entries)
        if len(entries) != rows * cols:
            raise DomainError("Expected {}x{}={} entries, got {}".format(
                rows, cols, rows * cols, len(entries)))
        return cls(field, np.array(entries, dtype=np.int64).reshape(rows, cols))

    @property
    def array(self):
        return self._array

    @property
    def rows(self):
        return self._array.shape[0]

    @property
    def cols(self):
        return self._array.shape[1]

    @property
    def entries(self):
        return [int(x) for x in self._array.view(np.ndarray).ravel()]

    def rank(self):
        if self._rank is None:
            self._rank = rank(self)
        return self._rank

    def __matmul__(self, other):
        return FqMatrix(self.field, self._array @ other._array)

    def __eq__(self, other):
        return (isinstance(other, FqMatrix) and self.field == other.field
                and self._array.shape == other._array.shape
                and bool(np.array_equal(self._array.view(np.ndarray),
                                        other._array.view(np.ndarray))))

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.field, self._array.shape, tuple(self.entries)))

    def __repr__(self):
        return "FqMatrix(q={}, {}x{})".format(self.field.q, self.rows, self.cols)

    def to_json(self):
        return {"q": self.field.q, "rows": self.rows, "cols": self.cols,
                "entries": self.entries}

    @classmethod
    def from_json(cls, data):
        return cls.from_entries(FieldSpec(data["q"]), int(data["rows"]),
                                int(data["cols"]), data["entries"])


def stack(matrices, field=None):
    """Stack the rows of several matrices into one matrix."""
    matrices = list(matrices)
    if not matrices:
        raise DomainError("Nothing to stack")
    if field is None:
        field = matrices[0].field
    for m in matrices:
        if m.field != field:
            raise DomainError("Cannot stack matrices over different fields")
    ints = np.concatenate([m.array.view(np.ndarray) for m in matrices], axis=0)
    return FqMatrix(field, ints)


def rank(m):
    """The rank of ``m`` over its field. ``m`` is left untouched."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(np.linalg.matrix_rank(m.array.copy()))


def batch_rank(arrays):
    """Ranks of a stack of matrices, by Gauss-Jordan elimination run on
    the whole stack at once.

    :param arrays: A :mod:`galois` array of shape ``(B, R, C)``.
    :returns: int array of shape ``(B,)``
    """
    work = arrays.copy()
    batch, rows, cols = work.shape
    ranks = np.zeros(batch, dtype=np.int64)
    if rows == 0 or cols == 0 or batch == 0:
        return ranks
    used = np.zeros((batch, rows), dtype=bool)
    for col in range(cols):
        column = work[:, :, col].view(np.ndarray)
        candidates = (column != 0) & ~used
        found = candidates.any(axis=1)
        if not found.any():
            continue
        which = np.nonzero(found)[0]
        pivots = np.argmax(candidates[which], axis=1)
        used[which, pivots] = True
        ranks[which] += 1

        pivot_rows = work[which, pivots, :]
        pivot_rows = pivot_rows * np.reciprocal(work[which, pivots, col])[:, np.newaxis]
        work[which, pivots, :] = pivot_rows
        factors = work[which, :, col].copy()
        factors[np.arange(which.size), pivots] = 0
        work[which] = work[which] - factors[:, :, np.newaxis] * pivot_rows[:, np.newaxis, :]
    return ranks


def vandermonde(r, c, elems, field):
    """The ``r x c`` matrix with entry ``(i, j) = elems[i]^j``.

    :raises DomainError: for repeated evaluation points or ``r > q``
    """
    elems = [int(e) for e in elems]
    if len(elems) != r:
        raise DomainError("Expected {} evaluation points, got {}".format(r, len(elems)))
    if r > field.q:
        raise DomainError("A {}-row Vandermonde matrix needs q >= {}, got q={}".format(r, r, field.q))
    if len(set(elems)) != r:
        raise DomainError("Vandermonde evaluation points must be distinct")
    x = field(elems)
    matrix = field.zeros((r, c))
    if c:
        matrix[:, 0] = 1
    for j in range(1, c):
        matrix[:, j] = matrix[:, j - 1] * x
    return FqMatrix(field, matrix)
