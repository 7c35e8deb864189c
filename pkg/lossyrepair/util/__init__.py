# -*- coding: utf-8 -*-
import re
import os
import sys
import json
import errno
import pickle
import numbers
import contextlib
import unicodedata
from functools import wraps
from fractions import Fraction

import cloudpickle


###
# Numbers

class _Infinity(object):
    """The capacity of an edge that can never be cut. Compares greater
    than every number and equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(_Infinity, cls).__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __hash__(self):
        return hash("lossyrepair.INFINITY")

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "inf"


INFINITY = _Infinity()


def as_fraction(value, name="value"):
    """Convert ``value`` to an exact :class:`fractions.Fraction`. Strings
    like ``"3/10"``, ``"0.3"`` and ``"1e-4"`` are parsed exactly and
    floats go through their shortest repr, so ``0.3`` becomes ``3/10``.
    ``None`` is passed through."""
    from .. import DomainError

    if value is None or isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("{} must be a number, got {!r}".format(name, value))
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError("{} must be a rational number, got {!r}".format(name, value))


def as_count(value, name="value"):
    """Convert ``value`` to a non-negative int, refusing fractional values."""
    from .. import DomainError

    number = as_fraction(value, name)
    if number is None or number.denominator != 1 or number < 0:
        raise DomainError("{} must be a non-negative integer, got {!r}".format(name, value))
    return int(number)


def parse_range(text):
    """Expand ``start:stop:step`` into the inclusive list of exact values."""
    from .. import DomainError

    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError("Ranges use start:stop:step, got `{}'".format(text))
    start, stop, step = [as_fraction(part, "range bound") for part in parts]
    if step <= 0:
        raise DomainError("Range step must be positive, got `{}'".format(text))
    values = []
    value = start
    while value <= stop:
        values.append(value)
        value += step
    return values


def parse_values(text):
    """Parse a comma separated list whose items are single values or
    ``start:stop:step`` ranges, e.g. ``"0.1,0.2"`` or
    ``"0.01:0.1:0.01"``."""
    values = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            values.extend(parse_range(item))
        else:
            values.append(as_fraction(item))
    return values


def format_exact(value):
    """Format a rational exactly (``"7/2"``), counts as plain integers."""
    if value is None:
        return ""
    return str(value)


def format_probability(value):
    """Probabilities are written as the repr of a double."""
    if value is None:
        return ""
    return repr(float(value))


###
# Serialization things

class SerializationError(TypeError):
    pass


def _defaultfunc(obj):
    if isinstance(obj, Fraction) or obj is INFINITY:
        return str(obj)

    if hasattr(obj, "tolist"):
        return obj.tolist()

    raise SerializationError("Unable to serialize object %s" %(obj))


def serialize(obj, to_fp=None):
    if to_fp:
        return json.dump(obj, to_fp, default=_defaultfunc, sort_keys=True)
    else:
        return json.dumps(obj, default=_defaultfunc, sort_keys=True)


def deserialize(s=None, from_fp=None):
    if s:
        return json.loads(s)
    elif from_fp:
        return json.load(from_fp)


def try_pickle_dumps(obj):
    """
    Try two different packages to pickle a job
    """
    try:
        return cloudpickle.dumps(obj)
    except Exception:
        pass

    return pickle.dumps(obj)


###
# Misc

def memoized(func):
    cache = func.cache = {}

    @wraps(func)
    def memoizer(*args):
        if args not in cache:
            cache[args] = func(*args)
        return cache[args]
    return memoizer


def mkdirp(path):
    try:
        return os.makedirs(path)
    except OSError as e:
        if e.errno == errno.EEXIST and os.path.isdir(path):
            pass
        else:
            raise


def kebab(s):
    """Kebab-case a string. Whitespace and underscores are converted to
    ``-`` and unfriendly characters are dropped. Digits are kept so
    ``d1`` stays ``d1``."""
    s = unicodedata.normalize("NFKD", s).encode("ascii", "ignore").decode("ascii")
    s = re.sub(r"[\s_-]+", '-', s)
    return re.sub(r"""['".,\[\]{}!@#$%^&*()=+|\\`~><]+""", '', s).strip('-')


@contextlib.contextmanager
def capture(stderr=None, stdout=None):
    if stderr:
        saved_stderr = sys.stderr
        sys.stderr = stderr
    if stdout:
        saved_stdout = sys.stdout
        sys.stdout = stdout
    try:
        yield
    finally:
        if stderr:
            sys.stderr = saved_stderr
        if stdout:
            sys.stdout = saved_stdout
