# -*- coding: utf-8 -*-
"""Fuzzy matching of option names, used to suggest a correction when a
configuration file carries a key no subcommand knows."""
import itertools
import operator

first = operator.itemgetter(0)


def windows(iterable, length):
    args = itertools.tee(iterable, length)
    # advance the i-th iterator i steps
    for i in range(len(args)-1, 0, -1):
        for iter_ in args[i:]:
            next(iter_, None)
    return zip(*args)


def kmer_set(iterable, kmer_lengths=(2,)):
    ret = set()
    for k in kmer_lengths:
        ret.update(windows(iterable, k))
    return ret


def distance(a_str, b_str, kmer_lengths=(2,)):
    a_chunks = kmer_set(a_str.lower(), kmer_lengths)
    b_chunks = kmer_set(b_str.lower(), kmer_lengths)
    return len(a_chunks.symmetric_difference(b_chunks))


def closest(needle_str, haystack, kmer_lengths=(1, 2)):
    """Return the candidates nearest to ``needle_str``, ties included,
    in sorted order."""
    distances = sorted((distance(needle_str, s, kmer_lengths), s)
                       for s in set(haystack))
    if not distances:
        return []
    best = distances[0][0]
    return [s for d, s in distances if d == best]


def suggestion(needle_str, haystack):
    """A ``Perhaps you meant`` hint, or an empty string."""
    matches = closest(needle_str, haystack)
    if not matches:
        return ""
    return " Perhaps you meant `{}'?".format("' or `".join(matches))
