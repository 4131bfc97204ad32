"""Shared sampling helpers for the test suite."""
import numpy as np

from patchsize import Graph, Habitat, gen_gnp


def random_habitat(rng, n_lo=2, n_hi=40, p_pow=1.0):
    """A habitat from G(n, p) with n, s, p drawn from the supplied rng."""
    n = int(rng.integers(n_lo, n_hi + 1))
    s = int(rng.integers(1, n))
    p = float(rng.random() ** p_pow)
    g = gen_gnp(n, p, seed=int(rng.integers(2 ** 32)))
    return Habitat(g, s)


def strip_vertex(g, v):
    """Copy of g with every edge at vertex v removed."""
    e = g.edges()
    keep = (e[:, 0] != v) & (e[:, 1] != v)
    return Graph.from_edges(g.n, e[keep])
