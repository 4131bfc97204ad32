"""Undirected simple graphs, habitats, and seeded random graph generation.

Vertices are 0-based in memory and 1-based in the text file format. A graph
is stored twice: as the sorted array of linearized pair indices (the
canonical edge set) and as a CSR adjacency structure with sorted neighbor
lists, so neighbor scans and sink-adjacency counts are O(degree).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "Habitat",
    "RandomModel",
    "gen_gnp",
    "gen_gnm",
    "induced_subgraph",
    "sink_adjacency_counts",
    "is_connected",
    "save_graph",
    "load_graph",
]


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _row_offset(i, n):
    # number of pairs (a, b), a < b, with a < i, in lexicographic order
    return i * (2 * n - i - 1) // 2


def pairs_to_indices(i, j, n: int):
    """Linearize vertex pairs (i < j, 0-based) to positions in 0..C(n,2)-1."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return _row_offset(i, n) + (j - i - 1)


def indices_to_pairs(k, n: int):
    """Inverse of :func:`pairs_to_indices`; vectorized."""
    k = np.asarray(k, dtype=np.int64)
    i = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * k)) / 2.0)
    i = np.clip(i.astype(np.int64), 0, max(n - 2, 0))
    # float sqrt may land one row off near boundaries
    for _ in range(2):
        i = np.where(_row_offset(i + 1, n) <= k, i + 1, i)
        i = np.where(_row_offset(i, n) > k, i - 1, i)
    j = k - _row_offset(i, n) + i + 1
    return i, j


class Graph:
    """Immutable undirected simple graph on vertices 0..n-1."""

    __slots__ = ("n", "indptr", "indices", "pair_idx", "_adj")

    def __init__(self, n: int, pair_idx: np.ndarray, _presorted: bool = False):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        pair_idx = np.asarray(pair_idx, dtype=np.int64)
        if not _presorted:
            pair_idx = np.sort(pair_idx)
        if pair_idx.size:
            if pair_idx[0] < 0 or pair_idx[-1] >= pair_count(n):
                raise ValueError("edge index out of range")
            if np.any(pair_idx[1:] == pair_idx[:-1]):
                raise ValueError("duplicate edge")
        self.n = int(n)
        self.pair_idx = pair_idx
        self.indptr, self.indices = _build_csr(self.n, pair_idx)
        for a in (self.pair_idx, self.indptr, self.indices):
            a.flags.writeable = False
        self._adj = None

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable/array of (i, j) vertex pairs, any order."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64)
        if e.size == 0:
            return cls(n, np.empty(0, dtype=np.int64), _presorted=True)
        e = e.reshape(-1, 2)
        if np.any(e < 0) or np.any(e >= n):
            raise ValueError("vertex index out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loop")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        return cls(n, pairs_to_indices(lo, hi, n))

    @property
    def num_edges(self) -> int:
        return int(self.pair_idx.size)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """Edge list as an (m, 2) array with i < j, lexicographically sorted."""
        i, j = indices_to_pairs(self.pair_idx, self.n)
        return np.column_stack([i, j])

    def adjacency(self) -> csr_matrix:
        """0/1 adjacency as a scipy CSR matrix (cached)."""
        if self._adj is None:
            self._adj = csr_matrix(
                (np.ones(self.indices.size), self.indices.copy(),
                 self.indptr.copy()),
                shape=(self.n, self.n),
            )
        return self._adj

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        lo, hi = (i, j) if i < j else (j, i)
        k = int(pairs_to_indices(lo, hi, self.n))
        pos = np.searchsorted(self.pair_idx, k)
        return pos < self.pair_idx.size and self.pair_idx[pos] == k

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n == other.n
                and np.array_equal(self.pair_idx, other.pair_idx))

    def __hash__(self):
        return hash((self.n, self.pair_idx.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges})"


def _build_csr(n, pair_idx):
    m = pair_idx.size
    if m == 0:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    i, j = indices_to_pairs(pair_idx, n)
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    a = coo_matrix((np.ones(2 * m, dtype=np.int8), (rows, cols)), shape=(n, n)).tocsr()
    a.sort_indices()
    return a.indptr.astype(np.int64), a.indices.astype(np.int64)


@dataclass(frozen=True)
class Habitat:
    """A graph together with its sink prefix: sinks are vertices 0..s-1."""

    graph: Graph
    s: int

    def __post_init__(self):
        if not 0 <= self.s < self.graph.n:
            raise ValueError("need 0 <= s < n (at least one non-sink vertex)")

    @property
    def interior_size(self) -> int:
        return self.graph.n - self.s


@dataclass(frozen=True)
class RandomModel:
    """A random graph law: G(n, p) edge probability or G(n, m) edge count."""

    kind: str  # "gnp" | "gnm"
    p: float | None = None
    m: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind == "gnp":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("gnp model needs p in [0, 1]")
        elif self.kind == "gnm":
            if self.m is None or self.m < 0:
                raise ValueError("gnm model needs m >= 0")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")

    def sample(self, n: int) -> Graph:
        if self.kind == "gnp":
            return gen_gnp(n, self.p, self.seed)
        return gen_gnm(n, self.m, self.seed)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_gnp(n: int, p: float, seed) -> Graph:
    """Sample G(n, p): every vertex pair is an edge independently with prob p.

    Uses geometric skip-sampling over the linearized pair order, so the cost
    is O(p*n^2 + n) rather than C(n, 2) coin flips. Deterministic in
    (n, p, seed).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("need 0 <= p <= 1")
    total = pair_count(n)
    if p == 0.0 or total == 0:
        return Graph(n, np.empty(0, dtype=np.int64), _presorted=True)
    if p == 1.0:
        return Graph(n, np.arange(total, dtype=np.int64), _presorted=True)
    rng = _rng(seed)
    chunks = []
    last = -1  # position of the previous success
    while last < total:
        remaining = total - last
        batch = int(remaining * p * 1.05) + 64
        gaps = rng.geometric(p, size=batch)
        hits = last + np.cumsum(gaps)
        chunks.append(hits)
        last = int(hits[-1])
    pair_idx = np.concatenate(chunks)
    pair_idx = pair_idx[pair_idx < total]
    return Graph(n, pair_idx, _presorted=True)


def gen_gnm(n: int, m: int, seed) -> Graph:
    """Sample G(n, m): a uniformly random set of exactly m distinct edges.

    The first m distinct values of an i.i.d. uniform index stream form a
    uniform m-subset of the pair space; for m above half the pair count a
    partial Fisher-Yates shuffle is cheaper. Deterministic in (n, m, seed).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    total = pair_count(n)
    if not 0 <= m <= total:
        raise ValueError(f"need 0 <= m <= {total} for n={n}")
    if m == 0:
        return Graph(n, np.empty(0, dtype=np.int64), _presorted=True)
    if m == total:
        return Graph(n, np.arange(total, dtype=np.int64), _presorted=True)
    rng = _rng(seed)
    if m > total // 2:
        chosen = rng.permutation(total)[:m]
        return Graph(n, np.sort(chosen), _presorted=True)
    stream = np.empty(0, dtype=np.int64)
    have = 0
    while have < m:
        need = m - have
        batch = int(1.5 * need * total / (total - have)) + 64
        stream = np.concatenate([stream, rng.integers(0, total, size=batch)])
        have = np.unique(stream).size
    uniq, first_pos = np.unique(stream, return_index=True)
    chosen = uniq[np.argsort(first_pos)[:m]]
    return Graph(n, np.sort(chosen), _presorted=True)


def _interior_entries(h: Habitat):
    # CSR entries of the habitat graph, tagged by row, for splitting into
    # sink-facing and interior parts in one pass
    g = h.graph
    rows = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    return rows, g.indices


def sink_adjacency_counts(h: Habitat) -> np.ndarray:
    """z_i: number of sink neighbors of each non-sink vertex, in interior order."""
    rows, cols = _interior_entries(h)
    mask = (rows >= h.s) & (cols < h.s)
    return np.bincount(rows[mask] - h.s, minlength=h.interior_size)


def induced_subgraph(h: Habitat) -> Graph:
    """The subgraph induced by the non-sink vertices, reindexed to 0..n-s-1."""
    rows, cols = _interior_entries(h)
    keep = (rows >= h.s) & (cols > rows)  # upper half of the interior block
    i = rows[keep] - h.s
    j = cols[keep] - h.s
    # CSR traversal emits (i, j) already in lexicographic order
    return Graph(h.interior_size, pairs_to_indices(i, j, h.interior_size),
                 _presorted=True)


def is_connected(g: Graph) -> bool:
    """True iff g has a single connected component."""
    if g.n == 1:
        return True
    if g.num_edges < g.n - 1:
        return False
    ncomp, _ = connected_components(g.adjacency(), directed=False)
    return ncomp == 1


def save_graph(g: Graph, path) -> None:
    """Write the text format: header "n m", then one "i j" line per edge (1-based)."""
    e = g.edges()
    with open(path, "w", encoding="ascii") as f:
        f.write(f"{g.n} {g.num_edges}\n")
        for i, j in e:
            f.write(f"{i + 1} {j + 1}\n")


def load_graph(path) -> Graph:
    """Read the text format; rejects self-loops, duplicates, and bad indices."""
    with open(path, "r", encoding="ascii") as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'n m' header")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header") from exc
    if n < 1 or m < 0:
        raise ValueError(f"{path}: invalid header n={n} m={m}")
    body = tokens[2:]
    if len(body) != 2 * m:
        raise ValueError(f"{path}: expected {m} edge lines, found {len(body) // 2}")
    if m == 0:
        return Graph(n, np.empty(0, dtype=np.int64), _presorted=True)
    try:
        e = np.array(body, dtype=np.int64).reshape(m, 2)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed edge line") from exc
    if np.any(e[:, 0] == e[:, 1]):
        raise ValueError(f"{path}: self-loop")
    if np.any(e[:, 0] >= e[:, 1]):
        raise ValueError(f"{path}: edges must satisfy i < j")
    if np.any(e < 1) or np.any(e > n):
        raise ValueError(f"{path}: vertex index out of range")
    try:
        return Graph.from_edges(n, e - 1)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
