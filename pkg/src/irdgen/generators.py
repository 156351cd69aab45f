"""Random digraph generators.

``generate_ird`` is the quadratic reference: one Bernoulli trial per ordered
vertex pair. ``generate_ard`` places a fixed number of arcs per ordered type
pair by sampling without replacement, and ``generate_ird_fast`` feeds it the
budget ``floor(kappa q_t q_s n)`` so that it runs in time linear in the
output size.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .core import (
    ArcCountTable,
    Kernel,
    TypedDigraph,
    kappa_to_lambda,
    _safe_floor,
)
from .errors import InfiniteMean

# cells per row-chunk in the naive generator
_IRD_CHUNK = 1 << 20


def assign_types(n, dist, seed):
    """Draw ``n`` i.i.d. type labels (1-based) from ``dist``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rngmod.substream(seed, rngmod.TYPES)
    if dist.size == 1:
        return np.ones(n, dtype=np.int64)
    return gen.choice(dist.size, size=n, p=dist.probs).astype(np.int64) + 1


def _groups(types, num_types):
    """Vertices of each type as sorted index arrays, keyed by 0-based type."""
    order = np.argsort(types, kind="stable")
    bounds = np.searchsorted(types[order], np.arange(1, num_types + 2))
    return [order[bounds[k]:bounds[k + 1]] for k in range(num_types)]


@dataclass(frozen=True)
class PairPool:
    """Admissible ordered pairs ``V_t x V_s`` minus the diagonal when ``t == s``.

    Index ``k`` in ``0..capacity-1`` maps to local positions ``(i, j)``;
    with the diagonal excluded row ``i`` skips column ``i``.
    """

    source_count: int
    target_count: int
    diagonal_excluded: bool = False

    def __post_init__(self):
        if self.diagonal_excluded and self.source_count != self.target_count:
            raise ValueError("diagonal exclusion needs equal source and target sets")
        if self.source_count < 0 or self.target_count < 0:
            raise ValueError("pool sizes must be nonnegative")

    @property
    def capacity(self):
        cap = self.source_count * self.target_count
        if self.diagonal_excluded:
            cap -= self.source_count
        return cap

    def decode(self, index):
        index = np.asarray(index, dtype=np.int64)
        if not self.diagonal_excluded:
            return index // self.target_count, index % self.target_count
        width = self.target_count - 1
        i = index // width
        j = index % width
        return i, j + (j >= i)

    def encode(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if not self.diagonal_excluded:
            return i * self.target_count + j
        return i * (self.target_count - 1) + j - (j > i)


def _as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return rngmod.substream(seed)


def _sample_indices(capacity, m, gen):
    """Uniform ``m``-subset of ``range(capacity)``; returns (indices, draws)."""
    if m <= 0 or capacity <= 0:
        return np.empty(0, dtype=np.int64), 0
    if m >= capacity:
        return np.arange(capacity, dtype=np.int64), 0
    if 2 * m > capacity:
        return gen.permutation(capacity)[:m].astype(np.int64), capacity
    # First m distinct values of an i.i.d. uniform stream form a uniform subset.
    chosen = np.empty(0, dtype=np.int64)
    draws = 0
    while chosen.size < m:
        need = m - chosen.size
        batch = gen.integers(0, capacity, size=need + need // 8 + 8, dtype=np.int64)
        draws += batch.size
        stream = np.concatenate([chosen, batch])
        _, first = np.unique(stream, return_index=True)
        chosen = stream[np.sort(first)][:m]
    return chosen, draws


def sample_pairs_without_replacement(pool, m, seed):
    """Return ``min(m, capacity)`` distinct pair indices drawn uniformly.

    ``seed`` is a 64-bit seed or an existing ``numpy.random.Generator``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    indices, _ = _sample_indices(pool.capacity, int(m), _as_generator(seed))
    return indices


def _place_arcs(n, types, num_types, counts, seed):
    groups = _groups(types, num_types)
    srcs, dsts = [], []
    draws = 0
    unmet = 0
    for t in range(num_types):
        for s in range(num_types):
            m = int(counts[t, s])
            if m == 0:
                continue
            vt, vs = groups[t], groups[s]
            pool = PairPool(vt.size, vs.size, diagonal_excluded=(t == s))
            if pool.capacity == 0:
                unmet += m
                continue
            gen = rngmod.substream(seed, rngmod.PAIRS, t + 1, s + 1)
            idx, d = _sample_indices(pool.capacity, m, gen)
            draws += d
            unmet += m - idx.size
            i, j = pool.decode(idx)
            srcs.append(vt[i])
            dsts.append(vs[j])
    src = np.concatenate(srcs) if srcs else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.empty(0, dtype=np.int64)
    info = {"sample_draws": draws, "unmet_demand": unmet}
    return TypedDigraph(n, types, src, dst, num_types=num_types, info=info)


def generate_ard(n, dist, table, seed):
    """Arc-assigned random digraph.

    For each ordered type pair ``(t, s)`` exactly ``min(table[t, s], capacity)``
    arcs are chosen uniformly without replacement from ``V_t x V_s`` minus
    loops. Each pair uses its own substream keyed by ``(seed, t, s)``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not isinstance(table, ArcCountTable):
        table = ArcCountTable(table)
    if table.size != dist.size:
        raise ValueError(f"table has {table.size} types, distribution has {dist.size}")
    types = assign_types(n, dist, seed)
    return _place_arcs(n, types, dist.size, table.counts, seed)


def generate_ird_fast(n, dist, kernel, tau, seed):
    """IRD realization through the equivalent ARD budget."""
    table = kappa_to_lambda(kernel, dist, n, tau)
    graph = generate_ard(n, dist, table, seed)
    graph.info["lambda_total"] = table.total
    return graph


def generate_ird(n, dist, kernel, seed):
    """Inhomogeneous random digraph by one Bernoulli trial per ordered pair.

    Arc ``(v, w)``, ``v != w``, appears with probability
    ``min(kappa_n(T_v, T_w) / n, 1)``. Quadratic time and work; rows are
    processed in fixed-size chunks so memory stays bounded.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if kernel.size != dist.size:
        raise ValueError(f"kernel has {kernel.size} types, distribution has {dist.size}")
    types = assign_types(n, dist, seed)
    rate = kernel.effective / n
    capped = int(np.count_nonzero(rate >= 1.0))
    prob = np.minimum(rate, 1.0)
    gen = rngmod.substream(seed, rngmod.ARCS)
    t0 = types - 1
    rows = max(1, _IRD_CHUNK // n)
    srcs, dsts = [], []
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        p = prob[t0[lo:hi]][:, t0]
        hits = gen.random((hi - lo, n)) < p
        r = np.arange(hi - lo)
        hits[r, r + lo] = False
        v, w = np.nonzero(hits)
        srcs.append(v + lo)
        dsts.append(w)
    src = np.concatenate(srcs).astype(np.int64)
    dst = np.concatenate(dsts).astype(np.int64)
    info = {"capped_type_pairs": capped}
    return TypedDigraph(n, types, src, dst, num_types=dist.size, info=info)


def make_gilbert_kernel(lam):
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return Kernel([[float(lam)]])


def make_sbm_kernel(pi_table, n):
    """Kernel ``n * pi`` of a sparse stochastic block model."""
    pi = np.asarray(pi_table, dtype=float)
    if np.any(pi < 0) or np.any(pi > 1):
        raise ValueError("block probabilities must lie in [0, 1]")
    return Kernel(n * pi)


def make_chung_lu_kernel(weights, values=None):
    """Chung-Lu kernel ``w_t w_s / E[W]``.

    ``weights`` is the pmf over weight values; by default label ``t`` means
    weight ``t``.
    """
    w = weights.labels.astype(float) if values is None else np.asarray(values, dtype=float)
    if w.shape != (weights.size,):
        raise ValueError("one weight value per type is required")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    mean = float(np.dot(weights.probs, w))
    if not np.isfinite(mean):
        raise InfiniteMean("weight distribution has infinite mean")
    return Kernel(np.outer(w, w) / mean)


def er_table(n, lam=None, m=None):
    """Single-type budget for the directed Erdos-Renyi graph, ``m = floor(lam n)``."""
    if (lam is None) == (m is None):
        raise ValueError("give exactly one of lam or m")
    if m is None:
        m = int(_safe_floor(lam * n))
    return ArcCountTable([[int(m)]])


def msbm_table(pi_table, dist, n):
    """Microcanonical SBM budget ``e_n(t, s) = floor(pi(t, s) q_t q_s n^2)``."""
    pi = np.asarray(pi_table, dtype=float)
    q = dist.probs
    return ArcCountTable(_safe_floor(pi * np.outer(q, q) * float(n) ** 2).astype(np.int64))
