"""Cell-cell interaction (CCI) model.

Each of ``floor(mu n)`` arcs draws a colour ``(i, j)`` from a joint pmf; its
source is uniform over vertices whose type admits out-colour ``i`` and its
target uniform over vertices whose type admits in-colour ``j``. The model
corresponds to an inhomogeneous random digraph with kernel
``mu * sum_ij p_ij I(t,i) J(s,j) / (lambda_i rho_j)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import rng as rngmod
from .core import Kernel, TypeDistribution, TypedDigraph, TypedMultiDigraph, _safe_floor
from .errors import EmptyAdmissibleSet, NegativeMass, NotNormalized, OrphanColour
from .generators import assign_types

PROB_TOL = 1e-12


def _indicator(a, name):
    a = np.array(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError(f"{name} entries must be 0 or 1")
    a = a.astype(np.int8)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CCIInputs:
    mu: float
    type_dist: TypeDistribution
    colour_pmf: np.ndarray
    out_indicator: np.ndarray
    in_indicator: np.ndarray

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        dist = self.type_dist
        if not isinstance(dist, TypeDistribution):
            dist = TypeDistribution(dist)
        p = np.array(self.colour_pmf, dtype=float)
        if p.ndim != 2:
            raise ValueError("colour pmf must be a K_out x K_in matrix")
        if np.any(p < 0):
            raise NegativeMass("colour pmf has negative entries")
        total = math.fsum(p.ravel())
        if abs(total - 1.0) > PROB_TOL:
            raise NotNormalized(f"colour pmf sums to {total!r}, not 1")
        p.setflags(write=False)
        out_ind = _indicator(self.out_indicator, "out indicator")
        in_ind = _indicator(self.in_indicator, "in indicator")
        if out_ind.shape != (dist.size, p.shape[0]):
            raise ValueError(f"out indicator must be {dist.size} x {p.shape[0]}, got {out_ind.shape}")
        if in_ind.shape != (dist.size, p.shape[1]):
            raise ValueError(f"in indicator must be {dist.size} x {p.shape[1]}, got {in_ind.shape}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "type_dist", dist)
        object.__setattr__(self, "colour_pmf", p)
        object.__setattr__(self, "out_indicator", out_ind)
        object.__setattr__(self, "in_indicator", in_ind)

    def with_mu(self, mu):
        return CCIInputs(mu, self.type_dist, self.colour_pmf, self.out_indicator, self.in_indicator)


@dataclass(frozen=True)
class Acceptance:
    """Mass of vertex types admitting each out-colour (``lam``) and in-colour (``rho``)."""

    lam: np.ndarray
    rho: np.ndarray


def compute_acceptance(inputs):
    q = inputs.type_dist.probs
    return Acceptance(lam=q @ inputs.out_indicator, rho=q @ inputs.in_indicator)


def _orphans(inputs, acc):
    p = inputs.colour_pmf
    bad = (p > 0) & ((acc.lam[:, None] == 0) | (acc.rho[None, :] == 0))
    return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(bad))]


def cci_kernel(inputs):
    """IRD kernel of the CCI model; zero-mass colours contribute nothing."""
    acc = compute_acceptance(inputs)
    orphans = _orphans(inputs, acc)
    if orphans:
        raise OrphanColour(f"colours {orphans} have positive mass but no admissible type")
    p = inputs.colour_pmf
    denom = np.outer(acc.lam, acc.rho)
    weight = np.divide(p, denom, out=np.zeros_like(p), where=p > 0)
    kappa = inputs.mu * (inputs.out_indicator @ weight @ inputs.in_indicator.T)
    return Kernel(kappa)


def kernel_bound(inputs):
    """Global bound ``mu / (min positive lambda * min positive rho)``."""
    acc = compute_acceptance(inputs)
    return inputs.mu / (acc.lam[acc.lam > 0].min() * acc.rho[acc.rho > 0].min())


def arc_budget(n, mu):
    return int(_safe_floor(mu * n))


def _admissible(types, indicator):
    """Concatenated admissible vertex lists per colour, with offsets and lengths."""
    allowed = indicator[types - 1].astype(bool)  # n x K
    lists = [np.flatnonzero(allowed[:, k]) for k in range(indicator.shape[1])]
    lens = np.array([a.size for a in lists], dtype=np.int64)
    offs = np.concatenate([[0], np.cumsum(lens)[:-1]]).astype(np.int64)
    flat = np.concatenate(lists) if lists else np.empty(0, dtype=np.int64)
    return flat, offs, lens


def generate_cci(n, inputs, seed):
    """Realize the CCI multigraph with exactly ``floor(mu n)`` arcs.

    Raises :class:`EmptyAdmissibleSet` when a drawn colour has no admissible
    source or target among the realized vertices.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    dist = inputs.type_dist
    types = assign_types(n, dist, seed)
    m = arc_budget(n, inputs.mu)
    k_in = inputs.colour_pmf.shape[1]
    gen = rngmod.substream(seed, rngmod.COLOURS)
    colour = gen.choice(inputs.colour_pmf.size, size=m, p=inputs.colour_pmf.ravel())
    c_out, c_in = np.divmod(colour, k_in)

    out_flat, out_offs, out_lens = _admissible(types, inputs.out_indicator)
    in_flat, in_offs, in_lens = _admissible(types, inputs.in_indicator)
    for lens, col, side in ((out_lens, c_out, "source"), (in_lens, c_in, "target")):
        empty = np.flatnonzero(lens[col] == 0)
        if empty.size:
            a = int(empty[0])
            raise EmptyAdmissibleSet(
                f"arc {a + 1} drew colour ({c_out[a] + 1}, {c_in[a] + 1}) "
                f"but no vertex is an admissible {side}"
            )
    src = out_flat[out_offs[c_out] + gen.integers(0, out_lens[c_out])] if m else np.empty(0, np.int64)
    dst = in_flat[in_offs[c_in] + gen.integers(0, in_lens[c_in])] if m else np.empty(0, np.int64)
    return TypedMultiDigraph(n, types, src, dst, num_types=dist.size)


@dataclass(frozen=True)
class SimplificationReport:
    self_loops_per_type: np.ndarray
    multi_arcs_per_pair: np.ndarray
    kept_arcs: int

    @property
    def self_loops(self):
        return int(self.self_loops_per_type.sum())

    @property
    def multi_arcs(self):
        return int(self.multi_arcs_per_pair.sum())

    @property
    def total(self):
        return self.self_loops + self.multi_arcs + self.kept_arcs


def simplify(graph):
    """Drop loops and repeated arcs, keeping the first copy of each arc.

    ``multi_arcs_per_pair[t-1, s-1]`` counts removed extra copies of arcs
    from type ``t`` to type ``s``.
    """
    S = graph.num_types
    src, dst, types = graph.src, graph.dst, graph.types
    loop = src == dst
    loops = np.bincount(types[src[loop]] - 1, minlength=S).astype(np.int64)
    pos = np.flatnonzero(~loop)
    keys = src[pos] * graph.n + dst[pos]
    _, first = np.unique(keys, return_index=True)
    first.sort()
    keep = pos[first]
    dup = np.ones(pos.size, dtype=bool)
    dup[first] = False
    dpos = pos[dup]
    multis = np.zeros((S, S), dtype=np.int64)
    np.add.at(multis, (types[src[dpos]] - 1, types[dst[dpos]] - 1), 1)
    simple = TypedDigraph(graph.n, types, src[keep], dst[keep], num_types=S)
    return simple, SimplificationReport(loops, multis, int(keep.size))
