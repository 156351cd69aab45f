"""Shared domain types: type distributions, kernels, arc budgets, digraphs.

Conventions used throughout the package:

* type labels are ``1..S``; arrays indexed by type use position ``t - 1``;
* vertices are ``0..n-1`` in memory (files written by the CLI are 1-based);
* all containers are frozen and their arrays are read-only.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidAlpha, NegativeMass, NotNormalized

PROB_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TypeDistribution:
    """Finite pmf ``q`` over type labels ``1..S``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("type distribution must be a nonempty vector")
        if np.any(probs < 0):
            raise NegativeMass(f"negative probability in {probs.tolist()}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise NotNormalized(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def size(self):
        return self.probs.size

    @property
    def labels(self):
        return np.arange(1, self.size + 1)

    def __len__(self):
        return self.size


def validate_distribution(probs, renormalize=False):
    """Validate a raw nonnegative vector as a :class:`TypeDistribution`.

    Inputs are only rescaled when ``renormalize`` is set explicitly.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("type distribution must be a nonempty vector")
    if np.any(probs < 0):
        raise NegativeMass(f"negative probability in {probs.tolist()}")
    if renormalize:
        total = math.fsum(probs)
        if total <= 0:
            raise NotNormalized("cannot renormalize a zero vector")
        probs = probs / total
    return TypeDistribution(probs)


def truncated_distribution(weights, quantile=1.0 - 1e-9, max_types=10**6):
    """Truncate a heavy-tailed pmf given as ``weights(t)`` for ``t = 1, 2, ...``.

    ``weights`` is a callable on a label array returning unnormalized masses
    whose total is finite. The support is cut at the first label whose
    cumulative (normalized over ``max_types``) mass reaches ``quantile``,
    then renormalized.
    """
    t = np.arange(1, max_types + 1, dtype=float)
    w = np.asarray(weights(t), dtype=float)
    cdf = np.cumsum(w) / w.sum()
    cut = int(np.searchsorted(cdf, quantile)) + 1
    return validate_distribution(w[:cut], renormalize=True)


@dataclass(frozen=True)
class Kernel:
    """Dense ``S x S`` kernel with optional multiplicative perturbation."""

    values: np.ndarray
    perturbation: np.ndarray = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"kernel must be square, got shape {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("kernel entries must be finite and nonnegative")
        if self.perturbation is None:
            pert = np.zeros_like(values)
            pert.setflags(write=False)
        else:
            pert = _frozen(self.perturbation)
            if pert.shape != values.shape:
                raise ValueError("perturbation shape must match kernel")
        if np.any(values * (1.0 + pert) < 0):
            raise ValueError("effective kernel kappa*(1+phi) must be nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "perturbation", pert)

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def effective(self):
        """``kappa_n = kappa * (1 + phi_n)``."""
        return self.values * (1.0 + self.perturbation)

    def __call__(self, t, s):
        return float(self.values[t - 1, s - 1])


@dataclass(frozen=True)
class ArcCountTable:
    """Arc budget per ordered type pair."""

    counts: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise ValueError(f"arc count table must be square, got shape {raw.shape}")
        if np.any(raw < 0) or np.any(raw != np.floor(raw)):
            raise ValueError("arc counts must be nonnegative integers")
        object.__setattr__(self, "counts", _frozen(raw, dtype=np.int64))

    @property
    def size(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class TypedDigraph:
    """Simple digraph on vertices ``0..n-1`` with type labels.

    Arcs are stored as parallel ``src``/``dst`` arrays. ``info`` carries
    generator diagnostics and is not part of graph identity.
    """

    n: int
    types: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    num_types: int = None
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        types = _frozen(self.types, dtype=np.int64)
        src = _frozen(self.src, dtype=np.int64)
        dst = _frozen(self.dst, dtype=np.int64)
        if types.shape != (self.n,):
            raise ValueError(f"expected {self.n} type labels, got {types.shape}")
        if src.shape != dst.shape or src.ndim != 1:
            raise ValueError("src and dst must be equal-length vectors")
        num_types = self.num_types
        if num_types is None:
            num_types = int(types.max()) if self.n else 0
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "num_types", int(num_types))

    @property
    def num_arcs(self):
        return int(self.src.size)

    @property
    def arcs(self):
        return np.column_stack([self.src, self.dst])

    def arc_set(self):
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def validate(self, simple=True):
        """Check endpoint/label ranges and, if ``simple``, no loops or duplicates."""
        if self.n and (self.types.min() < 1 or self.types.max() > self.num_types):
            raise ValueError("type label out of range")
        if self.num_arcs:
            lo = min(self.src.min(), self.dst.min())
            hi = max(self.src.max(), self.dst.max())
            if lo < 0 or hi >= self.n:
                raise ValueError("arc endpoint out of range")
        if simple:
            if np.any(self.src == self.dst):
                raise ValueError("self-loop in simple digraph")
            keys = self.src * self.n + self.dst
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate arc in simple digraph")
        return True


@dataclass(frozen=True)
class TypedMultiDigraph(TypedDigraph):
    """Like :class:`TypedDigraph` but loops and repeated arcs are allowed."""

    def validate(self, simple=False):
        return super().validate(simple=simple)


@dataclass(frozen=True)
class StabilityReport:
    n: int
    tau: float
    u_up: int
    stable_mask: np.ndarray

    @property
    def stable_types(self):
        return np.flatnonzero(self.stable_mask) + 1


def classify_stability(dist, n, tau):
    """Classify types as stable/unstable at tolerance ``tau``.

    ``u_up`` is the smallest label ``t`` such that every ``q_s`` with
    ``s >= t`` is below ``n**(tau - 1)``; it equals ``S + 1`` when the last
    type is not below the threshold. Types ``t < u_up`` are stable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    threshold = float(n) ** (tau - 1.0)
    big = np.flatnonzero(dist.probs >= threshold)
    u_up = int(big[-1]) + 2 if big.size else 1
    mask = np.arange(1, dist.size + 1) < u_up
    mask.setflags(write=False)
    return StabilityReport(n=int(n), tau=float(tau), u_up=u_up, stable_mask=mask)


def stable_count_bound(delta, n, tau):
    """Upper bound ``ceil(n**((1 - tau)/(1 + delta)))`` on ``u_up``."""
    if n < 1 or delta <= 0 or not 0 < tau < 1:
        raise ValueError("need n >= 1, delta > 0, 0 < tau < 1")
    return int(math.ceil(float(n) ** ((1.0 - tau) / (1.0 + delta))))


def _safe_floor(x):
    # guards decimal inputs like 2*0.4*0.6*2000 landing a hair under an integer
    r = np.round(x)
    near = np.abs(x - r) <= 1e-9 * np.maximum(1.0, np.abs(x))
    return np.where(near, r, np.floor(x))


def kappa_to_lambda(kernel, dist, n, tau):
    """Arc budget ``floor(kappa(t,s) q_t q_s n)`` on stable pairs, 0 elsewhere."""
    if kernel.size != dist.size:
        raise ValueError(f"kernel has {kernel.size} types, distribution has {dist.size}")
    q = dist.probs
    raw = kernel.values * np.outer(q, q) * n
    counts = _safe_floor(raw)
    stable = classify_stability(dist, n, tau).stable_mask
    counts[~np.outer(stable, stable)] = 0
    return ArcCountTable(counts.astype(np.int64))


def check_kernel_bound(kernel, dist, n, tau, alpha, c):
    """Whether ``kappa(t,s) <= c n^(alpha-1/2) / sqrt(q_t q_s)`` on every
    pair involving an unstable type."""
    if not (0.5 - tau / 2.0) < alpha < 0.5:
        raise InvalidAlpha(f"alpha={alpha} outside ({0.5 - tau / 2.0}, 0.5)")
    if c <= 0:
        raise ValueError("c must be positive")
    stable = classify_stability(dist, n, tau).stable_mask
    involved = ~np.outer(stable, stable)
    if not involved.any():
        return True
    qq = np.outer(dist.probs, dist.probs)
    with np.errstate(divide="ignore"):
        bound = c * float(n) ** (alpha - 0.5) / np.sqrt(qq)
    return bool(np.all(kernel.values[involved] <= bound[involved]))
