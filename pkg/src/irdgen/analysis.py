"""Strongly connected components, arc-type counts and giant-SCC prediction."""

from dataclasses import dataclass

import numpy as np

from .core import TypedDigraph
from .errors import NoConvergence

ZERO_SNAP = 1e-10


@dataclass(frozen=True)
class SccResult:
    component_id: np.ndarray
    component_sizes: np.ndarray
    largest_fraction: float

    @property
    def num_components(self):
        return int(self.component_sizes.size)


def _csr(n, src, dst):
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr.tolist(), dst[order].tolist()


def _tarjan(n, src, dst):
    """Iterative Tarjan; returns component id per vertex (reverse topological order)."""
    indptr, adj = _csr(n, np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64))
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, indptr[root])]
        while work:
            v, p = work[-1]
            end = indptr[v + 1]
            while p < end:
                w = adj[p]
                p += 1
                if index[w] == -1:
                    work[-1] = (v, p)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return np.array(comp, dtype=np.int64), ncomp


def tarjan_scc(graph):
    """Exact SCC decomposition in O(n + m) without recursion."""
    n = graph.n
    comp, ncomp = _tarjan(n, graph.src, graph.dst)
    sizes = np.sort(np.bincount(comp, minlength=ncomp))[::-1]
    largest = float(sizes[0]) / n if n else 0.0
    return SccResult(comp, sizes, largest)


def arc_type_counts(graph):
    """``A[t-1, s-1]`` = number of arcs from type ``t`` to type ``s``."""
    S = graph.num_types
    flat = (graph.types[graph.src] - 1) * S + (graph.types[graph.dst] - 1)
    return np.bincount(flat, minlength=S * S).reshape(S, S).astype(np.int64)


def check_irreducibility(kernel):
    """True iff the support graph ``{(t, s): kappa(t, s) > 0}`` is strongly connected."""
    S = kernel.size
    src, dst = np.nonzero(kernel.values > 0)
    _, ncomp = _tarjan(S, src, dst)
    return ncomp == 1


@dataclass(frozen=True)
class SurvivalSolution:
    pi_minus: np.ndarray
    pi_plus: np.ndarray
    alpha: float
    iterations: int
    residual: float


def _offspring_matrix(kernel, dist, direction):
    q = dist.probs
    if direction == "minus":
        return kernel.values * q[None, :]
    if direction == "plus":
        return kernel.values.T * q[None, :]
    raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")


def _survival(kernel, dist, direction, coupling, tol, max_iter, callback=None):
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    if kernel.size != dist.size:
        raise ValueError(f"kernel has {kernel.size} types, distribution has {dist.size}")
    M = _offspring_matrix(kernel, dist, direction)
    S = M.shape[0]
    if coupling == "coupled":
        def rate(pi):
            return M @ pi

        def jac(pi, e):
            return e[:, None] * M
    elif coupling == "as_written":
        row = M.sum(axis=1)

        def rate(pi):
            return row * pi

        def jac(pi, e):
            return np.diag(e * row)
    else:
        raise ValueError(f"coupling must be 'coupled' or 'as_written', got {coupling!r}")

    eye = np.eye(S)
    pi = np.ones(S)
    for k in range(1, max_iter + 1):
        e = np.exp(-rate(pi))
        nxt = 1.0 - e
        # Newton step on pi - F(pi); from above the largest fixed point it
        # stays above it whenever (I - F')^{-1} is entrywise nonnegative.
        try:
            inv = np.linalg.inv(eye - jac(pi, e))
        except np.linalg.LinAlgError:
            inv = None
        if inv is not None and np.all(np.isfinite(inv)) and inv.min() >= -1e-12:
            newton = pi - inv @ (pi - nxt)
            nxt = np.minimum(nxt, np.maximum(newton, 0.0))
        step = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if callback is not None:
            callback(k, pi)
        if step < tol:
            break
    else:
        residual = float(np.max(np.abs(pi - (1.0 - np.exp(-rate(pi))))))
        raise NoConvergence(
            f"no convergence after {max_iter} iterations (residual {residual:.3g})",
            best=pi, residual=residual, iterations=max_iter,
        )
    pi = np.where(pi < ZERO_SNAP, 0.0, pi)
    residual = float(np.max(np.abs(pi - (1.0 - np.exp(-rate(pi))))))
    return pi, k, residual


def solve_survival(kernel, dist, direction="minus", coupling="coupled",
                   tol=1e-12, max_iter=10**6, callback=None):
    """Largest fixed point of ``pi = 1 - exp(-M pi)``.

    ``M[x, t]`` is ``kappa(x, t) q_t`` for ``direction="minus"`` and
    ``kappa(t, x) q_t`` for ``"plus"``. With ``coupling="as_written"`` the
    exponent uses ``pi_x`` in place of ``pi_t``, which decouples the system
    into one scalar equation per type.

    Iteration starts at all-ones and is monotone non-increasing; a safeguarded
    Newton step accelerates convergence near criticality. Entries below
    ``1e-10`` are reported as 0.
    """
    pi, _, _ = _survival(kernel, dist, direction, coupling, tol, max_iter, callback)
    return pi


def giant_alpha(kernel, dist, coupling="coupled", tol=1e-12, max_iter=10**6):
    """Predicted giant-SCC fraction ``sum_x pi+_x pi-_x q_x``."""
    minus, it_m, res_m = _survival(kernel, dist, "minus", coupling, tol, max_iter)
    plus, it_p, res_p = _survival(kernel, dist, "plus", coupling, tol, max_iter)
    alpha = float(np.sum(plus * minus * dist.probs))
    return SurvivalSolution(minus, plus, alpha, max(it_m, it_p), max(res_m, res_p))
