"""Monte-Carlo harness: replicated generation, summary statistics, sweeps."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import math
from statistics import NormalDist

import numpy as np

from . import rng as rngmod
from .analysis import arc_type_counts, giant_alpha, tarjan_scc
from .cci import CCIInputs, cci_kernel, generate_cci, simplify
from .core import ArcCountTable, Kernel, validate_distribution
from .errors import ConfigError, IrdgenError, MetricMismatch
from .generators import (
    er_table,
    generate_ard,
    generate_ird,
    generate_ird_fast,
    make_chung_lu_kernel,
    make_gilbert_kernel,
    make_sbm_kernel,
    msbm_table,
)

MODELS = ("ird", "ird_fast", "ard", "cci", "gilbert", "er", "sbm", "msbm", "chung_lu")
METRICS = ("scc_fraction", "arc_type_counts", "total_arcs", "degree_summary",
           "simplification_report")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    params: dict
    n: int
    replicates: int = 1
    base_seed: int = 0
    metrics: tuple = ("scc_fraction",)
    tau: float = 0.5
    alpha_ci: float = 0.05
    keep_raw: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}; expected one of {MODELS}")
        if int(self.n) < 2:
            raise ConfigError("n", "must be >= 2")
        if int(self.replicates) < 1:
            raise ConfigError("replicates", "must be >= 1")
        metrics = (self.metrics,) if isinstance(self.metrics, str) else tuple(self.metrics)
        if not metrics:
            raise ConfigError("metrics", "must be nonempty")
        for m in metrics:
            if m not in METRICS:
                raise ConfigError("metrics", f"unknown metric {m!r}; expected one of {METRICS}")
        if not 0 < self.tau < 1:
            raise ConfigError("tau", "must lie in (0, 1)")
        if not 0 < self.alpha_ci < 1:
            raise ConfigError("alpha_ci", "must lie in (0, 1)")
        rngmod.check_seed(self.base_seed)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "metrics", metrics)

    def with_params(self, **updates):
        return replace(self, params={**self.params, **updates})


# -- model construction ------------------------------------------------------

def _get(params, key, model):
    if key not in params:
        raise ConfigError(f"params.{key}", f"required by model {model!r}")
    return params[key]


def _matrix(params, key, model, shape=None):
    try:
        a = np.asarray(_get(params, key, model), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params.{key}", f"not a numeric matrix ({exc})") from None
    if a.ndim != 2 or (shape is not None and a.shape != shape):
        want = f"{shape[0]}x{shape[1]}" if shape else "2-d"
        raise ConfigError(f"params.{key}", f"expected a {want} matrix, got shape {a.shape}")
    return a


def _dist(params, model, key="q"):
    try:
        return validate_distribution(_get(params, key, model))
    except IrdgenError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"params.{key}", str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"params.{key}", str(exc)) from None


def _wrap(key, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, str(exc)) from None


def cci_inputs(params, model="cci"):
    q = _dist(params, model)
    mu = _get(params, "mu", model)
    P = _matrix(params, "P", model)
    I = _matrix(params, "I", model, (q.size, P.shape[0]))
    J = _matrix(params, "J", model, (q.size, P.shape[1]))
    return _wrap("params", CCIInputs, mu, q, P, I, J)


def config_kernel(config):
    """Return ``(kernel, dist)`` of the IRD underlying ``config``."""
    p, model, n = config.params, config.model, config.n
    if model in ("ird", "ird_fast"):
        q = _dist(p, model)
        phi = p.get("phi")
        kappa = _matrix(p, "kappa", model, (q.size, q.size))
        return _wrap("params.kappa", Kernel, kappa, phi), q
    if model in ("gilbert", "er"):
        lam = _get(p, "lam", model)
        return _wrap("params.lam", make_gilbert_kernel, lam), validate_distribution([1.0])
    if model in ("sbm", "msbm"):
        q = _dist(p, model)
        pi = _matrix(p, "pi", model, (q.size, q.size))
        return _wrap("params.pi", make_sbm_kernel, pi, n), q
    if model == "chung_lu":
        q = _dist(p, model)
        return _wrap("params.values", make_chung_lu_kernel, q, p.get("values")), q
    if model == "cci":
        inputs = cci_inputs(p)
        return _wrap("params", cci_kernel, inputs), inputs.type_dist
    raise ConfigError("model", f"model {model!r} has no kernel")


def build_graph(config, seed):
    """Generate one realization; returns ``(simple_graph, SimplificationReport | None)``."""
    p, model, n = config.params, config.model, config.n
    if model == "cci":
        return simplify(generate_cci(n, cci_inputs(p), seed))
    if model == "ard":
        q = _dist(p, model)
        table = _wrap("params.table", ArcCountTable, _matrix(p, "table", model, (q.size, q.size)))
        return generate_ard(n, q, table, seed), None
    if model == "er":
        table = er_table(n, m=p["m"]) if "m" in p else er_table(n, lam=_get(p, "lam", model))
        return generate_ard(n, validate_distribution([1.0]), table, seed), None
    if model == "msbm":
        q = _dist(p, model)
        if "e" in p:
            table = _wrap("params.e", ArcCountTable, _matrix(p, "e", model, (q.size, q.size)))
        else:
            table = msbm_table(_matrix(p, "pi", model, (q.size, q.size)), q, n)
        return generate_ard(n, q, table, seed), None
    kernel, q = config_kernel(config)
    fast = model == "ird_fast" or (model == "chung_lu" and p.get("method", "naive") == "fast")
    if fast:
        return generate_ird_fast(n, q, kernel, config.tau, seed), None
    return generate_ird(n, q, kernel, seed), None


# -- metrics -----------------------------------------------------------------

def measure(graph, report, metrics):
    """Scalar metric values of one realization, keyed by metric name."""
    out = {}
    for metric in metrics:
        if metric == "scc_fraction":
            out["scc_fraction"] = tarjan_scc(graph).largest_fraction
        elif metric == "total_arcs":
            out["total_arcs"] = float(graph.num_arcs)
        elif metric == "arc_type_counts":
            counts = arc_type_counts(graph)
            for (t, s), c in np.ndenumerate(counts):
                out[f"arc_type_counts[{t + 1},{s + 1}]"] = float(c)
        elif metric == "degree_summary":
            outdeg = np.bincount(graph.src, minlength=graph.n)
            indeg = np.bincount(graph.dst, minlength=graph.n)
            out["degree.mean"] = graph.num_arcs / graph.n
            out["degree.max_out"] = float(outdeg.max())
            out["degree.max_in"] = float(indeg.max())
        elif metric == "simplification_report":
            loops = report.self_loops if report else 0
            multis = report.multi_arcs if report else 0
            out["simplification.self_loops"] = float(loops)
            out["simplification.multi_arcs"] = float(multis)
            out["simplification.kept_arcs"] = float(graph.num_arcs)
    return out


class ReplicateError(IrdgenError):
    """A replicate failed; ``error`` is the original exception."""

    def __init__(self, replicate, error):
        self.replicate = replicate
        self.error = error
        super().__init__(f"replicate {replicate}: {type(error).__name__}: {error}")


def replicate_seed(config, r):
    return rngmod.hash64(config.base_seed, r)


def run_replicate(config, r):
    try:
        graph, report = build_graph(config, replicate_seed(config, r))
        return measure(graph, report, config.metrics)
    except ConfigError:
        raise
    except Exception as exc:
        raise ReplicateError(r, exc) from exc


def _run_chunk(args):
    config, indices = args
    return [run_replicate(config, r) for r in indices]


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float
    half_width: float
    count: int
    raw: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MetricTable:
    stats: dict
    alpha_ci: float = 0.05

    def __getitem__(self, name):
        return self.stats[name]

    def __contains__(self, name):
        return name in self.stats

    def names(self):
        return list(self.stats)


def summarize(values, alpha_ci=0.05, keep_raw=True):
    """Mean, sample sd and normal-approximation CI half-width.

    Sums use ``math.fsum`` so the result does not depend on value order.
    """
    values = [float(v) for v in values]
    R = len(values)
    if R == 0:
        raise ValueError("no values to summarize")
    mean = math.fsum(values) / R
    if R > 1:
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (R - 1))
    else:
        sd = 0.0
    z = NormalDist().inv_cdf(1.0 - alpha_ci / 2.0)
    half = z * sd / math.sqrt(R)
    return MetricSummary(mean, sd, half, R, tuple(values) if keep_raw else None)


def aggregate(rows, alpha_ci=0.05, keep_raw=True):
    names = list(rows[0])
    return MetricTable({k: summarize([row[k] for row in rows], alpha_ci, keep_raw) for k in names},
                       alpha_ci)


def run_experiment(config, workers=1):
    """Run all replicates of ``config`` and aggregate their metrics.

    Replicate ``r`` is seeded with ``hash64(base_seed, r)``; results are
    ordered by replicate index so the table does not depend on ``workers``.
    """
    R = config.replicates
    if workers <= 1 or R == 1:
        rows = [run_replicate(config, r) for r in range(R)]
    else:
        chunks = [list(range(R))[i::workers] for i in range(workers)]
        rows = [None] * R
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, res in zip(chunks, pool.map(_run_chunk, [(config, c) for c in chunks])):
                for r, row in zip(idx, res):
                    rows[r] = row
    return aggregate(rows, config.alpha_ci, config.keep_raw)


def compare_models(config_a, config_b, metric, table_a=None, table_b=None, workers=1):
    """Two-sample summary of ``metric`` under two configurations.

    No verdict is made; callers apply their own thresholds.
    """
    if config_a.n != config_b.n:
        raise MetricMismatch(f"configs differ in n ({config_a.n} vs {config_b.n})")
    if table_a is None:
        table_a = run_experiment(config_a, workers)
    if table_b is None:
        table_b = run_experiment(config_b, workers)
    if metric not in table_a or metric not in table_b:
        raise MetricMismatch(f"metric {metric!r} not measured by both configs")
    a, b = table_a[metric], table_b[metric]
    diff = a.mean - b.mean
    se = math.sqrt(a.sd ** 2 / a.count + b.sd ** 2 / b.count)
    z_crit = NormalDist().inv_cdf(1.0 - config_a.alpha_ci / 2.0)
    pooled_sd = math.sqrt((a.sd ** 2 + b.sd ** 2) / 2.0)
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    if pooled_sd > 0:
        smd = diff / pooled_sd
    else:
        smd = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return {
        "metric": metric,
        "mean_a": a.mean,
        "mean_b": b.mean,
        "sd_a": a.sd,
        "sd_b": b.sd,
        "difference": diff,
        "ci_half_width": z_crit * se,
        "standardized_difference": smd,
        "z": z,
    }


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    parameter: float
    mc_mean: float
    mc_ci: float
    predicted_alpha: float = None


def parameter_value(config, name):
    if name in config.params:
        return config.params[name]
    if hasattr(config, name):
        return getattr(config, name)
    raise ConfigError(f"sweep.parameter", f"{name!r} is neither a config field nor a model parameter")


def sweep_configs(base, parameter, values):
    """Copies of ``base`` with ``parameter`` set to each value in turn."""
    out = []
    for v in values:
        if parameter in base.params or not hasattr(base, parameter):
            out.append(base.with_params(**{parameter: v}))
        else:
            out.append(replace(base, **{parameter: v}))
    return out


def alpha_predictor(coupling="coupled", tol=1e-12, max_iter=10**6):
    """Predictor returning the fixed-point giant-SCC fraction for a config."""
    def predict(config):
        kernel, dist = config_kernel(config)
        return giant_alpha(kernel, dist, coupling, tol, max_iter).alpha
    return predict


def sweep(configs, parameter, predictor=None, metric="scc_fraction", workers=1, on_row=None):
    """One :class:`SweepRow` per config, optionally paired with a prediction."""
    rows = []
    for config in configs:
        table = run_experiment(config, workers)
        s = table[metric]
        pred = predictor(config) if predictor is not None else None
        row = SweepRow(parameter_value(config, parameter), s.mean, s.half_width, pred)
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows
