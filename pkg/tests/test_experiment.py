import math
import random

import numpy as np
import pytest

from irdgen.errors import ConfigError, EmptyAdmissibleSet, MetricMismatch
from irdgen.experiment import (
    ExperimentConfig,
    ReplicateError,
    aggregate,
    alpha_predictor,
    compare_models,
    run_experiment,
    summarize,
    sweep,
    sweep_configs,
)

from conftest import paper_params


def gilbert(lam=2.0, n=1000, R=100, metrics=("total_arcs",), seed=1):
    return ExperimentConfig("gilbert", {"lam": lam}, n, R, seed, metrics)


def test_gilbert_total_arcs():
    n, lam, R = 1000, 2.0, 100
    table = run_experiment(gilbert(lam, n, R))
    s = table["total_arcs"]
    sigma = math.sqrt(n * (n - 1) * (lam / n) * (1 - lam / n))
    assert abs(s.mean - lam * (n - 1)) <= 4 * sigma / math.sqrt(R)
    assert s.count == R


def test_single_replicate():
    s = run_experiment(gilbert(R=1))["total_arcs"]
    assert s.sd == 0 and s.half_width == 0
    assert s.mean == s.raw[0]


def test_deterministic():
    c = gilbert(R=10, metrics=("total_arcs", "scc_fraction", "degree_summary"))
    assert run_experiment(c) == run_experiment(c)


def test_workers_match_sequential():
    c = gilbert(n=300, R=7, metrics=("scc_fraction", "arc_type_counts"))
    a = run_experiment(c, workers=1)
    b = run_experiment(c, workers=3)
    assert a == b
    assert [a[k].raw for k in a.names()] == [b[k].raw for k in b.names()]


def test_permutation_invariance():
    table = run_experiment(ExperimentConfig("cci", paper_params(1.5), 500, 40, 9, ("scc_fraction",)))
    raw = list(table["scc_fraction"].raw)
    random.Random(0).shuffle(raw)
    again = summarize(raw)
    assert again.mean == table["scc_fraction"].mean
    assert again.sd == table["scc_fraction"].sd


def test_ci_shrinks_like_inverse_sqrt():
    widths = {}
    for R in (25, 100, 400):
        widths[R] = run_experiment(gilbert(1.5, 300, R, ("scc_fraction",), seed=3))["scc_fraction"].half_width
    for small, big in ((25, 100), (100, 400)):
        assert widths[small] / widths[big] == pytest.approx(2.0, rel=0.2)


def test_half_width_formula():
    s = summarize([1.0, 2.0, 3.0, 4.0], alpha_ci=0.05)
    assert s.sd == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert s.half_width == pytest.approx(1.959963984540054 * s.sd / 2)


def test_metrics_are_scalars():
    table = run_experiment(ExperimentConfig(
        "cci", paper_params(1.0), 400, 3, 2,
        ("arc_type_counts", "simplification_report", "degree_summary", "total_arcs")))
    names = table.names()
    assert "arc_type_counts[4,2]" in names
    assert "simplification.self_loops" in names
    for k in range(3):
        total = (table["simplification.self_loops"].raw[k] + table["simplification.multi_arcs"].raw[k]
                 + table["simplification.kept_arcs"].raw[k])
        assert total == 400
    assert table["total_arcs"].raw == table["simplification.kept_arcs"].raw


@pytest.mark.parametrize("model,params", [
    ("ird", {"q": [0.5, 0.5], "kappa": [[1, 2], [2, 1]]}),
    ("ird_fast", {"q": [0.5, 0.5], "kappa": [[1, 2], [2, 1]]}),
    ("ard", {"q": [0.5, 0.5], "table": [[10, 0], [5, 5]]}),
    ("er", {"lam": 1.5}),
    ("er", {"m": 33}),
    ("sbm", {"q": [0.5, 0.5], "pi": [[0.01, 0.002], [0.002, 0.01]]}),
    ("msbm", {"q": [0.5, 0.5], "pi": [[0.01, 0.002], [0.002, 0.01]]}),
    ("msbm", {"q": [0.5, 0.5], "e": [[3, 4], [5, 6]]}),
    ("chung_lu", {"q": [0.3, 0.3, 0.4]}),
    ("chung_lu", {"q": [0.3, 0.3, 0.4], "method": "fast"}),
])
def test_all_models_run(model, params):
    table = run_experiment(ExperimentConfig(model, params, 200, 2, 1, ("total_arcs", "scc_fraction")))
    assert table["total_arcs"].count == 2


def test_exact_models_have_zero_arc_variance():
    t = run_experiment(ExperimentConfig("er", {"lam": 2.0}, 2000, 20, 1, ("total_arcs",)))
    assert t["total_arcs"].sd == 0.0 and t["total_arcs"].mean == 4000


def test_config_validation():
    with pytest.raises(ConfigError, match="model"):
        ExperimentConfig("nope", {}, 10)
    with pytest.raises(ConfigError, match="replicates"):
        ExperimentConfig("gilbert", {"lam": 1}, 10, replicates=0)
    with pytest.raises(ConfigError, match="metrics"):
        ExperimentConfig("gilbert", {"lam": 1}, 10, metrics=())
    with pytest.raises(ConfigError, match="params.kappa"):
        run_experiment(ExperimentConfig("ird", {"q": [1.0]}, 10))
    with pytest.raises(ConfigError, match="params.q"):
        run_experiment(ExperimentConfig("ird", {"q": [0.5, 0.6], "kappa": [[1, 1], [1, 1]]}, 10))


def test_replicate_error_annotated():
    params = {"mu": 1.0, "q": [1 - 1e-12, 1e-12], "P": [[0.5], [0.5]],
              "I": [[1, 0], [1, 1]], "J": [[1], [1]]}
    with pytest.raises(ReplicateError) as info:
        run_experiment(ExperimentConfig("cci", params, 50, 3, 1))
    assert info.value.replicate == 0
    assert isinstance(info.value.error, EmptyAdmissibleSet)


# -- comparisons and sweeps --------------------------------------------------

def test_compare_with_itself_is_zero():
    c = gilbert(n=300, R=10, metrics=("scc_fraction",))
    rep = compare_models(c, c, "scc_fraction")
    assert rep["difference"] == 0.0
    assert rep["z"] == 0.0


def test_compare_er_vs_gilbert_variances():
    n, lam = 2000, 2.0
    er = ExperimentConfig("er", {"lam": lam}, n, 100, 1, ("total_arcs",))
    gil = ExperimentConfig("gilbert", {"lam": lam}, n, 100, 1, ("total_arcs",))
    rep = compare_models(er, gil, "total_arcs")
    assert rep["sd_a"] == 0.0
    assert rep["sd_b"] == pytest.approx(math.sqrt(lam * n), rel=0.2)
    assert abs(rep["z"]) < 4


def test_compare_ird_vs_fast():
    params = {"q": [1.0], "kappa": [[2.0]]}
    a = ExperimentConfig("ird", params, 2000, 30, 5, ("scc_fraction",))
    b = ExperimentConfig("ird_fast", params, 2000, 30, 5, ("scc_fraction",))
    rep = compare_models(a, b, "scc_fraction")
    assert abs(rep["difference"]) < 0.02


def test_compare_mismatch():
    a = gilbert(n=100, R=2, metrics=("scc_fraction",))
    b = gilbert(n=200, R=2, metrics=("scc_fraction",))
    with pytest.raises(MetricMismatch):
        compare_models(a, b, "scc_fraction")
    c = gilbert(n=100, R=2, metrics=("total_arcs",))
    with pytest.raises(MetricMismatch):
        compare_models(a, c, "scc_fraction")


def test_sweep_mu_grid():
    base = ExperimentConfig("cci", paper_params(), 500, 20, 4, ("scc_fraction",))
    grid = [0.5, 1, 1.5, 2, 3]
    rows = sweep(sweep_configs(base, "mu", grid), "mu", alpha_predictor())
    assert [r.parameter for r in rows] == grid
    assert all(r.predicted_alpha is not None for r in rows)
    assert rows[0].predicted_alpha == 0.0
    assert rows[-1].mc_mean > rows[1].mc_mean


def test_sweep_single_row():
    rows = sweep([gilbert(n=100, R=3, metrics=("scc_fraction",))], "lam")
    assert len(rows) == 1 and rows[0].predicted_alpha is None


def test_sweep_subcritical_vanishes():
    base = gilbert(0.5, 500, 10, ("scc_fraction",))
    rows = sweep(sweep_configs(base, "n", [500, 2000, 8000]), "n", alpha_predictor())
    means = [r.mc_mean for r in rows]
    assert means[0] > means[1] > means[2]
    assert all(r.predicted_alpha == 0.0 for r in rows)


def test_aggregate_is_order_free():
    rows = [{"x": float(v)} for v in [0.1, 0.2, 0.7, 1e-17, 3.3]]
    a = aggregate(rows)
    b = aggregate(rows[::-1])
    assert a["x"].mean == b["x"].mean and a["x"].sd == b["x"].sd
