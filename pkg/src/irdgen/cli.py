"""Command-line interface: ``irdgen {generate,analyze,fixed-point,experiment}``.

Exit codes: 0 ok, 2 config/parse error, 3 generation error, 4 fixed-point
non-convergence.
"""

import argparse
from dataclasses import asdict, dataclass, field
import hashlib
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np
import yaml

from . import __version__
from .analysis import arc_type_counts, check_irreducibility, giant_alpha, tarjan_scc
from .core import TypedDigraph
from .errors import ConfigError, IrdgenError, NoConvergence
from .experiment import (
    ExperimentConfig,
    MODELS,
    alpha_predictor,
    build_graph,
    config_kernel,
    run_experiment,
    sweep,
    sweep_configs,
)

log = logging.getLogger("irdgen")

EXIT_OK, EXIT_CONFIG, EXIT_GENERATION, EXIT_NUMERICAL = 0, 2, 3, 4


class ParseError(IrdgenError):
    pass


# -- config ------------------------------------------------------------------

def read_config(path):
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("", f"invalid YAML in {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "config must be a mapping")
    return doc


_CONFIG_KEYS = {"model", "params", "n", "replicates", "seed", "metrics", "tau",
                "alpha_ci", "sweep", "predict", "coupling", "tol", "max_iter"}


def experiment_config(doc, seed=None, n_default=None):
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "model" not in doc:
        raise ConfigError("model", f"required; one of {MODELS}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params", "must be a mapping")
    n = doc.get("n", n_default)
    if n is None:
        raise ConfigError("n", "required")
    base_seed = seed if seed is not None else doc.get("seed", 0)
    try:
        return ExperimentConfig(
            model=doc["model"],
            params=params,
            n=n,
            replicates=doc.get("replicates", 1),
            base_seed=base_seed,
            metrics=doc.get("metrics", ("scc_fraction",)),
            tau=doc.get("tau", 0.5),
            alpha_ci=doc.get("alpha_ci", 0.05),
            keep_raw=False,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("", str(exc)) from None


# -- files -------------------------------------------------------------------

def write_edges(path, graph):
    lines = [f"{v + 1},{w + 1}\n" for v, w in zip(graph.src.tolist(), graph.dst.tolist())]
    with open(path, "w", newline="\n") as fh:
        fh.writelines(lines)


def write_types(path, graph):
    with open(path, "w", newline="\n") as fh:
        fh.writelines(f"{v + 1},{t}\n" for v, t in enumerate(graph.types.tolist()))


def _read_pairs(path):
    rows = []
    try:
        fh = open(path)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected two comma-separated fields")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer field") from None
            rows.append((lineno, a, b))
    return rows


def read_graph(edges_path, types_path):
    """Load a typed digraph from 1-based ``src,dst`` and ``vertex_id,type`` files."""
    trows = _read_pairs(types_path)
    n = len(trows)
    types = np.zeros(n, dtype=np.int64)
    for i, (lineno, v, t) in enumerate(trows):
        if v != i + 1:
            raise ParseError(f"{types_path}:{lineno}: expected vertex id {i + 1}, got {v}")
        if t < 1:
            raise ParseError(f"{types_path}:{lineno}: type label must be >= 1")
        types[i] = t
    erows = _read_pairs(edges_path)
    for lineno, v, w in erows:
        if not (1 <= v <= n and 1 <= w <= n):
            raise ParseError(f"{edges_path}:{lineno}: vertex id outside 1..{n}")
    src = np.array([v - 1 for _, v, _ in erows], dtype=np.int64)
    dst = np.array([w - 1 for _, _, w in erows], dtype=np.int64)
    return TypedDigraph(n, types, src, dst)


def write_json(path, doc):
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    tool_version: str
    command: str
    config: dict
    seed: int
    duration_s: float
    digests: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def write(self, out_dir, files):
        self.digests = {Path(f).name: sha256(f) for f in files}
        path = Path(out_dir) / "manifest.json"
        path.write_text(self.to_json())
        return path


def _fmt(x):
    return "" if x is None else repr(float(x))


# -- subcommands -------------------------------------------------------------

def cmd_generate(args):
    start = time.perf_counter()
    doc = read_config(args.config)
    config = experiment_config(doc, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        graph, report = build_graph(config, config.base_seed)
    except ConfigError:
        raise
    except IrdgenError as exc:
        raise GenerationFailure(str(exc)) from exc
    files = [out / "types.csv"]
    write_types(files[0], graph)
    if args.format == "edges":
        files.append(out / "edges.csv")
        write_edges(files[1], graph)
    extra = {"n": graph.n, "arcs": graph.num_arcs}
    if report is not None:
        extra.update(self_loops_removed=report.self_loops, multi_arcs_removed=report.multi_arcs,
                     kept_arcs=report.kept_arcs)
    manifest = RunManifest(__version__, "generate", doc, config.base_seed,
                           time.perf_counter() - start, extra=extra)
    manifest.write(out, files)
    _say(args, f"generated model={config.model} n={graph.n} arcs={graph.num_arcs} -> {out}")
    return EXIT_OK


ANALYZE_METRICS = ("scc", "arc_type_counts")


def analyze_graph(graph, metrics=ANALYZE_METRICS):
    stats = {"n": graph.n, "num_arcs": graph.num_arcs}
    if "scc" in metrics:
        scc = tarjan_scc(graph)
        stats["largest_fraction"] = scc.largest_fraction
        stats["scc_sizes"] = scc.component_sizes.tolist()
    if "arc_type_counts" in metrics:
        stats["arc_type_counts"] = arc_type_counts(graph).tolist()
    return stats


def cmd_analyze(args):
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for m in metrics:
        if m not in ANALYZE_METRICS:
            raise ConfigError("--metrics", f"unknown metric {m!r}; expected {ANALYZE_METRICS}")
    graph = read_graph(args.edges, args.types)
    stats = analyze_graph(graph, metrics)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "stats.json", stats)
    frac = stats.get("largest_fraction")
    _say(args, f"analyzed n={graph.n} arcs={graph.num_arcs}"
               + (f" largest_fraction={frac:.6g}" if frac is not None else ""))
    return EXIT_OK


def cmd_fixed_point(args):
    doc = read_config(args.config)
    if "model" not in doc and "kappa" in doc.get("params", {}):
        doc = {**doc, "model": "ird"}
    config = experiment_config(doc, n_default=2)
    coupling = args.coupling or doc.get("coupling", "coupled")
    if coupling not in ("coupled", "as_written"):
        raise ConfigError("coupling", "must be 'coupled' or 'as_written'")
    kernel, dist = config_kernel(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = {"coupling": coupling, "irreducible": check_irreducibility(kernel)}
    code = EXIT_OK
    try:
        sol = giant_alpha(kernel, dist, coupling, doc.get("tol", 1e-12), doc.get("max_iter", 10**6))
        result.update(alpha=sol.alpha, pi_plus=sol.pi_plus.tolist(), pi_minus=sol.pi_minus.tolist(),
                      iterations=sol.iterations, residual=sol.residual, converged=True)
    except NoConvergence as exc:
        best = np.asarray(exc.best)
        result.update(alpha=None, pi_plus=None, pi_minus=best.tolist(), iterations=exc.iterations,
                      residual=exc.residual, converged=False)
        code = EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
    write_json(out / "fixed_point.json", result)
    if code == EXIT_OK:
        _say(args, f"alpha={result['alpha']:.6g} irreducible={str(result['irreducible']).lower()}")
    return code


def cmd_experiment(args):
    start = time.perf_counter()
    doc = read_config(args.config)
    config = experiment_config(doc, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = out / "results.csv"
    spec = doc.get("sweep")
    predict = doc.get("predict", False)
    coupling = doc.get("coupling", "coupled")
    try:
        if spec is not None:
            if not isinstance(spec, dict) or "parameter" not in spec or "values" not in spec:
                raise ConfigError("sweep", "needs 'parameter' and 'values'")
            configs = sweep_configs(config, spec["parameter"], spec["values"])
            predictor = alpha_predictor(coupling) if predict else None
            metric = spec.get("metric", "scc_fraction")
            if metric not in config.metrics:
                config_metrics = ", ".join(config.metrics)
                raise ConfigError("sweep.metric", f"{metric!r} not among metrics ({config_metrics})")
            with open(results, "w", newline="\n") as fh:
                fh.write("parameter,mc_mean,mc_ci,predicted_alpha\n")

                def flush(row):
                    fh.write(f"{row.parameter},{_fmt(row.mc_mean)},{_fmt(row.mc_ci)},"
                             f"{_fmt(row.predicted_alpha)}\n")
                    fh.flush()

                sweep(configs, spec["parameter"], predictor, metric, args.workers, on_row=flush)
        else:
            table = run_experiment(config, args.workers)
            with open(results, "w", newline="\n") as fh:
                fh.write("metric,mean,sd,ci_half_width,count\n")
                for name in table.names():
                    s = table[name]
                    fh.write(f"{name},{_fmt(s.mean)},{_fmt(s.sd)},{_fmt(s.half_width)},{s.count}\n")
    except ConfigError:
        raise
    except IrdgenError as exc:
        raise GenerationFailure(str(exc)) from exc
    manifest = RunManifest(__version__, "experiment", doc, config.base_seed,
                           time.perf_counter() - start, extra={"workers": args.workers})
    manifest.write(out, [results])
    _say(args, f"wrote {results}")
    return EXIT_OK


class GenerationFailure(IrdgenError):
    pass


def _say(args, msg):
    if not args.quiet:
        print(msg)


# -- entry point -------------------------------------------------------------

def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(None), help="base seed (u64)")
    parser.add_argument("--out", default=d("."), help="output directory")
    parser.add_argument("--workers", type=int, default=d(1), help="worker processes")
    parser.add_argument("--quiet", action="store_true", default=d(False))


def build_parser():
    parser = argparse.ArgumentParser(prog="irdgen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate one graph")
    p.add_argument("config")
    p.add_argument("--format", choices=("edges", "none"), default="edges")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="SCCs and arc-type counts of a graph")
    p.add_argument("edges")
    p.add_argument("types")
    p.add_argument("--metrics", default=",".join(ANALYZE_METRICS))
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fixed-point", help="predicted giant SCC fraction")
    p.add_argument("config")
    p.add_argument("--coupling", choices=("coupled", "as_written"), default=None)
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("experiment", help="Monte-Carlo experiment or sweep")
    p.add_argument("config")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
