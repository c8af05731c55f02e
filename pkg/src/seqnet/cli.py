"""Subcommand front end chaining the whole pipeline.

    seqnet synth | featurize | graph | embed | cluster | elbow |
           classify | evaluate | report | pca2d

Every subcommand reads and writes only the documented file formats, accepts
`--config` (INI) with CLI flags taking precedence, and drops a `<output>.meta`
sidecar per artifact recording the tool version, effective configuration and
input digests. Runtime columns are written as 0.0 unless `--timings` is given,
so identical configs and seeds reproduce artifacts byte for byte.

Exit codes: 0 success, 2 usage, 3 missing input file, 4 schema/config error,
5 data error, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, classify as classify_mod, cluster as cluster_mod
from .config import PipelineConfig, apply_overrides, config_items, load_config
from .embed import (
    EMBED_METHODS,
    WalkConfig,
    deepwalk,
    graph_factorization,
    hope_embed,
    laplacian_eigenmaps,
    lle_embed,
    load_embedding,
    node2vec,
    save_embedding,
)
from .errors import ConfigError, ParseError, SeqnetError
from .evalmetrics import cluster_quality
from .featurize import featurize_dataset, load_features, save_features
from .seqio import (
    parse_fasta,
    read_labels_csv,
    synthesize_dataset,
    write_fasta,
    write_labels_csv,
)
from .ssn import build_ssn, load_graph, save_graph

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_SCHEMA = 4
EXIT_DATA = 5
EXIT_UNEXPECTED = 1


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_sidecar(output, subcommand, config, inputs, extra=None):
    lines = ["tool=seqnet", f"version={__version__}", f"subcommand={subcommand}"]
    for key, value in config_items(config):
        lines.append(f"config.{key}={value}")
    for i, path in enumerate(inputs):
        lines.append(f"input.{i}.path={path}")
        lines.append(f"input.{i}.sha256={_sha256(path)}")
    for key in sorted(extra or {}):
        lines.append(f"{key}={extra[key]}")
    Path(str(output) + ".meta").write_text("\n".join(lines) + "\n")


def _require_input(path):
    if not Path(path).exists():
        raise FileNotFoundError(f"missing input file: {path}")
    return path


def _effective(args) -> PipelineConfig:
    config = load_config(getattr(args, "config", None) and _require_input(args.config))
    overrides = {
        key: getattr(args, key)
        for key in vars(args)
        if key in PipelineConfig.__dataclass_fields__
    }
    return apply_overrides(config, overrides)


def _walk_config(cfg: PipelineConfig, seed: int) -> WalkConfig:
    return WalkConfig(
        walks_per_node=cfg.walks_per_node,
        walk_length=cfg.walk_length,
        p=cfg.p,
        q=cfg.q,
        window=cfg.window,
        negatives=cfg.negatives,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        seed=seed,
    )


def _parse_per_lineage(text, lineages):
    parts = [int(p) for p in text.split(",") if p]
    if len(parts) == 1:
        parts = parts * lineages
    return parts


# ---------------------------------------------------------------- subcommands


def cmd_synth(args):
    cfg = _effective(args)
    dataset = synthesize_dataset(
        args.lineages,
        _parse_per_lineage(args.per_lineage, args.lineages),
        args.length,
        args.within_rate,
        args.between_count,
        cfg.seed,
    )
    write_fasta(dataset, args.output)
    _write_sidecar(args.output, "synth", cfg, [], {"records": len(dataset)})
    if args.labels_output:
        write_labels_csv(dataset, args.labels_output)
        _write_sidecar(args.labels_output, "synth", cfg, [])
    print(f"synth: wrote {len(dataset)} records to {args.output}")
    return EXIT_OK


def cmd_featurize(args):
    cfg = _effective(args)
    dataset = parse_fasta(_require_input(args.input), strict=cfg.strict)
    matrix = featurize_dataset(dataset, k=cfg.k)
    save_features(matrix, args.output)
    _write_sidecar(args.output, "featurize", cfg, [args.input])
    print(f"featurize: {matrix.n} rows, k={cfg.k}, bins={matrix.logical_length}")
    return EXIT_OK


def cmd_graph(args):
    cfg = _effective(args)
    matrix = load_features(_require_input(args.input))
    node_ids = None
    labels = None
    inputs = [args.input]
    if args.labels:
        rows = read_labels_csv(_require_input(args.labels))
        if len(rows) != matrix.n:
            raise ConfigError(
                f"labels file has {len(rows)} rows for {matrix.n} feature rows"
            )
        node_ids = [r[0] for r in rows]
        labels = [r[1] for r in rows]
        inputs.append(args.labels)
    graph = build_ssn(
        matrix,
        k=cfg.K,
        labels=labels,
        node_ids=node_ids,
        mode="mutual" if args.mutual else "union",
    )
    save_graph(graph, args.output, args.nodes_output)
    _write_sidecar(args.output, "graph", cfg, inputs, {"edges": graph.num_edges})
    print(f"graph: {graph.n} nodes, {graph.num_edges} edges (K={cfg.K})")
    return EXIT_OK


def cmd_embed(args):
    cfg = _effective(args)
    graph = load_graph(_require_input(args.input), args.nodes_input)
    method = cfg.method
    if method not in EMBED_METHODS:
        raise ConfigError(f"unknown embedding method {method!r}")
    on_disconnected = "largest" if args.allow_disconnected else "error"
    if method == "laplacian_eigenmaps":
        embedding = laplacian_eigenmaps(graph, cfg.dim, on_disconnected)
    elif method == "lle":
        embedding = lle_embed(graph, cfg.dim, on_disconnected)
    elif method == "hope":
        embedding = hope_embed(graph, cfg.dim, beta=args.beta)
    elif method == "graph_factorization":
        embedding = graph_factorization(
            graph, cfg.dim, lam=args.lam, lr=args.gf_lr, epochs=args.gf_epochs,
            seed=cfg.seed,
        )
    elif method == "deepwalk":
        embedding = deepwalk(graph, cfg.dim, _walk_config(cfg, cfg.seed))
    else:
        embedding = node2vec(graph, cfg.dim, _walk_config(cfg, cfg.seed))
    save_embedding(embedding, args.output)
    _write_sidecar(args.output, "embed", cfg, [args.input], {"method": method})
    print(f"embed: {method} -> {embedding.n} x {embedding.d}")
    return EXIT_OK


def cmd_cluster(args):
    cfg = _effective(args)
    matrix = load_features(_require_input(args.features))
    inputs = [args.features]
    method = args.cluster_method
    t0 = time.perf_counter()
    if method in ("ward", "average"):
        if not args.graph:
            raise ConfigError(f"--graph is required for {method} clustering")
        graph = load_graph(_require_input(args.graph))
        inputs.append(args.graph)
        assignment = cluster_mod.agglomerative(
            matrix, graph, cfg.k_clusters, linkage=method
        )
    elif method == "kmeans":
        assignment = cluster_mod.kmeans(matrix, cfg.k_clusters, seed=cfg.seed)
    elif method == "minibatch_kmeans":
        assignment = cluster_mod.kmeans(
            matrix, cfg.k_clusters, seed=cfg.seed, batch_size=cfg.batch_size or 256
        )
    elif method == "dbscan":
        assignment = cluster_mod.dbscan(matrix, eps=cfg.eps, min_pts=cfg.min_pts)
    elif method == "gmm":
        assignment = cluster_mod.gaussian_mixture(
            matrix, cfg.k_clusters, seed=cfg.seed, var_floor=cfg.var_floor,
            pca_dim=cfg.pca_dim,
        )
    elif method == "spectral":
        assignment = cluster_mod.spectral_clustering(
            matrix, cfg.k_clusters, gamma=cfg.gamma, seed=cfg.seed
        )
    else:
        raise ConfigError(f"unknown clustering method {method!r}")
    runtime = time.perf_counter() - t0

    with open(args.output, "w") as fh:
        if cfg.timings:
            fh.write(f"# runtime_sec={runtime!r}\n")
        fh.write("node_index,cluster\n")
        for i, lab in enumerate(assignment.labels):
            fh.write(f"{i},{int(lab)}\n")
    _write_sidecar(
        args.output, "cluster", cfg, inputs,
        {"cluster_method": method, "k_found": assignment.k_found},
    )
    print(f"cluster: {method} found {assignment.k_found} clusters")
    return EXIT_OK


def cmd_elbow(args):
    cfg = _effective(args)
    matrix = load_features(_require_input(args.features))
    curve = cluster_mod.elbow_select_k(matrix, args.k_min, args.k_max, seed=cfg.seed)
    cluster_mod.save_elbow(curve, args.output, timings=cfg.timings)
    _write_sidecar(args.output, "elbow", cfg, [args.features], {"chosen_k": curve.chosen_k})
    print(f"elbow: chose k={curve.chosen_k} over [{args.k_min}, {args.k_max}]")
    return EXIT_OK


def _load_vectors(path):
    """Features triplet CSV or embedding CSV, detected from the first line."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# n="):
        return load_features(path).to_dense()
    if first.startswith("node_index,"):
        return load_embedding(path).vectors
    raise ParseError(f"unrecognized input format in {path}", line=1)


def _read_runtime_comment(path) -> float:
    with open(path) as fh:
        first = fh.readline().strip()
    if first.startswith("# runtime_sec="):
        return float(first.split("=", 1)[1])
    return 0.0


def cmd_evaluate(args):
    cfg = _effective(args)
    x = _load_vectors(_require_input(args.features))
    labels = cluster_mod.load_assignment(_require_input(args.assignments))
    if len(labels) != len(x):
        raise ConfigError(
            f"assignment has {len(labels)} rows for {len(x)} feature rows"
        )
    runtime = _read_runtime_comment(args.assignments) if cfg.timings else 0.0
    report = cluster_quality(x, labels, runtime_sec=runtime)
    with open(args.output, "w") as fh:
        fh.write("algorithm,silhouette,calinski_harabasz,davies_bouldin,runtime_sec\n")
        fh.write(
            f"{args.name},{report.silhouette!r},{report.calinski_harabasz!r},"
            f"{report.davies_bouldin!r},{report.runtime_sec!r}\n"
        )
    _write_sidecar(args.output, "evaluate", cfg, [args.features, args.assignments])
    print(
        f"evaluate: silhouette={report.silhouette:.4f} "
        f"ch={report.calinski_harabasz:.2f} db={report.davies_bouldin:.4f}"
    )
    return EXIT_OK


def cmd_classify(args):
    cfg = _effective(args)
    embeddings = {}
    inputs = []
    for entry in args.embedding:
        if "=" in entry:
            name, path = entry.split("=", 1)
        else:
            path = entry
            name = None
        _require_input(path)
        emb = load_embedding(path)
        embeddings[name or emb.method] = emb
        inputs.append(path)
    rows = read_labels_csv(_require_input(args.labels))
    inputs.append(args.labels)
    some = next(iter(embeddings.values()))
    if len(rows) != some.n:
        raise ConfigError(f"labels file has {len(rows)} rows for {some.n} embedding rows")
    labels = [r[1] for r in rows]
    classifiers = (
        tuple(c for c in args.classifiers.split(",") if c) if args.classifiers else None
    )
    result = classify_mod.run_experiment(
        embeddings,
        labels,
        seeds=cfg.seeds,
        classifiers=classifiers,
        test_fraction=cfg.test_fraction,
        num_folds=cfg.num_folds,
    )
    mean_path = args.output_prefix + "_mean.csv"
    std_path = args.output_prefix + "_std.csv"
    classify_mod.save_result_csv(result.mean_rows(), mean_path, timings=cfg.timings)
    classify_mod.save_result_csv(result.std_rows(), std_path, timings=cfg.timings)
    _write_sidecar(mean_path, "classify", cfg, inputs)
    _write_sidecar(std_path, "classify", cfg, inputs)
    print(f"classify: wrote {mean_path} and {std_path}")
    return EXIT_OK


def cmd_report(args):
    cfg = _effective(args)
    header = None
    rows = []
    for path in args.inputs:
        lines = Path(_require_input(path)).read_text().strip().splitlines()
        if not lines:
            raise ParseError(f"empty report input {path}", line=1)
        if header is None:
            header = lines[0]
        elif lines[0] != header:
            raise ParseError(
                f"schema mismatch in {path}: {lines[0]!r} != {header!r}", line=1
            )
        rows.extend(lines[1:])
    with open(args.output, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    _write_sidecar(args.output, "report", cfg, list(args.inputs))
    print(f"report: merged {len(args.inputs)} files, {len(rows)} rows")
    return EXIT_OK


def cmd_pca2d(args):
    cfg = _effective(args)
    x = _load_vectors(_require_input(args.input))
    projection = cluster_mod.pca_project(x, 2)
    with open(args.output, "w") as fh:
        fh.write("node_index,pc0,pc1\n")
        for i, row in enumerate(projection):
            fh.write(f"{i},{row[0]!r},{row[1]!r}\n")
    _write_sidecar(args.output, "pca2d", cfg, [args.input])
    print(f"pca2d: projected {len(projection)} rows")
    return EXIT_OK


# -------------------------------------------------------------------- parser


def _add_common(sub):
    sub.add_argument("--config", help="INI config file")
    sub.add_argument("--workers", type=int, default=None,
                     help="cap on internal parallelism (results are identical)")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--timings", action="store_const", const=True, default=None,
                     help="write real wall-clock columns instead of 0.0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqnet",
        description="k-mer features, similarity networks, embeddings, "
        "clustering and classification for protein sequences",
    )
    parser.add_argument("--version", action="version", version=f"seqnet {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("synth", help="generate a labeled synthetic dataset")
    sub.add_argument("--output", required=True)
    sub.add_argument("--labels-output")
    sub.add_argument("--lineages", type=int, default=4)
    sub.add_argument("--per-lineage", default="100")
    sub.add_argument("--length", type=int, default=300)
    sub.add_argument("--within-rate", type=float, default=0.01)
    sub.add_argument("--between-count", type=int, default=30)
    _add_common(sub)
    sub.set_defaults(func=cmd_synth)

    sub = subs.add_parser("featurize", help="k-mer frequency vectors from FASTA")
    sub.add_argument("--input", required=True)
    sub.add_argument("--output", required=True)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--strict", action="store_const", const=True, default=None)
    _add_common(sub)
    sub.set_defaults(func=cmd_featurize)

    sub = subs.add_parser("graph", help="build the KNN similarity network")
    sub.add_argument("--input", required=True, help="features triplet CSV")
    sub.add_argument("--output", required=True, help="edge list TSV")
    sub.add_argument("--nodes-output", default=None)
    sub.add_argument("--labels", help="id,label CSV aligned with feature rows")
    sub.add_argument("--K", type=int, default=None)
    sub.add_argument("--mutual", action="store_true")
    _add_common(sub)
    sub.set_defaults(func=cmd_graph)

    sub = subs.add_parser("embed", help="node embeddings of the network")
    sub.add_argument("--input", required=True, help="edge list TSV")
    sub.add_argument("--nodes-input", default=None)
    sub.add_argument("--output", required=True)
    sub.add_argument("--method", default=None, choices=sorted(EMBED_METHODS))
    sub.add_argument("--dim", type=int, default=None)
    sub.add_argument("--allow-disconnected", action="store_true")
    sub.add_argument("--beta", type=float, default=None, help="hope proximity decay")
    sub.add_argument("--lam", type=float, default=1e-4, help="gf regularization")
    sub.add_argument("--gf-lr", type=float, default=0.05)
    sub.add_argument("--gf-epochs", type=int, default=200)
    for flag, typ in (
        ("--p", float), ("--q", float), ("--walks-per-node", int),
        ("--walk-length", int), ("--window", int), ("--negatives", int),
        ("--epochs", int), ("--learning-rate", float),
    ):
        sub.add_argument(flag, type=typ, default=None)
    _add_common(sub)
    sub.set_defaults(func=cmd_embed)

    sub = subs.add_parser("cluster", help="cluster feature rows")
    sub.add_argument("--features", required=True)
    sub.add_argument("--output", required=True)
    sub.add_argument(
        "--method", dest="cluster_method", default="kmeans",
        choices=["kmeans", "minibatch_kmeans", "ward", "average", "dbscan", "gmm", "spectral"],
    )
    sub.add_argument("--graph", help="edge TSV (required for ward/average)")
    sub.add_argument("--k-clusters", type=int, default=None, dest="k_clusters")
    sub.add_argument("--eps", type=float, default=None)
    sub.add_argument("--min-pts", type=int, default=None, dest="min_pts")
    sub.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--pca-dim", type=int, default=None, dest="pca_dim")
    _add_common(sub)
    sub.set_defaults(func=cmd_cluster)

    sub = subs.add_parser("elbow", help="SSE sweep and knee selection")
    sub.add_argument("--features", required=True)
    sub.add_argument("--output", required=True)
    sub.add_argument("--k-min", type=int, default=1)
    sub.add_argument("--k-max", type=int, default=10)
    _add_common(sub)
    sub.set_defaults(func=cmd_elbow)

    sub = subs.add_parser("evaluate", help="internal clustering quality scores")
    sub.add_argument("--features", required=True, help="features or embedding CSV")
    sub.add_argument("--assignments", required=True)
    sub.add_argument("--output", required=True)
    sub.add_argument("--name", default="clustering", help="algorithm column value")
    _add_common(sub)
    sub.set_defaults(func=cmd_evaluate)

    sub = subs.add_parser("classify", help="seeded classification protocol")
    sub.add_argument(
        "--embedding", action="append", required=True,
        help="embedding CSV, optionally name=path; repeatable",
    )
    sub.add_argument("--labels", required=True)
    sub.add_argument("--output-prefix", required=True)
    sub.add_argument("--classifiers", help="comma list; default all six")
    sub.add_argument("--seeds", type=lambda t: tuple(int(x) for x in t.split(",")),
                     default=None)
    sub.add_argument("--test-fraction", type=float, default=None, dest="test_fraction")
    sub.add_argument("--num-folds", type=int, default=None, dest="num_folds")
    _add_common(sub)
    sub.set_defaults(func=cmd_classify)

    sub = subs.add_parser("report", help="merge per-run CSVs sharing a schema")
    sub.add_argument("--inputs", nargs="+", required=True)
    sub.add_argument("--output", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_report)

    sub = subs.add_parser("pca2d", help="2-D principal component projection")
    sub.add_argument("--input", required=True, help="features or embedding CSV")
    sub.add_argument("--output", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_pca2d)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"seqnet: error[{EXIT_MISSING_INPUT}]: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ParseError, ConfigError) as exc:
        print(f"seqnet: error[{EXIT_SCHEMA}]: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SeqnetError as exc:
        print(f"seqnet: error[{EXIT_DATA}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"seqnet: error[{EXIT_UNEXPECTED}]: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
