# SPDX-License-Identifier: BSD-3-Clause

"""Command-line interface: the full workflow and one subcommand per step."""

import argparse
import asyncio
import json
import logging
import sys

import numpy as np
import pandas as pd

from dataclasses import fields
from pathlib import Path

from . import __version__
from .cluster import extract_clusters, jaccard_score, score_clusters
from .config import PipelineConfig
from .data import drop_clusters, load_matrix, reduce_and_rescale, save_factorization, svd_decompose
from .elements import SUPPORTED_ELEMENT_MODES
from .errors import DQCConfigError, DQCDataError, DQCNumericalError
from .evolution import frame_records, iter_dqc_stages
from .filter import afilter_features, filter_features
from .io import (
    read_labels, read_points, write_json, write_jsonl, write_labels, write_matrix, write_points,
    write_singular_values
)
from .model import potential_surface
from .schemas import EvolutionParams, ModelParams, RetentionRule
from .synthetic import blobs, circle_centers, ring

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _components(text: str) -> tuple:
    try:
        return tuple(int(c) for c in text.split(",") if c.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _labels(text: str) -> tuple:
    return tuple(c.strip() for c in text.split(",") if c.strip())


def _bounds(text: str) -> tuple:
    try:
        bounds = tuple(float(c) for c in text.split(","))
    except ValueError:
        bounds = ()
    if len(bounds) != 4:
        raise argparse.ArgumentTypeError(f"expected xmin,xmax,ymin,ymax, got {text!r}")
    return bounds


# ===========================
# Workflow
# ===========================

def run_pipeline(config: PipelineConfig):
    """
    Run load, filtering, SVD reduction, DQC stages, extraction and scoring,
    writing every artifact into `config.output`.

    Returns:
        ClusterResult: The final clusters, scored when the data has labels.
    """
    out = Path(config.output)
    out.mkdir(parents = True, exist_ok = True)
    config.dump(out / "config.xml")

    m = load_matrix(config.input, config.delimiter, config.header, config.label_column, config.id_column)
    logger.info(f"[pydqc][run] loaded {m.n} records with {m.d} features")

    reports = []
    if config.filter_stages > 0:
        result = filter_features(m, config.filter_stages, config.retention_rule())
        m, reports = result.matrix, [stage.to_record() for stage in result.stages]
        if result.stop_reason:
            logger.info(f"[pydqc][run] filtering stopped: {result.stop_reason}")
    write_jsonl(out / "filter_report.jsonl", reports)

    f = svd_decompose(m, full = False)
    write_singular_values(out / "singular_values.csv", f.s)
    points = reduce_and_rescale(f, config.components, config.rescale, config.weighted)

    for stage in iter_dqc_stages(
        points, config.model_params(), config.evolution_params(),
        config.rescale_sigma, config.representative_threshold
    ):
        write_points(out / f"positions_stage{stage.stage}.csv", stage.points)
        if config.export_frames:
            write_jsonl(out / f"frames_stage{stage.stage}.jsonl", frame_records(stage))
        if config.export_model:
            write_json(out / f"model_stage{stage.stage}.json", stage.model.to_dict())
        points = stage.points

    clusters = extract_clusters(points, config.epsilon, config.epsilon_fraction)
    write_labels(out / "labels.csv", points.ids, clusters.labels)
    if m.labels is not None and m.n >= 2:
        score_clusters(clusters, m.labels)
    write_json(out / "score.json", clusters.to_record())

    logger.info(f"[pydqc][run] {clusters.n_clusters} clusters, jaccard={clusters.jaccard}")
    return clusters


# ===========================
# Subcommand handlers
# ===========================

def _load(args):
    m = load_matrix(args.input, args.delimiter, args.header, args.label_column, args.id_column)
    if args.cluster_labels is None:
        return m
    assignment = read_labels(args.cluster_labels)
    return drop_clusters(m, assignment.index, assignment.to_numpy(), args.drop_clusters)


def cmd_run(args) -> int:
    overrides = { k: v for k, v in vars(args).items() if k in { f.name for f in fields(PipelineConfig) } }
    if args.config is not None:
        config = PipelineConfig.load(args.config, overrides)
    else:
        config = PipelineConfig.from_mapping(overrides)
    clusters = run_pipeline(config)
    print(json.dumps(clusters.to_record()))
    return EXIT_OK


def cmd_svd(args) -> int:
    f = svd_decompose(_load(args), full = args.full)
    out = Path(args.output)
    save_factorization(f, out)
    write_singular_values(out / "singular_values.csv", f.s)
    if args.components:
        write_points(out / "points.csv", reduce_and_rescale(f, args.components, args.rescale, args.weighted))
    return EXIT_OK


def cmd_filter(args) -> int:
    m, rule = _load(args), RetentionRule(args.threshold)
    if args.concurrent:
        result = asyncio.run(afilter_features(m, args.stages, rule))
    else:
        result = filter_features(m, args.stages, rule)
    out = Path(args.output)
    write_matrix(out / "filtered.csv", result.matrix)
    write_jsonl(out / "filter_report.jsonl", [stage.to_record() for stage in result.stages])
    print(json.dumps({ "removed": result.removed, "stop_reason": result.stop_reason }))
    return EXIT_OK


def cmd_evolve(args) -> int:
    model_params = ModelParams(args.sigma, args.mass, args.basis_cutoff, args.elements, args.samples, args.seed)
    evo_params = EvolutionParams(args.dt, args.steps, args.stages, args.early_stop)
    out = Path(args.output)

    points = read_points(args.points)
    for stage in iter_dqc_stages(points, model_params, evo_params, args.rescale_sigma, args.representative_threshold):
        write_points(out / f"positions_stage{stage.stage}.csv", stage.points)
        if args.export_frames:
            write_jsonl(out / f"frames_stage{stage.stage}.jsonl", frame_records(stage))
        if args.export_model:
            write_json(out / f"model_stage{stage.stage}.json", stage.model.to_dict())
        points = stage.points
    write_points(out / "positions.csv", points)
    return EXIT_OK


def cmd_cluster(args) -> int:
    points = read_points(args.points)
    clusters = extract_clusters(points, args.epsilon, args.epsilon_fraction)
    write_labels(args.output, points.ids, clusters.labels)
    print(json.dumps(clusters.to_record()))
    return EXIT_OK


def cmd_score(args) -> int:
    predicted, expert = read_labels(args.predicted), read_labels(args.expert)
    joined = pd.concat([predicted.rename("predicted"), expert.rename("expert")], axis = 1, join = "inner")
    if len(joined) != len(predicted) or len(joined) != len(expert):
        raise DQCDataError("ID_MISMATCH", f"({len(predicted)} and {len(expert)} labels, {len(joined)} shared ids)")
    record = {
        "jaccard": jaccard_score(joined["predicted"].to_numpy(), joined["expert"].to_numpy()),
        "n_clusters": int(joined["predicted"].nunique()),
    }
    if args.output:
        write_json(args.output, record)
    print(json.dumps(record))
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "blobs":
        points = blobs(circle_centers(args.k, args.radius), args.n, args.std, args.seed)
    else:
        points = ring(args.n, args.radius, args.std, args.seed)
    write_points(args.output, points)
    return EXIT_OK


def cmd_potential(args) -> int:
    xs, ys, values = potential_surface(read_points(args.points), args.sigma, args.bounds, args.resolution)
    gx, gy = np.meshgrid(xs, ys)
    path = Path(args.output)
    path.parent.mkdir(parents = True, exist_ok = True)
    pd.DataFrame({ "x": gx.ravel(), "y": gy.ravel(), "V": values.ravel() }).to_csv(
        path, index = False, float_format = "%.17g"
    )
    return EXIT_OK


# ===========================
# Parser
# ===========================

def _input_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("input", help = "Data file (CSV or TSV).")
    parser.add_argument("--delimiter", help = "Field delimiter, inferred from the file suffix by default.")
    parser.add_argument("--no-header", dest = "header", action = "store_false", help = "The first row is data.")
    parser.add_argument("--label-column", help = "Column holding expert labels (name, or 0-based index).")
    parser.add_argument("--id-column", help = "Column holding record identifiers.")
    parser.add_argument("--cluster-labels", help = "Labels CSV (id, label) of an earlier clustering of the input.")
    parser.add_argument("--drop-clusters", type = _labels, default = (),
        help = "Comma-separated cluster labels whose records are left out, with --cluster-labels.")


def _dqc_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--sigma", type = float, required = True, help = "Width of the Gaussian states.")
    parser.add_argument("--mass", type = float, help = "Evolution mass, 1/sigma² by default.")
    parser.add_argument("--dt", type = float, default = 0.1, help = "Timestep.")
    parser.add_argument("--steps", type = int, default = 40, help = "Timesteps per stage.")
    parser.add_argument("--stages", type = int, default = 1, help = "Stop-and-restart stages.")
    parser.add_argument("--basis-cutoff", type = float, default = 1e-6, help = "Relative Gram eigenvalue cutoff.")
    parser.add_argument("--elements", choices = SUPPORTED_ELEMENT_MODES, default = "midpoint",
        help = "Potential matrix element mode.")
    parser.add_argument("--samples", type = int, default = 64, help = "Samples, or Hermite nodes per axis.")
    parser.add_argument("--seed", type = int, default = 0, help = "Seed of the sampled element mode.")
    parser.add_argument("--representative-threshold", type = float, default = 0.0,
        help = "Evolve through representative states selected at this residual threshold.")
    parser.add_argument("--rescale-sigma", action = "store_true", help = "Scale sigma with the point spread.")
    parser.add_argument("--early-stop", action = "store_true", help = "Stop a stage once the points settle.")
    parser.add_argument("--export-frames", action = "store_true", help = "Write per-step frames as JSON lines.")
    parser.add_argument("--export-model", action = "store_true", help = "Write the quantum model of every stage as JSON.")


def _config_arguments(parser: argparse.ArgumentParser):
    for f in fields(PipelineConfig):
        flag = f.name.replace("_", "-")
        if f.type is bool:
            parser.add_argument(f"--{flag}", dest = f.name, action = "store_const", const = "true",
                default = argparse.SUPPRESS, help = f.metadata["doc"])
            parser.add_argument(f"--no-{flag}", dest = f.name, action = "store_const", const = "false",
                default = argparse.SUPPRESS)
        else:
            parser.add_argument(f"--{flag}", dest = f.name, default = argparse.SUPPRESS, help = f.metadata["doc"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog = "pydqc", description = "Dynamic quantum clustering.")
    parser.add_argument("-v", "--verbose", action = "count", default = 0, help = "-v for info, -vv for debug.")
    parser.add_argument("--version", action = "version", version = f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest = "command", required = True)

    p = commands.add_parser("run", help = "Run the whole workflow from a configuration file and flags.")
    p.add_argument("--config", help = "Pipeline XML document; flags override its keys.")
    _config_arguments(p)
    p.set_defaults(handler = cmd_run)

    p = commands.add_parser("svd", help = "Decompose a data file and optionally write reduced points.")
    _input_arguments(p)
    p.add_argument("--output", required = True, help = "Output directory.")
    p.add_argument("--full", action = "store_true", help = "Write the full n×n U.")
    p.add_argument("--components", type = _components, help = "1-based components to reduce to, e.g. 2,3,4.")
    p.add_argument("--no-rescale", dest = "rescale", action = "store_false", help = "Keep reduced rows unscaled.")
    p.add_argument("--weighted", action = "store_true", help = "Use rows of U·S.")
    p.set_defaults(handler = cmd_svd)

    p = commands.add_parser("filter", help = "SVD-entropy feature filtering.")
    _input_arguments(p)
    p.add_argument("--output", required = True, help = "Output directory.")
    p.add_argument("--stages", type = int, default = 1, help = "Filtering stages.")
    p.add_argument("--threshold", type = float, default = 0.0, help = "Standard deviation multiplier.")
    p.add_argument("--concurrent", action = "store_true", help = "Score features in worker threads.")
    p.set_defaults(handler = cmd_filter)

    p = commands.add_parser("evolve", help = "Evolve a points file through DQC stages.")
    p.add_argument("points", help = "Points CSV (id, label, x1..xr).")
    p.add_argument("--output", required = True, help = "Output directory.")
    _dqc_arguments(p)
    p.set_defaults(handler = cmd_evolve)

    p = commands.add_parser("cluster", help = "Single-linkage clusters of a points file.")
    p.add_argument("points", help = "Points CSV.")
    p.add_argument("--output", required = True, help = "Labels CSV to write.")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type = float, help = "Linkage distance.")
    group.add_argument("--epsilon-fraction", type = float, default = 0.05, help = "Fraction of the diameter.")
    p.set_defaults(handler = cmd_cluster)

    p = commands.add_parser("score", help = "Jaccard score of predicted labels against expert labels.")
    p.add_argument("predicted", help = "CSV with id and label columns.")
    p.add_argument("expert", help = "CSV with id and label columns.")
    p.add_argument("--output", help = "Score JSON to write.")
    p.set_defaults(handler = cmd_score)

    p = commands.add_parser("generate", help = "Seeded synthetic points.")
    p.add_argument("kind", choices = ["blobs", "ring"])
    p.add_argument("--output", required = True, help = "Points CSV to write.")
    p.add_argument("--n", type = int, default = 30, help = "Points per blob, or on the ring.")
    p.add_argument("--k", type = int, default = 3, help = "Number of blobs.")
    p.add_argument("--radius", type = float, default = 1.0, help = "Radius of the blob circle or ring.")
    p.add_argument("--std", type = float, default = 0.05, help = "Blob spread, or radial ring noise.")
    p.add_argument("--seed", type = int, default = 0)
    p.set_defaults(handler = cmd_generate)

    p = commands.add_parser("potential", help = "Potential surface of 2-d points on a grid.")
    p.add_argument("points", help = "Points CSV.")
    p.add_argument("--sigma", type = float, required = True)
    p.add_argument("--output", required = True, help = "CSV of x, y, V.")
    p.add_argument("--resolution", type = int, default = 101)
    p.add_argument("--bounds", type = _bounds, help = "xmin,xmax,ymin,ymax.")
    p.set_defaults(handler = cmd_potential)

    return parser


def main(argv = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format = "%(levelname)s %(name)s %(message)s"
    )

    try:
        return args.handler(args)
    except (DQCNumericalError, np.linalg.LinAlgError) as exc:
        print(f"pydqc: numerical error: {exc}", file = sys.stderr)
        return EXIT_NUMERICAL
    except (DQCDataError, OSError) as exc:
        print(f"pydqc: data error: {exc}", file = sys.stderr)
        return EXIT_DATA
    except (DQCConfigError, ValueError) as exc:
        print(f"pydqc: invalid configuration: {exc}", file = sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
