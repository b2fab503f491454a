"""
Experiment orchestration: one worker per (seed, beta) run, then a manifest and a summary.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict
from pathlib import Path
from typing import Any

from src import __version__
from src.constants import FILES, LOGGER_NAME
from src.harness.builders import build_hypothesis_class, build_suite
from src.harness.manifest import STATUS_FAILED, STATUS_OK, RunManifest, SeedRecord, config_hash
from src.harness.summary import emit_summary
from src.harness.viz import emit_decoder_viz
from src.logger import setup_logger
from src.models.settings import ExperimentConfig
from src.seeding import RunStreams, named_stream
from src.transfer.deployment import DeploymentOptions, TransferBudgets
from src.transfer.pipelines import ExploreOptions, run_pipeline

logger = logging.getLogger(LOGGER_NAME)


def experiment_directory(config: ExperimentConfig) -> Path:
    return Path(config.experiment.output_root) / config.name


def run_directory(config: ExperimentConfig, seed: int, beta: float | None) -> Path:
    """``<root>/<name>/<seed>``, or ``<root>/<name>/beta-<b>/<seed>`` inside a sweep."""
    base = experiment_directory(config)
    if config.beta.sweep:
        base = base / f"beta-{beta:g}"
    return base / str(seed)


def _options(config: ExperimentConfig, beta: float | None) -> tuple[DeploymentOptions, ExploreOptions]:
    deployment = DeploymentOptions(
        beta=beta,
        beta_scale=config.beta.scale,
        stop_when_solved=config.evaluation.stop_when_solved,
        solve_interval=config.evaluation.solve_interval,
        solve_runs=config.evaluation.solve_runs,
        solve_consecutive=config.evaluation.solve_consecutive,
    )
    explore = ExploreOptions(
        beta_scale=config.beta.eps_scale,
        lambda_scale=config.beta.lambda_scale,
        alpha_scale=config.beta.alpha_scale,
    )
    return deployment, explore


def run_seed(config: ExperimentConfig, seed: int, beta: float | None) -> tuple[SeedRecord, str]:
    """Build the suite, run the pipeline and write every per-seed file.

    Failures are caught and returned as a failed record so other seeds go on.

    Returns:
        The record and the suite name.
    """
    directory = run_directory(config, seed, beta)
    suite_name = config.suite.family
    try:
        streams = RunStreams.from_seed(seed)
        suite = build_suite(config.suite, streams.env)
        suite_name = suite.name
        hclass = build_hypothesis_class(suite, streams.env)
        budgets = TransferBudgets(
            n_rf=config.budgets.n_rf,
            n_lsvi=config.budgets.n_lsvi,
            n=config.budgets.n,
            t_deploy=config.budgets.t_deploy,
        )
        deployment, explore = _options(config, beta)
        report = run_pipeline(
            config.experiment.algorithm, suite, hclass, budgets, config.experiment.delta, streams,
            deployment, explore, oracle_exploration=config.experiment.oracle_exploration,
        )
        files = report.write(directory)
        suite_path = directory / FILES.SUITE
        with open(suite_path, "w", encoding="utf-8") as f:
            json.dump(suite.to_document(), f, indent=2, sort_keys=True)
        files.append(suite_path)
        viz = emit_decoder_viz(report.phi, suite.target, range(suite.horizon), named_stream(seed, "viz"))
        files += viz.write(directory / FILES.VIZ_DIR)
        record = SeedRecord(
            seed=seed,
            status=STATUS_OK,
            beta=beta,
            episodes_to_solve=report.episodes_to_solve if report.solved else None,
            files=[str(p) for p in files],
            access={name: counter.as_dict() for name, counter in report.access.items()},
        )
    except Exception as e:
        logger.error(f"Seed {seed} failed: {type(e).__name__}: {e}")
        record = SeedRecord(seed=seed, status=STATUS_FAILED, beta=beta, error=f"{type(e).__name__}: {e}")
    return record, suite_name


def _worker(document: dict[str, Any], seed: int, beta: float | None, verbose: bool) -> tuple[dict[str, Any], str]:
    setup_logger(verbose)
    record, suite_name = run_seed(ExperimentConfig.from_document(document), seed, beta)
    return asdict(record), suite_name


def run_experiment(config: ExperimentConfig, verbose: bool = False) -> RunManifest:
    """Run every (seed, beta) point of ``config`` and write the manifest and summary.

    Runs are dispatched to ``config.experiment.jobs`` worker processes; with a
    single job everything runs in this process. Each run owns its directory,
    so workers share nothing.

    Args:
        config: Validated experiment configuration.
        verbose: DEBUG logging inside workers.

    Returns:
        The written manifest; failed seeds are listed in ``manifest.failures``.
    """
    start = time.perf_counter()
    points = [(seed, beta) for beta in config.beta.sweep_points() for seed in config.experiment.seeds]
    logger.info(f"Experiment {config.name}: {len(points)} runs on {config.experiment.jobs} workers")
    results: dict[tuple[int, float | None], tuple[SeedRecord, str]] = {}
    if config.experiment.jobs == 1 or len(points) == 1:
        for seed, beta in points:
            results[(seed, beta)] = run_seed(config, seed, beta)
    else:
        document = config.to_document()
        with ProcessPoolExecutor(max_workers=min(config.experiment.jobs, len(points))) as executor:
            futures = {
                executor.submit(_worker, document, seed, beta, verbose): (seed, beta)
                for seed, beta in points
            }
            for future in as_completed(futures):
                seed, beta = futures[future]
                try:
                    record, suite_name = future.result()
                    results[(seed, beta)] = (SeedRecord(**record), suite_name)
                except Exception as e:
                    logger.error(f"Worker for seed {seed} crashed: {e}")
                    results[(seed, beta)] = (
                        SeedRecord(seed=seed, status=STATUS_FAILED, beta=beta, error=f"{type(e).__name__}: {e}"),
                        config.suite.family,
                    )

    ordered = [results[point] for point in points]
    suite_names = [name for record, name in ordered if record.ok]
    manifest = RunManifest(
        name=config.name,
        algorithm=config.experiment.algorithm,
        suite=suite_names[0] if suite_names else ordered[0][1],
        config_hash=config_hash(config),
        version=__version__,
        records=[record for record, _ in ordered],
        config=config.to_document(),
    )
    directory = experiment_directory(config)
    emit_summary([manifest], directory)
    manifest.wall_clock = time.perf_counter() - start
    manifest.write(directory)
    if manifest.failures:
        logger.error(f"{len(manifest.failures)} of {len(points)} runs failed")
    else:
        logger.info(f"Experiment {config.name} finished in {manifest.wall_clock:.1f}s")
    return manifest
