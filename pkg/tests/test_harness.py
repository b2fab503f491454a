"""Tests for configuration, manifests, summaries, decoder grids and the command line."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from PIL import Image

from main import main
from src.config import ConfigHandler, parse_override
from src.constants import ENV_VARS, EXIT, FAMILIES, FILES
from src.errors import ConfigError, InvalidParameter
from src.features import FeatureMap
from src.harness import (
    RunManifest,
    SeedRecord,
    build_suite,
    config_hash,
    emit_decoder_viz,
    emit_summary,
    format_cell,
    run_experiment,
    summary_frame,
)
from src.harness.manifest import STATUS_FAILED, STATUS_OK
from src.models import AlgorithmSettings, BudgetSettings, ExperimentConfig, SuiteSettings
from src.models.settings import default_jobs

SMOKE = """
[experiment]
name = "smoke"
algorithm = "G-RepTransfer"
seeds = [0]
jobs = 1

[suite]
family = "shared-emission"
num_sources = 2
horizon = 3
num_actions = 2

[budgets]
n_rf = 20
n_lsvi = 20
n = 30
t_deploy = 200

[beta]
deployment = 1.0

[evaluation]
solve_interval = 20
solve_runs = 10
solve_consecutive = 2
"""


@pytest.fixture
def smoke_file(tmp_path):
    path = tmp_path / "smoke.toml"
    path.write_text(SMOKE, encoding="utf-8")
    return path


def smoke_config(smoke_file, output_root):
    return ConfigHandler(str(smoke_file), [f'experiment.output_root="{output_root}"'], environ={}).get_experiment_config()


def manifest_with(values, name="run", algorithm="G-RepTransfer", beta=None):
    records = [
        SeedRecord(seed=s, status=STATUS_OK, beta=beta, episodes_to_solve=None if math.isinf(v) else v)
        for s, v in enumerate(values)
    ]
    return RunManifest(name=name, algorithm=algorithm, suite="suite-a", config_hash="0" * 64,
                       version="0.1.0", records=records)


# ----- configuration ------------------------------------------------------------


@pytest.mark.parametrize("assignment, expected", [
    ("budgets.n-rf=100", ("budgets", "n_rf", 100)),
    ("experiment.seeds=[1, 2]", ("experiment", "seeds", [1, 2])),
    ("suite.family=partitioned", ("suite", "family", "partitioned")),
    ("beta.deployment=0.5", ("beta", "deployment", 0.5)),
])
def test_parse_override(assignment, expected):
    assert parse_override(assignment) == expected


@pytest.mark.parametrize("assignment", ["budgets.n", "n_rf=3"])
def test_parse_override_rejects_malformed_assignments(assignment):
    with pytest.raises(ConfigError):
        parse_override(assignment)


def test_config_precedence(smoke_file):
    environ = {ENV_VARS.OUTPUT_ROOT: "from-env", ENV_VARS.JOBS: "3"}
    handler = ConfigHandler(str(smoke_file), ["experiment.jobs=2"], environ=environ)

    settings = handler.get_algorithm_settings()

    assert settings.output_root == "from-env"
    assert settings.jobs == 2


def test_config_rejects_unknown_keys_and_sections(smoke_file):
    with pytest.raises(ConfigError):
        ConfigHandler(str(smoke_file), ["budgets.episodes=3"], environ={})
    with pytest.raises(ConfigError):
        ConfigHandler(str(smoke_file), ["plots.width=3"], environ={})


def test_config_reports_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError):
        ConfigHandler(str(tmp_path / "missing.toml"), environ={})
    broken = tmp_path / "broken.toml"
    broken.write_text("[suite\nhorizon = ", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigHandler(str(broken), environ={})


def test_config_rejects_invalid_values(smoke_file):
    with pytest.raises(ConfigError):
        ConfigHandler(str(smoke_file), ["suite.family=grid-world"], environ={}).get_experiment_config()
    with pytest.raises(ConfigError):
        ConfigHandler(str(smoke_file), ["budgets.n_rf=1"], environ={}).get_experiment_config()
    with pytest.raises(ConfigError):
        ConfigHandler(str(smoke_file), ["experiment.seeds=[1, 1]"], environ={}).get_experiment_config()


def test_soft_violations_fall_back_to_defaults():
    assert AlgorithmSettings(jobs=0).jobs == default_jobs()
    assert SuiteSettings(codewords_per_latent=0).codewords_per_latent == 2
    with pytest.raises(ConfigError):
        BudgetSettings(t_deploy=0)


def test_experiment_name_and_document_round_trip():
    config = ExperimentConfig(suite=SuiteSettings(num_sources=3), experiment=AlgorithmSettings(jobs=1))

    assert config.name == "G-RepTransfer-shared-emission-K3-H6-A4"
    assert ExperimentConfig.from_document(config.to_document()) == config


def test_config_hash_ignores_parallelism_and_output_location():
    base = ExperimentConfig(experiment=AlgorithmSettings(jobs=1, output_root="a"))
    moved = ExperimentConfig(experiment=AlgorithmSettings(jobs=8, output_root="b"))
    other = ExperimentConfig(experiment=AlgorithmSettings(jobs=1, output_root="a", seeds=[7]))

    assert config_hash(base) == config_hash(moved)
    assert config_hash(base) != config_hash(other)


def test_comblock_family_is_a_single_task_suite(rng):
    suite = build_suite(SuiteSettings(family=FAMILIES.COMBLOCK, horizon=4, num_actions=3), rng)

    assert suite.num_sources == 1
    assert suite.target is suite.sources[0]
    assert suite.span_error() < 1e-12


# ----- summaries and manifests ---------------------------------------------------


@pytest.mark.parametrize("values, expected", [
    ([1.0, 2.0, 3.0, 4.0, 5.0], "3 (1.41)"),
    ([10.0, 20.0], "15 (5.00)"),
    ([10.0, math.inf, 20.0], "15 (5.00) [2/3]"),
    ([math.inf, math.inf, 10.0], "∞ (1/3)"),
    ([math.inf, math.inf], "∞ (0/2)"),
])
def test_format_cell(values, expected):
    assert format_cell(values) == expected


def test_summary_frame_labels_beta_sweeps():
    manifest = manifest_with([10.0, 30.0])
    for record in manifest.records:
        record.beta = 0.5
    manifest.records += [SeedRecord(seed=s, status=STATUS_FAILED, beta=2.0) for s in range(2)]

    frame = summary_frame([manifest])

    assert list(frame["algorithm"]) == ["G-RepTransfer beta=0.5", "G-RepTransfer beta=2"]
    assert list(frame["cell"]) == ["20 (10.00)", "∞ (0/2)"]


def test_emit_summary_writes_both_tables(tmp_path):
    paths = emit_summary([manifest_with([4.0, 6.0]), manifest_with([8.0], algorithm="oracle")], tmp_path)

    frame = pd.read_csv(paths[0])
    assert set(frame["algorithm"]) == {"G-RepTransfer", "oracle"}
    text = paths[1].read_text(encoding="utf-8")
    assert "5 (1.00)" in text and "8 (0.00)" in text
    with pytest.raises(InvalidParameter):
        emit_summary([], tmp_path)


def test_manifest_round_trip_and_verification(tmp_path):
    table = tmp_path / "table.csv"
    pd.DataFrame({"a": [1]}).to_csv(table, index=False)
    manifest = manifest_with([5.0])
    manifest.records[0].files = [str(table), str(tmp_path / "gone.json")]
    manifest.records[0].access = {"source-0": {"episodes": 3, "resets": 3, "steps": 6, "generative": 2}}

    manifest.write(tmp_path)
    loaded = RunManifest.load(tmp_path)

    assert loaded.records[0].episodes_to_solve == 5.0
    assert loaded.access_totals() == {"episodes": 3, "resets": 3, "steps": 6, "generative": 2}
    assert loaded.verify() == [str(tmp_path / "gone.json")]
    with pytest.raises(ConfigError):
        RunManifest.load(tmp_path / "elsewhere")


# ----- decoder grids -----------------------------------------------------------------


def test_true_decoder_has_no_collapses(comblock, rng):
    viz = emit_decoder_viz(FeatureMap.ground_truth(comblock.layout, 3), comblock, range(4), rng)

    assert viz.collapses == []
    np.testing.assert_allclose(viz.grids[1][:, 2], [0.0, 1.0, 0.0])


def test_constant_decoder_collapses_every_pair(comblock, rng, tmp_path):
    viz = emit_decoder_viz(FeatureMap.constant(comblock.layout, 3), comblock, [0, 1], rng, directory=tmp_path)

    assert len(viz.collapses) == 6
    assert pd.read_csv(tmp_path / "collapses.csv").shape == (6, 3)
    with Image.open(tmp_path / "latent0.png") as image:
        assert image.size == (2 * 24, 1 * 24)


# ----- end to end --------------------------------------------------------------------


def test_run_experiment_writes_a_verifiable_manifest(smoke_file, tmp_path):
    config = smoke_config(smoke_file, tmp_path / "out")

    manifest = run_experiment(config)

    assert not manifest.failures
    assert manifest.verify() == []
    directory = tmp_path / "out" / "smoke"
    assert (directory / FILES.MANIFEST).is_file()
    assert (directory / FILES.SUMMARY_CSV).is_file()
    assert (directory / "0" / FILES.SUITE).is_file()
    assert manifest.access_totals()["generative"] > 0


@pytest.mark.slow
def test_reruns_reproduce_every_report(smoke_file, tmp_path):
    first = run_experiment(smoke_config(smoke_file, tmp_path / "a"))
    second = run_experiment(smoke_config(smoke_file, tmp_path / "b"))

    for x, y in zip(first.files(), second.files()):
        if x.endswith(".json"):
            assert json.loads(Path(x).read_text(encoding="utf-8")) == json.loads(Path(y).read_text(encoding="utf-8"))
    assert first.config_hash == second.config_hash


def test_cli_validate_config(smoke_file):
    assert main(["validate-config", "--config", str(smoke_file)]) == EXIT.OK
    assert main(["validate-config", "--config", str(smoke_file), "--set", "suite.horizon=0"]) == EXIT.CONFIG_ERROR


def test_cli_rejects_a_missing_config_file(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["run", "--config", str(tmp_path / "missing.toml")])

    assert excinfo.value.code == EXIT.CONFIG_ERROR


def test_cli_verify_lower_bound(tmp_path):
    output = tmp_path / "lower_bound.json"

    assert main(["verify-lower-bound", "--samples", "200", "--output", str(output)]) == EXIT.OK
    document = json.loads(output.read_text(encoding="utf-8"))
    assert document["gaps"]["permuted"] == pytest.approx(0.5)


# ----- acceptance ------------------------------------------------------------------

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def shipped_config(name, output_root, *overrides):
    handler = ConfigHandler(str(CONFIGS / f"{name}.toml"), [f'experiment.output_root="{output_root}"', *overrides],
                            environ={})
    return handler.get_experiment_config()


def median_episodes(manifest):
    return float(np.median([r.episodes_to_solve if r.solved else math.inf for r in manifest.records]))


def total_target_episodes(record):
    return record.episodes_to_solve if record.solved else record.access["target"]["resets"]


@pytest.mark.slow
def test_transfer_beats_learning_the_shared_target_from_scratch(tmp_path):
    generative = run_experiment(shipped_config("shared_emission_generative", tmp_path))
    online = run_experiment(shipped_config("shared_emission_online", tmp_path))
    scratch = run_experiment(shipped_config("shared_emission_scratch", tmp_path))

    assert all(r.solved for r in generative.records)
    assert all(r.solved for r in online.records)
    scratch_median = float(np.median([total_target_episodes(r) for r in scratch.records]))
    assert 5 * median_episodes(generative) <= scratch_median
    assert 5 * median_episodes(online) <= scratch_median


@pytest.mark.slow
def test_transfer_deploys_about_as_fast_as_the_true_features(tmp_path):
    generative = run_experiment(shipped_config("shared_emission_generative", tmp_path))
    oracle = run_experiment(shipped_config("shared_emission_oracle", tmp_path))

    assert median_episodes(generative) <= 3 * median_episodes(oracle)


@pytest.mark.slow
def test_partitioned_target_needs_cross_samples(tmp_path):
    generative = run_experiment(shipped_config("partitioned_generative", tmp_path))
    assert sum(r.solved for r in generative.records) >= 4

    budget = int(10 * median_episodes(generative))
    online = run_experiment(shipped_config("partitioned_online", tmp_path, f"budgets.t_deploy={budget}"))
    assert sum(not r.solved for r in online.records) >= 4
