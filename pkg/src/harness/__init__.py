"""
Experiment harness: configuration-driven runs, manifests, summaries and decoder visualizations.
"""
from src.harness.builders import build_hypothesis_class, build_suite
from src.harness.manifest import RunManifest, SeedRecord, config_hash
from src.harness.runner import run_experiment, run_seed
from src.harness.summary import emit_summary, format_cell, summary_frame
from src.harness.viz import DecoderViz, emit_decoder_viz

__all__ = [
    "DecoderViz",
    "RunManifest",
    "SeedRecord",
    "build_hypothesis_class",
    "build_suite",
    "config_hash",
    "emit_decoder_viz",
    "emit_summary",
    "format_cell",
    "run_experiment",
    "run_seed",
    "summary_frame",
]
