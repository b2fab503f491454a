"""
Decoder visualization: what a learned decoder outputs for each true latent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from PIL import Image

from src.constants import DEFAULTS, LOGGER_NAME
from src.features.decoders import FeatureMap
from src.mdp.block_mdp import BlockMdp

logger = logging.getLogger(LOGGER_NAME)

CELL_PIXELS = 24


@dataclass(eq=False)
class DecoderViz:
    """Mean decoded label vectors.

    Attributes:
        steps: Steps covered, in column order.
        grids: ``grids[z]`` has shape ``(labels, len(steps))``; column ``t`` is
            the mean one-hot label of observations emitted by latent ``z`` at
            ``steps[t]``. Columns of latents absent at a step are NaN.
        collapses: ``(h, z1, z2)`` for latent pairs whose columns agree.
    """
    steps: list[int]
    grids: np.ndarray
    collapses: list[tuple[int, int, int]] = field(default_factory=list)

    def frame(self, latent: int) -> pd.DataFrame:
        table = pd.DataFrame(self.grids[latent], columns=[f"h{h}" for h in self.steps])
        table.insert(0, "label", np.arange(self.grids.shape[1]))
        return table

    def image(self, latent: int) -> Image.Image:
        """Grayscale heatmap of one grid, white for probability one."""
        grid = np.nan_to_num(self.grids[latent], nan=0.0)
        pixels = np.clip(np.rint(grid * 255.0), 0, 255).astype(np.uint8)
        img = Image.fromarray(pixels)
        return img.resize((pixels.shape[1] * CELL_PIXELS, pixels.shape[0] * CELL_PIXELS), Image.Resampling.NEAREST)

    def write(self, directory: Path) -> list[Path]:
        """Write one CSV grid and one PNG heatmap per latent, plus the collapse list."""
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for z in range(self.grids.shape[0]):
            csv_path = directory / f"latent{z}.csv"
            png_path = directory / f"latent{z}.png"
            self.frame(z).to_csv(csv_path, index=False)
            self.image(z).save(png_path, "PNG")
            written += [csv_path, png_path]
        collapse_path = directory / "collapses.csv"
        pd.DataFrame(self.collapses, columns=["h", "latent_a", "latent_b"]).to_csv(collapse_path, index=False)
        written.append(collapse_path)
        return written


def mean_decoded(phi: FeatureMap, env: BlockMdp, h: int, z: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Average one-hot label of ``samples`` observations emitted by latent ``z`` at step ``h``."""
    counts = np.zeros(phi.num_labels(h))
    for _ in range(samples):
        counts[phi.index(h, env.emit(h, z, rng))] += 1.0
    return counts / samples


def emit_decoder_viz(
    phi: FeatureMap,
    env: BlockMdp,
    steps: range | list[int],
    rng: np.random.Generator,
    samples: int = DEFAULTS.VIZ_SAMPLES,
    tolerance: float = DEFAULTS.COLLAPSE_TOLERANCE,
    directory: Path | None = None,
) -> DecoderViz:
    """Decode ``samples`` observations per latent and step, and flag collapses.

    Two latents collapse at a step when their mean decoded vectors agree
    within ``tolerance`` in the max norm.

    Args:
        phi: Decoder under inspection.
        env: Environment emitting the observations.
        steps: Steps to cover.
        rng: Random stream for the emissions.
        samples: Observations per (latent, step).
        tolerance: Max-norm collapse threshold.
        directory: Write the grids here when given.
    """
    steps = list(steps)
    num_latents = max(env.layout.num_latents(h) for h in steps)
    num_labels = max(phi.num_labels(h) for h in steps)
    grids = np.full((num_latents, num_labels, len(steps)), np.nan)
    collapses = []
    for t, h in enumerate(steps):
        columns = []
        for z in range(env.layout.num_latents(h)):
            column = np.zeros(num_labels)
            column[: phi.num_labels(h)] = mean_decoded(phi, env, h, z, samples, rng)
            grids[z, :, t] = column
            columns.append(column)
        for a in range(len(columns)):
            for b in range(a + 1, len(columns)):
                if np.abs(columns[a] - columns[b]).max() <= tolerance:
                    collapses.append((h, a, b))
    if collapses:
        logger.warning(f"Decoder collapses at steps {sorted({c[0] for c in collapses})}")
    viz = DecoderViz(steps=steps, grids=grids, collapses=collapses)
    if directory is not None:
        viz.write(directory)
    return viz
