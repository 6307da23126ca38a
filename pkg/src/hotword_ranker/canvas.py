"""Cosine similarity matrices and the fixed-size scorer input canvas.

A matching pronunciation shows up as a bright diagonal band in the cosine
matrix between the hotword's and the transcript's phoneme embeddings; the
canvas zero-pads that matrix to a fixed shape so a batch can be stacked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ZeroVectorRow

DEFAULT_ROWS = 24   # hotword phonemes
DEFAULT_COLS = 128  # transcript phonemes
NORM_EPS = 1e-12


@dataclass
class SimilarityCanvas:
    values: np.ndarray  # (rows, cols), zero outside the valid region
    valid_rows: int
    valid_cols: int


def cosine_matrix(hotword_emb: np.ndarray, text_emb: np.ndarray) -> np.ndarray:
    """out[i, j] = cos(hotword_emb[i], text_emb[j]), clamped to [-1, 1]."""
    hn = np.linalg.norm(hotword_emb, axis=1)
    tn = np.linalg.norm(text_emb, axis=1)
    for name, norms in (("hotword", hn), ("text", tn)):
        bad = np.nonzero(norms < NORM_EPS)[0]
        if bad.size:
            raise ZeroVectorRow(f"{name} embedding row {bad[0]} is (near) zero")
    sim = (hotword_emb @ text_emb.T) / (hn[:, None] * tn[None, :])
    return np.clip(sim, -1.0, 1.0)


def cosine_from_ids(
    norm_table: np.ndarray, hw_ids: np.ndarray, text_ids: np.ndarray
) -> np.ndarray:
    """Cosine matrix via a pre-normalized embedding table.

    Identical phoneme ids are set to exactly 1.0: cos(u, u) is 1 by
    definition, and the exact value keeps perfect-match diagonals crisp.
    """
    u = norm_table[hw_ids]
    v = norm_table[text_ids]
    sim = u @ v.T
    sim[np.asarray(hw_ids)[:, None] == np.asarray(text_ids)[None, :]] = 1.0
    return np.clip(sim, -1.0, 1.0)


def normalize_rows(table: np.ndarray) -> np.ndarray:
    norms = np.maximum(np.linalg.norm(table, axis=1, keepdims=True), NORM_EPS)
    return table / norms


def to_canvas(
    sim: np.ndarray, rows: int = DEFAULT_ROWS, cols: int = DEFAULT_COLS
) -> SimilarityCanvas:
    """Copy into the top-left corner; long transcripts truncate from the right."""
    h, t = sim.shape
    if h > rows:
        raise ValueError(f"{h} hotword phonemes exceed the {rows}-row canvas")
    tc = min(t, cols)
    values = np.zeros((rows, cols), dtype=sim.dtype)
    values[:h, :tc] = sim[:, :tc]
    return SimilarityCanvas(values, valid_rows=h, valid_cols=tc)


def export_heatmap(canvas: SimilarityCanvas, path) -> None:
    """Write the valid region as CSV with 6 decimal places."""
    region = canvas.values[: canvas.valid_rows, : canvas.valid_cols]
    with open(path, "w", encoding="utf-8") as fh:
        for row in region:
            fh.write(",".join(f"{x:.6f}" for x in row))
            fh.write("\n")


def diagonal_contrast(canvas: SimilarityCanvas) -> Tuple[float, float, int]:
    """Best-offset diagonal-band mean vs off-band mean over the valid region.

    Returns (band_mean, off_mean, offset). The band at offset o covers cells
    (i, o + i) for i < valid_rows.
    """
    h, t = canvas.valid_rows, canvas.valid_cols
    region = canvas.values[:h, :t]
    if t < h:
        offsets = [0]
    else:
        offsets = range(t - h + 1)
    best_off, best_mean = 0, -np.inf
    for o in offsets:
        n = min(h, t - o)
        if n <= 0:
            continue
        m = float(np.mean(region[np.arange(n), o + np.arange(n)]))
        if m > best_mean:
            best_mean, best_off = m, o
    mask = np.ones((h, t), dtype=bool)
    n = min(h, t - best_off)
    mask[np.arange(n), best_off + np.arange(n)] = False
    off_mean = float(region[mask].mean()) if mask.any() else 0.0
    return best_mean, off_mean, best_off
