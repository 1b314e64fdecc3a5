"""Temporal pooling applied directly to RGB frame sequences.

Frames are flattened to width*height*3 feature columns so the generic
pooling operators apply unchanged: pooling with an eigen or DCT column
yields an "eigen image", pooling with rank weights yields a "dynamic
image", and reconstructing a sampled frame from a truncated basis shows
how much of the clip a few basis functions retain.  Float images are
kept pre-rescale; mapping into displayable [0, 255] is a separate,
deliberately lossy step.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import BasisSet, mean_weights, rank_weights
from .linalg import ShapeError
from .pooling import (FeatureSequence, pool, reconstruct, sample_regular,
                      window_starts)
from .ppm import list_frame_files, read_ppm

__all__ = [
    "FrameSequence",
    "PooledImage",
    "load_frame_dir",
    "vectorize",
    "eigen_image",
    "mean_image",
    "dynamic_image",
    "windowed_images",
    "rescale_to_u8",
    "quantize_u8",
    "reconstruct_frame",
]

_DEGENERATE_RANGE = 1e-12
_DEGENERATE_GRAY = 128


@dataclass(frozen=True)
class FrameSequence:
    """An ordered stack of same-sized RGB frames, intensities in [0, 255]."""

    frames: np.ndarray  # (count, height, width, 3) float64

    def __post_init__(self):
        arr = np.asarray(self.frames, dtype=np.float64)
        if arr.ndim != 4 or arr.shape[3] != 3:
            raise ShapeError(
                f"frames must have shape (count, height, width, 3), got {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise ShapeError("at least one frame is required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("frames contain non-finite values")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise ValueError("frame intensities must lie in [0, 255]")
        object.__setattr__(self, "frames", arr)

    @classmethod
    def from_list(cls, frames: Sequence[np.ndarray]) -> "FrameSequence":
        frames = [np.asarray(f, dtype=np.float64) for f in frames]
        if not frames:
            raise ShapeError("at least one frame is required")
        shape = frames[0].shape
        for i, frame in enumerate(frames):
            if frame.shape != shape:
                raise ShapeError(
                    f"frame {i} has shape {frame.shape}, expected {shape}"
                )
        return cls(np.stack(frames))

    @property
    def count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]


@dataclass(frozen=True)
class PooledImage:
    """A pooled (or reconstructed) frame kept as raw floats, pre-rescale."""

    float_values: np.ndarray  # (height, width, 3)
    provenance: str

    def __post_init__(self):
        arr = np.asarray(self.float_values, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ShapeError(
                f"pooled image must be HxWx3, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("pooled image contains non-finite values")
        object.__setattr__(self, "float_values", arr)


def load_frame_dir(directory) -> FrameSequence:
    """Read every PPM in a directory, lexicographic by file name."""
    frames = [read_ppm(p) for p in list_frame_files(directory)]
    return FrameSequence.from_list(frames)


def vectorize(frames: FrameSequence, length: int) -> FeatureSequence:
    """Sample ``length`` frames regularly and flatten each to one column.

    Flattening is row-major (y, x, channel), so the feature dimension is
    width*height*3.
    """
    flat = frames.frames.reshape(frames.count, -1).T  # dim x count
    return sample_regular(FeatureSequence(flat), length)


def _as_image(column: np.ndarray, frames: FrameSequence, tag: str) -> PooledImage:
    shaped = column.reshape(frames.height, frames.width, 3)
    return PooledImage(shaped, tag)


def eigen_image(frames: FrameSequence, basis: BasisSet, index: int) -> PooledImage:
    """Pool the clip with basis column ``index``; samples basis.length frames."""
    seq = vectorize(frames, basis.length)
    desc = pool(seq, basis, index)
    return _as_image(desc.values, frames, desc.provenance)


def mean_image(frames: FrameSequence) -> PooledImage:
    """Per-pixel temporal average over all frames."""
    return eigen_image(frames, mean_weights(frames.count), 1)


def dynamic_image(frames: FrameSequence) -> PooledImage:
    """Rank-pooling over all frames (no resampling)."""
    if frames.count < 2:
        raise ValueError("a dynamic image needs at least 2 frames")
    return eigen_image(frames, rank_weights(frames.count), 1)


def windowed_images(frames: FrameSequence, basis: BasisSet, window: int = 16,
                    stride: int = 8) -> list[tuple[int, int, PooledImage]]:
    """Pooled images per sliding-window position and basis index.

    Returns (start, index, image) triples, window-major.  Clips shorter
    than the window collapse to a single resampled window, mirroring
    local sequence pooling.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if basis.length != window:
        raise ShapeError(
            f"basis length {basis.length} does not match window {window}"
        )
    results = []
    for start in window_starts(frames.count, window, stride):
        if frames.count < window:
            chunk = frames
            span = (0, frames.count)
        else:
            chunk = FrameSequence(frames.frames[start:start + window])
            span = (start, start + window)
        for index in range(1, basis.count + 1):
            img = eigen_image(chunk, basis, index)
            tagged = PooledImage(img.float_values,
                                 f"{img.provenance}@{span[0]}:{span[1]}")
            results.append((start, index, tagged))
    return results


def rescale_to_u8(img: PooledImage) -> np.ndarray:
    """Min-max map to [0, 255] over all pixels and channels jointly.

    Uses round-half-up; a degenerate range maps everything to mid-gray.
    """
    values = img.float_values
    lo = float(values.min())
    hi = float(values.max())
    if hi - lo <= _DEGENERATE_RANGE:
        return np.full(values.shape, _DEGENERATE_GRAY, dtype=np.uint8)
    scaled = np.floor(255.0 * (values - lo) / (hi - lo) + 0.5)
    return np.clip(scaled, 0.0, 255.0).astype(np.uint8)


def quantize_u8(img: PooledImage) -> np.ndarray:
    """Round intensities already on the [0, 255] scale to u8, no rescaling.

    The right mapping for mean images, whose values stay on the input
    scale; min-max rescaling would contrast-stretch a plain average.
    """
    return np.clip(np.floor(img.float_values + 0.5), 0.0, 255.0).astype(np.uint8)


def reconstruct_frame(frames: FrameSequence, basis: BasisSet,
                      step: int) -> PooledImage:
    """Reconstruct sampled frame ``step`` (0-based) from the basis span."""
    if not 0 <= step < basis.length:
        raise ValueError(
            f"step {step} outside the sampled range 0..{basis.length - 1}"
        )
    seq = vectorize(frames, basis.length)
    rebuilt = reconstruct(seq, basis)
    tag = f"reconstruct:{basis.source}:{basis.count}@t{step}"
    return _as_image(rebuilt.values[:, step].copy(), frames, tag)
