"""Pooling operators over fixed-length feature sequences.

A sequence is a dim x steps matrix whose column t is the feature vector
at step t; each row traces one feature's evolution over time.  Linear
pooling projects every row onto a temporal weight column, yielding one
coefficient per feature.  Coefficients are computed with exactly
rounded summation (math.fsum), so two weight/value multisets that are
permutations of each other give bit-identical descriptors; this keeps
order-insensitive poolings (mean, max) exactly invariant under time
reversal, which downstream tie-breaking relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import BasisSet, ORTHONORMAL_SOURCES, mean_weights
from .linalg import ShapeError, as_matrix

__all__ = [
    "FeatureSequence",
    "PooledDescriptor",
    "sample_regular",
    "pool",
    "pool_max",
    "pool_mean",
    "reconstruct",
    "reconstruction_error",
    "window_starts",
    "iter_windows",
    "local_pool",
    "l2_normalize",
    "concat",
]

_ZERO_NORM = 1e-12


@dataclass(frozen=True)
class FeatureSequence:
    """A dim x steps matrix of feature vectors over time."""

    values: np.ndarray

    def __post_init__(self):
        arr = as_matrix(self.values, "sequence")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"sequence must be non-empty, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PooledDescriptor:
    """One pooled coefficient vector plus a provenance tag.

    The tag records the basis source and 1-based index ("dct:2"), plus a
    window span suffix ("dct:2@8:24") when pooled locally.
    """

    values: np.ndarray
    provenance: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ShapeError(f"descriptor must be 1-dimensional, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("descriptor contains non-finite entries")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _resample_indices(source_len: int, target_len: int) -> list[int]:
    # round-half-up in exact integer arithmetic; endpoints always included
    if target_len == 1:
        return [source_len // 2]
    span = source_len - 1
    denom = target_len - 1
    return [(2 * l * span + denom) // (2 * denom) for l in range(target_len)]


def sample_regular(seq: FeatureSequence, length: int) -> FeatureSequence:
    """Resample to ``length`` columns at a regular interval.

    Column l maps to source column round(l * (T-1) / (length-1)), so both
    endpoints are kept; shorter inputs repeat nearest columns.
    """
    if length < 1:
        raise ValueError("target length must be >= 1")
    indices = _resample_indices(seq.length, length)
    return FeatureSequence(seq.values[:, indices])


def _exact_rows(products: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(row) for row in products])


def pool(seq: FeatureSequence, basis: BasisSet, index: int) -> PooledDescriptor:
    """Project every feature row onto basis column ``index`` (1-based)."""
    if seq.length != basis.length:
        raise ShapeError(
            f"sequence length {seq.length} does not match basis length "
            f"{basis.length}"
        )
    weights = basis.column(index)
    coefficients = _exact_rows(seq.values * weights)
    return PooledDescriptor(coefficients, f"{basis.source}:{index}")


def pool_max(seq: FeatureSequence) -> PooledDescriptor:
    """Elementwise maximum over time per feature row."""
    return PooledDescriptor(np.max(seq.values, axis=1), "max")


def pool_mean(seq: FeatureSequence) -> PooledDescriptor:
    """Elementwise mean over time; identical to pooling with mean weights."""
    return pool(seq, mean_weights(seq.length), 1)


def reconstruct(seq: FeatureSequence, basis: BasisSet) -> FeatureSequence:
    """Project every row onto the basis span (values @ G @ G^T)."""
    if basis.source not in ORTHONORMAL_SOURCES:
        raise ValueError(
            f"reconstruction needs an orthonormal basis, not {basis.source!r}"
        )
    if seq.length != basis.length:
        raise ShapeError(
            f"sequence length {seq.length} does not match basis length "
            f"{basis.length}"
        )
    vectors = basis.vectors
    return FeatureSequence(seq.values @ vectors @ vectors.T)


def reconstruction_error(seq: FeatureSequence, basis: BasisSet) -> float:
    """Squared Frobenius norm of the residual after reconstruction."""
    residual = reconstruct(seq, basis).values - seq.values
    return float(np.sum(residual * residual))


def window_starts(total: int, window: int, stride: int) -> list[int]:
    """Window start offsets: stride apart, last window clamped to the end."""
    if total <= window:
        return [0]
    starts = list(range(0, total - window + 1, stride))
    if starts[-1] != total - window:
        starts.append(total - window)
    return starts


def iter_windows(seq: FeatureSequence, window: int,
                 stride: int) -> list[tuple[tuple[int, int], FeatureSequence]]:
    """(span, chunk) pairs per sliding-window position.

    Windows start at 0 and advance by ``stride``; the last one is clamped
    to end at the final step.  Sequences shorter than the window are
    resampled (nearest-column duplication) into a single window.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    chunks = []
    for start in window_starts(seq.length, window, stride):
        if seq.length < window:
            chunks.append(((0, seq.length), sample_regular(seq, window)))
        else:
            chunks.append(((start, start + window),
                           FeatureSequence(seq.values[:, start:start + window])))
    return chunks


def local_pool(seq: FeatureSequence, basis: BasisSet, window: int = 16,
               stride: int = 8) -> list[PooledDescriptor]:
    """Pool inside a sliding window, all basis functions per position.

    Descriptors are ordered window-major, then by basis index, with the
    window span appended to the provenance tag.
    """
    if basis.length != window:
        raise ShapeError(
            f"basis length {basis.length} does not match window {window}"
        )
    descriptors = []
    for span, chunk in iter_windows(seq, window, stride):
        for index in range(1, basis.count + 1):
            plain = pool(chunk, basis, index)
            descriptors.append(PooledDescriptor(
                plain.values, f"{plain.provenance}@{span[0]}:{span[1]}"))
    return descriptors


def l2_normalize(desc: PooledDescriptor) -> PooledDescriptor:
    """Scale to unit Euclidean norm; near-zero vectors pass through."""
    norm = float(np.linalg.norm(desc.values))
    if norm <= _ZERO_NORM:
        return desc
    return PooledDescriptor(desc.values / norm, desc.provenance)


def concat(descs: Sequence[PooledDescriptor]) -> PooledDescriptor:
    """Join descriptors in list order; provenance tags join with '+'."""
    if not descs:
        raise ValueError("cannot concatenate an empty descriptor list")
    values = np.concatenate([d.values for d in descs])
    return PooledDescriptor(values, "+".join(d.provenance for d in descs))
