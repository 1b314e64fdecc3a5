"""Temporal basis construction.

A corpus of fixed-length feature sequences is summarized by the
second-moment matrix between time steps (the sum of F^T F over all
sequences, uncentered).  Its eigenvectors, taken in order of decreasing
eigenvalue, are the optimal orthonormal weighting profiles for linear
temporal pooling; the first few can be approximated by DCT-II columns
for strongly correlated sequences.  Rank-pooling and uniform-mean
weight columns are provided as the classic single-function baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .linalg import ShapeError, as_matrix, symmetric_eigh

__all__ = [
    "BASIS_SOURCES",
    "ORTHONORMAL_SOURCES",
    "TimeCovariance",
    "EigenSpectrum",
    "BasisSet",
    "accumulate",
    "merge",
    "fit_eigen",
    "take_basis",
    "dct_basis",
    "rank_weights",
    "mean_weights",
]

BASIS_SOURCES = ("eigen", "dct", "rank", "mean")
ORTHONORMAL_SOURCES = ("eigen", "dct")
_ORTHO_TOL = 1e-9


def _sequence_values(seq) -> np.ndarray:
    """Accept a FeatureSequence or a bare dim x steps array."""
    return as_matrix(getattr(seq, "values", seq), "sequence")


@dataclass(frozen=True)
class TimeCovariance:
    """Accumulated second moments between time steps: sum of F^T F.

    The matrix is stored as the raw sum, never normalized by the
    sequence count; scaling by a positive constant leaves eigenvectors
    and their order unchanged.
    """

    length: int
    matrix: np.ndarray
    sequence_count: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("covariance length must be >= 1")
        mat = as_matrix(self.matrix, "covariance matrix")
        if mat.shape != (self.length, self.length):
            raise ShapeError(
                f"covariance matrix must be {self.length}x{self.length}, "
                f"got {mat.shape}"
            )
        asymmetry = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
        if asymmetry > 1e-9 * max(1.0, float(np.max(np.abs(mat)))):
            raise ValueError("covariance matrix is not symmetric")
        if self.sequence_count < 0:
            raise ValueError("sequence count must be >= 0")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def empty(cls, length: int) -> "TimeCovariance":
        return cls(length, np.zeros((length, length)), 0)


@dataclass(frozen=True)
class EigenSpectrum:
    """Full eigendecomposition of a time covariance.

    ``eigenvalues`` are descending; column j of ``eigenvectors`` is the
    j-th temporal profile.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = as_matrix(self.eigenvectors, "eigenvectors")
        if vals.ndim != 1 or vecs.shape != (vals.size, vals.size):
            raise ShapeError("spectrum eigenvalue/eigenvector shapes disagree")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @property
    def length(self) -> int:
        return self.eigenvectors.shape[0]


@dataclass(frozen=True)
class BasisSet:
    """A set of temporal weight columns applied by pooling.

    ``vectors`` is length x count with one weight function per column.
    Sources ``eigen`` and ``dct`` are column-orthonormal; ``rank`` and
    ``mean`` are single, not necessarily unit-norm, columns.  For
    ``eigen`` the fitted spectrum's full eigenvalue list rides along.
    """

    length: int
    vectors: np.ndarray
    source: str
    eigenvalues: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.source not in BASIS_SOURCES:
            raise ValueError(f"unknown basis source {self.source!r}")
        vecs = as_matrix(self.vectors, "basis vectors")
        if vecs.shape[0] != self.length:
            raise ShapeError(
                f"basis vectors have {vecs.shape[0]} rows, expected {self.length}"
            )
        count = vecs.shape[1]
        if not 1 <= count <= self.length:
            raise ValueError(
                f"basis function count must be in [1, {self.length}], got {count}"
            )
        if self.source in ORTHONORMAL_SOURCES:
            gram = vecs.T @ vecs
            if np.max(np.abs(gram - np.eye(count))) > _ORTHO_TOL:
                raise ValueError(f"{self.source} basis columns are not orthonormal")
        else:
            if count != 1:
                raise ValueError(f"{self.source} basis must have exactly one column")
        if self.eigenvalues is not None:
            vals = np.asarray(self.eigenvalues, dtype=np.float64)
            if vals.ndim != 1:
                raise ValueError("eigenvalues must be a flat list")
            object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "vectors", vecs)

    @property
    def count(self) -> int:
        return self.vectors.shape[1]

    def column(self, index: int) -> np.ndarray:
        """Weight column for a 1-based basis index."""
        if not 1 <= index <= self.count:
            raise ValueError(
                f"basis index {index} out of range 1..{self.count}"
            )
        return self.vectors[:, index - 1]

    def truncate(self, count: int) -> "BasisSet":
        """Keep the first ``count`` columns (eigenvalues ride along)."""
        if not 1 <= count <= self.count:
            raise ValueError(f"count {count} out of range 1..{self.count}")
        return BasisSet(self.length, self.vectors[:, :count], self.source,
                        self.eigenvalues)


def accumulate(cov: TimeCovariance, seq) -> TimeCovariance:
    """Add one sequence's F^T F to the accumulator (pure, returns a new one)."""
    values = _sequence_values(seq)
    if values.shape[1] != cov.length:
        raise ShapeError(
            f"sequence has {values.shape[1]} time steps, accumulator expects "
            f"{cov.length}"
        )
    return TimeCovariance(cov.length, cov.matrix + values.T @ values,
                          cov.sequence_count + 1)


def merge(parts: Iterable[TimeCovariance]) -> TimeCovariance:
    """Sum partial accumulators built over disjoint corpus slices."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to merge")
    length = parts[0].length
    matrix = np.zeros((length, length))
    count = 0
    for part in parts:
        if part.length != length:
            raise ShapeError(
                f"cannot merge accumulators of lengths {length} and {part.length}"
            )
        matrix = matrix + part.matrix
        count += part.sequence_count
    return TimeCovariance(length, matrix, count)


def fit_eigen(cov: TimeCovariance) -> EigenSpectrum:
    """Eigendecompose an accumulator into temporal profiles."""
    if cov.sequence_count < 1:
        raise RuntimeError("cannot fit an empty accumulator: no sequences added")
    eigenvalues, eigenvectors = symmetric_eigh(cov.matrix)
    return EigenSpectrum(eigenvalues, eigenvectors)


def take_basis(spectrum: EigenSpectrum, count: int) -> BasisSet:
    """First ``count`` eigenvectors as a pooling basis.

    The full eigenvalue spectrum is attached so downstream consumers can
    compute residual-energy tails for any truncation.
    """
    if not 1 <= count <= spectrum.length:
        raise ValueError(
            f"basis function count must be in [1, {spectrum.length}], got {count}"
        )
    return BasisSet(spectrum.length, spectrum.eigenvectors[:, :count].copy(),
                    "eigen", spectrum.eigenvalues.copy())


def dct_basis(length: int, count: int) -> BasisSet:
    """Orthonormal DCT-II basis columns.

    Column j (0-based frequency j) has entries
    ``s_j * cos(pi * j * (2t + 1) / (2 * length))`` with ``s_0 =
    sqrt(1/length)`` and ``s_j = sqrt(2/length)`` otherwise.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if not 1 <= count <= length:
        raise ValueError(
            f"basis function count must be in [1, {length}], got {count}"
        )
    steps = np.arange(length)
    columns = []
    for j in range(count):
        scale = math.sqrt(1.0 / length) if j == 0 else math.sqrt(2.0 / length)
        columns.append(scale * np.cos(math.pi * j * (2 * steps + 1) / (2 * length)))
    return BasisSet(length, np.column_stack(columns), "dct")


def rank_weights(length: int) -> BasisSet:
    """Rank-pooling weight column.

    Weight at 1-based position l is ``sum_{t=l}^{length} (2t - length - 1) / t``,
    the closed-form approximation of the pairwise ranking objective over
    frame order.  The weights sum to zero, so constant offsets are
    annihilated.
    """
    if length < 2:
        raise ValueError("rank weights need at least 2 time steps")
    terms = [(2.0 * t - length - 1.0) / t for t in range(1, length + 1)]
    weights = np.array([math.fsum(terms[l - 1:]) for l in range(1, length + 1)])
    return BasisSet(length, weights.reshape(-1, 1), "rank")


def mean_weights(length: int) -> BasisSet:
    """Uniform averaging column (entries 1/length)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return BasisSet(length, np.full((length, 1), 1.0 / length), "mean")
