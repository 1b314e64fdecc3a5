"""Temporal pooling of feature sequences with learned eigen bases.

Sequences of feature vectors (or of RGB frames) are summarized by
projecting each feature's evolution over time onto temporal weight
columns: eigenvectors of the corpus time covariance, their DCT-II
approximation, rank-pooling weights, or the uniform mean, plus
elementwise max as the order-blind baseline.
"""

from .basis import (BasisSet, EigenSpectrum, TimeCovariance, accumulate,
                    dct_basis, fit_eigen, mean_weights, merge, rank_weights,
                    take_basis)
from .bench import BenchReport, SynthDataset, SynthDatasetSpec, evaluate, generate
from .image import (FrameSequence, PooledImage, dynamic_image, eigen_image,
                    load_frame_dir, mean_image, reconstruct_frame,
                    rescale_to_u8, vectorize, windowed_images)
from .linalg import ShapeError, matmul, symmetric_eigh
from .pooling import (FeatureSequence, PooledDescriptor, concat, l2_normalize,
                      local_pool, pool, pool_max, pool_mean, reconstruct,
                      reconstruction_error, sample_regular)

__version__ = "0.1.0"

__all__ = [
    "ShapeError",
    "matmul",
    "symmetric_eigh",
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
    "FeatureSequence",
    "PooledDescriptor",
    "sample_regular",
    "pool",
    "pool_max",
    "pool_mean",
    "reconstruct",
    "reconstruction_error",
    "local_pool",
    "l2_normalize",
    "concat",
    "FrameSequence",
    "PooledImage",
    "load_frame_dir",
    "vectorize",
    "eigen_image",
    "mean_image",
    "dynamic_image",
    "windowed_images",
    "rescale_to_u8",
    "reconstruct_frame",
    "SynthDatasetSpec",
    "SynthDataset",
    "BenchReport",
    "generate",
    "evaluate",
    "__version__",
]
