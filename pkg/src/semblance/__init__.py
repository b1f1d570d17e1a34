"""Semblance: a rank-based Mercer kernel and the tools around it."""

from .comparators import KernelSpec, MetricId, pairwise_matrix
from .data import DataMatrix
from .errors import ConfigError, DataError, NumericError, SemblanceError
from .kernel import (
    FeatureIndex,
    GramMatrix,
    SemblanceKernel,
    build_feature_index,
    semblance_cross_gram,
    semblance_feature_similarity,
    semblance_gram,
    semblance_gram_naive,
)
from .kpca import ImageGrid, KpcaModel, denoise_image, kpca_fit, kpca_project, preimage_reconstruct
from .psd import PsdReport, center_kernel, check_psd, symmetric_eigen
from .simulation import (
    SeparationStats,
    SweepResult,
    TwoGroupConfig,
    generate_two_group,
    run_sweep,
    separation_stats,
)
from .svm import CvReport, SvmModel, cross_validate, svm_predict, svm_train

__version__ = "0.1.0"

__all__ = [
    "KernelSpec",
    "MetricId",
    "pairwise_matrix",
    "DataMatrix",
    "ConfigError",
    "DataError",
    "NumericError",
    "SemblanceError",
    "FeatureIndex",
    "GramMatrix",
    "SemblanceKernel",
    "build_feature_index",
    "semblance_cross_gram",
    "semblance_feature_similarity",
    "semblance_gram",
    "semblance_gram_naive",
    "ImageGrid",
    "KpcaModel",
    "denoise_image",
    "kpca_fit",
    "kpca_project",
    "preimage_reconstruct",
    "PsdReport",
    "center_kernel",
    "check_psd",
    "symmetric_eigen",
    "SeparationStats",
    "SweepResult",
    "TwoGroupConfig",
    "generate_two_group",
    "run_sweep",
    "separation_stats",
    "CvReport",
    "SvmModel",
    "cross_validate",
    "svm_predict",
    "svm_train",
]
