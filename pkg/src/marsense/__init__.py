"""Mixed adaptive-random sampling masks and TV recovery for images."""

from .baseline import (
    DenseSensingMatrix,
    OmpResult,
    gaussian_measure,
    gaussian_sensing_matrix,
    haar2_forward,
    haar2_inverse,
    omp,
)
from .edges import (
    MorphOp,
    apply_morph,
    bicubic_upsample,
    close,
    dilate,
    erode,
    predict_edge_map,
    sobel_magnitude,
    threshold_top_k,
)
from .images import (
    ImageFormatError,
    QualityReport,
    UnsupportedDepthError,
    ball_image,
    downsample_decimate,
    load_image,
    mse,
    psnr,
    quality_report,
    quantize,
    save_image,
    shepp_logan,
    ssim,
)
from .masks import (
    AcquisitionConfig,
    EdgeSource,
    MaskBudgetError,
    MaskBundle,
    MaskRole,
    Measurements,
    MeasurementsFormatError,
    SamplingMask,
    Strategy,
    TrpsPredictor,
    apply_mask,
    build_mar,
    build_mask_bundle,
    build_random,
    build_trps,
    load_mask,
    load_measurements,
    lowres_grid_mask,
    mask_ratios,
    random_mask,
    save_mask,
    save_measurements,
    union_masks,
)
from .recovery import (
    InitMode,
    NumericalError,
    RecoveryResult,
    TvConfig,
    init_estimate,
    recover,
    scatter_adjoint,
    tv_value,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "DenseSensingMatrix",
    "EdgeSource",
    "ImageFormatError",
    "InitMode",
    "MaskBudgetError",
    "MaskBundle",
    "MaskRole",
    "Measurements",
    "MeasurementsFormatError",
    "MorphOp",
    "NumericalError",
    "OmpResult",
    "QualityReport",
    "RecoveryResult",
    "SamplingMask",
    "Strategy",
    "TrpsPredictor",
    "TvConfig",
    "UnsupportedDepthError",
    "apply_mask",
    "apply_morph",
    "ball_image",
    "bicubic_upsample",
    "build_mar",
    "build_mask_bundle",
    "build_random",
    "build_trps",
    "close",
    "dilate",
    "downsample_decimate",
    "erode",
    "gaussian_measure",
    "gaussian_sensing_matrix",
    "haar2_forward",
    "haar2_inverse",
    "init_estimate",
    "load_image",
    "load_mask",
    "load_measurements",
    "lowres_grid_mask",
    "mask_ratios",
    "mse",
    "omp",
    "predict_edge_map",
    "psnr",
    "quality_report",
    "quantize",
    "random_mask",
    "recover",
    "save_image",
    "save_mask",
    "save_measurements",
    "scatter_adjoint",
    "shepp_logan",
    "sobel_magnitude",
    "ssim",
    "threshold_top_k",
    "tv_value",
    "union_masks",
]
