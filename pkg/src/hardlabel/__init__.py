"""Query-efficient label-only adversarial attacks and their measurement kit."""

from .attack import (
    AttackConfig,
    AttackResult,
    ResultMetrics,
    run_attack,
    run_with_restarts,
)
from .baseline import BaselineConfig, run_boundary_attack
from .boundary import AdversarialPredicate, BoundarySample, estimate_boundary
from .errors import (
    BudgetExhaustedError,
    DimensionChainError,
    ExternalProtocolError,
    HardLabelError,
    ImageTooSmallError,
    InvalidReferenceError,
    NTooLargeError,
    ParseError,
    ShapeMismatchError,
    UnsupportedFormatError,
    ZeroVarianceError,
)
from .fileio import read_image, write_image, write_raw, write_report
from .gradient import GradientProbe, probe_gradient
from .image import (
    ImageTensor,
    add_scaled_clipped,
    l2_sq_dist,
    linf_dist,
    make_rng,
    midpoint,
    sparse_mask,
)
from .metrics import correlation, perturbation_norm, ssim
from .oracles import (
    BudgetedOracle,
    ExternalOracle,
    LinearOracle,
    MlpOracle,
    NearestCentroidOracle,
    load_centroid,
    load_linear,
    load_mlp,
)
from .update import UpdateResult, efficient_update

__version__ = "0.1.0"

__all__ = [
    "AdversarialPredicate",
    "AttackConfig",
    "AttackResult",
    "BaselineConfig",
    "BoundarySample",
    "BudgetExhaustedError",
    "BudgetedOracle",
    "DimensionChainError",
    "ExternalOracle",
    "ExternalProtocolError",
    "GradientProbe",
    "HardLabelError",
    "ImageTensor",
    "ImageTooSmallError",
    "InvalidReferenceError",
    "LinearOracle",
    "MlpOracle",
    "NTooLargeError",
    "NearestCentroidOracle",
    "ParseError",
    "ResultMetrics",
    "ShapeMismatchError",
    "UnsupportedFormatError",
    "UpdateResult",
    "ZeroVarianceError",
    "add_scaled_clipped",
    "correlation",
    "efficient_update",
    "estimate_boundary",
    "l2_sq_dist",
    "linf_dist",
    "load_centroid",
    "load_linear",
    "load_mlp",
    "make_rng",
    "midpoint",
    "perturbation_norm",
    "probe_gradient",
    "read_image",
    "run_attack",
    "run_boundary_attack",
    "run_with_restarts",
    "sparse_mask",
    "ssim",
    "write_image",
    "write_raw",
    "write_report",
]
