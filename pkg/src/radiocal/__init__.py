"""Single-image inverse camera response estimation."""

from .estimator import (
    EmptyPatchSet,
    Estimate,
    EstimatorConfig,
    PatchDropped,
    PatchEstimate,
    StageEstimate,
    consistency,
    estimate,
    estimate_patch,
    optimize_distribution,
    reliability,
    vote_mode,
)
from .evaluation import EvalReport, linearize, rmse, run_ablation
from .grid import X_GRID
from .imageio import load_image, read_curve, save_image, write_curve
from .linefit import (
    DegenerateChannel,
    line_fit_error,
    linearisation_error,
    linearisation_profile,
    normalize_channels,
)
from .model import (
    CrfCurve,
    GgcmParams,
    apply_inverse,
    fit_final_model,
    ggcm_forward,
    ggcm_inverse,
    ggcm_inverse_curve,
)
from .patches import (
    Patch,
    ScanDirection,
    SelectionThresholds,
    collect_patches,
    extract_distributions,
    is_valid_patch,
    scan_direction,
)

__version__ = "0.1.0"
