"""Interactive radial-ray graph-cut segmentation of hypoechoic lesions in
2-D grayscale images, with evaluation metrics, statistics, and synthetic
phantoms for verification."""

from .imaging import (
    BinaryMask,
    GrayImage,
    ImageFormatError,
    InvalidPolygonError,
    OutOfBoundsError,
    Point2D,
    Polygon,
    load_image,
    load_mask,
    mask_area,
    rasterize_polygon,
    sample_bilinear,
    save_image,
    save_mask,
)
from .raygraph import (
    INFINITE,
    CostProfile,
    FlowNetwork,
    RayTemplate,
    SeedOutOfBoundsError,
    SeedTooCloseToBorderError,
    build_graph,
    build_template,
    compute_cost_profile,
    sample_mean_gray,
)
from .maxflow import CutResult, SolverLimitError, UnboundedFlowError, max_flow_min_cut
from .segmenter import (
    HelperConflictWarning,
    HelperOutOfRangeError,
    SeedInput,
    SegmentationParams,
    SegmentationResult,
    apply_helper_constraints,
    compute_diameters,
    extract_contour,
    segment,
)
from .evaluation import (
    EvalRecord,
    SummaryStats,
    UndefinedDistanceError,
    DegenerateSampleError,
    dice,
    hausdorff,
    icc_absolute_agreement,
    one_sample_ttest,
    summarize,
    wilcoxon_rank_sum,
)
from .phantom import PhantomSpec, generate, generate_suite
from .session import SessionLog, SessionServer, replay_log
from .reporting import StudyReport, compile_report, evaluate_manifest, read_manifest

__version__ = "0.1.0"
