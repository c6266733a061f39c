"""Human-stability components and metrics from 3D pose and plantar pressure.

The library computes the three stability components (center of mass, center
of pressure, base of support) from pose and insole pressure streams,
evaluates the CoMtoCoP and CoMtoBoS metrics over takes, and ships the
evaluation machinery (LOSO splits, correlation/error statistics, threshold
sweeps) together with a synthetic ground-truth generator for end-to-end
verification.
"""

from .errors import StabilikitError
from .geometry import ConvexPolygon, Point2, Point3, convex_hull, euclidean_distance
from .pose import (
    LAYOUTS,
    CameraProjection,
    JointSetLayout,
    Pose2dFrame,
    Pose3dFrame,
    assemble_hybrid_pose,
    hip_center,
    triangulate_frame,
    triangulate_joint,
)
from .pressure import (
    FootPlacement,
    LocalizedPressureField,
    PressureMap,
    base_of_support,
    bos_iou,
    center_of_pressure,
    localize_foot,
    localized_field,
)
from .dempster import ComModel, dempster_com, load_com_model
from .comnet import MlpParams, TrainConfig, comnet_forward, comnet_train, loso_splits
from .stability import (
    ChannelSelection,
    StabilityFrame,
    StabilitySeries,
    TakeStreams,
    com_to_bos,
    com_to_cop,
    compute_series,
    lowpass_trend,
)
from .evaluation import (
    CorrelationResult,
    ErrorStats,
    combinatorial_study,
    error_stats,
    pearson,
    threshold_sweep,
)
from .synth import (
    NoiseSpec,
    SynthRig,
    SynthTake,
    default_rig,
    generate_take,
    noise_model,
    streams_from_take,
)

__version__ = "0.1.0"
