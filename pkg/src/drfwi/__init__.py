"""Full waveform inversion with neural-network-reparameterized velocity models."""

from .errors import (
    CheckpointError,
    ConfigurationError,
    DrfwiError,
    GeometryError,
    MetricsError,
    ModelError,
    SimulationError,
    TrainingError,
)
from .model import (
    CoordinateGrid,
    GridField,
    VelocityModel,
    constant_model,
    downsample,
    gaussian_smooth,
    linear_model,
    load_model,
    make_coordinate_grid,
    save_model,
    synthetic_marmousi,
)
from .wavesim import (
    AcquisitionGeometry,
    ShotRecord,
    SimConfig,
    SourceWavelet,
    data_misfit,
    forward_all_shots,
    load_shot_record,
    ricker,
    save_shot_record,
    simulate,
    surface_line_geometry,
)
from .adjoint import VelocityGradient, adjoint_apply, linearized_forward, misfit_gradient
from .siren import (
    SirenNetwork,
    init_network,
    load_checkpoint,
    save_checkpoint,
)
from .reparam import (
    VELOCITY_FLOOR,
    Reparameterization,
    denormalize,
    denormalize_backward,
    denormalize_with_mask,
    full_parameter_gradient,
)
from .optimize import (
    TRAINING_MODES,
    AdamState,
    InversionReport,
    NetworkConfig,
    StageCurves,
    SweepResult,
    SweepRow,
    TrainingConfig,
    adam_step,
    pretrain,
    run_fwi,
    run_pipeline,
    sweep_pretraining,
)
from .diagnostics import (
    LayerSimilarityRow,
    MetricsBlock,
    SimilarityReport,
    SpectrumProfile,
    compute_metrics,
    default_profile_columns,
    parameter_similarity,
    similarity_report,
    ssim,
    target_decomposition,
    wavenumber_spectrum,
)

__version__ = "0.1.0"
