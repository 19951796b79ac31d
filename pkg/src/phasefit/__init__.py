"""Phase-manifold estimation of periodic motion from sampled trajectories."""

__version__ = "0.1.0"

from .manifold import (  # noqa: E402
    Measure,
    Partition,
    Quadrature,
    chordal_distance,
    default_quadrature,
    fill_distance,
    geodesic_distance,
    integrate,
    make_partition,
    wrap_phase,
)
from .estimators import (  # noqa: E402
    KernelEstimate,
    PartitionEstimate,
    Samples,
    SingularSystemError,
    empirical_risk,
    estimate_approx_rate,
    fit_kernel,
    fit_partition,
    l2_error,
    l2_error_sq,
    project_l2,
)
from .synth import AnalyticCurve, NoiseModel, regressor_of, sample_dataset  # noqa: E402
from .gait import GaitSegmentation, Trajectory, phase_map, pool_strides  # noqa: E402
