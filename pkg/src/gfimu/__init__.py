"""Angular velocity from a non-coplanar array of triaxial accelerometers."""

from .attitude import AttitudeSolution, MarkerSet, Quaternion, ground_truth_series, quest
from .calibration import CalibrationParams, apply_calibration, solve_calibration
from .ekf import EkfState, FilterConfig, filter_arrays, make_filter, run_filter
from .geometry import SensorArrayGeometry, analyze_geometry, noise_covariance, noise_gain_matrices
from .simulator import (
    AccelFrame,
    SimulationConfig,
    cube_placement,
    simulate,
    sinusoidal_trajectory,
    static_trajectory,
)

__version__ = "0.1.0"
