"""Heat spreader thermal simulation and measurement reduction."""

from .experiment import ExperimentRow, ExperimentSpec, calibrate_core_power, run_thought_experiment
from .metrology import (
    CalibrationCurve,
    CalibrationReference,
    ConductivityExperiment,
    ConductivityResult,
    Segment,
    SpreaderReadingSet,
    apply_calibration,
    comparative_conductivity,
    interchange_correct,
    spread_stats,
    two_point_calibration,
)
from .network import GridSpec, ThermalNetwork, assemble_network, conductance, rasterize_power
from .package import (
    Block,
    Floorplan,
    Layer,
    MaterialProps,
    PackageConfig,
    ParseError,
    PowerMap,
    ValidationError,
    default_package,
    make_grid_floorplan,
    parse_floorplan,
    serialize_floorplan,
)
from .reliability import MttfParams, mttf_em_ratio, mttf_sm_ratio, mttf_tc_ratio
from .solver import SolveReport, SolverError, TemperatureField, energy_balance, solve_steady, solve_transient

__version__ = "0.1.0"
