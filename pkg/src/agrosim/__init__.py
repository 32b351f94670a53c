"""DE/CT co-simulation workbench for automated agricultural vehicles.

Vehicle plant templates integrated in continuous time, sampled digital
controllers (PI with filtering and learning-feedforward variants), a
fixed-step co-simulation engine binding the two, boustrophedon coverage
planning, a scenario runner, and an interactive simulation service.
"""

from .controllers import (
    BiquadFilter,
    BSplineNetwork,
    InvalidCutoff,
    PIConfig,
    PIState,
    PurePursuitConfig,
    RouteExhausted,
    RunningAverage,
    SpeedController,
    SpeedVariant,
    bspline_basis,
    butterworth_design,
    lffc_step,
    pi_step,
    pure_pursuit_step,
    pursuit_curvature,
)
from .cosim import (
    CoSimContract,
    CoSimEngine,
    DirectionConflict,
    DuplicateName,
    Ports,
    SyncConfig,
    TraceRecord,
    UnboundVariable,
    validate_contract,
)
from .planner import (
    CoveragePlan,
    DegeneratePolygon,
    FieldPolygon,
    coverage_ratio,
    lookahead_point,
    plan_coverage,
)
from .scenario import (
    Assembly,
    ParseError,
    RunSummary,
    ScenarioConfig,
    ValidationError,
    assemble,
    compare_controllers,
    load_scenario,
    run_scenario,
)
from .vehicles import (
    DiffDriveModel,
    DiffDriveParams,
    EncoderConfig,
    NonFiniteState,
    SteeredModel,
    SteeredParams,
    VehicleState,
    encoder_sample,
    rk4_step,
)

__version__ = "0.1.0"
