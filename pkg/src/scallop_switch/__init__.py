"""Two-hinge scallop swimmer whose surrounding fluid switches between a
viscous and an ideal regime according to the valve's angular velocity."""

from .errors import (
    CoherenceError,
    DomainError,
    InfeasibleError,
    MissingHintError,
    RegularityError,
    ScallopError,
    ValidationError,
)
from .model import (
    THETA_MARGIN,
    Regime,
    RegularityWarning,
    ScallopParams,
    State,
    f_primitive,
    gap,
    gap_derivative,
    v_ideal,
    v_viscous,
    velocity,
)
from .switching import Fixed, Magnitude, Sign, SwitchEvent, Thermostat, find_switch_times, initial_regime
from .control import (
    ControlSignal,
    FourierControl,
    NodeConstraints,
    build_global_polynomial,
    build_piecewise_constant,
    build_smooth_control,
    validate_against_rule,
)
from .simulate import StrokeCase, Trajectory, propagate_exact, propagate_numeric, skeleton_displacement, stroke_displacement
from .synthesize import (
    StrokePlan,
    admissible_ordering,
    plan_displacement,
    plan_stroke,
    plan_transfer,
    reachable_radius,
    realize_plan,
    solve_four_angles,
    solve_single_angle,
    solve_symmetric_pair,
)

__version__ = "0.1.0"
