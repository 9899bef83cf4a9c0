"""Cooperative trajectory planning engine.

A human agent and an automation agent each form a trajectory desire;
pluggable arbitration policies fuse the desires into one executed
reference, including an emancipated agreement process; a coupled-plant
simulator quantifies the action-level control conflict that
trajectory-level agreement removes.
"""

from .agreement import (
    AgreementConfig,
    BestResponseState,
    IBRResult,
    NegotiationSession,
    OfferPolicy,
    Theta,
    automation_offer_policy,
    best_response,
    human_offer_policy,
    negotiate,
    run_ibr,
    verify_agreement,
)
from .arbitration import (
    AdditiveControlled,
    AdditiveDeforming,
    Agreement,
    FusionResult,
    LeaderFollower,
    SafetyEnvelope,
    SigmaSource,
    Superimposed,
    arbitrate,
    check_safety,
)
from .errors import CompatibilityError, CoopTrajError, SimulationDiverged
from .execution import Controller, ExecutionTrace, Plant, conflict_report, simulate
from .harness import RunReport, run_matrix, run_scenario
from .human import (
    DesireEstimator,
    EstimatedDesire,
    HumanProfile,
    Observation,
    deformation_desire,
    estimate_desire,
    human_desire,
)
from .planner import CostSpec, PlannerOutput, evaluate_cost, plan
from .scenario import Scenario, SimSettings, load_demo
from .trajectory import (
    BoundaryState,
    DisplacementDesire,
    QuinticSegment,
    Trajectory,
    TrajectoryMetric,
    constant_trajectory,
    distance,
    quintic_point_to_point,
    resample,
)

__version__ = "0.1.0"
