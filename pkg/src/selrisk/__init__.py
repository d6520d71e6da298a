"""Selection risk sets of set-valued portfolios on finite probability spaces."""
from .closed_forms import (
    b_rho_avar,
    ikappa_avar_sampled,
    fixed_point_riskset,
    ht_closed_form,
    ht_essinf_mixed,
    ht_expectation_mixed,
    ht_identical,
    ikappa_avar_riskset,
    ikappa_bounds,
    three_point_riskset,
    two_point_riskset,
)
from .lowerset_geom import (
    LowerSet,
    RiskSetResult,
    UpperSet,
    boundary_curve,
    convex_hull,
    curve_sup_distance,
    fixed_points,
    h_t,
    i_kappa,
    intersect,
    lower_from_generators,
    minkowski,
    negate,
    translate,
    union,
)
from .prob_core import ProbSpace, RandomVariable, RandomVector, make_space, uniform_space
from .scalar_risk import (
    AVaR,
    Distortion,
    DistortionFunction,
    EssInf,
    NegExpectation,
    ScenarioMax,
    VectorRiskSpec,
    risk,
    vector_risk,
)
from .scenario_io import load_scenario, parse_scenario, scenario_doc
from .selection_engine import (
    Custom,
    EngineParams,
    FiniteTransfers,
    FixedCost,
    HalfSpaceTransfer,
    Scenario,
    convexity_defect,
    is_acceptable,
    is_risk_convex,
    rho_Z,
    selection_expectation,
    selection_risk,
)

__version__ = "0.1.0"
