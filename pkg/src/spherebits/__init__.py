"""Randomized sphere-to-bit hashing and entropy-ordering experiments.

The library binarizes sphere-valued variables with a rotation-randomized
checkerboard parity, estimates the resulting bit-disagreement rate as a
function of distance, and verifies that distance orderings carry over to
conditional-entropy orderings on simulated wiretap channels.
"""

from .binarize import (
    binarize_1d,
    checkerboard_parity,
    exact_xor_expectation_1d,
    f_bit,
    gamma,
)
from .entropy import (
    BinaryJoint2,
    BinaryJoint3,
    SecrecyAdvantageReport,
    binary_entropy,
    ck_advantage,
    conditional_entropy,
    crossover,
    wyner_check,
)
from .estimation import (
    ANGLE_PRODUCT,
    HAAR,
    IsotropyReport,
    OrderCheck,
    PhiCurve,
    PhiEstimate,
    estimate_phi,
    isotropy_test,
    lemma1_order_check,
    phi_curve,
    phi_oracle_2d,
)
from .geometry import (
    AngleTuple,
    HaarRotation,
    RotationPlan,
    SpherePoint,
    apply_rotation,
    pair_at_distance,
    plan_from_angles,
    point_at_distance,
    quad_norm,
    sample_angles,
    sample_haar_rotation,
    sample_sphere_point,
)
from .scenario import (
    ChannelConfig,
    EffectiveSampleSizeError,
    InequalityReport,
    OpponentStrategy,
    ScenarioReport,
    conditional_mean_estimator,
    generate_triple,
    inequality_I_check,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ANGLE_PRODUCT",
    "HAAR",
    "AngleTuple",
    "BinaryJoint2",
    "BinaryJoint3",
    "ChannelConfig",
    "EffectiveSampleSizeError",
    "HaarRotation",
    "InequalityReport",
    "IsotropyReport",
    "OpponentStrategy",
    "OrderCheck",
    "PhiCurve",
    "PhiEstimate",
    "RotationPlan",
    "ScenarioReport",
    "SecrecyAdvantageReport",
    "SpherePoint",
    "apply_rotation",
    "binarize_1d",
    "binary_entropy",
    "checkerboard_parity",
    "ck_advantage",
    "conditional_entropy",
    "conditional_mean_estimator",
    "crossover",
    "estimate_phi",
    "exact_xor_expectation_1d",
    "f_bit",
    "gamma",
    "generate_triple",
    "inequality_I_check",
    "isotropy_test",
    "lemma1_order_check",
    "pair_at_distance",
    "phi_curve",
    "phi_oracle_2d",
    "plan_from_angles",
    "point_at_distance",
    "quad_norm",
    "run_scenario",
    "sample_angles",
    "sample_haar_rotation",
    "sample_sphere_point",
    "wyner_check",
]
