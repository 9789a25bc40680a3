"""Ordered pivotal sampling versus multinomial sampling: samplers, exact designs, eigenvalue efficiency criterion."""

from .designs import (
    MultiSample,
    OrderedSample,
    RandomStream,
    sample_multinomial,
    sample_ops,
    sample_randomized_ops,
    sample_two_stage,
)
from .estimators import StudyVariable, hh_estimate, ht_estimate, make_study_variable, vhh_estimate
from .exact import (
    DesignDistribution,
    InclusionMatrix,
    enumerate_multinomial,
    enumerate_ops,
    enumerate_randomized_ops,
    enumerate_two_stage,
    exact_variance,
    expected_vhh,
    inclusion_matrix,
    multinomial_variance_formula,
    prop2_recursion_check,
    probability_tree,
    within_cluster_term,
)
from .population import (
    ClusteredPopulation,
    CrossBorderInfo,
    Population,
    build_clustered,
    cross_border,
    make_population,
)
from .spectral import gabler_matrix, gabler_summary, lambda2, worst_case_variable

__version__ = "0.1.0"
