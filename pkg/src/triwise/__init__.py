"""Kernel-embedding tests for three-variable interaction and total independence."""

from .gram import GramMatrix, center, row_sums, sum_all, sum_hadamard2, sum_hadamard3
from .inference import (
    CompositeResult,
    PermutationScheme,
    TestResult,
    build_grams,
    factorization_test,
    holm_bonferroni,
    permutation_test,
    vstructure_detect,
)
from .kernels import KernelSpec, equivalent_shift, gram, median_heuristic
from .stats import (
    HypothesisKind,
    InnerProductTable3,
    Measure,
    bias_estimate,
    hsic_v,
    hypothesis_v,
    incomplete_lancaster_v,
    inner_products_3var,
    lancaster_v,
    three_way_cov_empirical,
    total_indep3_v,
    total_indep_d_v,
)
from .synthetic import (
    DiscreteJoint,
    Sample,
    counterexample_table,
    gen_counterexample,
    gen_dataset_a,
    gen_dataset_b,
    gen_null,
    population_norm_discrete,
)

__version__ = "0.1.0"

__all__ = [
    "CompositeResult",
    "DiscreteJoint",
    "GramMatrix",
    "HypothesisKind",
    "InnerProductTable3",
    "KernelSpec",
    "Measure",
    "PermutationScheme",
    "Sample",
    "TestResult",
    "bias_estimate",
    "build_grams",
    "center",
    "counterexample_table",
    "equivalent_shift",
    "factorization_test",
    "gen_counterexample",
    "gen_dataset_a",
    "gen_dataset_b",
    "gen_null",
    "gram",
    "holm_bonferroni",
    "hsic_v",
    "hypothesis_v",
    "incomplete_lancaster_v",
    "inner_products_3var",
    "lancaster_v",
    "median_heuristic",
    "permutation_test",
    "population_norm_discrete",
    "row_sums",
    "sum_all",
    "sum_hadamard2",
    "sum_hadamard3",
    "three_way_cov_empirical",
    "total_indep3_v",
    "total_indep_d_v",
    "vstructure_detect",
]
