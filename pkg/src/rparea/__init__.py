"""rparea: how much behaviour a revealed-preference test can actually reject.

Tools for GARP and Afriat-LP consistency checking, Monte Carlo estimation of
the rational-choice area over uniform budget shares, the closed-form
exponential bounds that drive it to one in high dimensions, and simulators for
separability restrictions and experimental budget designs.
"""

__version__ = "0.1.0"

from .afriat import (
    AfriatSystem,
    GroupedLpWitness,
    LpWitness,
    NegativeCycleError,
    additive_separability_feasible,
    lemma5_potentials,
    solve_afriat,
    verify_witness,
)
from .bounds import (
    BoundParams,
    CycleCertificate,
    carli_cycle_check,
    certify_bounds,
    check_A1,
    check_A2,
    check_A2prime,
    concentration_bound,
    edge_probability_bound,
    theorem1_area_bound,
    theorem2_area_bound,
)
from .dataset import (
    Dataset,
    DatasetError,
    DatasetFormatError,
    PartitionSpec,
    PriceRatioTensor,
    carli_index,
    expenditure_matrix,
    normalize_prices,
    price_ratios,
    read_csv,
    read_dataset,
    read_json,
    shares_to_quantities,
    write_csv,
    write_json,
)
from .designs import ChoiConfig, SmpConfig, choi_design, smp_design
from .estimator import (
    AreaEstimate,
    EstimatorConfig,
    area_curve,
    estimate_area,
    estimate_area_fixed_prices,
    estimate_design_area,
    estimate_separability_area,
)
from .garp import (
    GarpVerdict,
    RPGraph,
    build_graph,
    check_garp,
    directed_cycles,
    enumerate_cycles,
    has_directed_cycle,
)
from .sampling import PriceDistribution, RngStream, sample_prices, sample_simplex
from .simplex import SimplexStallError

__all__ = [
    "AfriatSystem",
    "AreaEstimate",
    "BoundParams",
    "ChoiConfig",
    "CycleCertificate",
    "Dataset",
    "DatasetError",
    "DatasetFormatError",
    "EstimatorConfig",
    "GarpVerdict",
    "GroupedLpWitness",
    "LpWitness",
    "NegativeCycleError",
    "PartitionSpec",
    "PriceDistribution",
    "PriceRatioTensor",
    "RPGraph",
    "RngStream",
    "SimplexStallError",
    "SmpConfig",
    "additive_separability_feasible",
    "area_curve",
    "carli_cycle_check",
    "carli_index",
    "certify_bounds",
    "check_A1",
    "check_A2",
    "check_A2prime",
    "check_garp",
    "choi_design",
    "concentration_bound",
    "directed_cycles",
    "edge_probability_bound",
    "enumerate_cycles",
    "estimate_area",
    "estimate_area_fixed_prices",
    "estimate_design_area",
    "estimate_separability_area",
    "expenditure_matrix",
    "has_directed_cycle",
    "lemma5_potentials",
    "normalize_prices",
    "price_ratios",
    "read_csv",
    "read_dataset",
    "read_json",
    "sample_prices",
    "sample_simplex",
    "shares_to_quantities",
    "smp_design",
    "solve_afriat",
    "theorem1_area_bound",
    "theorem2_area_bound",
    "verify_witness",
    "write_csv",
    "write_json",
]
