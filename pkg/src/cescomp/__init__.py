"""Composing crowdsourced wireless-energy services.

Models providers' energy offers and consumers' spatio-temporal queries,
filters candidates through composability rules, and selects partial-service
compositions via per-chunk knapsack optimization, a chunk-merging heuristic,
greedy selection, two baselines, and a brute-force oracle.
"""

from .model import (
    CompositionPlan,
    EnergyQuery,
    EnergyService,
    GeoPoint,
    PartialService,
    SoCSeries,
    TimeInterval,
    make_service,
    service_end_time,
    validate_service,
)
from .qos import (
    CoordinationCosts,
    TsrParams,
    UsageTrace,
    approximate_entropy,
    compute_tsr,
    coordination_loss,
    deliverable_energy,
    provision_consistency,
)
from .stindex import STBox, STIndex, build_index, select_candidates
from .composability import (
    CompatibilityVerdict,
    eligible,
    intensity_compatible,
    spatially_composable,
    split_query,
    temporally_composable,
)
from .chunking import Chunk, chunk_query, smooth_thin_chunks
from .composers import (
    COMPOSERS,
    GAConfig,
    KnapsackItem,
    Preference,
    compose_ga_baseline,
    compose_greedy,
    compose_heuristic,
    compose_knapsack,
    compose_oracle,
    compose_priority_baseline,
    validate_plan,
)
from .workload import ScenarioConfig, generate_scenario, load_scenario, save_scenario

__version__ = "0.1.0"
