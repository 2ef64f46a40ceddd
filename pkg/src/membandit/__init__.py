"""Best-arm-identification search for memory organizations under variation.

The package splits into independent layers:

* :mod:`membandit.bandits`       fixed-budget identification policies;
* :mod:`membandit.designspace`   candidate architecture enumeration;
* :mod:`membandit.circuit`       delay/energy/cost model per variation draw;
* :mod:`membandit.environments`  stochastic reward adapters;
* :mod:`membandit.harness`       golden-arm baseline and accuracy sweeps;
* :mod:`membandit.cli`           command-line front end.
"""

from .bandits import (
    BanditStats,
    IncompleteExplorationError,
    InsufficientBudgetError,
    InvalidProblemError,
    RewardEnvironment,
    SRSchedule,
    log_bar,
    recommend,
    run_adaptive_ucbe,
    run_adaptive_ugape,
    run_successive_rejects,
    run_uniform,
    sr_schedule,
    ucbe_complexity,
    ucbe_score,
    ugape_index,
)
from .circuit import (
    CostWeights,
    DeviceParams,
    InfeasibleOperatingPointError,
    Normalizer,
    PerfMetrics,
    Technology,
    VariationSample,
    WireParams,
    access_time,
    access_time_breakdown,
    cost,
    dynamic_power,
    i_eff,
    ids_alpha_power,
    r_eff,
    update_normalizer,
)
from .config import ConfigError, ExperimentConfig, default_technology, load_config
from .designspace import (
    EmptyDesignSpaceError,
    EnumerationRanges,
    MemoryArchitecture,
    enumerate_architectures,
    validate_architecture,
)
from .environments import (
    InfeasibleSampleError,
    MemoryEnvironment,
    RecordingEnvironment,
    SyntheticEnvironment,
    nominal_normalizer,
    sample_variation,
)
from .harness import (
    AccuracyReport,
    CellResult,
    GoldenResult,
    derive_seed,
    export_report,
    golden_arm,
    run_experiment,
)

__version__ = "0.1.0"
