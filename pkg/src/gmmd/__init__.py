"""Generalized maximum mean discrepancy (GMMD) k-sample testing."""
__version__ = "0.1.0"

from ._errors import InputError, NumericError
from .kernel import KernelSpec, center_gram, eval_kernel, gram, median_heuristic
from .estimator import (
    GroupedSamples,
    PairwiseMMDMatrix,
    TestStatistic,
    gmmd_statistic,
    mmd2_unbiased,
    pairwise_mmd,
)
from .calibration import (
    CalibrationResult,
    LimitLawConfig,
    Spectrum,
    estimate_spectrum,
    permutation_pvalue,
    simulate_limit_law,
    spectral_pvalue,
    subsampling_pvalue,
)
from .baselines import BaselineResult, anderson_darling_k, kruskal_wallis
from .samplers import DistributionSpec, case_config, sample
from .harness import (
    ExperimentConfig,
    PowerCurve,
    emit_results,
    parse_config,
    read_results,
    run_power_experiment,
    run_single_test,
)
