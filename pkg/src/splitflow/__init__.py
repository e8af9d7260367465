"""Order-splitting flow simulation and splitting-trader inference.

Simulates markets where a fixed pool of traders splits power-law sized
metaorders into unit trades, producing long-range correlated order signs,
and provides the reverse path: from an observed sign series back to the
correlation law and the number of splitting traders, with trader-level
clustering and metaorder tail fitting along the way.
"""

from .errors import (
    CellUnusable,
    DegenerateSample,
    EmptyDatapoint,
    EmptySample,
    EmptyTrader,
    FitDiverged,
    InsufficientData,
    InvalidExponent,
    InvalidPrefactor,
    LagOutOfRange,
    NoLrcDetected,
    NonPositiveValue,
    NoPowerLawRegion,
    NothingToPlot,
    OutOfCalibration,
    OutsideLmfRegime,
    ParseError,
    SeriesTooShort,
    SplitflowError,
)
from .types import MarketDatapoint, OrderEvent, SignSeries, TraderLabel
from .simulate import (
    MetaorderLog,
    SimConfig,
    SimTruth,
    sample_metaorder_length,
    simulate,
    theoretical_prefactor,
)
from .correlation import (
    AcfCurve,
    BiasTable,
    BiasTableConfig,
    BinnedCurve,
    DebiasResult,
    FitRange,
    FitRangeConfig,
    PowerLawFit,
    PsdConfig,
    PsdCurve,
    PsdFit,
    build_bias_table,
    debias_gamma,
    fit_psd_gamma,
    fit_relative_nlls,
    load_bias_table,
    load_or_build_bias_table,
    log_bin,
    psd_estimate,
    refit_prefactor,
    sample_acf,
    save_bias_table,
    select_fit_range,
)
from .clustering import (
    ClusteringConfig,
    ClusteringSummary,
    MetaorderRecord,
    binomial_tail_p,
    binomial_test_trader,
    classify_traders,
    continuation_count,
    market_clustering_summary,
    reconstruct_metaorders,
    segment_metaorders,
)
from .powerlaw import TailFit, clauset_fit, discrete_mle, empirical_ccdf
from .inference import (
    MicroEstimate,
    alpha_from_gamma,
    estimate_from_acf,
    estimate_from_psd,
    lower_bound_check,
    n_st_lmf,
)
from .io import (
    IngestionConfig,
    read_order_csv,
    read_truth_sidecar,
    truth_path_for,
    write_order_csv,
    write_truth_sidecar,
)
from .pipeline import (
    DatapointResult,
    PipelineConfig,
    analyze_datapoint,
    run_pipeline,
    scatter_rows,
    summary_stats,
    write_scatter_csv,
)

__version__ = "0.1.0"
