"""Usability gating and spectral modeling for multichannel measurement data.

The workflow: check that a record is persistently exciting at a chosen
embedding order, check that its past Granger-causes its future, then fit a
rank-truncated spectral model of the embedded dynamics and report stability,
conditioning, and prediction error.
"""

from .numerics import (
    RankPolicy,
    SvdTruncation,
    chi2_sf,
    condition_number,
    frobenius_norm,
    numeric_rank,
    pinv,
    svd_truncate,
)
from .embedding import (
    HankelPair,
    PeVerdict,
    TimeSeries,
    build_hankel,
    check_pe,
    load_csv,
    pe_length_bound,
    save_csv,
)
from .dmd import (
    DmdModel,
    SpectrumReport,
    fit_dmd,
    fit_residual,
    forecast,
    model_from_dict,
    model_to_dict,
    predict,
    reconstruct,
    spectrum_report,
)
from .var import (
    OrderSelection,
    StabilityCheck,
    VarModel,
    check_var_stability,
    companion_matrix,
    fit_var,
    residuals,
    select_order,
)
from .granger import (
    CausalityMatrix,
    GciResult,
    WaldResult,
    causality_matrix,
    gci,
    gct_pair,
    wald_test,
)
from .synth import (
    CausalGraphSpec,
    CoherencySpec,
    fig_three_channel_graph,
    gen_coherency,
    gen_linear_system,
    gen_stable_operator,
    gen_var,
)
from .pipeline import (
    AnalysisReport,
    SweepReport,
    ValidationReport,
    analyze,
    rmse,
    split_series,
    sweep,
    validate,
)

__version__ = "0.1.0"
