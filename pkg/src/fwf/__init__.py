"""Functional Wiener filter toolkit.

Closed-form correntropy-domain filtering with fixed-point and
local-model pre-imaging, linear Wiener / KLMS / KRLS baselines, and a
benchmark harness for chaotic time-series prediction experiments.
"""

from .backend import backend_name
from .correntropy import (
    CorrentropyVector,
    CrossCorrentropyVector,
    KernelConfig,
    autocorrentropy,
    center_correntropy,
    cross_correntropy,
    density_along_bisector,
    gaussian,
)
from .fwf_core import (
    CorrentropyMatrix,
    FwfModel,
    RegularizationRecord,
    build_matrix,
    evaluate_functional,
    fit,
    fit_series,
    regularize,
)
from .preimage import (
    FP,
    LM,
    FixedPointConfig,
    LocalModelConfig,
    LocalModelIndex,
    build_local_index,
    fixed_point_preimage,
    local_model_predict,
    predict_series,
)
from .harness import (
    EvalReport,
    ExperimentConfig,
    FilterSpec,
    mse,
    run_cv,
    run_noise_study,
    run_scaling_study,
    scan_hyperparameters,
)
from .modelio import load_model, save_model
from .signal import (
    SupervisedDataset,
    TimeSeries,
    add_gaussian_noise,
    embed,
    generate_lorenz_x,
    generate_mackey_glass,
    kfold_split,
    rescale,
    standardize,
)

__version__ = "0.1.0"
