"""Photon-limited single-qubit data reuploading classifier."""

__version__ = "0.1.0"

from .data import (  # noqa: E402
    Boundary,
    Dataset,
    LabeledSample,
    accuracy,
    generate_dataset,
    label_point,
    load_dataset,
    save_dataset,
)
from .model import (  # noqa: E402
    Encoding,
    InputVector,
    Label,
    ModelParams,
    classify,
    forward,
    forward_batch,
    forward_with_override,
    layer_phase,
    load_model,
    save_model,
)
from .sampling import RandomSource, ShotConfig, ShotMode, poisson_draw, sample_probability_estimate  # noqa: E402
from .sinusoid import SinusoidCoeffs, eval_sinusoid, fit_three_phase  # noqa: E402
from .trainer import (  # noqa: E402
    Init,
    TrainConfig,
    TrainReport,
    estimate_cost,
    estimate_cost_variance,
    init_params,
    smo_layer_update,
    train,
)
