"""seedmine: pseudo-label seed generation and refinement for weakly
supervised segmentation at desk scale."""

from .errors import (
    ContractError,
    DivergenceError,
    FormatError,
    MetricError,
    ParameterError,
    SeedmineError,
    ShapeError,
)
from .maps import (
    IGNORE,
    AttentionStack,
    ImageRecord,
    dilate,
    median,
    normalize,
    percentile_nearest_rank,
)
from .camgen import accumulate, snapshot_series
from .grunit import FeatureGrid, GrParams, classify, gr_backward, gr_forward, mlsm_loss, train_toy
from .metrics import confusion, miou, pseudo_label_rates
from .nsrm import expand_prediction, mask_label, nsrm_apply, object_mask, split_simple_complex
from .pom import PomThresholds, compute_thresholds, mine
from .seedgen import background_extract
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
