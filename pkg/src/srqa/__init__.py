"""srqa: no-reference quality assessment for single-image super-resolution.

The metric extracts three statistical feature families from a grayscale
image (local DCT statistics, normalized wavelet-band statistics, patch
spectrum statistics) and maps the 138-dimensional descriptor to a
perceptual score in [0, 10] with a two-stage regression model.
"""

from srqa.features import FEATURE_DIM, FEATURE_BLOCKS, extract_features
from srqa.regress.model import TwoStageModel, load_model, save_model, train_two_stage

__version__ = "0.1.0"

__all__ = [
    "FEATURE_DIM",
    "FEATURE_BLOCKS",
    "extract_features",
    "TwoStageModel",
    "train_two_stage",
    "save_model",
    "load_model",
    "__version__",
]
