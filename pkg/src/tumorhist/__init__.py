"""Histogram-based whole-tumor detection in Flair brain MRI.

The pipeline builds gray-level x slice histograms of a skull-stripped scan,
compares the two brain halves, attenuates healthy gray levels with a
case-adaptive modulation function, crops to the tumor slab along each axis
in turn, and thresholds the remaining bounding box at a quantile of the
predicted tumor gray distribution.
"""

__version__ = "0.1.0"

from .errors import (BadMagicError, DegenerateInputError, InvalidArgumentError,
                     NiftiParseError, NoSignalError, NotThreeDimensionalError,
                     StageError, TumorHistError, UnsupportedDatatypeError)
from .volume import (BinaryMask3, BrainMask, NormalizedVolume, Volume3, brain_region,
                     crop_axis, downsample, normalize_gray, preprocess, split_halves)
from .histogram import (CDFCurve, Histogram1D, Histogram2D, LocationalProfile,
                        asymmetry_map, cdf_from_h1d, collapse_gray, collapse_slice,
                        histogram2d)
from .modulation import (ModulationFunction, ModulationParams, apply_modulation,
                         build_modulation, identify_tumor_free_half, step_modulation)
from .prediction import (CropRange, PipelineConfig, PredictionResult, coarse_step,
                         find_tumor_slice_range, run_pipeline)
from .detection import DetectionParams, detect
from .metrics import (CohortSummary, ConfusionCounts, confusion_metrics, similarity_scores,
                      ssim, ssim2d, summarize)
from .phantom import PhantomSpec, generate_phantom, mirror_volume, standard_suite
