"""Robust clusterwise linear regression with trimmed, constrained cluster-weighted models."""

from .core import (AllStartsFailedError, BadConfigError, CWRMError, Dataset, FitConfig,
                   ModelParams, NonFiniteError, Responsibilities, TooFewPointsError,
                   TrimmedFit, map_classify, retained_count, validate_dataset)
from .em import fit, fit_once, trimmed_loglik
from .baselines import MixRegParams, fit_trimmed_mixreg

__version__ = "0.1.0"

__all__ = ["AllStartsFailedError", "BadConfigError", "CWRMError", "Dataset", "FitConfig",
           "MixRegParams", "ModelParams", "NonFiniteError", "Responsibilities",
           "TooFewPointsError", "TrimmedFit", "fit", "fit_once", "fit_trimmed_mixreg",
           "map_classify", "retained_count", "trimmed_loglik", "validate_dataset"]
