"""Nonlinear dependence analysis of gridded time series."""

from ._core import (
    CalibrationCurve,
    NodeMeta,
    NonlindepError,
    amplitude_spectrum,
    analyze,
    build_calibration,
    condensed_index,
    equiquantal_bins,
    extra_normal,
    ft_surrogate,
    gaussian_mi,
    load_calibration,
    load_pair_matrix,
    mutual_information,
    pairwise,
    pearson,
    preprocess,
    significance_threshold,
    synth,
)

__all__ = [
    "CalibrationCurve",
    "NodeMeta",
    "NonlindepError",
    "amplitude_spectrum",
    "analyze",
    "build_calibration",
    "condensed_index",
    "equiquantal_bins",
    "extra_normal",
    "ft_surrogate",
    "gaussian_mi",
    "load_calibration",
    "load_pair_matrix",
    "mutual_information",
    "pairwise",
    "pearson",
    "preprocess",
    "significance_threshold",
    "synth",
]
