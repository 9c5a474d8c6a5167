"""Numerical toolkit for the spectral structure of the Rosenblatt process."""
from .core import (TOOLKIT_VERSION as __version__, Hurst, LocalTimeEstimate, PathSample,
                   RunManifest, Spectrum, StepProfile, make_rng_streams)

__all__ = ["Hurst", "StepProfile", "Spectrum", "PathSample", "LocalTimeEstimate",
           "RunManifest", "make_rng_streams", "__version__"]
