"""Statistical models of face pareidolia and tools to measure it.

Submodules
----------
stimuli         Gaussian-envelope noise images and their radial spectra.
gaussian_model  Closed-form mode-matching model and width sweeps.
feature_model   Poisson feature model and its analytic peak rate.
montecarlo      Sampling oracles for both models; toy template detector.
evalkit         Annotation I/O, average precision, dataset statistics,
                average faces.
psycho          Trial cleaning, face-count curves and the model fit.
"""

__version__ = "0.1.0"

from .curve import Curve, peak_of_curve  # noqa: E402

__all__ = ["Curve", "peak_of_curve", "__version__"]
