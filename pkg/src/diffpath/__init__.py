"""Restricted-Fourier-path numerics: velocity series, oscillator factor, Casimir toy model."""

from .paths import FourierPath, ModelParams
from .special import ConvergenceError, SeriesValue

__all__ = ["ModelParams", "FourierPath", "SeriesValue", "ConvergenceError"]
__version__ = "0.1.0"
