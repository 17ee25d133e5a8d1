"""Outbreak segmentation, baseline forecasting and probabilistic scoring."""

from ._epiwave import *  # noqa: F401,F403
from ._epiwave import __doc__  # noqa: F401

__version__ = "0.1.0"
