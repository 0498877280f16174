"""Twin-width of small graphs and trigraphs: exact search, kernels and approximations."""

from .graph import BLACK, RED, Trigraph
from .contraction import ContractionSequence, ContractionStep, replay

__all__ = ["BLACK", "RED", "Trigraph", "ContractionSequence", "ContractionStep", "replay"]
__version__ = "0.1.0"
