"""Two-qubit quantum Otto engine under local and global master equations."""

from .core import EngineParams, ParameterError
from .thermo import Regime

__version__ = "0.1.0"

__all__ = ["EngineParams", "ParameterError", "Regime", "__version__"]
