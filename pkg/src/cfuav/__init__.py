"""cfuav: cell-free UAV downlink clustering and power-allocation simulator."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config, load_config_path, eps_max_at
from .environment import Environment

__all__ = ["ScenarioConfig", "load_config", "load_config_path", "eps_max_at",
           "Environment", "__version__"]
