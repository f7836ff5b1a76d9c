"""Masked soft actor-critic trainer for the cfuav environment protocol."""

__version__ = "0.1.0"

from .client import EnvClient, ProtocolError
from .config import TrainerConfig, load_trainer_config, load_trainer_config_path
from .trainer import MaskedSacTrainer, load_policy

__all__ = ["EnvClient", "ProtocolError", "TrainerConfig", "MaskedSacTrainer",
           "load_trainer_config", "load_trainer_config_path", "load_policy",
           "__version__"]
