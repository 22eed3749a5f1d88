"""genserver: a reference generation sidecar serving per-class neural
language models over the textforge wire protocol."""

from .model import TinyCausalLM, finetune, init_base, load_model_dir
from .server import ServerConfig, build_server, serve

__version__ = "0.1.0"

__all__ = ["TinyCausalLM", "ServerConfig", "build_server", "serve",
           "finetune", "init_base", "load_model_dir"]
