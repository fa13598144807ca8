from .benchmark import __name__ as benchmark_module_name
from .train import __name__ as train_module_name

__all__ = [
    "benchmark_module_name",
    "train_module_name",
]
