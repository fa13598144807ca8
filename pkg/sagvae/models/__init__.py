from .config import (
    DatasetConfig,
    DecoderConfig,
    EncoderConfig,
    ModelConfig,
    RunConfig,
    TrainConfig,
    load_run_config,
)
