from pathlib import Path

import pytest
from pydantic import ValidationError

from bench.datasets import prepare_dataset
from core.constants import FASHION_MNIST_CLASSES, FASHION_MNIST_NOISE_PIXELS
from sagvae.errors import ConfigurationError
from sagvae.models.config import DatasetConfig, DecoderConfig, EncoderConfig, ModelConfig, TrainConfig, load_run_config
from sagvae.types import DatasetKind, DatasetSplit

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", ["karate.yaml", "fixture18.yaml", "mnist.yaml", "fashion_mnist.yaml"])
def test_bundled_run_configs_validate(name):
    run = load_run_config(CONFIG_DIR / name)
    assert run.model.decoder.layer_widths[-1] == run.model.encoder.d


def test_fashion_preset_keeps_clothing_shapes_and_fewer_noise_pixels():
    dataset = load_run_config(CONFIG_DIR / "fashion_mnist.yaml").dataset
    assert set(dataset.class_filter) == set(FASHION_MNIST_CLASSES) == {0, 1, 2, 3, 4, 6}
    assert dataset.noise_pixels == FASHION_MNIST_NOISE_PIXELS == 150


def test_last_decoder_width_must_match_features():
    with pytest.raises(ValidationError):
        ModelConfig(encoder=EncoderConfig(n=4, d=2), decoder=DecoderConfig(layer_widths=[4, 3]))


def test_output_activation_choices():
    with pytest.raises(ValidationError):
        DecoderConfig(layer_widths=[1], output_activation="tanh")
    assert DecoderConfig(layer_widths=[1]).attention_width_for(5) == 3


def test_train_config_bounds():
    with pytest.raises(ValidationError):
        TrainConfig(beta_a=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(prior_p=1.0)
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=-1e-3)


def test_encoder_config_derived_sizes():
    cfg = EncoderConfig(n=34, d=8)
    assert cfg.input_width == 272
    assert cfg.pair_count == 561
    with pytest.raises(ValidationError):
        EncoderConfig(n=3, hidden_widths=[0])


def test_prepare_karate_splits():
    data = prepare_dataset(DatasetConfig(kind=DatasetKind.KARATE, samples_per_pattern=5), seed=0)
    assert data.train.m == 20
    assert sorted(data.evaluation) == sorted([str(DatasetSplit.TRAIN), str(DatasetSplit.HELD_OUT)])


def test_prepare_graph_needs_features(tmp_path):
    with pytest.raises(ConfigurationError):
        prepare_dataset(DatasetConfig(kind=DatasetKind.GRAPH, path=tmp_path / "edges.csv"), seed=0)
    with pytest.raises(ConfigurationError):
        prepare_dataset(DatasetConfig(kind=DatasetKind.IMAGES), seed=0)
