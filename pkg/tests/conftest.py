import struct

import numpy as np
import pytest
import torch

from sagvae.autodiff import DTYPE
from sagvae.model import build_model
from sagvae.models.config import DecoderConfig, EncoderConfig, ModelConfig
from sagvae.types import Activation, LatentMode


def small_model_config(
        n: int = 5,
        d: int = 3,
        latent_mode: LatentMode = LatentMode.DIMENSION_WISE,
        zero_init_heads: bool = True,
        use_graph: bool = True,
        output_activation: Activation = Activation.SIGMOID,
) -> ModelConfig:
    """그래디언트 검증과 빠른 학습 테스트용 작은 모델 설정"""
    return ModelConfig(
        encoder=EncoderConfig(
            latent_mode=latent_mode,
            n=n,
            d=d,
            hidden_widths=[6],
            latent_width=4,
            latent_dim=2,
            edge_hidden_widths=[6],
            zero_init_heads=zero_init_heads,
        ),
        decoder=DecoderConfig(layer_widths=[4, d], output_activation=output_activation),
        use_graph=use_graph,
    )


@pytest.fixture
def small_config() -> ModelConfig:
    return small_model_config()


@pytest.fixture
def small_model(small_config):
    return build_model(small_config, seed=0)


@pytest.fixture
def small_batch() -> torch.Tensor:
    """[6, 5·3] 범위 (0, 1)의 입력 배치"""
    g = torch.Generator().manual_seed(1)
    return torch.rand(6, 15, generator=g, dtype=DTYPE) * 0.8 + 0.1


def write_idx(path, magic: int, dims: tuple[int, ...], payload: bytes) -> None:
    """로더와 독립적으로 IDX 파일을 기록하는 테스트 헬퍼"""
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for size in dims:
            f.write(struct.pack(">I", size))
        f.write(payload)


@pytest.fixture
def idx_fixture(tmp_path):
    """3×3 이미지 4장과 레이블 (0, 1, 2, 1)"""
    pixels = np.array([
        [0, 255, 0, 255, 0, 255, 0, 255, 0],
        [10, 20, 30, 40, 50, 60, 70, 80, 90],
        [255] * 9,
        [0] * 9,
    ], dtype=np.uint8)
    labels = np.array([0, 1, 2, 1], dtype=np.uint8)
    images_path = tmp_path / "images.idx"
    labels_path = tmp_path / "labels.idx"
    write_idx(images_path, 0x00000803, (4, 3, 3), pixels.tobytes())
    write_idx(labels_path, 0x00000801, (4,), labels.tobytes())
    return images_path, labels_path, pixels, labels
