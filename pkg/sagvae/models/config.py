"""SAG-VAE 설정 모델 - 인코더/디코더/학습/데이터셋 설정의 검증

YAML 실행 설정 파일과 CLI 인자로부터 만들어지는 Pydantic 설정 모델들을 정의합니다.
각 모델은 필드 단위 제약(gt, ge 등)과 교차 필드 검증으로 설정 불변식을 강제합니다.

SAG-VAE configuration models

Pydantic models built from YAML run configs and CLI flags. Field constraints and
cross-field validators enforce the configuration invariants.
"""

import math
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from sagvae.types import Activation, DatasetKind, LatentMode, Perturbation, ReconstructionLoss


class EncoderConfig(BaseModel):
    """추론 네트워크 φ1(Z), φ2(A) 설정

    Inference network settings for φ1 (Gaussian posterior over Z) and the shared
    φ2 trunk (edge logits and edge weights).

    Attributes:
        latent_mode (LatentMode): 데이터 포인트별 / 차원별 잠재 분포
                                  Data-point-wise or dimension-wise latents
        n (int): 노드(특징 차원) 수
                 Node / feature-dimension count
        d (int): 노드당 특징 폭
                 Per-node feature width
        hidden_widths (list[int]): φ1 은닉층 폭
                                   Hidden widths of φ1
        latent_width (int): 데이터 포인트별 모드의 잠재 벡터 크기
                            Latent size in data-point-wise mode
        latent_dim (int): 차원별 모드에서 노드당 잠재 폭 d_z
                          Per-node latent width d_z in dimension-wise mode
        edge_hidden_widths (list[int]): φ2 공유 트렁크 은닉층 폭
                                        Hidden widths of the shared φ2 trunk
        zero_init_heads (bool): 출력 헤드를 0으로 초기화할지 여부
                                Zero-initialize the output heads
    """
    latent_mode: LatentMode = Field(default=LatentMode.DIMENSION_WISE, title="잠재 분포 구성 방식")
    n: int = Field(title="노드 수", gt=0)
    d: int = Field(default=1, title="노드당 특징 폭", gt=0)
    hidden_widths: list[int] = Field(default_factory=lambda: [256], title="φ1 은닉층 폭")
    latent_width: int = Field(default=16, title="데이터 포인트별 잠재 크기", gt=0)
    latent_dim: int = Field(default=4, title="차원별 잠재 폭 d_z", gt=0)
    edge_hidden_widths: list[int] = Field(default_factory=lambda: [256, 256], title="φ2 트렁크 은닉층 폭")
    zero_init_heads: bool = Field(default=True, title="출력 헤드 0 초기화")

    @field_validator("hidden_widths", "edge_hidden_widths")
    @classmethod
    def _positive_widths(cls, widths: list[int]) -> list[int]:
        if any(w <= 0 for w in widths):
            raise ValueError("layer widths must be positive")
        return widths

    @property
    def input_width(self) -> int:
        return self.n * self.d

    @property
    def pair_count(self) -> int:
        """상삼각 엣지 쌍 개수 (n²−n)/2 / number of strict upper-triangle pairs"""
        return self.n * (self.n - 1) // 2


class DecoderConfig(BaseModel):
    """SA-GNN 생성 네트워크 설정

    Attributes:
        layer_widths (list[int]): 각 레이어 출력 폭 d^(l); 마지막은 재구성 폭 d
                                  Output width of every layer, the last equals d
        attention_width (Optional[int]): 어텐션 폭 d̄ (None이면 레이어마다 ceil(d^(l)/2))
                                         Attention width, defaults to ceil(d^(l)/2) per layer
        hidden_activation (Activation): 은닉층 비선형성
        output_activation (Activation): 최종 활성화 (sigmoid 또는 identity)
        lambda_init (float): 어텐션 게이트 λ 초기값
    """
    layer_widths: list[int] = Field(title="레이어 폭", min_length=1)
    attention_width: Optional[int] = Field(default=None, title="어텐션 폭 d̄", gt=0)
    hidden_activation: Activation = Field(default=Activation.TANH)
    output_activation: Activation = Field(default=Activation.SIGMOID)
    lambda_init: float = Field(default=0.0)

    @field_validator("output_activation")
    @classmethod
    def _output_activation(cls, value: Activation) -> Activation:
        if value not in (Activation.SIGMOID, Activation.IDENTITY):
            raise ValueError("output activation must be sigmoid or identity")
        return value

    def attention_width_for(self, layer_input_width: int) -> int:
        return self.attention_width or math.ceil(layer_input_width / 2)


class ModelConfig(BaseModel):
    """SAG-VAE 전체 모델 설정

    use_graph가 False이면 인접 행렬을 대각 성분만 남긴 바닐라 VAE 대조군이 됩니다.

    Whole-model settings. ``use_graph=False`` gives the vanilla-VAE ablation whose
    adjacency is zero off the diagonal.
    """
    encoder: EncoderConfig
    decoder: DecoderConfig
    use_graph: bool = Field(default=True, title="학습된 그래프 사용 여부")

    @model_validator(mode="after")
    def _reconstruction_width(self):
        if self.decoder.layer_widths[-1] != self.encoder.d:
            raise ValueError(
                f"last decoder width {self.decoder.layer_widths[-1]} must equal the feature width d={self.encoder.d}"
            )
        return self


class TrainConfig(BaseModel):
    """학습 루프 설정

    tau_anneal_epochs가 None이면 전체 에폭의 60% 동안 온도를 기하적으로 감소시킵니다.
    beta_a가 None이면 1/(n²−n)을 사용합니다.

    Training-loop settings. ``tau_anneal_epochs=None`` anneals over the first 60% of
    the epochs; ``beta_a=None`` uses 1/(n²−n).
    """
    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=32, gt=0)
    learning_rate: float = Field(default=1e-3, ge=0)
    tau_start: float = Field(default=1.0, gt=0)
    tau_end: float = Field(default=0.3, gt=0)
    tau_anneal_epochs: Optional[int] = Field(default=None, ge=0)
    beta_a: Optional[float] = Field(default=None, gt=0)
    prior_p: float = Field(default=0.5, gt=0, lt=1, title="엣지 존재 사전확률")
    seed: int = Field(default=0)
    reconstruction_loss: ReconstructionLoss = Field(default=ReconstructionLoss.BERNOULLI_CROSS_ENTROPY)
    divergence_threshold: float = Field(default=1e6, gt=0)
    checkpoint_dir: Optional[Path] = Field(default=None)
    log_every: int = Field(default=10, gt=0)

    @model_validator(mode="after")
    def _temperature_order(self):
        if self.tau_end > self.tau_start:
            raise ValueError(f"tau_end ({self.tau_end}) must not exceed tau_start ({self.tau_start})")
        return self

    @property
    def anneal_horizon(self) -> int:
        if self.tau_anneal_epochs is not None:
            return self.tau_anneal_epochs
        return int(round(0.6 * self.epochs))

    def beta_a_for(self, n: int) -> float:
        if self.beta_a is not None:
            return self.beta_a
        return 1.0 / (n * n - n) if n > 1 else 1.0


class DatasetConfig(BaseModel):
    """학습/평가 데이터셋 설정

    Attributes:
        kind (DatasetKind): karate(생성 데이터 디렉터리), graph(엣지 CSV + 특징), images(IDX)
        path (Optional[Path]): karate 디렉터리, 엣지 리스트 CSV 또는 IDX 이미지 파일
        features_path (Optional[Path]): 그래프 특징 CSV / .npy
        labels_path (Optional[Path]): IDX 레이블 파일
    """
    kind: DatasetKind
    path: Optional[Path] = None
    features_path: Optional[Path] = None
    labels_path: Optional[Path] = None
    class_filter: list[int] = Field(default_factory=list)
    limit: Optional[int] = Field(default=None, gt=0)
    downsample: int = Field(default=1, ge=1)
    perturbation: Perturbation = Field(default=Perturbation.NONE)
    noise_pixels: int = Field(default=200, ge=0)
    mask_block: int = Field(default=6, ge=0)
    dropout_rate: float = Field(default=0.0, ge=0, lt=1)
    noise_std: float = Field(default=0.0, ge=0)
    copies: int = Field(default=1, gt=0)
    samples_per_pattern: int = Field(default=100, gt=0)


class RunConfig(BaseModel):
    dataset: DatasetConfig
    model: ModelConfig
    train: TrainConfig = Field(default_factory=TrainConfig)
    output_dir: Path = Field(default=Path("runs/latest"))


def load_run_config(path: str | Path) -> RunConfig:
    """YAML 실행 설정 파일을 읽어 RunConfig로 검증합니다.

    Load and validate a YAML run config.
    """
    with open(path, "r", encoding="utf-8") as f:
        return RunConfig.model_validate(yaml.safe_load(f))
