"""SAG-VAE 패키지 - 특징 간 잠재 그래프를 함께 학습하는 변분 오토인코더

잠재 표현 Z와 특징(노드) 사이의 잠재 인접 행렬 A를 함께 추론하고, A 위에서 동작하는
셀프 어텐션 그래프 신경망(SA-GNN)으로 데이터를 재구성합니다.

SAG-VAE package - a variational autoencoder that jointly infers a latent representation
Z and a latent adjacency A among the features, and decodes with a self-attention graph
neural network over A.

Modules:
    autodiff: float64 텐서 연산과 역전파 진입점
    stochastic: 재매개변수화 샘플링과 KL 항
    encoders: φ1 (Z), φ2 (A 로짓과 엣지 가중치 V)
    decoder: SA-GNN 생성 네트워크
    model: 전체 모델과 vanilla-VAE 대조군 스위치
    checkpoint: .npz 체크포인트
    training: ELBO, 온도 스케줄, 학습 루프
"""

from sagvae.checkpoint import load_checkpoint, save_checkpoint
from sagvae.model import SAGVAE, ForwardResult, build_model
from sagvae.models import DecoderConfig, EncoderConfig, ModelConfig, RunConfig, TrainConfig
from sagvae.training import TrainReport, elbo_loss, temperature_schedule, train

__all__ = [
    "SAGVAE",
    "ForwardResult",
    "build_model",
    "load_checkpoint",
    "save_checkpoint",
    "DecoderConfig",
    "EncoderConfig",
    "ModelConfig",
    "RunConfig",
    "TrainConfig",
    "TrainReport",
    "elbo_loss",
    "temperature_schedule",
    "train",
]
