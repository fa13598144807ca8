"""SAG-VAE 모델 - 인코더 φ1/φ2와 SA-GNN 디코더의 결합

Composite SAG-VAE: Gaussian encoder, edge encoder and SA-GNN decoder. With
``use_graph=False`` the adjacency is zero off the diagonal (Ã = I), which gives the
vanilla-VAE ablation with the exact same code path.
"""

from typing import Optional

import torch
from pydantic import BaseModel, ConfigDict
from torch import nn

from sagvae.autodiff import DTYPE
from sagvae.decoder import SAGNNDecoder
from sagvae.encoders import EdgeEncoder, EdgePosterior, GaussianEncoder
from sagvae.errors import ConfigurationError
from sagvae.models.config import ModelConfig
from sagvae.stochastic import GaussianPosterior, sample_gaussian
from utils import Logger

logger = Logger(__name__)


class ForwardResult(BaseModel):
    """한 번의 순전파 결과 / output of one forward pass"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x_hat: torch.Tensor
    z_posterior: GaussianPosterior
    z: torch.Tensor
    edge_posterior: EdgePosterior
    a_sample: torch.Tensor
    v: Optional[torch.Tensor] = None


class SAGVAE(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.n = config.encoder.n
        self.d = config.encoder.d
        self.z_encoder = GaussianEncoder(config.encoder)
        self.edge_encoder = EdgeEncoder(config.encoder)
        self.decoder = SAGNNDecoder(config.encoder, config.decoder)

    def _empty_graph(self) -> torch.Tensor:
        return torch.zeros(self.n, self.n, dtype=DTYPE)

    @staticmethod
    def _rows(x: torch.Tensor) -> torch.Tensor:
        x = x.reshape(x.shape[0], -1)
        if x.shape[0] == 0:
            raise ConfigurationError("input batch is empty.")
        return x

    def forward(
            self,
            x: torch.Tensor,
            tau: float,
            generator: torch.Generator | None = None,
            prior_p: float = 0.5,
    ) -> ForwardResult:
        """Z 하나와 배치가 공유하는 A 샘플 하나로 재구성합니다.

        난수는 Z 잡음, Gumbel 잡음 순서로 generator에서 뽑습니다.

        Reconstruct with one sample of Z and one relaxed A sample shared by the batch.
        Noise is drawn from ``generator`` in that order.
        """
        x = x.reshape(x.shape[0], -1) if x.dim() > 1 else x.unsqueeze(0)
        posterior = self.z_encoder(x)
        z = sample_gaussian(posterior, generator)
        edges = self.edge_encoder(x, tau, generator, prior_p)
        if self.config.use_graph:
            a_sample, v = edges.a_sample, edges.v
        else:
            a_sample, v = self._empty_graph(), None
        x_hat = self.decoder(z, a_sample, v)
        return ForwardResult(
            x_hat=x_hat,
            z_posterior=posterior,
            z=z,
            edge_posterior=edges.posterior,
            a_sample=a_sample,
            v=v,
        )

    @torch.no_grad()
    def edge_probabilities(self, x: torch.Tensor, batch_size: int = 256) -> torch.Tensor:
        """데이터 전체에 대한 엣지 존재 확률 [n, n] (대각 1)

        배치별 평균을 배치 크기로 가중 평균하므로 한 번에 넣은 결과와 같습니다.

        Edge-present probabilities over the whole dataset, weighted by batch size so the
        result equals a single full-batch pass.
        """
        x = self._rows(x)
        total = torch.zeros(self.n * (self.n - 1) // 2, dtype=DTYPE)
        for start in range(0, x.shape[0], batch_size):
            batch = x[start:start + batch_size]
            total += self.edge_encoder.encode_edge_logits(batch).pair_probs * batch.shape[0]
        return EdgePosterior(pair_probs=total / x.shape[0], n=self.n).probs

    @torch.no_grad()
    def edge_weights(self, x: torch.Tensor, batch_size: int = 256) -> torch.Tensor:
        """데이터 전체에 대해 평균한 엣지 가중치 V [n, n] (대각 1), edge_probabilities와 같은 방식으로 배치 처리"""
        x = self._rows(x)
        total = torch.zeros(self.n, self.n, dtype=DTYPE)
        for start in range(0, x.shape[0], batch_size):
            batch = x[start:start + batch_size]
            total += self.edge_encoder.encode_edge_weights(batch) * batch.shape[0]
        return total / x.shape[0]

    @torch.no_grad()
    def reconstruct(
            self,
            x: torch.Tensor,
            threshold: float | None = None,
            adjacency: torch.Tensor | None = None,
            batch_size: int = 256,
    ) -> torch.Tensor:
        """평가용 결정적 재구성: z = μ, A = 사후 확률 (threshold가 있으면 0/1)

        adjacency를 직접 넘기면 그 그래프로 디코딩합니다. A와 V는 데이터 전체에서 구하고,
        인코딩과 디코딩은 batch_size개씩 나눠 수행합니다 (어텐션 텐서가 [batch, n, n]).
        결과는 [m, n·d]입니다.

        Deterministic reconstruction for evaluation with z = μ and A taken from the
        posterior (hard when ``threshold`` is given) unless ``adjacency`` is passed.
        A and V come from the whole dataset; encoding and decoding run in chunks of
        ``batch_size``.
        """
        x = self._rows(x)
        v = None
        if not self.config.use_graph:
            a = self._empty_graph()
        elif adjacency is not None:
            a = adjacency
        else:
            a = self.edge_probabilities(x, batch_size)
            v = self.edge_weights(x, batch_size)
            if threshold is not None:
                a = (a >= threshold).to(DTYPE)
        chunks = []
        for start in range(0, x.shape[0], batch_size):
            batch = x[start:start + batch_size]
            chunks.append(self.decoder(self.z_encoder(batch).mu, a, v).reshape(batch.shape[0], -1))
        return torch.cat(chunks)


def build_model(config: ModelConfig, seed: int = 0) -> SAGVAE:
    """시드 고정 초기화로 모델을 만듭니다. / build a model with seeded initialization"""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = SAGVAE(config)
    logger.debug(
        f"SAG-VAE built: n={config.encoder.n}, d={config.encoder.d}, mode={config.encoder.latent_mode}, "
        f"use_graph={config.use_graph}, params={sum(p.numel() for p in model.parameters())}"
    )
    return model
