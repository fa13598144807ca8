"""추론 네트워크 모듈 - 잠재 표현 Z와 잠재 그래프 A의 사후분포

φ1은 데이터로부터 Z의 가우시안 사후분포를, φ2는 공유 트렁크를 통해 엣지별 로짓과
엣지 가중치 V를 만듭니다. A는 모든 데이터가 공유하는 구조이므로 (amortized inference)
미니배치의 샘플별 확률을 평균하여 하나의 사후분포로 만듭니다.

Inference networks - posteriors over the representation Z and the latent graph A

φ1 maps data to the Gaussian posterior over Z; φ2 produces per-edge logits and the edge
weights V from a shared trunk. A is a structure shared by all data points, so the
per-sample probabilities of a minibatch are averaged into one posterior. Only the strict
upper triangle is parameterized and then mirrored, which makes A exactly symmetric.
"""

import torch
from pydantic import BaseModel, ConfigDict
from torch import nn

from sagvae.autodiff import DTYPE
from sagvae.errors import ConfigurationError, DimensionError
from sagvae.models.config import EncoderConfig
from sagvae.stochastic import GaussianPosterior, sample_gumbel_softmax
from sagvae.types import LatentMode


def pair_indices(n: int) -> tuple[torch.Tensor, torch.Tensor]:
    """상삼각(대각 제외) 인덱스 / strict upper-triangle indices"""
    rows, cols = torch.triu_indices(n, n, offset=1)
    return rows, cols


def pairs_to_matrix(values: torch.Tensor, n: int, diagonal: float = 0.0) -> torch.Tensor:
    """[..., P] 쌍 값을 대칭 [..., n, n] 행렬로 펼칩니다.

    Mirror strict-upper-triangle pair values into a symmetric matrix with the given
    constant on the diagonal.
    """
    rows, cols = pair_indices(n)
    if values.shape[-1] != rows.numel():
        raise DimensionError(f"expected {rows.numel()} pair values for n={n}, got {values.shape[-1]}.")
    upper = values.new_zeros(*values.shape[:-1], n, n)
    upper[..., rows, cols] = values
    eye = torch.eye(n, dtype=values.dtype)
    return upper + upper.transpose(-1, -2) + diagonal * eye


def _mlp(in_width: int, widths: list[int]) -> tuple[nn.Module, int]:
    layers: list[nn.Module] = []
    width = in_width
    for w in widths:
        layers += [nn.Linear(width, w, dtype=DTYPE), nn.Tanh()]
        width = w
    return (nn.Sequential(*layers) if layers else nn.Identity()), width


def _zero_(layer: nn.Linear) -> None:
    nn.init.zeros_(layer.weight)
    nn.init.zeros_(layer.bias)


def _flatten_batch(x: torch.Tensor, width: int) -> torch.Tensor:
    if x.dim() == 1:
        x = x.unsqueeze(0)
    x = x.reshape(x.shape[0], -1)
    if x.shape[0] < 1:
        raise ConfigurationError("encoder input batch is empty.")
    if x.shape[1] != width:
        raise ConfigurationError(f"encoder expects {width} input features per sample, got {x.shape[1]}.")
    return x


class EdgePosterior(BaseModel):
    """엣지 사후분포 q(A|X) - 배치 평균된 '엣지 존재' 확률

    pair_probs는 상삼각 쌍별 존재 확률이며, probs 속성은 대각 성분이 1인 대칭 n×n 행렬입니다.

    Edge posterior. ``pair_probs`` holds the batch-averaged edge-present probability of
    every strict-upper-triangle pair; ``probs`` is the symmetric n×n view with unit
    diagonal (fixed self-loops).

    Attributes:
        pair_probs (torch.Tensor): [P] 엣지 존재 확률
        n (int): 노드 수
        prior_p (float): 베르누이 사전확률 p(A_st = 1)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pair_probs: torch.Tensor
    n: int
    prior_p: float = 0.5

    @property
    def class_probs(self) -> torch.Tensor:
        """[P, 2] 클래스 확률 ([존재, 부재]) / class probabilities [present, absent]"""
        return torch.stack([self.pair_probs, 1.0 - self.pair_probs], dim=-1)

    @property
    def probs(self) -> torch.Tensor:
        return pairs_to_matrix(self.pair_probs, self.n, diagonal=1.0)

    def prior_gap(self) -> float:
        """평균 |q(A) − prior| (사후분포 붕괴 모니터링) / mean |q(A) − prior|"""
        return float((self.pair_probs.detach() - self.prior_p).abs().mean())


class EdgeEncoding(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    posterior: EdgePosterior
    a_sample: torch.Tensor
    v: torch.Tensor


class GaussianEncoder(nn.Module):
    """φ1: 완전연결 스택으로 Z의 가우시안 사후분포를 출력합니다.

    Fully connected stack producing the Gaussian posterior over Z. In dimension-wise
    mode the output is [m, n, d_z], otherwise [m, latent_width].
    """

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.trunk, width = _mlp(cfg.input_width, cfg.hidden_widths)
        if cfg.latent_mode == LatentMode.DIMENSION_WISE:
            out_width = cfg.n * cfg.latent_dim
        else:
            out_width = cfg.latent_width
        self.mu_head = nn.Linear(width, out_width, dtype=DTYPE)
        self.logvar_head = nn.Linear(width, out_width, dtype=DTYPE)
        if cfg.zero_init_heads:
            _zero_(self.mu_head)
            _zero_(self.logvar_head)

    def encode_z(self, x: torch.Tensor) -> GaussianPosterior:
        x = _flatten_batch(x, self.cfg.input_width)
        h = self.trunk(x)
        mu, logvar = self.mu_head(h), self.logvar_head(h)
        if self.cfg.latent_mode == LatentMode.DIMENSION_WISE:
            shape = (x.shape[0], self.cfg.n, self.cfg.latent_dim)
            mu, logvar = mu.reshape(shape), logvar.reshape(shape)
        return GaussianPosterior(mu=mu, logvar=logvar)

    forward = encode_z


class EdgeEncoder(nn.Module):
    """φ2: 공유 트렁크 + 엣지 로짓 헤드 + 엣지 가중치(V) 헤드

    트렁크는 두 헤드가 공유하고 마지막 레이어만 다릅니다. 로짓 헤드는 쌍마다
    [존재, 부재] 두 클래스의 로짓을, 가중치 헤드는 sigmoid를 거친 V를 만듭니다.

    Shared φ2 trunk with two distinct final layers: per-pair two-class logits and the
    sigmoid edge-weight head V.
    """

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.n = cfg.n
        self.pair_count = cfg.pair_count
        self.trunk, width = _mlp(cfg.input_width, cfg.edge_hidden_widths)
        self.logit_head = nn.Linear(width, 2 * self.pair_count, dtype=DTYPE)
        self.weight_head = nn.Linear(width, self.pair_count, dtype=DTYPE)
        if cfg.zero_init_heads:
            _zero_(self.logit_head)
            _zero_(self.weight_head)

    def _hidden(self, x: torch.Tensor) -> torch.Tensor:
        return self.trunk(_flatten_batch(x, self.cfg.input_width))

    def _pair_logits(self, h: torch.Tensor) -> torch.Tensor:
        return self.logit_head(h).reshape(h.shape[0], self.pair_count, 2)

    def _weights(self, h: torch.Tensor) -> torch.Tensor:
        return pairs_to_matrix(torch.sigmoid(self.weight_head(h)).mean(dim=0), self.n, diagonal=1.0)

    def encode_edge_logits(self, x_batch: torch.Tensor, prior_p: float = 0.5) -> EdgePosterior:
        """샘플별 클래스 확률을 배치 평균한 엣지 사후분포

        Edge posterior whose probabilities are the batch mean of the per-sample class
        probabilities.
        """
        logits = self._pair_logits(self._hidden(x_batch))
        return posterior_from_pair_logits(logits, self.n, prior_p)

    def encode_edge_weights(self, x_batch: torch.Tensor) -> torch.Tensor:
        """배치 평균된 엣지 가중치 V [n, n], 대각은 정확히 1

        Batch-averaged edge weights with unit diagonal.
        """
        return self._weights(self._hidden(x_batch))

    def forward(
            self,
            x_batch: torch.Tensor,
            tau: float,
            generator: torch.Generator | None = None,
            prior_p: float = 0.5,
    ) -> EdgeEncoding:
        """트렁크를 한 번만 계산해 사후분포, 완화된 A 샘플, V를 함께 반환합니다.

        샘플마다 독립된 Gumbel 잡음으로 Gumbel-Softmax를 적용한 뒤 '존재' 성분을 평균하여
        하나의 공유 A 샘플(대각 0)을 만듭니다.

        Runs the trunk once and returns the posterior, one shared relaxed A sample
        (zero diagonal; per-sample Gumbel noise, then averaged over the batch) and V.
        """
        h = self._hidden(x_batch)
        logits = self._pair_logits(h)
        relaxed = sample_gumbel_softmax(logits, tau, generator)
        a_sample = pairs_to_matrix(relaxed.present.mean(dim=0), self.n)
        return EdgeEncoding(
            posterior=posterior_from_pair_logits(logits, self.n, prior_p),
            a_sample=a_sample,
            v=self._weights(h),
        )


def posterior_from_pair_logits(logits: torch.Tensor, n: int, prior_p: float = 0.5) -> EdgePosterior:
    """[m, P, 2] 샘플별 로짓에서 배치 평균 엣지 사후분포를 만듭니다.

    Build the batch-averaged posterior from per-sample pair logits.
    """
    if logits.dim() == 2:
        logits = logits.unsqueeze(0)
    pair_probs = torch.softmax(logits, dim=-1)[..., 0].mean(dim=0)
    return EdgePosterior(pair_probs=pair_probs, n=n, prior_p=prior_p)
