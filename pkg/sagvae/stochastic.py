"""확률적 레이어 모듈 - 재매개변수화 샘플링과 KL 항

잠재 변수 Z의 가우시안 사후분포와 엣지 변수 A의 Gumbel-Softmax 완화 분포에 대한
샘플링 및 KL-divergence 계산을 제공합니다. 모든 함수는 외부에서 전달된 torch.Generator만
사용하므로, 독립된 난수 스트림을 쓰는 한 여러 컨텍스트에서 동시에 호출해도 안전합니다.

Stochastic layers - reparameterized sampling and KL terms

Sampling and KL divergences for the Gaussian posterior over Z and the Gumbel-Softmax
relaxation of the edge variables A. Functions only touch the generator they are given.
"""

import torch
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from sagvae.autodiff import DTYPE
from sagvae.errors import DimensionError, InfiniteKLError, ParameterError

LOGVAR_MIN = -10.0
LOGVAR_MAX = 10.0
# u가 0 또는 1이면 -log(-log u)가 발산하므로 양끝을 잘라냅니다
GUMBEL_EPS = 1e-10


class GaussianPosterior(BaseModel):
    """대각 가우시안 사후분포 q(z|x) = N(mu, diag(exp(logvar)))

    생성 시 logvar를 [-10, 10]으로 clamp하여 지수 연산 결과가 항상 유한하도록 합니다.

    Diagonal Gaussian posterior. ``logvar`` is clamped to [-10, 10] on construction.

    Attributes:
        mu (torch.Tensor): 평균
                           Mean
        logvar (torch.Tensor): 로그 분산 (mu와 같은 형태)
                               Log-variance, same shape as mu
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu: torch.Tensor
    logvar: torch.Tensor

    @field_validator("logvar")
    @classmethod
    def _clamp_logvar(cls, value: torch.Tensor) -> torch.Tensor:
        return value.clamp(LOGVAR_MIN, LOGVAR_MAX)

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.mu.shape != self.logvar.shape:
            raise DimensionError(
                f"mu and logvar shapes differ: {tuple(self.mu.shape)} vs {tuple(self.logvar.shape)}."
            )
        return self

    @property
    def std(self) -> torch.Tensor:
        return torch.exp(0.5 * self.logvar)


class GumbelSoftmaxSample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    simplex: torch.Tensor
    tau: float

    @property
    def present(self) -> torch.Tensor:
        """엣지 존재 클래스(인덱스 0)의 성분 / component of the edge-present class"""
        return self.simplex[..., 0]


def sample_gaussian(
        post: GaussianPosterior,
        generator: torch.Generator | None = None,
        eps: torch.Tensor | None = None,
) -> torch.Tensor:
    """재매개변수화 트릭: z = mu + exp(logvar/2) * eps, eps ~ N(0, I)

    eps를 직접 넘기면 잡음을 고정할 수 있습니다 (기울기 검증용).

    Reparameterization trick. Pass ``eps`` to freeze the noise.
    """
    if eps is None:
        eps = torch.randn(post.mu.shape, generator=generator, dtype=DTYPE)
    return post.mu + post.std * eps


def kl_gaussian_std(post: GaussianPosterior) -> torch.Tensor:
    """표준 정규 사전분포에 대한 해석적 KL: Σ ½(μ² + σ² − 1 − log σ²)

    Analytic KL against N(0, I), summed over every entry.
    """
    return 0.5 * torch.sum(post.mu.pow(2) + post.logvar.exp() - 1.0 - post.logvar)


def sample_gumbel_noise(shape, generator: torch.Generator | None = None) -> torch.Tensor:
    u = torch.rand(shape, generator=generator, dtype=DTYPE).clamp(GUMBEL_EPS, 1.0 - GUMBEL_EPS)
    return -torch.log(-torch.log(u))


def sample_gumbel_softmax(
        log_alpha: torch.Tensor,
        tau: float,
        generator: torch.Generator | None = None,
        noise: torch.Tensor | None = None,
) -> GumbelSoftmaxSample:
    """Gumbel-Softmax 완화 샘플: a = softmax((log α + G) / τ)

    마지막 축이 클래스 축입니다. noise를 넘기면 Gumbel 잡음 G를 고정합니다.

    Relaxed categorical draw over the last axis. Pass ``noise`` to freeze G.

    Raises:
        ParameterError: tau <= 0
    """
    if not tau > 0:
        raise ParameterError(f"Gumbel-Softmax temperature must be positive, got {tau}.")
    if noise is None:
        noise = sample_gumbel_noise(log_alpha.shape, generator)
    simplex = torch.softmax((log_alpha + noise) / tau, dim=-1)
    return GumbelSoftmaxSample(simplex=simplex, tau=float(tau))


def kl_edge(q_probs: torch.Tensor, p_probs: torch.Tensor | tuple[float, float]) -> torch.Tensor:
    """엣지별 범주형 KL: Σ_k q_k log(q_k / p_k), 모든 엣지 위치에 대해 합산

    Gumbel-Softmax 밀도 대신 클래스 확률 벡터와 베르누이 사전분포 사이의 범주형 KL을
    사용합니다. q_k = 0인 항은 0으로 취급합니다.

    Categorical KL between class-probability vectors ``q_probs[..., 2]`` and the
    Bernoulli prior ``p_probs``, summed over every edge position.

    Raises:
        InfiniteKLError: q_k > 0 인데 p_k = 0 인 경우
    """
    p = torch.as_tensor(p_probs, dtype=q_probs.dtype)
    if ((p == 0) & (q_probs > 0)).any():
        raise InfiniteKLError()
    return torch.sum(torch.special.xlogy(q_probs, q_probs) - torch.special.xlogy(q_probs, p))


def bernoulli_prior(prior_p: float) -> torch.Tensor:
    """[존재, 부재] 순서의 사전분포 벡터 / prior vector ordered [present, absent]"""
    return torch.tensor([prior_p, 1.0 - prior_p], dtype=DTYPE)
