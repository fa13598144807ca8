"""클래스별 잠재 통계와 노이즈 샘플링 모듈

학습된 차원별 모델로 클래스마다 이미지를 인코딩하여 픽셀(노드)별 잠재 평균 μ와 표준편차 σ를
얻고, 이 값들에 다시 가우시안을 맞춥니다 (μ ~ N(μ_μ, σ_μ²), σ ~ N(μ_σ, σ_σ²)).
샘플링 시에는 이 분포에서 z를 뽑은 뒤 n_corrupt개의 잠재 차원을 U(0, 1) 잡음으로 덮어쓰고
디코딩합니다.

Per-class latent statistics and noisy sampling with a trained dimension-wise model.
"""

from typing import Optional

import torch
from pydantic import BaseModel, ConfigDict

from sagvae.autodiff import DTYPE
from sagvae.errors import ClassNotFoundError, ConfigurationError, ParameterError
from sagvae.model import SAGVAE
from sagvae.types import LatentMode
from utils import Logger

from .images import ImageDataset

logger = Logger(__name__)


class ClassLatentGaussian(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu_mu: torch.Tensor
    sigma_mu: torch.Tensor
    mu_sigma: torch.Tensor
    sigma_sigma: torch.Tensor
    template: torch.Tensor


class ClassPixelStats(BaseModel):
    """클래스별 잠재 가우시안 통계와 디코딩에 쓸 그래프

    Attributes:
        classes (dict[int, ClassLatentGaussian]): 클래스별 [n, d_z] 통계와 평균 이미지
        adjacency (torch.Tensor): 학습된 엣지 존재 확률 [n, n]
        weights (torch.Tensor): 학습된 엣지 가중치 V [n, n]
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    classes: dict[int, ClassLatentGaussian]
    adjacency: torch.Tensor
    weights: torch.Tensor


def _require_dimension_wise(model: SAGVAE) -> None:
    if model.config.encoder.latent_mode != LatentMode.DIMENSION_WISE:
        raise ConfigurationError("per-pixel latent statistics need a dimension-wise model.")


@torch.no_grad()
def fit_class_pixel_gaussians(ds: ImageDataset, model: SAGVAE, images_per_class: Optional[int] = 1) -> ClassPixelStats:
    """클래스마다 앞에서부터 images_per_class장(None이면 전부)을 인코딩하여 통계를 맞춥니다.

    표준편차는 모집단 표준편차이므로 이미지 한 장이면 σ_μ = σ_σ = 0입니다.

    Fit per-class Gaussians over the per-pixel latent means and standard deviations of
    the first ``images_per_class`` images of every class (all of them for None).
    """
    _require_dimension_wise(model)
    classes = {}
    for cls in sorted(set(ds.labels.tolist())):
        images = ds.of_class(cls)
        if images_per_class is not None:
            images = images[:images_per_class]
        posterior = model.z_encoder(images)
        mu, sigma = posterior.mu, posterior.std
        classes[int(cls)] = ClassLatentGaussian(
            mu_mu=mu.mean(dim=0),
            sigma_mu=mu.std(dim=0, correction=0),
            mu_sigma=sigma.mean(dim=0),
            sigma_sigma=sigma.std(dim=0, correction=0),
            template=images.mean(dim=0),
        )
    logger.info(f"class latent statistics fitted for classes {sorted(classes)}")
    return ClassPixelStats(
        classes=classes,
        adjacency=model.edge_probabilities(ds.images),
        weights=model.edge_weights(ds.images),
    )


@torch.no_grad()
def noisy_sample(
        stats: ClassPixelStats,
        cls: int,
        n_samples: int = 10,
        n_corrupt: int = 200,
        generator: Optional[torch.Generator] = None,
        model: Optional[SAGVAE] = None,
        ablate_graph: bool = False,
        ablation_model: Optional[SAGVAE] = None,
) -> torch.Tensor:
    """클래스 분포에서 z를 뽑고 n_corrupt개의 잠재 차원을 U(0, 1)로 바꿔 디코딩합니다.

    잠재 차원은 노드 하나의 d_z 성분 전체입니다. ablate_graph가 True이면 학습된 그래프 대신
    A = 0 (Ã = I)으로 디코딩합니다. 같은 generator 상태에서는 두 경우의 z와 잡음이 같습니다.

    대조군 디코더: ablation_model(use_graph=False로 따로 학습한 모델)을 넘기면 그 디코더로
    디코딩하고, 없으면 그래프와 함께 학습된 model의 디코더에 A = 0을 넣어 근사합니다.
    후자는 같은 파라미터에서 그래프만 뺀 비교이며 그래프 없이 학습한 모델과는 다릅니다.

    Draw z from the class Gaussians, overwrite ``n_corrupt`` latent dimensions (every d_z
    entry of a node) with U(0, 1) noise and decode. ``ablate_graph`` decodes with A = 0,
    through ``ablation_model`` when given (a model trained without the graph) and through
    the graph-trained decoder otherwise.

    Returns:
        torch.Tensor: [n_samples, n·d] 디코딩된 이미지

    Raises:
        ClassNotFoundError: 통계에 없는 클래스
        ParameterError: n_corrupt가 [0, n] 밖인 경우
        ConfigurationError: ablation_model의 n, d, d_z가 model과 다른 경우
    """
    if model is None:
        raise ConfigurationError("noisy_sample needs the trained model to decode.")
    _require_dimension_wise(model)
    if cls not in stats.classes:
        raise ClassNotFoundError(f"class {cls} is absent from the fitted statistics {sorted(stats.classes)}.")
    n = model.n
    if not 0 <= n_corrupt <= n:
        raise ParameterError(f"n_corrupt must lie in [0, {n}], got {n_corrupt}.")

    g = stats.classes[cls]
    shape = (n_samples, *g.mu_mu.shape)
    mu = g.mu_mu + g.sigma_mu * torch.randn(shape, generator=generator, dtype=DTYPE)
    sigma = (g.mu_sigma + g.sigma_sigma * torch.randn(shape, generator=generator, dtype=DTYPE)).abs()
    z = mu + sigma * torch.randn(shape, generator=generator, dtype=DTYPE)

    for i in range(n_samples):
        nodes = torch.randperm(n, generator=generator)[:n_corrupt]
        z[i, nodes] = torch.rand((n_corrupt, z.shape[-1]), generator=generator, dtype=DTYPE)

    decoder = model.decoder
    if ablate_graph and ablation_model is not None:
        _require_dimension_wise(ablation_model)
        if (ablation_model.n, ablation_model.config.encoder.d, ablation_model.config.encoder.latent_dim) != (
                n, model.config.encoder.d, model.config.encoder.latent_dim):
            raise ConfigurationError("the ablation model does not match the sampled model shape.")
        decoder = ablation_model.decoder
    if ablate_graph or not model.config.use_graph:
        adjacency, weights = torch.zeros(n, n, dtype=DTYPE), None
    else:
        adjacency, weights = stats.adjacency, stats.weights
    return decoder(z, adjacency, weights).reshape(n_samples, -1)
