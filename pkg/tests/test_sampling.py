import pytest
import torch

from bench.images import ImageDataset
from bench.sampling import fit_class_pixel_gaussians, noisy_sample
from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.errors import ClassNotFoundError, ConfigurationError, ParameterError
from sagvae.model import build_model
from sagvae.types import LatentMode

from .conftest import small_model_config


@pytest.fixture
def tiny_images() -> ImageDataset:
    """4×4 이미지 8장, 클래스 0과 1"""
    images = torch.rand(8, 16, generator=seeded_generator(0), dtype=DTYPE)
    labels = torch.tensor([0, 1] * 4)
    return ImageDataset(images=images, labels=labels, side=4)


@pytest.fixture
def pixel_model():
    return build_model(small_model_config(n=16, d=1, zero_init_heads=False), seed=1)


def test_class_statistics(tiny_images, pixel_model):
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model, images_per_class=None)
    assert sorted(stats.classes) == [0, 1]
    g = stats.classes[0]
    assert g.mu_mu.shape == (16, 2)
    assert (g.sigma_mu > 0).all()
    assert stats.adjacency.shape == (16, 16)

    single = fit_class_pixel_gaussians(tiny_images, pixel_model, images_per_class=1)
    assert torch.equal(single.classes[1].sigma_mu, torch.zeros(16, 2, dtype=DTYPE))


def test_noisy_samples_shape_and_seeding(tiny_images, pixel_model):
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model)
    a = noisy_sample(stats, 0, n_samples=10, n_corrupt=5, generator=seeded_generator(2), model=pixel_model)
    b = noisy_sample(stats, 0, n_samples=10, n_corrupt=5, generator=seeded_generator(2), model=pixel_model)
    assert a.shape == (10, 16)
    assert torch.equal(a, b)
    assert ((a > 0) & (a < 1)).all()


def test_graph_ablation_changes_the_decoding(tiny_images, pixel_model):
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model)
    with_graph = noisy_sample(stats, 1, n_corrupt=3, generator=seeded_generator(3), model=pixel_model)
    without = noisy_sample(stats, 1, n_corrupt=3, generator=seeded_generator(3), model=pixel_model, ablate_graph=True)
    assert not torch.equal(with_graph, without)


def test_sampling_errors(tiny_images, pixel_model):
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model)
    with pytest.raises(ConfigurationError):
        noisy_sample(stats, 0)
    with pytest.raises(ClassNotFoundError):
        noisy_sample(stats, 7, model=pixel_model)
    with pytest.raises(ParameterError):
        noisy_sample(stats, 0, n_corrupt=17, model=pixel_model)


def test_point_wise_model_has_no_pixel_statistics(tiny_images):
    model = build_model(small_model_config(n=16, d=1, latent_mode=LatentMode.DATA_POINT_WISE), seed=0)
    with pytest.raises(ConfigurationError):
        fit_class_pixel_gaussians(tiny_images, model)


def test_separately_trained_ablation_model_decodes_ablated_samples(tiny_images, pixel_model):
    """ablation_model을 넘기면 같은 z를 그래프 없이 학습된 디코더로 디코딩"""
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model)
    graphless = build_model(small_model_config(n=16, d=1, zero_init_heads=False, use_graph=False), seed=5)
    separate = noisy_sample(
        stats, 0, n_corrupt=4, generator=seeded_generator(6), model=pixel_model,
        ablate_graph=True, ablation_model=graphless,
    )
    direct = noisy_sample(stats, 0, n_corrupt=4, generator=seeded_generator(6), model=graphless, ablate_graph=True)
    shared = noisy_sample(stats, 0, n_corrupt=4, generator=seeded_generator(6), model=pixel_model, ablate_graph=True)
    assert torch.equal(separate, direct)
    assert not torch.equal(separate, shared)


def test_ablation_model_must_match_the_node_count(tiny_images, pixel_model):
    stats = fit_class_pixel_gaussians(tiny_images, pixel_model)
    other = build_model(small_model_config(n=9, d=1, use_graph=False), seed=0)
    with pytest.raises(ConfigurationError):
        noisy_sample(stats, 0, n_corrupt=2, model=pixel_model, ablate_graph=True, ablation_model=other)
