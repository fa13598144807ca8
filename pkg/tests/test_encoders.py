import math

import pytest
import torch
from torch.autograd import gradcheck
from torch.func import functional_call

from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.encoders import (
    EdgeEncoder,
    GaussianEncoder,
    pair_indices,
    pairs_to_matrix,
    posterior_from_pair_logits,
)
from sagvae.errors import ConfigurationError, DimensionError
from sagvae.models.config import EncoderConfig
from sagvae.stochastic import kl_gaussian_std
from sagvae.types import LatentMode


def _encoder_config(**overrides) -> EncoderConfig:
    values = dict(n=5, d=3, hidden_widths=[6], latent_width=4, latent_dim=2, edge_hidden_widths=[6])
    values.update(overrides)
    return EncoderConfig(**values)


def _random_input(m: int, width: int, seed: int = 0) -> torch.Tensor:
    return torch.randn(m, width, generator=seeded_generator(seed), dtype=DTYPE)


def test_zero_initialized_heads_emit_the_prior():
    """출력 헤드가 0이면 어떤 입력에도 μ = 0, logvar = 0"""
    encoder = GaussianEncoder(_encoder_config())
    posterior = encoder.encode_z(_random_input(7, 15))
    assert torch.equal(posterior.mu, torch.zeros(7, 5, 2, dtype=DTYPE))
    assert torch.equal(posterior.logvar, torch.zeros(7, 5, 2, dtype=DTYPE))


def test_latent_shapes_per_mode():
    dimension_wise = GaussianEncoder(EncoderConfig(n=34, d=1, latent_dim=4))
    assert dimension_wise(_random_input(2, 34)).mu.shape == (2, 34, 4)

    point_wise = GaussianEncoder(_encoder_config(latent_mode=LatentMode.DATA_POINT_WISE))
    assert point_wise(_random_input(3, 15)).mu.shape == (3, 4)


def test_encoder_rejects_wrong_feature_width():
    with pytest.raises(ConfigurationError):
        GaussianEncoder(_encoder_config()).encode_z(_random_input(2, 14))


def test_kl_gradient_wrt_first_layer_weights():
    torch.manual_seed(0)
    encoder = GaussianEncoder(_encoder_config(zero_init_heads=False))
    x = _random_input(4, 15, seed=1)
    weight = encoder.trunk[0].weight.detach().clone().requires_grad_(True)

    def kl_of(w):
        posterior = functional_call(encoder, {"trunk.0.weight": w}, (x,))
        return kl_gaussian_std(posterior)

    assert gradcheck(kl_of, (weight,), eps=1e-6, atol=1e-6, rtol=1e-3)


def test_pairs_to_matrix_mirrors_upper_triangle():
    values = torch.arange(1, 7, dtype=DTYPE)
    matrix = pairs_to_matrix(values, 4, diagonal=1.0)
    rows, cols = pair_indices(4)
    assert torch.equal(matrix, matrix.T)
    assert torch.equal(matrix[rows, cols], values)
    assert torch.equal(matrix.diagonal(), torch.ones(4, dtype=DTYPE))
    with pytest.raises(DimensionError):
        pairs_to_matrix(values, 5)


def test_posterior_ignores_batch_order():
    """배치 행의 순서를 바꿔도 엣지 사후분포는 같음"""
    torch.manual_seed(5)
    encoder = EdgeEncoder(_encoder_config(zero_init_heads=False))
    x = _random_input(8, 15, seed=6)
    order = torch.randperm(8, generator=seeded_generator(7))
    a = encoder.encode_edge_logits(x).pair_probs
    b = encoder.encode_edge_logits(x[order]).pair_probs
    assert torch.allclose(a, b, rtol=0, atol=1e-14)
    assert torch.allclose(encoder.encode_edge_weights(x), encoder.encode_edge_weights(x[order]), rtol=0, atol=1e-14)


def test_single_sample_posterior_equals_its_probabilities():
    logits = torch.randn(1, 6, 2, generator=seeded_generator(3), dtype=DTYPE)
    posterior = posterior_from_pair_logits(logits, 4)
    assert torch.allclose(posterior.pair_probs, torch.softmax(logits[0], dim=-1)[:, 0], rtol=0, atol=1e-15)


def test_posterior_averages_sample_probabilities():
    """엣지 (1, 3)에서 두 샘플의 확률 0.2, 0.6 → 평균 0.4"""
    rows, cols = pair_indices(4)
    k = int(((rows == 1) & (cols == 3)).nonzero())
    logits = torch.zeros(2, 6, 2, dtype=DTYPE)
    logits[0, k] = torch.log(torch.tensor([0.2, 0.8], dtype=DTYPE))
    logits[1, k] = torch.log(torch.tensor([0.6, 0.4], dtype=DTYPE))
    probs = posterior_from_pair_logits(logits, 4).probs
    assert probs[1, 3].item() == pytest.approx(0.4, abs=1e-12)
    assert probs[3, 1].item() == probs[1, 3].item()


def test_posterior_probs_are_symmetric_with_unit_diagonal():
    torch.manual_seed(1)
    encoder = EdgeEncoder(_encoder_config(zero_init_heads=False))
    posterior = encoder.encode_edge_logits(_random_input(9, 15))
    probs = posterior.probs
    off_diagonal = probs[~torch.eye(5, dtype=torch.bool)]
    assert torch.allclose(probs, probs.T, atol=1e-12)
    assert torch.equal(probs.diagonal(), torch.ones(5, dtype=DTYPE))
    assert ((off_diagonal > 0) & (off_diagonal < 1)).all()
    assert posterior.class_probs.shape == (10, 2)


def test_fresh_edge_weights_are_one_half_with_unit_diagonal():
    v = EdgeEncoder(_encoder_config()).encode_edge_weights(_random_input(4, 15))
    expected = torch.full((5, 5), 0.5, dtype=DTYPE).fill_diagonal_(1.0)
    assert torch.equal(v, expected)


def test_edge_weights_stay_in_unit_interval():
    torch.manual_seed(2)
    encoder = EdgeEncoder(_encoder_config(zero_init_heads=False))
    for seed in range(100):
        v = encoder.encode_edge_weights(_random_input(3, 15, seed=seed) * 5)
        assert ((v > 0) & (v <= 1)).all()
        assert torch.equal(v.diagonal(), torch.ones(5, dtype=DTYPE))


def test_forward_shares_one_relaxed_sample_across_the_batch():
    encoder = EdgeEncoder(_encoder_config())
    encoding = encoder(_random_input(6, 15), tau=0.5, generator=seeded_generator(4))
    a = encoding.a_sample
    assert a.shape == (5, 5)
    assert torch.equal(a, a.T)
    assert torch.equal(a.diagonal(), torch.zeros(5, dtype=DTYPE))
    assert ((a >= 0) & (a <= 1)).all()
    # 0으로 초기화된 헤드에서는 사후확률이 정확히 사전확률 0.5
    assert encoding.posterior.prior_gap() == 0.0
    assert math.isclose(float(encoding.v[0, 1]), 0.5)
