import math

import pytest
import torch
from torch.autograd import gradcheck
from torch.func import functional_call

from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.decoder import (
    SAGNNDecoder,
    attention_apply,
    attention_scores,
    graph_context,
    normalize_adjacency,
)
from sagvae.errors import DimensionError, ParameterError
from sagvae.models.config import DecoderConfig, EncoderConfig

from .conftest import small_model_config


def _random_soft_adjacency(n: int, g: torch.Generator) -> torch.Tensor:
    a = torch.rand(n, n, generator=g, dtype=DTYPE)
    a = torch.triu(a, diagonal=1)
    return a + a.T


def _dense_oracle(a: torch.Tensor) -> torch.Tensor:
    """원소 단위 반복문으로 계산한 D̂^-½ (A + I) D̂^-½"""
    n = a.shape[0]
    a_hat = [[(1.0 if i == j else float(a[i, j])) for j in range(n)] for i in range(n)]
    degree = [sum(row) for row in a_hat]
    return torch.tensor(
        [[a_hat[i][j] / math.sqrt(degree[i] * degree[j]) for j in range(n)] for i in range(n)],
        dtype=DTYPE,
    )


def test_single_isolated_node():
    assert torch.equal(normalize_adjacency(torch.zeros(1, 1, dtype=DTYPE)).a_tilde, torch.ones(1, 1, dtype=DTYPE))


def test_three_node_path():
    """0-1-2 경로: Ã₀₀ = 1/2, Ã₀₁ = 1/√6, Ã₁₁ = 1/3, Ã₀₂ = 0"""
    a = torch.tensor([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=DTYPE)
    a_tilde = normalize_adjacency(a).a_tilde
    assert a_tilde[0, 0].item() == pytest.approx(0.5, abs=1e-15)
    assert a_tilde[0, 1].item() == pytest.approx(1 / math.sqrt(6), abs=1e-15)
    assert a_tilde[1, 1].item() == pytest.approx(1 / 3, abs=1e-15)
    assert a_tilde[0, 2].item() == 0.0


@pytest.mark.parametrize("seed", range(50))
def test_normalization_matches_dense_oracle(seed):
    g = seeded_generator(seed)
    n = int(torch.randint(2, 11, (1,), generator=g))
    a = _random_soft_adjacency(n, g)
    assert torch.allclose(normalize_adjacency(a).a_tilde, _dense_oracle(a), rtol=0, atol=1e-12)


def test_normalization_is_permutation_equivariant():
    g = seeded_generator(7)
    a = _random_soft_adjacency(7, g)
    perm = torch.randperm(7, generator=g)
    p = torch.eye(7, dtype=DTYPE)[perm]
    left = p @ normalize_adjacency(a).a_tilde @ p.T
    right = normalize_adjacency(p @ a @ p.T).a_tilde
    assert torch.allclose(left, right, rtol=0, atol=1e-12)


def test_normalization_input_checks():
    with pytest.raises(DimensionError):
        normalize_adjacency(torch.zeros(2, 3, dtype=DTYPE))
    with pytest.raises(ParameterError):
        normalize_adjacency(torch.full((2, 2), 1.5, dtype=DTYPE))


def _attention_params(d: int, width: int, seed: int):
    g = seeded_generator(seed)
    return [torch.randn(*shape, generator=g, dtype=DTYPE) for shape in ((d, width), (d, width), (d, width), (width, d))]


def test_unit_weights_reduce_to_plain_neighbourhood_softmax():
    g = seeded_generator(1)
    h = torch.randn(6, 3, generator=g, dtype=DTYPE)
    mask = _random_soft_adjacency(6, g) > 0.5
    w_l, w_r, _, _ = _attention_params(3, 2, 2)
    weighted = attention_scores(h, mask, torch.ones(6, 6, dtype=DTYPE), w_l, w_r)
    plain = attention_scores(h, mask, None, w_l, w_r)
    assert torch.equal(weighted, plain)


def test_isolated_node_attends_only_to_itself():
    h = torch.randn(4, 3, generator=seeded_generator(3), dtype=DTYPE)
    mask = torch.zeros(4, 4, dtype=torch.bool)
    mask[1, 2] = mask[2, 1] = True
    w_l, w_r, _, _ = _attention_params(3, 2, 4)
    alpha = attention_scores(h, mask, None, w_l, w_r)
    assert alpha[0].tolist() == [1.0, 0.0, 0.0, 0.0]


def test_star_center_weights_leaves_by_edge_weight():
    """같은 관련도에서 V_center,leaf = 2 대 1이면 중심 행의 가중치도 2:1"""
    star = torch.zeros(4, 4, dtype=torch.bool)
    star[0, 1:] = star[1:, 0] = True
    v = torch.ones(4, 4, dtype=DTYPE)
    v[0, 1] = v[1, 0] = 2.0
    h = torch.randn(4, 3, generator=seeded_generator(5), dtype=DTYPE)
    zeros = torch.zeros(3, 2, dtype=DTYPE)
    alpha = attention_scores(h, star, v, zeros, zeros)
    assert alpha[0, 1].item() == pytest.approx(2 * alpha[0, 2].item(), rel=1e-12)
    assert alpha[0, 2].item() == pytest.approx(alpha[0, 3].item(), rel=1e-12)


def test_attention_rows_are_simplices_over_the_neighbourhood():
    g = seeded_generator(6)
    h = torch.randn(8, 4, generator=g, dtype=DTYPE)
    mask = _random_soft_adjacency(8, g) > 0.6
    v = torch.rand(8, 8, generator=g, dtype=DTYPE) + 0.1
    w_l, w_r, _, _ = _attention_params(4, 2, 7)
    alpha = attention_scores(h, mask, v, w_l, w_r)
    neighbourhood = mask | torch.eye(8, dtype=torch.bool)
    assert torch.allclose(alpha.sum(dim=-1), torch.ones(8, dtype=DTYPE), atol=1e-12)
    assert (alpha[~neighbourhood] == 0).all()


def test_attention_apply_identity_and_zero_maps():
    h = torch.randn(5, 3, generator=seeded_generator(8), dtype=DTYPE)
    _, _, w_g, w_f = _attention_params(3, 2, 9)
    eye = torch.eye(5, dtype=DTYPE)
    assert torch.allclose(attention_apply(eye, h, w_g, w_f), h @ w_g @ w_f, rtol=0, atol=1e-12)
    assert torch.equal(attention_apply(eye, h, w_g, torch.zeros_like(w_f)), torch.zeros(5, 3, dtype=DTYPE))


@pytest.mark.parametrize("seed", range(50))
def test_attention_apply_matches_loop_oracle(seed):
    g = seeded_generator(100 + seed)
    n = int(torch.randint(2, 11, (1,), generator=g))
    h = torch.randn(n, 3, generator=g, dtype=DTYPE)
    alpha = torch.softmax(torch.randn(n, n, generator=g, dtype=DTYPE), dim=-1)
    w_g = torch.randn(3, 2, generator=g, dtype=DTYPE)
    w_f = torch.randn(2, 3, generator=g, dtype=DTYPE)
    projected = h @ w_g
    expected = torch.zeros(n, 3, dtype=DTYPE)
    for i in range(n):
        mixed = sum(alpha[i, j] * projected[j] for j in range(n))
        expected[i] = mixed @ w_f
    assert torch.allclose(attention_apply(alpha, h, w_g, w_f), expected, rtol=0, atol=1e-12)


def _decoder(n: int = 5, widths=(4, 3), latent_dim: int = 2, seed: int = 0) -> SAGNNDecoder:
    torch.manual_seed(seed)
    encoder = EncoderConfig(n=n, d=widths[-1], latent_dim=latent_dim)
    return SAGNNDecoder(encoder, DecoderConfig(layer_widths=list(widths)))


def _latent(m: int, n: int, d_z: int, seed: int = 0) -> torch.Tensor:
    return torch.randn(m, n, d_z, generator=seeded_generator(seed), dtype=DTYPE)


def test_closed_gate_ignores_attention_parameters():
    """λ = 0이면 첫 순전파는 어텐션 파라미터와 무관"""
    decoder = _decoder()
    z = _latent(3, 5, 2)
    a = _random_soft_adjacency(5, seeded_generator(11))
    before = decoder(z, a)
    with torch.no_grad():
        for layer in decoder.layers:
            for p in (layer.w_l, layer.w_r, layer.w_g, layer.w_f):
                p.mul_(-3.0).add_(0.7)
    assert torch.equal(decoder(z, a), before)


def test_closed_gate_without_skip_is_a_gcn_stack():
    decoder = _decoder()
    with torch.no_grad():
        for layer in decoder.layers:
            layer.skip_weight.zero_()
    z = _latent(2, 5, 2, seed=1)
    a = _random_soft_adjacency(5, seeded_generator(12))
    a_tilde = normalize_adjacency(a).a_tilde
    first, last = decoder.layers
    hidden = torch.tanh(a_tilde @ z) @ first.weight
    expected = torch.sigmoid(a_tilde @ hidden @ last.weight)
    assert torch.allclose(decoder(z, a), expected, rtol=0, atol=1e-12)


def test_empty_graph_decodes_nodes_independently():
    """A = 0이면 Ã = I이고 한 노드의 잠재값은 다른 노드 출력에 영향이 없음"""
    decoder = _decoder()
    with torch.no_grad():
        for layer in decoder.layers:
            layer.gate.fill_(0.8)
    a = torch.zeros(5, 5, dtype=DTYPE)
    assert torch.equal(graph_context(a).a_tilde, torch.eye(5, dtype=DTYPE))
    z = _latent(1, 5, 2, seed=2)
    changed = z.clone()
    changed[0, 0] += 1.0
    before, after = decoder(z, a), decoder(changed, a)
    assert torch.equal(before[:, 1:], after[:, 1:])
    assert not torch.equal(before[:, 0], after[:, 0])


def test_sigmoid_output_stays_in_unit_interval():
    decoder = _decoder()
    out = decoder(_latent(4, 5, 2, seed=3) * 3, _random_soft_adjacency(5, seeded_generator(13)))
    assert out.shape == (4, 5, 3)
    assert ((out > 0) & (out < 1)).all()


def test_data_point_wise_latent_is_projected_to_nodes():
    config = small_model_config(latent_mode="data-point-wise")
    torch.manual_seed(0)
    decoder = SAGNNDecoder(config.encoder, config.decoder)
    z = torch.randn(2, 4, generator=seeded_generator(4), dtype=DTYPE)
    assert decoder.node_features(z).shape == (2, 5, 1)
    assert decoder(z, torch.zeros(5, 5, dtype=DTYPE)).shape == (2, 5, 3)


def test_decoder_gradient_matches_finite_differences():
    """5 노드, 2 레이어 디코더의 모든 파라미터와 A에 대한 기울기 검증"""
    decoder = _decoder(seed=4)
    with torch.no_grad():
        for layer in decoder.layers:
            layer.gate.fill_(0.5)
    z = _latent(2, 5, 2, seed=5)
    names = [name for name, _ in decoder.named_parameters()]
    params = tuple(p.detach().clone().requires_grad_(True) for p in decoder.parameters())
    a = (_random_soft_adjacency(5, seeded_generator(14)) * 0.8 + 0.1).requires_grad_(True)
    v = (torch.rand(5, 5, generator=seeded_generator(15), dtype=DTYPE) + 0.2).fill_diagonal_(1.0)

    def output(a_soft, *values):
        return functional_call(decoder, dict(zip(names, values)), (z, a_soft, v)).sum()

    assert gradcheck(output, (a, *params), eps=1e-6, atol=1e-6, rtol=1e-3)
