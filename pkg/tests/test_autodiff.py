import math

import pytest
import torch
from torch.autograd import gradcheck

from sagvae.autodiff import DTYPE, assert_finite, backward, elementwise, masked_softmax, matmul, seeded_generator, tensor
from sagvae.errors import (
    BackwardStateError,
    BroadcastError,
    DegenerateRowError,
    DimensionError,
    NonFiniteError,
    NumericDomainError,
)


def test_matmul_identity_and_known_product():
    """I₂·M = M, [[1,2],[3,4]]·[[5,6],[7,8]] = [[19,22],[43,50]]"""
    m = tensor([[1.5, -2.0], [0.25, 4.0]])
    assert torch.equal(matmul(torch.eye(2, dtype=DTYPE), m), m)
    product = matmul(tensor([[1, 2], [3, 4]]), tensor([[5, 6], [7, 8]]))
    assert torch.equal(product, tensor([[19, 22], [43, 50]]))


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(torch.ones(2, 3, dtype=DTYPE), torch.ones(2, 3, dtype=DTYPE))


def test_sigmoid_at_zero_and_its_gradient():
    x = tensor([0.0], requires_grad=True)
    y = elementwise("sigmoid", x)
    backward(y.sum())
    assert y.item() == 0.5
    assert x.grad.item() == pytest.approx(0.25, abs=1e-15)


def test_exp_inverts_log():
    x = tensor([0.1, 1.0, 7.5])
    assert torch.allclose(elementwise("exp", elementwise("log", x)), x, rtol=1e-14, atol=0)


@pytest.mark.parametrize("op", ["add", "mul", "sub"])
def test_binary_ops_broadcast_along_leading_dimension(op):
    x = torch.ones(4, 3, dtype=DTYPE)
    y = torch.arange(3, dtype=DTYPE)
    assert elementwise(op, x, y).shape == (4, 3)
    with pytest.raises(BroadcastError):
        elementwise(op, x, torch.ones(4, dtype=DTYPE))


def test_scale_and_relu():
    x = tensor([-1.0, 2.0])
    assert torch.equal(elementwise("scale", x, 3), tensor([-3.0, 6.0]))
    assert torch.equal(elementwise("relu", x), tensor([0.0, 2.0]))


def test_numeric_domain_errors():
    with pytest.raises(NumericDomainError):
        elementwise("log", tensor([1.0, 0.0]))
    with pytest.raises(NumericDomainError):
        elementwise("exp", tensor([1000.0]))


def test_masked_softmax_equal_logits_over_three_entries():
    logits = torch.zeros(1, 4, dtype=DTYPE)
    mask = torch.tensor([[True, True, False, True]])
    out = masked_softmax(logits, mask)
    assert torch.allclose(out, tensor([[1 / 3, 1 / 3, 0.0, 1 / 3]]), atol=1e-15)
    assert out[0, 2].item() == 0.0


def test_masked_softmax_singleton_and_known_row():
    single = masked_softmax(tensor([[5.0, -3.0, 2.0]]), torch.tensor([[False, True, False]]))
    assert torch.equal(single, tensor([[0.0, 1.0, 0.0]]))

    row = masked_softmax(tensor([[2.0, 1.0, 0.0]]), torch.ones(1, 3, dtype=torch.bool))
    assert row[0].tolist() == pytest.approx([0.6652, 0.2447, 0.0900], abs=5e-5)


def test_masked_softmax_rows_are_simplices_over_mask():
    g = torch.Generator().manual_seed(3)
    logits = torch.randn(8, 8, generator=g, dtype=DTYPE) * 30
    mask = torch.rand(8, 8, generator=g) > 0.5
    mask |= torch.eye(8, dtype=torch.bool)
    out = masked_softmax(logits, mask)
    assert torch.allclose(out.sum(dim=-1), torch.ones(8, dtype=DTYPE), atol=1e-9)
    assert (out[~mask] == 0).all()


def test_masked_softmax_weights_of_one_change_nothing():
    g = torch.Generator().manual_seed(4)
    logits = torch.randn(5, 5, generator=g, dtype=DTYPE)
    mask = torch.ones(5, 5, dtype=torch.bool)
    assert torch.equal(masked_softmax(logits, mask, torch.ones(5, 5, dtype=DTYPE)), masked_softmax(logits, mask))


def test_masked_softmax_rejects_empty_row():
    with pytest.raises(DegenerateRowError):
        masked_softmax(torch.zeros(2, 2, dtype=DTYPE), torch.tensor([[True, False], [False, False]]))


def test_backward_of_sum_and_product():
    x = torch.randn(2, 3, dtype=DTYPE, requires_grad=True)
    backward(x.sum())
    assert torch.equal(x.grad, torch.ones(2, 3, dtype=DTYPE))

    x = torch.randn(4, dtype=DTYPE, requires_grad=True)
    y = torch.randn(4, dtype=DTYPE)
    backward((x * y).sum())
    assert torch.equal(x.grad, y)


def test_backward_requires_recorded_scalar_loss():
    with pytest.raises(BackwardStateError):
        backward(tensor(1.0))
    x = torch.ones(3, dtype=DTYPE, requires_grad=True)
    with pytest.raises(BackwardStateError):
        backward(x * 2)


def test_backward_checks_parameter_gradients():
    p = torch.nn.Parameter(torch.ones(2, dtype=DTYPE))
    weights = tensor([1.0, math.inf])
    with pytest.raises(NonFiniteError):
        backward((p * weights).sum(), [p])


def test_assert_finite():
    assert_finite(tensor([1.0, 2.0]))
    with pytest.raises(NonFiniteError, match="probs"):
        assert_finite(tensor([1.0, math.nan]), "probs")


def _primitive_cases(seed: int):
    """시드 하나에 대한 (함수, 입력) 목록; 입력은 모두 requires_grad"""
    g = seeded_generator(seed)

    def randn(*shape):
        return torch.randn(*shape, generator=g, dtype=DTYPE)

    def leaf(t):
        return t.detach().requires_grad_(True)

    away_from_zero = randn(3, 4)
    away_from_zero = away_from_zero + 0.05 * torch.sign(away_from_zero)
    mask = torch.rand(4, 4, generator=g, dtype=DTYPE) < 0.6
    mask.fill_diagonal_(True)
    weights = torch.rand(4, 4, generator=g, dtype=DTYPE) + 0.2
    return [
        (lambda x, y: matmul(x, y), (leaf(randn(3, 4)), leaf(randn(4, 2)))),
        (lambda x, y: matmul(x, y), (leaf(randn(2, 3, 4)), leaf(randn(2, 4, 2)))),
        (lambda x, y: elementwise("add", x, y), (leaf(randn(3, 4)), leaf(randn(4)))),
        (lambda x, y: elementwise("mul", x, y), (leaf(randn(3, 4)), leaf(randn(3, 4)))),
        (lambda x, y: elementwise("sub", x, y), (leaf(randn(3, 4)), leaf(randn(1, 4)))),
        (lambda x: elementwise("scale", x, -1.7), (leaf(randn(3, 4)),)),
        (lambda x: elementwise("exp", x), (leaf(randn(3, 4)),)),
        (lambda x: elementwise("log", x), (leaf(torch.rand(3, 4, generator=g, dtype=DTYPE) + 0.5),)),
        (lambda x: elementwise("sigmoid", x), (leaf(randn(3, 4)),)),
        (lambda x: elementwise("tanh", x), (leaf(randn(3, 4)),)),
        (lambda x: elementwise("relu", x), (leaf(away_from_zero),)),
        (lambda x, w: masked_softmax(x, mask, w), (leaf(randn(4, 4)), leaf(weights))),
    ]


@pytest.mark.parametrize("seed", range(100))
def test_primitive_gradients_match_finite_differences(seed):
    """모든 기본 연산의 야코비안을 중심 유한 차분과 비교 (시드별 무작위 입력)"""
    for fn, inputs in _primitive_cases(seed):
        assert gradcheck(fn, inputs, eps=1e-6, atol=1e-8, rtol=1e-4)
