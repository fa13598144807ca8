"""텐서 연산 및 역전파 모듈 - SAG-VAE 네트워크 연산의 기반

모든 네트워크 연산은 float64 torch 텐서 위에서 수행되며, torch autograd 테이프가
연산 기록(ComputationRecord) 역할을 합니다. 이 모듈은 SAG-VAE가 사용하는 원시 연산
(matmul, 원소별 연산, 마스크 softmax)과 역전파 진입점을 형태/정의역 검증과 함께 제공합니다.

Tensor arithmetic and reverse-mode gradients for SAG-VAE

All network math runs on float64 torch tensors; the torch autograd tape is the
computation record and ``nn.Module.named_parameters`` is the parameter registry.
This module wraps the primitives SAG-VAE needs (matmul, elementwise ops, masked
softmax) with the shape and domain checks the model relies on, plus the backward
entry point.
"""

import math
from collections.abc import Iterable

import torch

from core.constants import SAGVAE_NUM_THREADS
from sagvae.errors import (
    BackwardStateError,
    BroadcastError,
    DegenerateRowError,
    DimensionError,
    NonFiniteError,
    NumericDomainError,
)
from sagvae.types import ElementwiseOp

DTYPE = torch.float64

# exp(709.78...) is the largest finite float64
_EXP_LIMIT = math.log(torch.finfo(DTYPE).max)

torch.set_num_threads(SAGVAE_NUM_THREADS)


def tensor(values, requires_grad: bool = False) -> torch.Tensor:
    """값을 float64 텐서로 변환합니다.

    Convert values to a float64 tensor.
    """
    return torch.as_tensor(values, dtype=DTYPE).clone().requires_grad_(requires_grad)


def seeded_generator(seed: int) -> torch.Generator:
    return torch.Generator().manual_seed(int(seed))


def assert_finite(t: torch.Tensor, name: str = "tensor") -> torch.Tensor:
    if not torch.isfinite(t).all():
        raise NonFiniteError(f"`{name}` contains NaN or Inf values (shape {tuple(t.shape)}).")
    return t


def matmul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """행렬 곱. 배치 차원은 torch 브로드캐스팅 규칙을 따릅니다.

    Matrix product ``a @ b``; leading batch dimensions broadcast as in torch.

    Raises:
        DimensionError: 내부 차원이 다르거나 피연산자가 1차원 이하인 경우
                        Inner dimensions differ or an operand is not a matrix
    """
    if a.dim() < 2 or b.dim() < 2:
        raise DimensionError(f"matmul needs matrices, got shapes {tuple(a.shape)} and {tuple(b.shape)}.")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"matmul inner dimensions differ: {tuple(a.shape)} and {tuple(b.shape)}."
        )
    try:
        return a @ b
    except RuntimeError as e:
        raise DimensionError(f"matmul batch dimensions incompatible: {tuple(a.shape)} and {tuple(b.shape)} ({e})")


def _check_broadcast(x: torch.Tensor, y: torch.Tensor) -> None:
    try:
        torch.broadcast_shapes(x.shape, y.shape)
    except RuntimeError:
        raise BroadcastError(f"cannot broadcast shapes {tuple(x.shape)} and {tuple(y.shape)}.")


def elementwise(op: ElementwiseOp | str, *args) -> torch.Tensor:
    """원소별 연산 디스패처

    이항 연산(add/mul/sub)은 두 텐서를, scale은 텐서와 실수 계수를, 나머지 단항 연산은
    텐서 하나를 인자로 받습니다. 기울기 규칙은 torch autograd가 등록합니다.

    Elementwise op dispatcher. Binary ops (add, mul, sub) take two tensors, ``scale``
    takes a tensor and a real factor, the unary ops take one tensor.

    Raises:
        BroadcastError: 이항 연산의 형태가 브로드캐스트 불가능한 경우
        NumericDomainError: log 입력이 양수가 아니거나 exp가 overflow하는 경우
    """
    op = ElementwiseOp(op)
    match op:
        case ElementwiseOp.ADD | ElementwiseOp.MUL | ElementwiseOp.SUB:
            x, y = args
            _check_broadcast(x, y)
            if op is ElementwiseOp.ADD:
                return x + y
            if op is ElementwiseOp.MUL:
                return x * y
            return x - y
        case ElementwiseOp.SCALE:
            x, factor = args
            return x * float(factor)
        case ElementwiseOp.EXP:
            (x,) = args
            if (x.detach() > _EXP_LIMIT).any():
                raise NumericDomainError(f"exp overflows for inputs above {_EXP_LIMIT:.2f}.")
            return torch.exp(x)
        case ElementwiseOp.LOG:
            (x,) = args
            if (x.detach() <= 0).any():
                raise NumericDomainError("log is only defined for strictly positive inputs.")
            return torch.log(x)
        case ElementwiseOp.SIGMOID:
            (x,) = args
            return torch.sigmoid(x)
        case ElementwiseOp.RELU:
            (x,) = args
            return torch.relu(x)
        case ElementwiseOp.TANH:
            (x,) = args
            return torch.tanh(x)


def masked_softmax(
        logits: torch.Tensor,
        mask: torch.Tensor,
        weights: torch.Tensor | None = None,
) -> torch.Tensor:
    """마지막 축에 대해 마스크된 위치만 포함하는 softmax

    각 행은 마스크가 True인 위치들 위의 단체(simplex)가 되며, False 위치는 정확히 0입니다.
    weights가 주어지면 exp(logit)·weight 형태의 가중 softmax를 계산합니다.
    수치 안정을 위해 마스크된 행 최대값을 빼고 계산합니다.

    Softmax over the last axis restricted to ``mask``. Each row is a simplex over its
    True positions and exactly 0 elsewhere. With ``weights`` the row is
    ``exp(logit)·w / Σ exp(logit)·w``. Stabilized by row-max subtraction.

    Args:
        logits (torch.Tensor): [..., n, n] 점수
        mask (torch.Tensor): logits에 브로드캐스트 가능한 bool 마스크
                             Boolean mask broadcastable to logits
        weights (torch.Tensor | None): 양의 가중치 (선택)
                                       Optional positive weights

    Raises:
        DegenerateRowError: True가 하나도 없는 행이 있는 경우
                            A row has no True entry
    """
    mask = mask.to(torch.bool)
    if not mask.any(dim=-1).all():
        raise DegenerateRowError("masked_softmax got a row without any unmasked entry.")
    scores = logits
    if weights is not None:
        _check_broadcast(logits, weights)
        tiny = torch.finfo(logits.dtype).tiny
        scores = scores + torch.log(weights.clamp_min(tiny))
    scores = scores.masked_fill(~mask, float("-inf"))
    row_max = scores.amax(dim=-1, keepdim=True).detach()
    numerator = torch.exp(scores - row_max)
    return numerator / numerator.sum(dim=-1, keepdim=True)


def backward(loss: torch.Tensor, parameters: Iterable[torch.nn.Parameter] | None = None) -> None:
    """스칼라 손실에서 역전파를 수행하고 파라미터 기울기의 유한성을 확인합니다.

    Run reverse-mode differentiation from a scalar loss. When ``parameters`` is given,
    every populated gradient is checked for finiteness.

    Raises:
        BackwardStateError: 손실이 스칼라가 아니거나 기록된 순전파가 없는 경우
        NonFiniteError: 파라미터 기울기에 NaN/Inf가 있는 경우
    """
    if loss.numel() != 1:
        raise BackwardStateError(f"backward needs a scalar loss, got shape {tuple(loss.shape)}.")
    if loss.grad_fn is None and not loss.requires_grad:
        raise BackwardStateError("backward called on a value with no recorded forward pass.")
    loss.reshape(()).backward()
    if parameters is not None:
        for i, p in enumerate(parameters):
            if p.grad is not None:
                assert_finite(p.grad, f"grad[{i}]")
