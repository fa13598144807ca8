"""SA-GNN 생성 네트워크 모듈 - p(X|Z, A)

정규화된 그래프 합성곱(Ã = D̂^-½ Â D̂^-½)과 이웃 마스크 + 엣지 가중치가 적용된
셀프 어텐션을 λ 게이트로 결합하고, 첫 레이어의 잠재 노드 특징 H^(1)을 모든 레이어에
스킵 연결로 더합니다.

    은닉 레이어:  H^(l+1) = σ(λ H̄ + Ã H) W + Ã H^(1) Ŵ
    최종 레이어:  H^(L+1) = σ_out((λ H̄ + Ã H) W + Ã H^(1) Ŵ)

SA-GNN generative network. Hidden layers apply the activation inside the sum, the
final layer applies the output activation to the whole sum.
"""

import torch
from pydantic import BaseModel, ConfigDict
from torch import nn

from sagvae.autodiff import DTYPE, elementwise, masked_softmax, matmul
from sagvae.errors import ConfigurationError, DimensionError, ParameterError
from sagvae.models.config import DecoderConfig, EncoderConfig
from sagvae.types import Activation, ElementwiseOp, LatentMode


class NormalizedAdjacency(BaseModel):
    """대칭 정규화 인접 행렬 Ã / symmetric normalized adjacency"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a_tilde: torch.Tensor


class GraphContext(BaseModel):
    """한 번의 디코딩에 쓰이는 그래프 정보

    Attributes:
        a_tilde (torch.Tensor): 정규화 인접 행렬 Ã
        neighbor_mask (torch.Tensor): N_i ∪ {i} 마스크 (Â > 0)
        attention_weights (torch.Tensor): 어텐션 softmax 가중치 V ⊙ Â
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a_tilde: torch.Tensor
    neighbor_mask: torch.Tensor
    attention_weights: torch.Tensor


def _with_self_loops(a_soft: torch.Tensor) -> torch.Tensor:
    if a_soft.dim() < 2 or a_soft.shape[-1] != a_soft.shape[-2]:
        raise DimensionError(f"adjacency must be square, got {tuple(a_soft.shape)}.")
    detached = a_soft.detach()
    if (detached < 0).any() or (detached > 1).any():
        raise ParameterError("adjacency entries must lie in [0, 1].")
    eye = torch.eye(a_soft.shape[-1], dtype=a_soft.dtype, device=a_soft.device)
    # 입력 대각 성분은 무시하고 자기 루프를 1로 고정
    return a_soft * (1.0 - eye) + eye


def normalize_adjacency(a_soft: torch.Tensor) -> NormalizedAdjacency:
    """Ã = D̂^-½ (A + I) D̂^-½

    자기 루프 덕분에 모든 차수는 1 이상입니다. a_soft에 대해 미분 가능합니다.

    Normalized adjacency with self-loops; differentiable in ``a_soft``.
    """
    a_hat = _with_self_loops(a_soft)
    d_inv_sqrt = a_hat.sum(dim=-1).rsqrt()
    a_tilde = d_inv_sqrt.unsqueeze(-1) * a_hat * d_inv_sqrt.unsqueeze(-2)
    return NormalizedAdjacency(a_tilde=a_tilde)


def graph_context(a_soft: torch.Tensor, v: torch.Tensor | None = None) -> GraphContext:
    """디코더 입력 그래프 구성

    학습 중의 완화된 A에서는 모든 쌍이 이웃(Â > 0)이 되므로, 어텐션 가중치에 V와 함께
    Â를 곱해 엣지 신뢰도를 반영합니다. 평가 시 0/1 A에서는 마스크가 곧 인접 행렬입니다.

    Under a relaxed A every pair is a neighbour, so attention weights are V ⊙ Â; with a
    hard A the mask is the literal adjacency.
    """
    a_hat = _with_self_loops(a_soft)
    weights = a_hat if v is None else elementwise(ElementwiseOp.MUL, v, a_hat)
    return GraphContext(
        a_tilde=normalize_adjacency(a_soft).a_tilde,
        neighbor_mask=a_hat.detach() > 0,
        attention_weights=weights,
    )


def attention_scores(
        h: torch.Tensor,
        neighbor_mask: torch.Tensor,
        v: torch.Tensor | None,
        w_l: torch.Tensor,
        w_r: torch.Tensor,
) -> torch.Tensor:
    """e_ij = (h_i W_l)(h_j W_r)ᵀ, α_ij = exp(e_ij) V_ij / Σ_{k ∈ N_i ∪ {i}} exp(e_ik) V_ik

    마스크의 대각은 항상 포함됩니다. v가 None이면 가중치 없는 softmax입니다.

    Edge-weighted attention over each node's neighbourhood (self always included).
    """
    n = h.shape[-2]
    mask = neighbor_mask.to(torch.bool) | torch.eye(n, dtype=torch.bool, device=h.device)
    left = matmul(h, w_l)
    right = matmul(h, w_r)
    relevance = matmul(left, right.transpose(-1, -2))
    return masked_softmax(relevance, mask, weights=v)


def attention_apply(alpha: torch.Tensor, h: torch.Tensor, w_g: torch.Tensor, w_f: torch.Tensor) -> torch.Tensor:
    """H̄ = [α (H W_g)] W_f"""
    return matmul(matmul(alpha, matmul(h, w_g)), w_f)


def activate(x: torch.Tensor, activation: Activation) -> torch.Tensor:
    if activation == Activation.IDENTITY:
        return x
    return elementwise(ElementwiseOp(activation.value), x)


class SAGNNLayer(nn.Module):
    """SA-GNN 레이어 하나

    λ는 레이어마다 하나의 학습 가능한 스칼라이며 0으로 시작하므로, 초기 순전파는
    어텐션이 없는 GCN + 스킵 연결과 정확히 같습니다. Ŵ는 레이어마다 따로 둡니다.

    One SA-GNN layer with its own gate λ (initialized to ``lambda_init``) and its own
    skip weight Ŵ.
    """

    def __init__(
            self,
            in_width: int,
            out_width: int,
            skip_width: int,
            attention_width: int,
            activation: Activation,
            final: bool,
            lambda_init: float = 0.0,
    ):
        super().__init__()
        self.activation = activation
        self.final = final
        self.weight = nn.Parameter(torch.empty(in_width, out_width, dtype=DTYPE))
        self.skip_weight = nn.Parameter(torch.empty(skip_width, out_width, dtype=DTYPE))
        self.w_l = nn.Parameter(torch.empty(in_width, attention_width, dtype=DTYPE))
        self.w_r = nn.Parameter(torch.empty(in_width, attention_width, dtype=DTYPE))
        self.w_g = nn.Parameter(torch.empty(in_width, attention_width, dtype=DTYPE))
        self.w_f = nn.Parameter(torch.empty(attention_width, in_width, dtype=DTYPE))
        self.gate = nn.Parameter(torch.tensor(float(lambda_init), dtype=DTYPE))
        for p in (self.weight, self.skip_weight, self.w_l, self.w_r, self.w_g, self.w_f):
            nn.init.xavier_uniform_(p)

    def forward(self, h: torch.Tensor, h1: torch.Tensor, graph: GraphContext) -> torch.Tensor:
        alpha = attention_scores(h, graph.neighbor_mask, graph.attention_weights, self.w_l, self.w_r)
        h_bar = attention_apply(alpha, h, self.w_g, self.w_f)
        mixed = elementwise(
            ElementwiseOp.ADD,
            elementwise(ElementwiseOp.MUL, self.gate, h_bar),
            matmul(graph.a_tilde, h),
        )
        skip = matmul(matmul(graph.a_tilde, h1), self.skip_weight)
        if self.final:
            return activate(elementwise(ElementwiseOp.ADD, matmul(mixed, self.weight), skip), self.activation)
        return elementwise(ElementwiseOp.ADD, matmul(activate(mixed, self.activation), self.weight), skip)


class SAGNNDecoder(nn.Module):
    """SA-GNN 디코더 스택

    차원별 모드에서는 z [m, n, d_z]를 그대로 H^(1)으로 쓰고, 데이터 포인트별 모드에서는
    완전연결층으로 n 차원에 사상한 뒤 [m, n, 1]로 펼칩니다.

    Decoder stack. Dimension-wise latents are used as H^(1) directly; data-point-wise
    latents go through a linear map to n dimensions and are expanded to [m, n, 1].
    """

    def __init__(self, encoder: EncoderConfig, cfg: DecoderConfig):
        super().__init__()
        self.n = encoder.n
        self.latent_mode = encoder.latent_mode
        if self.latent_mode == LatentMode.DIMENSION_WISE:
            self.latent_projection = None
            node_width = encoder.latent_dim
        else:
            self.latent_projection = nn.Linear(encoder.latent_width, encoder.n, dtype=DTYPE)
            node_width = 1
        self.node_width = node_width

        layers = []
        in_width = node_width
        for i, out_width in enumerate(cfg.layer_widths):
            final = i == len(cfg.layer_widths) - 1
            layers.append(SAGNNLayer(
                in_width=in_width,
                out_width=out_width,
                skip_width=node_width,
                attention_width=cfg.attention_width_for(in_width),
                activation=cfg.output_activation if final else cfg.hidden_activation,
                final=final,
                lambda_init=cfg.lambda_init,
            ))
            in_width = out_width
        self.layers = nn.ModuleList(layers)

    def node_features(self, z: torch.Tensor) -> torch.Tensor:
        """잠재 샘플을 H^(1) [m, n, d1]로 바꿉니다. / latent sample to H^(1)"""
        if self.latent_projection is None:
            if z.dim() != 3 or z.shape[1] != self.n or z.shape[2] != self.node_width:
                raise ConfigurationError(
                    f"dimension-wise latent must be [m, {self.n}, {self.node_width}], got {tuple(z.shape)}."
                )
            return z
        if z.dim() != 2 or z.shape[1] != self.latent_projection.in_features:
            raise ConfigurationError(
                f"data-point-wise latent must be [m, {self.latent_projection.in_features}], got {tuple(z.shape)}."
            )
        return self.latent_projection(z).unsqueeze(-1)

    def decode(self, z: torch.Tensor, a_soft: torch.Tensor, v: torch.Tensor | None = None) -> torch.Tensor:
        if a_soft.shape[-1] != self.n:
            raise ConfigurationError(f"adjacency is {tuple(a_soft.shape)} but the decoder has n={self.n}.")
        graph = graph_context(a_soft, v)
        h1 = self.node_features(z)
        h = h1
        for layer in self.layers:
            h = layer(h, h1, graph)
        return h

    forward = decode
