"""엣지 복원 지표와 베이스라인

예측 확률 행렬을 임계값으로 이진화한 뒤, 대각을 제외한 상삼각(무방향 쌍)만으로
정밀도/재현율/F1을 계산합니다.

Edge retrieval metrics on the strict upper triangle, plus the pairwise-product baseline.
"""

import torch
from pydantic import BaseModel
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from sagvae.errors import DimensionError


class EdgeMetrics(BaseModel):
    precision: float
    recall: float
    f1: float
    threshold: float
    tp: int
    fp: int
    fn: int


def _upper(matrix: torch.Tensor) -> torch.Tensor:
    rows, cols = torch.triu_indices(matrix.shape[0], matrix.shape[1], offset=1)
    return matrix[rows, cols]


def edge_prf(pred_probs: torch.Tensor, true_adj: torch.Tensor, threshold: float = 0.5) -> EdgeMetrics:
    """확률 ≥ threshold인 쌍을 예측 엣지로 보고 P/R/F1을 계산합니다.

    Binarize the strict upper triangle at ``threshold`` (inclusive) and score it
    against the true edges.

    Raises:
        DimensionError: 두 행렬의 크기가 다르거나 정사각이 아닌 경우
    """
    pred_probs = torch.as_tensor(pred_probs).detach()
    true_adj = torch.as_tensor(true_adj).detach()
    if pred_probs.dim() != 2 or pred_probs.shape[0] != pred_probs.shape[1]:
        raise DimensionError(f"predicted probabilities must be square, got {tuple(pred_probs.shape)}.")
    if pred_probs.shape != true_adj.shape:
        raise DimensionError(
            f"prediction is {tuple(pred_probs.shape)} but the true adjacency is {tuple(true_adj.shape)}."
        )
    y_pred = (_upper(pred_probs) >= threshold).long().numpy()
    y_true = (_upper(true_adj) > 0).long().numpy()

    _, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, average="binary", pos_label=1, zero_division=0
    )
    return EdgeMetrics(
        precision=float(precision),
        recall=float(recall),
        f1=float(f1),
        threshold=threshold,
        tp=int(tp),
        fp=int(fp),
        fn=int(fn),
    )


def pairwise_product_baseline(x_batch: torch.Tensor) -> torch.Tensor:
    """prob[s, t] = sigmoid(⟨x̄_s, x̄_t⟩), x̄는 샘플 평균 노드 특징

    x_batch는 [m, n, d] 또는 [n, d]입니다. / node features averaged over samples
    """
    x = torch.as_tensor(x_batch).detach()
    if x.dim() == 3:
        x = x.mean(dim=0)
    elif x.dim() != 2:
        raise DimensionError(f"node features must be [m, n, d] or [n, d], got {tuple(x.shape)}.")
    scores = x @ x.T
    return torch.sigmoid(0.5 * (scores + scores.T))
