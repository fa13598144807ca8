"""그래프 데이터셋 모듈 - 엣지 리스트/노드 특징 입출력과 특징 섭동

엣지 리스트 CSV는 ``src,dst`` 헤더와 0-based 무방향 엣지 한 줄씩으로 구성됩니다.
노드 특징은 노드당 한 행의 CSV(샘플 하나) 또는 [m, n, d]로 쌓은 .npy 파일입니다.
.npy의 헤더(매직 문자열, 버전, dtype/shape 사전)는 numpy 형식 문서를 따릅니다.

Graph datasets - edge-list and node-feature I/O plus feature perturbation.
Edge lists are ``src,dst`` CSVs (0-based, undirected, one edge per line). Node features
are a CSV with one row per node (one sample) or a stacked [m, n, d] ``.npy`` file.
"""

from pathlib import Path
from typing import Optional

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, model_validator

from core.constants import FIXTURE18_EDGES_FILE, FIXTURE18_FEATURES_FILE, SAGVAE_DATA_DIR
from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.errors import DatasetFileMissingError, DimensionError, ParameterError
from sagvae.types import DatasetSplit
from utils import Logger

logger = Logger(__name__)


class GraphDataset(BaseModel):
    """노드 특징 샘플과 정답 인접 행렬

    Attributes:
        features (torch.Tensor): [m, n, d] 노드 특징
        adjacency (torch.Tensor): [n, n] 0/1 대칭 인접 행렬 (대각 0)
        node_labels (Optional[torch.Tensor]): 노드별 정수 레이블
        split (DatasetSplit): 학습용 / 학습에서 제외된 패턴
        name (str): 데이터셋 이름
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: torch.Tensor
    adjacency: torch.Tensor
    node_labels: Optional[torch.Tensor] = None
    split: DatasetSplit = DatasetSplit.TRAIN
    name: str = "graph"

    @model_validator(mode="after")
    def _check(self):
        if self.features.dim() != 3 or self.features.shape[0] < 1:
            raise DimensionError(f"features must be [m, n, d] with m >= 1, got {tuple(self.features.shape)}.")
        n = self.features.shape[1]
        if tuple(self.adjacency.shape) != (n, n):
            raise DimensionError(f"adjacency must be [{n}, {n}], got {tuple(self.adjacency.shape)}.")
        if not torch.isfinite(self.features).all():
            raise ParameterError("graph features must be finite.")
        if not torch.equal(self.adjacency, self.adjacency.T):
            raise ParameterError("adjacency must be symmetric.")
        if self.adjacency.diagonal().any():
            raise ParameterError("adjacency must have a zero diagonal.")
        if not ((self.adjacency == 0) | (self.adjacency == 1)).all():
            raise ParameterError("adjacency must be binary.")
        return self

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def d(self) -> int:
        return self.features.shape[2]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.triu(diagonal=1).sum())

    def training_tensor(self) -> torch.Tensor:
        return self.features.reshape(self.m, self.n * self.d)

    def mean_node_features(self) -> torch.Tensor:
        return self.features.mean(dim=0)


def concat_datasets(datasets: list[GraphDataset], name: str = "graph") -> GraphDataset:
    """같은 그래프 위의 여러 데이터셋을 샘플 축으로 이어 붙입니다."""
    if not datasets:
        raise ParameterError("no datasets to concatenate.")
    first = datasets[0]
    if any(not torch.equal(ds.adjacency, first.adjacency) for ds in datasets[1:]):
        raise ParameterError("datasets to concatenate must share one adjacency.")
    return GraphDataset(
        features=torch.cat([ds.features for ds in datasets], dim=0),
        adjacency=first.adjacency,
        node_labels=first.node_labels,
        split=first.split,
        name=name,
    )


def _require(path: str | Path) -> Path:
    path = Path(path)
    if not path.exists():
        raise DatasetFileMissingError(f"dataset file not found: {path}")
    return path


def load_edge_list(path: str | Path, n: Optional[int] = None) -> torch.Tensor:
    """``src,dst`` CSV를 대칭 0/1 인접 행렬로 읽습니다.

    n이 없으면 가장 큰 노드 번호 + 1을 사용합니다.

    Raises:
        DatasetFileMissingError: 파일이 없는 경우
        ParameterError: 자기 루프나 음수/범위 밖 노드 번호가 있는 경우
    """
    edges = np.loadtxt(_require(path), delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if edges.size == 0:
        edges = edges.reshape(0, 2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ParameterError(f"edge list {path} references nodes outside [0, {n}).")
    if (edges[:, 0] == edges[:, 1]).any():
        raise ParameterError(f"edge list {path} contains self-loops.")
    adjacency = torch.zeros(n, n, dtype=DTYPE)
    src, dst = torch.from_numpy(edges[:, 0]), torch.from_numpy(edges[:, 1])
    adjacency[src, dst] = 1.0
    adjacency[dst, src] = 1.0
    return adjacency


def write_edge_list(adjacency: torch.Tensor, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = torch.nonzero(torch.triu(adjacency, diagonal=1), as_tuple=True)
    np.savetxt(
        path,
        np.stack([rows.numpy(), cols.numpy()], axis=1),
        fmt="%d",
        delimiter=",",
        header="src,dst",
        comments="",
    )
    return path


def load_node_features(path: str | Path) -> torch.Tensor:
    """노드 특징을 [m, n, d]로 읽습니다.

    .npy는 [m, n, d] 또는 [n, d], CSV는 노드당 한 행(샘플 하나)입니다. 디렉터리를 넘기면
    그 안의 CSV들을 이름 순으로 샘플 축에 쌓습니다.
    """
    path = _require(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise DatasetFileMissingError(f"no feature CSV files in {path}")
        return torch.cat([load_node_features(f) for f in files], dim=0)
    if path.suffix == ".npy":
        values = np.load(path, allow_pickle=False)
    else:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if values.ndim == 2:
        values = values[None]
    if values.ndim != 3:
        raise DimensionError(f"node features in {path} must be 2-D or 3-D, got {values.ndim}-D.")
    return torch.from_numpy(np.ascontiguousarray(values, dtype="<f8")).to(DTYPE)


def write_node_features(features: torch.Tensor, path: str | Path) -> Path:
    """.npy이면 [m, n, d] 전체를, CSV이면 샘플 하나([n, d])를 기록합니다."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = features.detach().cpu().numpy().astype("<f8")
    if path.suffix == ".npy":
        np.save(path, values if values.ndim == 3 else values[None], allow_pickle=False)
        return path
    if values.ndim == 3:
        if values.shape[0] != 1:
            raise ParameterError("CSV holds a single sample; write stacked features to a .npy file.")
        values = values[0]
    np.savetxt(path, values, fmt="%.17g", delimiter=",")
    return path


def load_graph_dataset(
        edges_path: str | Path,
        features_path: str | Path,
        name: Optional[str] = None,
) -> GraphDataset:
    features = load_node_features(features_path)
    adjacency = load_edge_list(edges_path, n=features.shape[1])
    ds = GraphDataset(features=features, adjacency=adjacency, name=name or Path(edges_path).stem)
    logger.info(f"graph dataset `{ds.name}` loaded: m={ds.m}, n={ds.n}, d={ds.d}, edges={ds.edge_count}")
    return ds


def load_fixture18(data_dir: Optional[Path] = None) -> GraphDataset:
    """세 개의 6-노드 커뮤니티로 이루어진 번들 18-노드 그래프와 노드 특징"""
    data_dir = Path(data_dir or SAGVAE_DATA_DIR)
    return load_graph_dataset(data_dir / FIXTURE18_EDGES_FILE, data_dir / FIXTURE18_FEATURES_FILE, name="fixture18")


def perturb_graph_features(
        ds: GraphDataset,
        dropout_rate: float,
        noise_std: float,
        copies: int = 1,
        seed: int = 0,
) -> GraphDataset:
    """노드 행 드롭아웃 + 가우시안 잡음으로 섭동된 복사본들을 만듭니다.

    각 복사본은 노드 행마다 독립적으로 dropout_rate 확률로 행 전체를 0으로 만들고,
    남은 행에 N(0, noise_std²) 잡음을 더합니다. 인접 행렬은 바뀌지 않습니다.
    결과는 [copies·m, n, d]입니다.

    Each copy zeroes every node row with probability ``dropout_rate`` and adds
    N(0, noise_std²) to the remaining rows. The adjacency is unchanged.

    Raises:
        ParameterError: dropout_rate가 [0, 1) 밖이거나 noise_std < 0, copies < 1인 경우
    """
    if not 0.0 <= dropout_rate < 1.0:
        raise ParameterError(f"dropout_rate must lie in [0, 1), got {dropout_rate}.")
    if noise_std < 0:
        raise ParameterError(f"noise_std must be non-negative, got {noise_std}.")
    if copies < 1:
        raise ParameterError(f"copies must be positive, got {copies}.")

    generator = seeded_generator(seed)
    source = ds.features
    out = []
    for _ in range(copies):
        keep = (torch.rand(source.shape[:2], generator=generator, dtype=DTYPE) >= dropout_rate).to(DTYPE)
        noise = torch.randn(source.shape, generator=generator, dtype=DTYPE) * noise_std
        out.append((source + noise) * keep.unsqueeze(-1))
    return GraphDataset(
        features=torch.cat(out, dim=0),
        adjacency=ds.adjacency,
        node_labels=ds.node_labels,
        split=ds.split,
        name=f"{ds.name}-perturbed",
    )
