"""Karate 클럽 합성 데이터 생성 모듈

34명, 78개의 무방향 엣지로 이루어진 Zachary Karate 클럽 그래프(번들 엣지 리스트) 위에서
노드 특징을 생성합니다. 클럽(두 클래스)마다 가우시안 평균을 하나씩 두고, 패턴마다 고정된
랜덤 가중치를 가진 2-레이어 GCN으로 특징을 전파합니다.

    X = Ã · tanh(Ã X0 W1) · W2,   X0[s] ~ N(μ_class(s), I)

앞의 패턴들은 학습용, 마지막 패턴은 학습에서 제외(held-out)됩니다.

Karate club synthetic data. Node features are drawn from one Gaussian per club and
propagated through a two-layer GCN with fixed random weights per pattern. The last
pattern is held out from training.
"""

import math
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from core.constants import KARATE_EDGES_FILE, KARATE_LABELS_FILE, SAGVAE_DATA_DIR
from sagvae.autodiff import DTYPE
from sagvae.decoder import normalize_adjacency
from sagvae.errors import DatasetFileMissingError, ParameterError
from sagvae.types import DatasetSplit
from utils import Logger

from .graphs import GraphDataset, load_edge_list, load_node_features, write_edge_list, write_node_features

logger = Logger(__name__)

KARATE_NODES = 34
# 클래스 평균 N(0, 2²)
CLASS_MEAN_STD = 2.0
SPLITS_FILE = "splits.csv"


def load_karate_adjacency(data_dir: Optional[Path] = None) -> torch.Tensor:
    return load_edge_list(Path(data_dir or SAGVAE_DATA_DIR) / KARATE_EDGES_FILE, n=KARATE_NODES)


def load_karate_labels(data_dir: Optional[Path] = None) -> torch.Tensor:
    """노드별 클럽 (0 = Mr. Hi, 1 = Officer)"""
    path = Path(data_dir or SAGVAE_DATA_DIR) / KARATE_LABELS_FILE
    if not path.exists():
        raise DatasetFileMissingError(f"karate labels not found: {path}")
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    labels = np.zeros(KARATE_NODES, dtype=np.int64)
    labels[rows[:, 0]] = rows[:, 1]
    return torch.from_numpy(labels)


def gen_karate_synthetic(
        seed: int,
        n_patterns: int = 5,
        samples_per_pattern: int = 100,
        feature_dim: int = 8,
        data_dir: Optional[Path] = None,
) -> list[GraphDataset]:
    """패턴마다 하나씩 GraphDataset을 생성합니다.

    모든 난수는 seed로 만든 numpy Generator 하나에서 순서대로 뽑습니다.

    Args:
        seed (int): 난수 시드
        n_patterns (int): 가중치 패턴 수; 2 이상이면 마지막 패턴이 held-out
        samples_per_pattern (int): 패턴당 샘플 수
        feature_dim (int): 노드 특징 폭 d

    Returns:
        list[GraphDataset]: 각 [samples_per_pattern, 34, feature_dim]
    """
    if n_patterns < 1 or samples_per_pattern < 1 or feature_dim < 1:
        raise ParameterError("n_patterns, samples_per_pattern and feature_dim must be positive.")
    adjacency = load_karate_adjacency(data_dir)
    labels = load_karate_labels(data_dir)
    a_tilde = normalize_adjacency(adjacency).a_tilde.numpy()

    rng = np.random.default_rng(seed)
    class_means = rng.normal(0.0, CLASS_MEAN_STD, size=(2, feature_dim))
    node_means = class_means[labels.numpy()]
    scale = 1.0 / math.sqrt(feature_dim)

    datasets = []
    for p in range(n_patterns):
        w1 = rng.normal(0.0, scale, size=(feature_dim, feature_dim))
        w2 = rng.normal(0.0, scale, size=(feature_dim, feature_dim))
        x0 = node_means + rng.standard_normal((samples_per_pattern, KARATE_NODES, feature_dim))
        x = a_tilde @ np.tanh(a_tilde @ x0 @ w1) @ w2
        held_out = n_patterns > 1 and p == n_patterns - 1
        datasets.append(GraphDataset(
            features=torch.from_numpy(x).to(DTYPE),
            adjacency=adjacency,
            node_labels=labels,
            split=DatasetSplit.HELD_OUT if held_out else DatasetSplit.TRAIN,
            name=f"karate-pattern-{p + 1}",
        ))
    logger.info(
        f"karate synthetic data generated: seed={seed}, patterns={n_patterns}, "
        f"samples={samples_per_pattern}, d={feature_dim}"
    )
    return datasets


def save_karate_directory(datasets: list[GraphDataset], out_dir: str | Path) -> Path:
    """패턴별 ``pattern_<i>.npy``, 엣지 리스트, ``splits.csv``를 기록합니다."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_edge_list(datasets[0].adjacency, out_dir / KARATE_EDGES_FILE)
    labels = datasets[0].node_labels
    if labels is not None:
        np.savetxt(
            out_dir / KARATE_LABELS_FILE,
            np.stack([np.arange(len(labels)), labels.numpy()], axis=1),
            fmt="%d",
            delimiter=",",
            header="node,club",
            comments="",
        )
    with open(out_dir / SPLITS_FILE, "w", encoding="utf-8") as f:
        f.write("pattern,split\n")
        for i, ds in enumerate(datasets, start=1):
            write_node_features(ds.features, out_dir / f"pattern_{i}.npy")
            f.write(f"{i},{ds.split}\n")
    return out_dir


def load_karate_directory(path: str | Path) -> list[GraphDataset]:
    """save_karate_directory로 기록한 디렉터리를 다시 읽습니다."""
    path = Path(path)
    splits_path = path / SPLITS_FILE
    if not splits_path.exists():
        raise DatasetFileMissingError(f"karate data directory has no {SPLITS_FILE}: {path}")
    adjacency = load_karate_adjacency(path)
    labels = load_karate_labels(path) if (path / KARATE_LABELS_FILE).exists() else None
    rows = np.loadtxt(splits_path, delimiter=",", skiprows=1, dtype=str, ndmin=2)
    return [
        GraphDataset(
            features=load_node_features(path / f"pattern_{int(i)}.npy"),
            adjacency=adjacency,
            node_labels=labels,
            split=DatasetSplit(split),
            name=f"karate-pattern-{int(i)}",
        )
        for i, split in rows
    ]
