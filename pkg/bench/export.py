"""결과 내보내기 모듈 - 인접 행렬, 이미지 그리드, 지표 CSV, 손실 곡선

인접 확률 행렬은 CSV(%.17g, 그대로 다시 읽으면 비트 단위로 같음), 8비트 P5 그레이맵
(0 = 확률 0, 255 = 확률 1), matplotlib 히트맵 PNG로 기록합니다.

Exports: adjacency probabilities as CSV, P5 graymap and PNG heat map; image grids as
graymaps; metric and reconstruction CSVs; loss curves.
"""

import csv
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import torch  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from sagvae.autodiff import DTYPE  # noqa: E402
from sagvae.errors import DimensionError  # noqa: E402
from sagvae.training import TrainReport  # noqa: E402

from .metrics import EdgeMetrics  # noqa: E402

METRICS_COLUMNS = ("method", "precision", "recall", "f1")
RECONSTRUCTION_COLUMNS = ("index", "mse_to_original", "mse_to_perturbed")


class AdjacencyExport(BaseModel):
    csv_path: Path
    pgm_path: Path
    png_path: Optional[Path] = None


def _as_numpy(values) -> np.ndarray:
    if isinstance(values, torch.Tensor):
        values = values.detach().cpu().numpy()
    return np.asarray(values, dtype=np.float64)


def to_gray_bytes(matrix) -> np.ndarray:
    """[0, 1] 값을 round(p·255) 8비트로 / round(p·255) as uint8"""
    return np.rint(np.clip(_as_numpy(matrix), 0.0, 1.0) * 255.0).astype(np.uint8)


def write_pgm(matrix, path: str | Path) -> Path:
    """[h, w] 행렬을 바이너리 P5 그레이맵으로 기록합니다."""
    pixels = to_gray_bytes(matrix)
    if pixels.ndim != 2:
        raise DimensionError(f"graymap needs a 2-D matrix, got shape {pixels.shape}.")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    """write_pgm이 기록한 P5 파일을 uint8 [h, w]로 읽습니다."""
    with open(path, "rb") as f:
        data = f.read()
    magic, dims, maxval, payload = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path} is not an 8-bit P5 graymap")
    width, height = map(int, dims.split())
    return np.frombuffer(payload, dtype=np.uint8, count=width * height).reshape(height, width)


def plot_adjacency(probs, path: str | Path, title: str = "edge probabilities") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(_as_numpy(probs), cmap="gray", vmin=0.0, vmax=1.0, interpolation="nearest")
    fig.colorbar(image, ax=ax)
    ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def export_adjacency(probs, path: str | Path, png: bool = True) -> AdjacencyExport:
    """``<path>.csv``, ``<path>.pgm`` (및 ``<path>.png``)을 기록합니다.

    path의 확장자는 무시합니다. / the suffix of ``path`` is replaced
    """
    base = Path(path).with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    values = _as_numpy(probs)
    csv_path = base.with_suffix(".csv")
    np.savetxt(csv_path, values, fmt="%.17g", delimiter=",")
    result = AdjacencyExport(csv_path=csv_path, pgm_path=write_pgm(values, base.with_suffix(".pgm")))
    if png:
        result.png_path = plot_adjacency(values, base.with_suffix(".png"))
    return result


def load_adjacency_csv(path: str | Path) -> torch.Tensor:
    return torch.from_numpy(np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)).to(DTYPE)


def write_image_grid(images, path: str | Path, columns: int = 10, side: Optional[int] = None) -> Path:
    """[k, side·side] 이미지들을 columns열 그리드 한 장의 P5 그레이맵으로 기록합니다."""
    values = _as_numpy(images)
    values = values.reshape(values.shape[0], -1)
    side = side or math.isqrt(values.shape[1])
    if side * side != values.shape[1]:
        raise DimensionError(f"cannot lay out {values.shape[1]} pixels as a square image.")
    count = values.shape[0]
    columns = max(1, min(columns, count))
    rows = math.ceil(count / columns)
    grid = np.zeros((rows * side, columns * side), dtype=np.float64)
    for i, image in enumerate(values):
        r, c = divmod(i, columns)
        grid[r * side:(r + 1) * side, c * side:(c + 1) * side] = image.reshape(side, side)
    return write_pgm(grid, path)


def write_metrics_csv(rows: Sequence[tuple[str, EdgeMetrics]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        for method, m in rows:
            writer.writerow([method, f"{m.precision:.17g}", f"{m.recall:.17g}", f"{m.f1:.17g}"])
    return path


def write_reconstruction_csv(mse_to_original, mse_to_perturbed, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(RECONSTRUCTION_COLUMNS)
        for i, (orig, pert) in enumerate(zip(_as_numpy(mse_to_original), _as_numpy(mse_to_perturbed))):
            writer.writerow([i, f"{orig:.17g}", f"{pert:.17g}"])
    return path


def plot_loss_curves(report: TrainReport, path: str | Path) -> Optional[Path]:
    """에폭별 손실과 (있다면) 원본/노이즈 대비 재구성 MSE 곡선을 PNG로 그립니다."""
    if not report.epochs:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    epochs = [r.epoch for r in report.epochs]
    noise = [r for r in report.epochs if r.mse_to_original is not None]
    fig, axes = plt.subplots(1, 2 if noise else 1, figsize=(11 if noise else 6, 4), squeeze=False)

    ax = axes[0][0]
    ax.plot(epochs, [r.total for r in report.epochs], label="total")
    ax.plot(epochs, [r.recon for r in report.epochs], label="recon")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()

    if noise:
        ax = axes[0][1]
        ax.plot([r.epoch for r in noise], [r.mse_to_original for r in noise], label="vs original")
        ax.plot([r.epoch for r in noise], [r.mse_to_perturbed for r in noise], label="vs perturbed input")
        ax.set_xlabel("epoch")
        ax.set_ylabel("reconstruction MSE")
        ax.legend()

    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
