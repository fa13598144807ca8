"""이미지 데이터셋 모듈 - IDX 파일 입출력, 다운샘플링, 픽셀 섭동

IDX 형식 (big-endian):

    [0000] 32비트 매직 넘버   0x00000803 (이미지) / 0x00000801 (레이블)
    [0004] 32비트 항목 수
    [0008] 32비트 행 수, [0012] 32비트 열 수 (이미지 파일만)
    [이후] unsigned byte 데이터

Image datasets - IDX reading and writing, downsampling and pixel perturbations.
Files ending in ``.gz`` are read and written through gzip.
"""

import gzip
import math
import struct
from collections.abc import Iterable
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, model_validator

from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.errors import ClassNotFoundError, DatasetFileMissingError, DimensionError, IdxFormatError, ParameterError
from sagvae.types import Perturbation
from utils import Logger

logger = Logger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IMAGE_SIDE = 28
MASK_FILL = 1.0


class ImageDataset(BaseModel):
    """[0, 1] 범위로 정규화된 정사각형 흑백 이미지와 레이블

    Attributes:
        images (torch.Tensor): [m, side·side]
        labels (torch.Tensor): [m] 정수 레이블
        side (int): 이미지 한 변 길이 (기본 28)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    images: torch.Tensor
    labels: torch.Tensor
    side: int = IMAGE_SIDE

    @model_validator(mode="after")
    def _check(self):
        if self.images.dim() != 2 or self.images.shape[1] != self.side * self.side:
            raise DimensionError(f"images must be [m, {self.side * self.side}], got {tuple(self.images.shape)}.")
        if self.labels.shape != (self.images.shape[0],):
            raise DimensionError(f"expected {self.images.shape[0]} labels, got {tuple(self.labels.shape)}.")
        if self.images.numel() and (self.images.min() < 0 or self.images.max() > 1):
            raise ParameterError("pixel values must lie in [0, 1].")
        return self

    @property
    def m(self) -> int:
        return self.images.shape[0]

    @property
    def n(self) -> int:
        return self.side * self.side

    def training_tensor(self) -> torch.Tensor:
        return self.images

    def of_class(self, cls: int) -> torch.Tensor:
        selected = self.images[self.labels == cls]
        if selected.shape[0] == 0:
            raise ClassNotFoundError(f"class {cls} is absent from the dataset.")
        return selected

    def with_images(self, images: torch.Tensor) -> "ImageDataset":
        return ImageDataset(images=images, labels=self.labels, side=self.side)


def _read_bytes(path: str | Path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DatasetFileMissingError(f"IDX file not found: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse_idx(data: bytes, magic: int, dims: int) -> tuple[tuple[int, ...], np.ndarray]:
    header = 4 + 4 * dims
    if len(data) < 4:
        raise IdxFormatError(f"IDX file ends before the magic number ({len(data)} bytes).", offset=len(data))
    (found,) = struct.unpack(">I", data[:4])
    if found != magic:
        raise IdxFormatError(f"bad IDX magic 0x{found:08x}, expected 0x{magic:08x}.", offset=0)
    if len(data) < header:
        raise IdxFormatError(f"IDX header truncated at byte {len(data)}.", offset=len(data))
    shape = struct.unpack(f">{dims}I", data[4:header])
    expected = header + math.prod(shape)
    if len(data) < expected:
        raise IdxFormatError(
            f"IDX payload truncated: {len(data)} bytes, expected {expected}.",
            offset=len(data),
        )
    payload = np.frombuffer(data, dtype=np.uint8, count=math.prod(shape), offset=header)
    return shape, payload.reshape(shape)


def load_idx_images(
        images_path: str | Path,
        labels_path: Optional[str | Path] = None,
        class_filter: Iterable[int] = (),
        limit: Optional[int] = None,
) -> ImageDataset:
    """IDX 이미지/레이블 파일을 읽어 픽셀을 [0, 1]로 정규화합니다.

    class_filter가 비어 있으면 모든 클래스를 유지합니다. 레이블 파일이 없으면 모든
    레이블을 0으로 둡니다. limit은 필터링 후 앞에서부터 자를 개수입니다.

    Raises:
        IdxFormatError: 매직 넘버가 다르거나 파일이 잘린 경우 (바이트 오프셋 포함)
        DatasetFileMissingError: 파일이 없는 경우
    """
    shape, pixels = _parse_idx(_read_bytes(images_path), IDX_IMAGES_MAGIC, dims=3)
    count, rows, cols = shape
    if rows != cols:
        raise IdxFormatError(f"images must be square, got {rows}x{cols}.", offset=8)
    if labels_path is not None:
        (label_count,), labels = _parse_idx(_read_bytes(labels_path), IDX_LABELS_MAGIC, dims=1)
        if label_count != count:
            raise IdxFormatError(f"{count} images but {label_count} labels.", offset=4)
    else:
        labels = np.zeros(count, dtype=np.uint8)

    images = torch.from_numpy(pixels.reshape(count, rows * cols).astype(np.float64) / 255.0)
    label_tensor = torch.from_numpy(labels.astype(np.int64))
    classes = sorted(set(class_filter))
    if classes:
        keep = torch.isin(label_tensor, torch.tensor(classes))
        images, label_tensor = images[keep], label_tensor[keep]
    if limit is not None:
        images, label_tensor = images[:limit], label_tensor[:limit]
    logger.info(f"IDX images loaded from {images_path}: m={images.shape[0]}, side={rows}, classes={classes or 'all'}")
    return ImageDataset(images=images.to(DTYPE), labels=label_tensor, side=rows)


def _write_bytes(path: str | Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as f:
        f.write(data)
    return path


def write_idx_images(images: torch.Tensor | np.ndarray, path: str | Path, side: Optional[int] = None) -> Path:
    """[0, 1] 이미지 [m, side·side]를 round(p·255) 바이트의 IDX 파일로 기록합니다."""
    values = np.asarray(images.detach().cpu() if isinstance(images, torch.Tensor) else images, dtype=np.float64)
    values = values.reshape(values.shape[0], -1)
    side = side or math.isqrt(values.shape[1])
    if side * side != values.shape[1]:
        raise DimensionError(f"cannot lay out {values.shape[1]} pixels as a square image.")
    pixels = np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = struct.pack(">4I", IDX_IMAGES_MAGIC, values.shape[0], side, side)
    return _write_bytes(path, header + pixels.tobytes())


def write_idx_labels(labels: torch.Tensor | np.ndarray, path: str | Path) -> Path:
    values = np.asarray(labels, dtype=np.uint8).reshape(-1)
    return _write_bytes(path, struct.pack(">2I", IDX_LABELS_MAGIC, values.shape[0]) + values.tobytes())


def downsample(ds: ImageDataset, factor: int = 2) -> ImageDataset:
    """factor×factor 평균 풀링 (28×28 → 14×14) / average pooling"""
    if factor == 1:
        return ds
    if factor < 1 or ds.side % factor:
        raise ParameterError(f"side {ds.side} is not divisible by the downsampling factor {factor}.")
    grid = ds.images.reshape(ds.m, 1, ds.side, ds.side)
    pooled = F.avg_pool2d(grid, kernel_size=factor)
    side = ds.side // factor
    return ImageDataset(images=pooled.reshape(ds.m, side * side), labels=ds.labels, side=side)


def scaled_noise_pixels(n_pixels: int, factor: int) -> int:
    """다운샘플링 면적 비율에 맞춘 노이즈 픽셀 수 / noise count scaled by area"""
    return int(round(n_pixels / (factor * factor)))


def _generator(seed: int | torch.Generator) -> torch.Generator:
    return seed if isinstance(seed, torch.Generator) else seeded_generator(seed)


def perturb_uniform(img: torch.Tensor, n_pixels: int, seed: int | torch.Generator = 0) -> torch.Tensor:
    """서로 다른 n_pixels개 위치를 U(0, 1) 값으로 바꿉니다.

    Raises:
        ParameterError: n_pixels가 음수이거나 픽셀 수보다 큰 경우
    """
    flat = img.reshape(-1)
    if not 0 <= n_pixels <= flat.numel():
        raise ParameterError(f"n_pixels must lie in [0, {flat.numel()}], got {n_pixels}.")
    generator = _generator(seed)
    out = flat.clone()
    positions = torch.randperm(flat.numel(), generator=generator)[:n_pixels]
    out[positions] = torch.rand(n_pixels, generator=generator, dtype=flat.dtype)
    return out.reshape(img.shape)


def perturb_mask(
        img: torch.Tensor,
        block: int = 6,
        seed: int | torch.Generator = 0,
        side: Optional[int] = None,
) -> torch.Tensor:
    """임의 위치에 block×block 흰색(1.0) 블록을 덮습니다. 블록은 항상 이미지 안에 있습니다."""
    side = side or math.isqrt(img.numel())
    if side * side != img.numel():
        raise DimensionError(f"cannot lay out {img.numel()} pixels as a square image.")
    if not 0 <= block <= side:
        raise ParameterError(f"block must lie in [0, {side}], got {block}.")
    if block == 0:
        return img.clone()
    generator = _generator(seed)
    top, left = torch.randint(0, side - block + 1, (2,), generator=generator).tolist()
    out = img.reshape(side, side).clone()
    out[top:top + block, left:left + block] = MASK_FILL
    return out.reshape(img.shape)


def perturb_images(
        ds: ImageDataset,
        perturbation: Perturbation,
        seed: int = 0,
        noise_pixels: int = 200,
        mask_block: int = 6,
) -> ImageDataset:
    """데이터셋의 모든 이미지에 같은 종류의 섭동을 적용합니다 (이미지마다 다른 위치)."""
    perturbation = Perturbation(perturbation)
    if perturbation == Perturbation.NONE:
        return ds
    generator = seeded_generator(seed)
    if perturbation == Perturbation.UNIFORM:
        rows = [perturb_uniform(img, noise_pixels, generator) for img in ds.images]
    else:
        rows = [perturb_mask(img, mask_block, generator, side=ds.side) for img in ds.images]
    return ds.with_images(torch.stack(rows) if rows else ds.images.clone())
