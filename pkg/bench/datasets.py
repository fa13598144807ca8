"""설정 기반 데이터셋 구성 - DatasetConfig로부터 학습/평가 데이터 준비

Build training and evaluation data from a DatasetConfig: Karate patterns (generated or
read from a directory), an edge-list graph (the bundled 18-node fixture by default) or
IDX images with optional downsampling and perturbation.
"""

from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from sagvae.errors import ConfigurationError
from sagvae.models.config import DatasetConfig
from sagvae.types import DatasetKind, DatasetSplit, Perturbation

from .graphs import GraphDataset, concat_datasets, load_fixture18, load_graph_dataset, perturb_graph_features
from .images import ImageDataset, downsample, load_idx_images, perturb_images, scaled_noise_pixels
from .karate import gen_karate_synthetic, load_karate_directory

AnyDataset = Union[GraphDataset, ImageDataset]


class PreparedData(BaseModel):
    """학습 입력, (섭동된 경우) 깨끗한 원본, 분할별 평가용 그래프 데이터셋

    Attributes:
        train (AnyDataset): 학습 입력
        clean (Optional[AnyDataset]): 섭동 전 원본 (이미지 섭동 시)
        evaluation (dict[str, GraphDataset]): 분할 이름별 엣지 평가 데이터
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    train: AnyDataset
    clean: Optional[AnyDataset] = None
    evaluation: dict[str, GraphDataset] = Field(default_factory=dict)


def _perturb_graph(ds: GraphDataset, cfg: DatasetConfig, seed: int) -> GraphDataset:
    if cfg.dropout_rate == 0 and cfg.noise_std == 0 and cfg.copies == 1:
        return ds
    return perturb_graph_features(ds, cfg.dropout_rate, cfg.noise_std, cfg.copies, seed)


def prepare_dataset(cfg: DatasetConfig, seed: int) -> PreparedData:
    match cfg.kind:
        case DatasetKind.KARATE:
            if cfg.path is not None:
                patterns = load_karate_directory(cfg.path)
            else:
                patterns = gen_karate_synthetic(seed, samples_per_pattern=cfg.samples_per_pattern)
            train = concat_datasets([p for p in patterns if p.split == DatasetSplit.TRAIN], name="karate-train")
            train = _perturb_graph(train, cfg, seed)
            evaluation = {str(DatasetSplit.TRAIN): train}
            held_out = [p for p in patterns if p.split == DatasetSplit.HELD_OUT]
            if held_out:
                evaluation[str(DatasetSplit.HELD_OUT)] = concat_datasets(held_out, name="karate-held-out")
            return PreparedData(train=train, evaluation=evaluation)

        case DatasetKind.GRAPH:
            if cfg.path is None:
                ds = load_fixture18()
            elif cfg.features_path is None:
                raise ConfigurationError("graph datasets need `features_path` next to the edge list `path`.")
            else:
                ds = load_graph_dataset(cfg.path, cfg.features_path)
            ds = _perturb_graph(ds, cfg, seed)
            return PreparedData(train=ds, evaluation={str(DatasetSplit.TRAIN): ds})

        case DatasetKind.IMAGES:
            if cfg.path is None:
                raise ConfigurationError("image datasets need the IDX image file as `path`.")
            clean = load_idx_images(cfg.path, cfg.labels_path, cfg.class_filter, cfg.limit)
            clean = downsample(clean, cfg.downsample)
            if cfg.perturbation == Perturbation.NONE:
                return PreparedData(train=clean)
            noisy = perturb_images(
                clean,
                cfg.perturbation,
                seed=seed,
                noise_pixels=scaled_noise_pixels(cfg.noise_pixels, cfg.downsample),
                mask_block=cfg.mask_block // cfg.downsample,
            )
            return PreparedData(train=noisy, clean=clean)

    raise ConfigurationError(f"unsupported dataset kind `{cfg.kind}`.")
