"""벤치마크 하네스 - Karate 엣지 복원, 노이즈 특징 그래프 복원, 이미지 강건성 실험

각 실험은 시드 하나에 대해 지표 사전을 반환하고, run_benchmark가 여러 시드의 중앙값을
모읍니다. 시드별 실행은 같은 프로세스에서 차례로 돌리거나 Celery 작업으로 독립된 워커
프로세스에 나눠 보낼 수 있습니다.

Benchmark harness. Every experiment returns a metric dict for one seed; run_benchmark
aggregates medians over seeds, running them in-process or as Celery tasks.
"""

from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import torch
from pydantic import BaseModel, Field

from core.constants import FASHION_MNIST_CLASSES, FASHION_MNIST_NOISE_PIXELS, MNIST_NOISE_PIXELS
from sagvae.errors import ConfigurationError
from sagvae.model import build_model
from sagvae.models.config import DecoderConfig, EncoderConfig, ModelConfig, TrainConfig
from sagvae.training import train
from sagvae.types import Activation, DatasetSplit, LatentMode, ReconstructionLoss
from utils import Logger

from .graphs import concat_datasets, load_fixture18, perturb_graph_features
from .images import downsample, load_idx_images, perturb_images, scaled_noise_pixels
from .karate import gen_karate_synthetic
from .metrics import edge_prf, pairwise_product_baseline

logger = Logger(__name__)


class BenchmarkResult(BaseModel):
    experiment: str
    seeds: list[int]
    per_seed: list[dict[str, float]] = Field(default_factory=list)
    median: dict[str, float] = Field(default_factory=dict)


def graph_model_config(
        n: int,
        d: int,
        latent_mode: LatentMode = LatentMode.DIMENSION_WISE,
        use_graph: bool = True,
) -> ModelConfig:
    """실수값 노드 특징용 모델 (항등 출력, MSE 재구성)"""
    return ModelConfig(
        encoder=EncoderConfig(latent_mode=latent_mode, n=n, d=d),
        decoder=DecoderConfig(layer_widths=[16, d], output_activation=Activation.IDENTITY),
        use_graph=use_graph,
    )


def image_model_config(n: int, use_graph: bool = True) -> ModelConfig:
    """픽셀을 노드로 보는 차원별 이미지 모델 (sigmoid 출력)"""
    return ModelConfig(
        encoder=EncoderConfig(latent_mode=LatentMode.DIMENSION_WISE, n=n, d=1),
        decoder=DecoderConfig(layer_widths=[8, 1], output_activation=Activation.SIGMOID),
        use_graph=use_graph,
    )


def run_karate(
        seed: int,
        epochs: int = 1000,
        samples_per_pattern: int = 100,
        latent_mode: LatentMode = LatentMode.DIMENSION_WISE,
        beta_a: Optional[float] = None,
        threshold: float = 0.5,
        divergence_threshold: float = 1e6,
) -> dict[str, float]:
    """학습 패턴으로 학습하고 학습/held-out 패턴 모두에서 엣지 P/R/F1을 계산합니다."""
    patterns = gen_karate_synthetic(seed, samples_per_pattern=samples_per_pattern)
    train_ds = concat_datasets([p for p in patterns if p.split == DatasetSplit.TRAIN], name="karate-train")
    held_out = [p for p in patterns if p.split == DatasetSplit.HELD_OUT]

    model = build_model(graph_model_config(train_ds.n, train_ds.d, latent_mode), seed=seed)
    cfg = TrainConfig(
        epochs=epochs,
        seed=seed,
        beta_a=beta_a,
        divergence_threshold=divergence_threshold,
        reconstruction_loss=ReconstructionLoss.MEAN_SQUARED_ERROR,
    )
    model, report = train(train_ds, model, cfg)

    probs = model.edge_probabilities(train_ds.features)
    rows, cols = torch.triu_indices(train_ds.n, train_ds.n, offset=1)
    sagvae = edge_prf(probs, train_ds.adjacency, threshold)
    baseline = edge_prf(pairwise_product_baseline(train_ds.features), train_ds.adjacency, threshold)
    result = {
        "sagvae_precision": sagvae.precision,
        "sagvae_recall": sagvae.recall,
        "sagvae_f1": sagvae.f1,
        "baseline_f1": baseline.f1,
        "edge_prior_gap": float((probs[rows, cols] - cfg.prior_p).abs().mean()),
        "final_total": report.metrics.get("final_total", float("nan")),
    }
    if held_out:
        ds = concat_datasets(held_out, name="karate-held-out")
        result["sagvae_f1_held_out"] = edge_prf(model.edge_probabilities(ds.features), ds.adjacency, threshold).f1
        result["baseline_f1_held_out"] = edge_prf(pairwise_product_baseline(ds.features), ds.adjacency, threshold).f1
    return result


def run_noisy_graph(
        seed: int,
        epochs: int = 500,
        dropout_rate: float = 0.2,
        noise_std: float = 0.3,
        copies: int = 200,
        threshold: float = 0.5,
) -> dict[str, float]:
    """번들 18-노드 그래프의 특징에 행 드롭아웃과 가우시안 잡음을 넣고 엣지를 복원합니다."""
    ds = perturb_graph_features(load_fixture18(), dropout_rate, noise_std, copies, seed)
    model = build_model(graph_model_config(ds.n, ds.d), seed=seed)
    cfg = TrainConfig(epochs=epochs, seed=seed, reconstruction_loss=ReconstructionLoss.MEAN_SQUARED_ERROR)
    model, _ = train(ds, model, cfg)
    return {
        "sagvae_f1": edge_prf(model.edge_probabilities(ds.features), ds.adjacency, threshold).f1,
        "baseline_f1": edge_prf(pairwise_product_baseline(ds.features), ds.adjacency, threshold).f1,
    }


def run_image_robustness(
        seed: int,
        images_path: str | Path,
        labels_path: Optional[str | Path] = None,
        limit: int = 1000,
        epochs: int = 30,
        factor: int = 2,
        noise_pixels: int = MNIST_NOISE_PIXELS,
        class_filter: Sequence[int] = (),
) -> dict[str, float]:
    """노이즈 이미지로 같은 예산만큼 SAG-VAE와 A = I 대조군을 학습하고 재구성 MSE를 비교합니다."""
    clean = downsample(load_idx_images(images_path, labels_path, class_filter, limit), factor)
    noisy = perturb_images(clean, "uniform", seed=seed, noise_pixels=scaled_noise_pixels(noise_pixels, factor))
    cfg = TrainConfig(epochs=epochs, seed=seed)

    result = {}
    for label, use_graph in (("sagvae", True), ("ablation", False)):
        model = build_model(image_model_config(clean.n, use_graph=use_graph), seed=seed)
        model, _ = train(noisy, model, cfg)
        x_rec = model.reconstruct(noisy.images)
        result[f"{label}_mse_to_original"] = float(torch.mean((x_rec - clean.images) ** 2))
        result[f"{label}_mse_to_perturbed"] = float(torch.mean((x_rec - noisy.images) ** 2))
    return result


def run_fashion_robustness(
        seed: int,
        images_path: str | Path,
        labels_path: Optional[str | Path] = None,
        **kwargs: Any,
) -> dict[str, float]:
    """Fashion MNIST 변형: 의류 형태 클래스만 쓰고 노이즈 픽셀을 150개(28x28 기준)로 줄임"""
    if labels_path is None:
        raise ConfigurationError("the fashion-images experiment filters by class and needs a label file.")
    kwargs.setdefault("noise_pixels", FASHION_MNIST_NOISE_PIXELS)
    kwargs.setdefault("class_filter", FASHION_MNIST_CLASSES)
    return run_image_robustness(seed, images_path, labels_path, **kwargs)


EXPERIMENTS: dict[str, Callable[..., dict[str, float]]] = {
    "karate": run_karate,
    "noisy-graph": run_noisy_graph,
    "images": run_image_robustness,
    "fashion-images": run_fashion_robustness,
}


def run_experiment(experiment: str, seed: int, **kwargs: Any) -> dict[str, float]:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment `{experiment}`; choose from {sorted(EXPERIMENTS)}")
    logger.info(f"benchmark `{experiment}` started for seed {seed}")
    return EXPERIMENTS[experiment](seed, **kwargs)


def median_metrics(per_seed: list[dict[str, float]]) -> dict[str, float]:
    keys = sorted(set().union(*per_seed)) if per_seed else []
    return {k: float(np.median([r[k] for r in per_seed if k in r])) for k in keys}


def run_benchmark(experiment: str, seeds: list[int], use_celery: bool = False, **kwargs: Any) -> BenchmarkResult:
    """여러 시드로 실험을 실행하고 지표별 중앙값을 계산합니다.

    use_celery가 True이면 시드마다 Celery 작업을 하나씩 발행하고 결과를 기다립니다.
    """
    if use_celery:
        from celery import group

        import celery_app  # noqa: F401  브로커/큐 설정을 현재 앱으로 등록
        from tasks.pipeline.benchmark import benchmark_seed_task

        job = group(benchmark_seed_task.s(experiment, seed, kwargs) for seed in seeds)
        per_seed = job.apply_async().get()
    else:
        per_seed = [run_experiment(experiment, seed, **kwargs) for seed in seeds]
    result = BenchmarkResult(experiment=experiment, seeds=list(seeds), per_seed=per_seed, median=median_metrics(per_seed))
    logger.info(f"benchmark `{experiment}` medians over seeds {list(seeds)}: {result.median}")
    return result
