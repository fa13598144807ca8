"""메인 명령행 모듈 - SAG-VAE 학습, 평가, 샘플링, 데이터 생성, 벤치마크 진입점

하위 명령:
    train           YAML 실행 설정으로 학습 (보고서 CSV, 체크포인트, 손실 곡선)
    eval-edges      체크포인트의 엣지 확률을 정답 그래프와 비교 (지표 CSV + 인접 행렬 내보내기)
    baseline-edges  pairwise-product 베이스라인 지표
    reconstruct     섭동된 이미지 재구성 (이미지 그리드 + MSE 보고서)
    sample          클래스 통계에서 잠재 노이즈 샘플링
    gen-karate      Karate 합성 데이터 디렉터리 생성
    export-adj      인접 확률 행렬을 CSV/PGM/PNG로 내보내기
    bench           여러 시드로 벤치마크 실행 (로컬 또는 Celery)

종료 코드: 성공 0, SAG-VAE/입출력 오류 1, 사용법 오류 또는 입력 파일 없음 2

Command-line entry point. Exit status is 0 on success, 1 on SAG-VAE or I/O errors
and 2 on usage errors or missing input files.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import yaml
from pydantic import ValidationError

from bench.datasets import PreparedData, prepare_dataset
from bench.export import (
    export_adjacency,
    load_adjacency_csv,
    plot_loss_curves,
    write_image_grid,
    write_metrics_csv,
    write_reconstruction_csv,
)
from bench.harness import EXPERIMENTS, run_benchmark
from bench.images import downsample, load_idx_images, perturb_images, scaled_noise_pixels, write_idx_images
from bench.karate import gen_karate_synthetic, save_karate_directory
from bench.metrics import edge_prf, pairwise_product_baseline
from bench.sampling import fit_class_pixel_gaussians, noisy_sample
from core.constants import MNIST_NOISE_PIXELS, SAGVAE_DEFAULT_SEED, SAGVAE_OUTPUT_DIR
from sagvae.autodiff import seeded_generator
from sagvae.checkpoint import load_checkpoint
from sagvae.errors import ConfigurationError, DatasetFileMissingError, SagVaeError
from sagvae.model import build_model
from sagvae.models.config import DatasetConfig, TrainConfig, load_run_config
from sagvae.training import CHECKPOINT_NAME, train
from sagvae.types import DatasetKind, Perturbation
from utils import Logger

logger = Logger("main")


def _require_file(path: Optional[Path], flag: str) -> Path:
    if path is None:
        raise FileNotFoundError(f"{flag} is required")
    if not path.exists():
        raise FileNotFoundError(f"{flag}: file not found: {path}")
    return path


def _seed(args: argparse.Namespace, default: int) -> int:
    return args.seed if args.seed is not None else default


def _dataset_config(args: argparse.Namespace) -> tuple[DatasetConfig, int]:
    """--config의 dataset 섹션 또는 --edges/--features/--karate-dir 플래그로 데이터셋 설정을 만듭니다."""
    if args.config is not None:
        run = load_run_config(_require_file(args.config, "--config"))
        return run.dataset, _seed(args, run.train.seed)
    seed = _seed(args, SAGVAE_DEFAULT_SEED)
    if args.karate_dir is not None:
        return DatasetConfig(kind=DatasetKind.KARATE, path=_require_file(args.karate_dir, "--karate-dir")), seed
    if args.edges is not None:
        return DatasetConfig(
            kind=DatasetKind.GRAPH,
            path=_require_file(args.edges, "--edges"),
            features_path=_require_file(args.features, "--features"),
        ), seed
    return DatasetConfig(kind=DatasetKind.KARATE), seed


def _edge_datasets(args: argparse.Namespace) -> PreparedData:
    cfg, seed = _dataset_config(args)
    if cfg.kind == DatasetKind.IMAGES:
        raise ConfigurationError("edge evaluation needs a graph dataset (karate or edge list)")
    return prepare_dataset(cfg, seed)


def cmd_train(args: argparse.Namespace) -> int:
    run = load_run_config(_require_file(args.config, "--config"))
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.seed is not None:
        overrides["seed"] = args.seed
    output_dir = args.output_dir or run.output_dir
    train_cfg = TrainConfig.model_validate(
        {**run.train.model_dump(), **overrides, "checkpoint_dir": run.train.checkpoint_dir or output_dir}
    )
    run = run.model_copy(update={"train": train_cfg, "output_dir": output_dir})

    data = prepare_dataset(run.dataset, run.train.seed)
    model = build_model(run.model, seed=run.train.seed)
    model, report = train(data.train, model, run.train, clean=data.clean)

    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / "config.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(run.model_dump(mode="json"), f, sort_keys=False, allow_unicode=True)
    report.to_csv(output_dir / "report.csv")
    report.to_noise_csv(output_dir / "loss_vs_noise.csv")
    plot_loss_curves(report, output_dir / "loss_curves.png")
    logger.info(f"training outputs written to {output_dir} (checkpoint: {report.checkpoint_path})")
    return 0


def cmd_eval_edges(args: argparse.Namespace) -> int:
    model, _ = load_checkpoint(_require_file(args.checkpoint, "--checkpoint"))
    data = _edge_datasets(args)
    rows = []
    for split, ds in data.evaluation.items():
        probs = model.edge_probabilities(ds.features)
        rows.append((f"sagvae-{split}", edge_prf(probs, ds.adjacency, args.threshold)))
        export_adjacency(probs, args.output_dir / f"adjacency-{split}", png=not args.no_png)
    path = write_metrics_csv(rows, args.output_dir / "metrics.csv")
    for method, m in rows:
        logger.info(f"{method}: precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}")
    logger.info(f"edge metrics written to {path}")
    return 0


def cmd_baseline_edges(args: argparse.Namespace) -> int:
    data = _edge_datasets(args)
    rows = [
        (f"pairwise-product-{split}", edge_prf(pairwise_product_baseline(ds.features), ds.adjacency, args.threshold))
        for split, ds in data.evaluation.items()
    ]
    path = write_metrics_csv(rows, args.output_dir / "metrics.csv")
    logger.info(f"baseline metrics written to {path}")
    return 0


def _load_images(args: argparse.Namespace):
    images = load_idx_images(
        _require_file(args.images, "--images"),
        _require_file(args.labels, "--labels") if args.labels is not None else None,
        args.classes or (),
        args.limit,
    )
    return downsample(images, args.downsample)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    model, _ = load_checkpoint(_require_file(args.checkpoint, "--checkpoint"))
    clean = _load_images(args)
    noisy = perturb_images(
        clean,
        args.perturbation,
        seed=_seed(args, SAGVAE_DEFAULT_SEED),
        noise_pixels=scaled_noise_pixels(args.noise_pixels, args.downsample),
        mask_block=args.mask_block // args.downsample,
    )
    x_rec = model.reconstruct(noisy.images)
    mse_to_original = ((x_rec - clean.images) ** 2).mean(dim=1)
    mse_to_perturbed = ((x_rec - noisy.images) ** 2).mean(dim=1)

    out = args.output_dir
    shown = min(args.grid, clean.m)
    write_image_grid(noisy.images[:shown], out / "input_grid.pgm", side=clean.side)
    write_image_grid(x_rec[:shown], out / "reconstruction_grid.pgm", side=clean.side)
    write_reconstruction_csv(mse_to_original, mse_to_perturbed, out / "reconstruction.csv")
    logger.info(
        f"reconstructed {clean.m} images: mse_to_original={float(mse_to_original.mean()):.6f} "
        f"mse_to_perturbed={float(mse_to_perturbed.mean()):.6f}"
    )
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    model, _ = load_checkpoint(_require_file(args.checkpoint, "--checkpoint"))
    images = _load_images(args)
    stats = fit_class_pixel_gaussians(images, model, images_per_class=args.images_per_class)
    n_corrupt = args.corrupt
    if n_corrupt is None:
        n_corrupt = scaled_noise_pixels(MNIST_NOISE_PIXELS, args.downsample)
    ablation_model = None
    if args.ablation_checkpoint is not None:
        ablation_model, _ = load_checkpoint(_require_file(args.ablation_checkpoint, "--ablation-checkpoint"))
    samples = noisy_sample(
        stats,
        args.cls,
        n_samples=args.n_samples,
        n_corrupt=n_corrupt,
        generator=seeded_generator(_seed(args, SAGVAE_DEFAULT_SEED)),
        model=model,
        ablate_graph=args.ablate_graph,
        ablation_model=ablation_model,
    )
    write_image_grid(samples, args.output_dir / f"samples_class{args.cls}.pgm", side=images.side)
    write_idx_images(samples, args.output_dir / f"samples_class{args.cls}.idx", side=images.side)
    logger.info(f"{args.n_samples} samples of class {args.cls} written to {args.output_dir}")
    return 0


def cmd_gen_karate(args: argparse.Namespace) -> int:
    datasets = gen_karate_synthetic(
        _seed(args, SAGVAE_DEFAULT_SEED),
        n_patterns=args.patterns,
        samples_per_pattern=args.samples,
        feature_dim=args.feature_dim,
    )
    out = save_karate_directory(datasets, args.output_dir)
    logger.info(f"karate synthetic data written to {out}")
    return 0


def cmd_export_adj(args: argparse.Namespace) -> int:
    if args.probs is not None:
        probs = load_adjacency_csv(_require_file(args.probs, "--probs"))
    else:
        model, _ = load_checkpoint(_require_file(args.checkpoint, "--checkpoint or --probs"))
        cfg, seed = _dataset_config(args)
        data = prepare_dataset(cfg, seed)
        probs = model.edge_probabilities(data.train.training_tensor())
    result = export_adjacency(probs, args.output_dir / "adjacency", png=not args.no_png)
    logger.info(f"adjacency exported: {result.csv_path}, {result.pgm_path}, {result.png_path}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    kwargs = {}
    if args.epochs is not None:
        kwargs["epochs"] = args.epochs
    if args.experiment in ("images", "fashion-images"):
        kwargs["images_path"] = str(_require_file(args.images, "--images"))
        if args.labels is not None:
            kwargs["labels_path"] = str(_require_file(args.labels, "--labels"))
    result = run_benchmark(args.experiment, args.seeds, use_celery=args.celery, **kwargs)
    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"bench-{args.experiment}.csv", "w", encoding="utf-8") as f:
        f.write("metric,median\n")
        for key, value in result.median.items():
            f.write(f"{key},{value:.17g}\n")
    logger.info(f"benchmark medians written to {out / f'bench-{args.experiment}.csv'}")
    return 0


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML run config whose `dataset` section is used")
    p.add_argument("--karate-dir", type=Path, help="directory written by gen-karate")
    p.add_argument("--edges", type=Path, help="edge list CSV (src,dst)")
    p.add_argument("--features", type=Path, help="node feature CSV or stacked .npy")


def _add_image_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--images", type=Path, required=True, help="IDX image file")
    p.add_argument("--labels", type=Path, help="IDX label file")
    p.add_argument("--classes", type=int, nargs="*", help="keep only these labels")
    p.add_argument("--limit", type=int, help="keep the first N images after filtering")
    p.add_argument("--downsample", type=int, default=1, help="average-pooling factor (2 gives 14x14)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sagvae",
        description="SAG-VAE: variational autoencoder with a jointly learned feature graph",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--seed", type=int, help=f"random seed (default: config or {SAGVAE_DEFAULT_SEED})")
        p.add_argument("--output-dir", type=Path, default=SAGVAE_OUTPUT_DIR / name, help="output directory")
        return p

    p = command("train", "train from a YAML run config")
    p.add_argument("--config", type=Path, required=True, help="YAML run config")
    p.add_argument("--epochs", type=int, help="override train.epochs")
    p.add_argument("--lr", type=float, help="override train.learning_rate")
    p.set_defaults(func=cmd_train, output_dir=None)

    p = command("eval-edges", "score learned edge probabilities against the true graph")
    p.add_argument("--checkpoint", type=Path, required=True, help=f"checkpoint ({CHECKPOINT_NAME})")
    _add_dataset_args(p)
    p.add_argument("--threshold", type=float, default=0.5, help="binarization threshold")
    p.add_argument("--no-png", action="store_true", help="skip the PNG heat map")
    p.set_defaults(func=cmd_eval_edges)

    p = command("baseline-edges", "score the pairwise-product baseline")
    _add_dataset_args(p)
    p.add_argument("--threshold", type=float, default=0.5, help="binarization threshold")
    p.set_defaults(func=cmd_baseline_edges)

    p = command("reconstruct", "reconstruct perturbed images")
    p.add_argument("--checkpoint", type=Path, required=True, help="checkpoint")
    _add_image_args(p)
    p.add_argument("--perturbation", choices=[str(v) for v in Perturbation], default=str(Perturbation.UNIFORM))
    p.add_argument("--noise-pixels", type=int, default=MNIST_NOISE_PIXELS, help="pixels replaced by U(0,1) at 28x28")
    p.add_argument("--mask-block", type=int, default=6, help="mask block side at 28x28")
    p.add_argument("--grid", type=int, default=20, help="images shown in the grids")
    p.set_defaults(func=cmd_reconstruct)

    p = command("sample", "decode noisy latent samples of one class")
    p.add_argument("--checkpoint", type=Path, required=True, help="dimension-wise checkpoint")
    _add_image_args(p)
    p.add_argument("--class", dest="cls", type=int, required=True, help="class label")
    p.add_argument(
        "--corrupt",
        type=int,
        help="latent dimensions overwritten by U(0,1) (default: 200 at 28x28, scaled by --downsample)",
    )
    p.add_argument("--n-samples", type=int, default=10, help="number of samples")
    p.add_argument("--images-per-class", type=int, default=1, help="images used to fit the class statistics")
    p.add_argument("--ablate-graph", action="store_true", help="decode with A = 0 (no learned graph)")
    p.add_argument("--ablation-checkpoint", type=Path, help="model trained without the graph, decodes --ablate-graph samples")
    p.set_defaults(func=cmd_sample)

    p = command("gen-karate", "generate the Karate synthetic patterns")
    p.add_argument("--patterns", type=int, default=5, help="weight patterns (the last one is held out)")
    p.add_argument("--samples", type=int, default=100, help="samples per pattern")
    p.add_argument("--feature-dim", type=int, default=8, help="node feature width")
    p.set_defaults(func=cmd_gen_karate)

    p = command("export-adj", "export edge probabilities as CSV, P5 graymap and PNG")
    p.add_argument("--probs", type=Path, help="existing probability CSV to re-export")
    p.add_argument("--checkpoint", type=Path, help="checkpoint to read probabilities from")
    _add_dataset_args(p)
    p.add_argument("--no-png", action="store_true", help="skip the PNG heat map")
    p.set_defaults(func=cmd_export_adj)

    p = command("bench", "run a benchmark over several seeds")
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS), required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--epochs", type=int, help="training epochs per seed")
    p.add_argument("--images", type=Path, help="IDX image file (image experiments)")
    p.add_argument("--labels", type=Path, help="IDX label file (image experiments)")
    p.add_argument("--celery", action="store_true", help="dispatch seeds to Celery workers")
    p.set_defaults(func=cmd_bench)
    return parser


def cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logger.info(f"sagvae {args.command}")
    try:
        return args.func(args)
    except (FileNotFoundError, DatasetFileMissingError) as e:
        print(f"sagvae {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (SagVaeError, OSError, ValidationError, yaml.YAMLError) as e:
        print(f"sagvae {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(cli())
