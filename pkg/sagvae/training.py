"""학습 모듈 - ELBO 계산, 온도 스케줄, 최적화 루프, 체크포인트

    total = recon + KL_Z + β_A · KL_A

KL_Z는 해석적 가우시안 KL을 배치 크기로 나눈 값이고, KL_A는 (n²−n)/2개의 독립 쌍에 대한
범주형 KL의 합을 두 배(양방향)한 값입니다. β_A의 기본값은 1/(n²−n)입니다.

Training - ELBO assembly, temperature schedule, optimization loop and checkpoints.
KL_Z is the analytic Gaussian KL averaged over the batch; KL_A sums the categorical KL
over the independent pairs and doubles it to count both orientations.
"""

import copy
import csv
import math
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np
import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field

from sagvae.autodiff import DTYPE, backward, seeded_generator
from sagvae.checkpoint import save_checkpoint
from sagvae.errors import (
    ConfigurationError,
    NonFiniteError,
    NonFiniteLossError,
    TrainingDivergedError,
)
from sagvae.model import SAGVAE
from sagvae.models.config import TrainConfig
from sagvae.stochastic import bernoulli_prior, kl_edge, kl_gaussian_std
from sagvae.types import ReconstructionLoss
from utils import Logger

logger = Logger(__name__)

CHECKPOINT_NAME = "checkpoint.npz"
REPORT_COLUMNS = ("epoch", "recon", "kl_z", "kl_a", "total")
NOISE_COLUMNS = ("epoch", "mse_to_original", "mse_to_perturbed")
# BCE에서 log(0)을 피하기 위한 출력 clamp 폭
_BCE_EPS = 1e-12


class ElboTerms(BaseModel):
    """ELBO 구성 항. kl_a는 β_A가 곱해진 값이며 kl_a_raw는 곱하기 전 값입니다.

    ELBO terms; ``kl_a`` is already scaled by β_A so ``total = recon + kl_z + kl_a``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    total: torch.Tensor
    recon: torch.Tensor
    kl_z: torch.Tensor
    kl_a: torch.Tensor
    kl_a_raw: torch.Tensor
    edge_prior_gap: float = 0.0

    def as_floats(self) -> dict[str, float]:
        return {
            "total": float(self.total),
            "recon": float(self.recon),
            "kl_z": float(self.kl_z),
            "kl_a": float(self.kl_a),
            "kl_a_raw": float(self.kl_a_raw),
        }


class EpochRecord(BaseModel):
    epoch: int
    recon: float
    kl_z: float
    kl_a: float
    total: float
    tau: float
    edge_prior_gap: float
    mse_to_original: Optional[float] = None
    mse_to_perturbed: Optional[float] = None


class TrainReport(BaseModel):
    """학습 결과 보고서

    에폭별 손실(재구성, KL_Z, 정규화된 KL_A, 합계)과 최종 지표, 소요 시간을 담습니다.
    CSV에는 소요 시간을 쓰지 않으므로 같은 시드의 두 실행은 같은 파일을 만듭니다.

    Per-epoch losses, final metrics and wall-clock time. Wall-clock is left out of the
    CSV so runs with the same seed emit identical files.
    """
    epochs: list[EpochRecord] = Field(default_factory=list)
    metrics: dict[str, float] = Field(default_factory=dict)
    wall_clock: float = 0.0
    checkpoint_path: Optional[str] = None

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(REPORT_COLUMNS)
            for r in self.epochs:
                writer.writerow([r.epoch, *(f"{getattr(r, c):.17g}" for c in REPORT_COLUMNS[1:])])
        return path

    def to_noise_csv(self, path: str | Path) -> Optional[Path]:
        """재구성 대비 원본/노이즈 입력 MSE 곡선 (깨끗한 원본이 주어진 경우만)"""
        rows = [r for r in self.epochs if r.mse_to_original is not None]
        if not rows:
            return None
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(NOISE_COLUMNS)
            for r in rows:
                writer.writerow([r.epoch, f"{r.mse_to_original:.17g}", f"{r.mse_to_perturbed:.17g}"])
        return path


def temperature_schedule(step: int, cfg: TrainConfig) -> float:
    """τ(step) = τ_start · (τ_end/τ_start)^(min(step/H, 1))

    H는 어닐링 구간 길이이며 이후에는 τ_end로 고정됩니다. H = 0이면 항상 τ_end입니다.

    Geometric interpolation from tau_start to tau_end over the anneal horizon H,
    constant afterwards.
    """
    if step < 0:
        raise ValueError(f"step must be non-negative, got {step}")
    horizon = cfg.anneal_horizon
    if horizon == 0 or step >= horizon:
        return cfg.tau_end
    return cfg.tau_start * (cfg.tau_end / cfg.tau_start) ** (step / horizon)


def reconstruction_loss(x_hat: torch.Tensor, x: torch.Tensor, kind: ReconstructionLoss) -> torch.Tensor:
    """특징 축 합, 배치 평균 / summed over features, averaged over the batch"""
    x_hat = x_hat.reshape(x.shape)
    m = x.shape[0]
    if kind == ReconstructionLoss.BERNOULLI_CROSS_ENTROPY:
        probs = x_hat.clamp(_BCE_EPS, 1.0 - _BCE_EPS)
        return F.binary_cross_entropy(probs, x, reduction="sum") / m
    return F.mse_loss(x_hat, x, reduction="sum") / m


def elbo_loss(
        x_batch: torch.Tensor,
        model: SAGVAE,
        tau: float,
        generator: torch.Generator | None = None,
        cfg: TrainConfig | None = None,
) -> ElboTerms:
    """미니배치 음의 ELBO

    Z 샘플 하나와 배치가 공유하는 A 샘플 하나로 재구성 항을 계산합니다.

    Negative ELBO of a minibatch with one Z sample and one shared A sample.

    Raises:
        NonFiniteLossError: 어느 항이든 NaN/Inf인 경우 (항별 값을 diagnostics로 전달)
    """
    cfg = cfg or TrainConfig()
    x = x_batch.reshape(x_batch.shape[0], -1).to(DTYPE)
    m = x.shape[0]
    out = model(x, tau, generator, cfg.prior_p)

    recon = reconstruction_loss(out.x_hat, x, cfg.reconstruction_loss)
    kl_z = kl_gaussian_std(out.z_posterior) / m
    kl_a_raw = 2.0 * kl_edge(out.edge_posterior.class_probs, bernoulli_prior(cfg.prior_p))
    kl_a = cfg.beta_a_for(model.n) * kl_a_raw
    total = recon + kl_z + kl_a

    terms = ElboTerms(
        total=total,
        recon=recon,
        kl_z=kl_z,
        kl_a=kl_a,
        kl_a_raw=kl_a_raw,
        edge_prior_gap=out.edge_posterior.prior_gap(),
    )
    diagnostics = terms.as_floats()
    if not all(math.isfinite(v) for v in diagnostics.values()):
        raise NonFiniteLossError(diagnostics=diagnostics)
    return terms


def _training_tensor(dataset: Any) -> torch.Tensor:
    if isinstance(dataset, torch.Tensor):
        data = dataset
    elif hasattr(dataset, "training_tensor"):
        data = dataset.training_tensor()
    else:
        data = torch.as_tensor(np.asarray(dataset))
    if data.dim() == 0 or data.shape[0] == 0:
        raise ConfigurationError("training dataset is empty.")
    return data.to(DTYPE).reshape(data.shape[0], -1)


def _reconstruction_errors(
        model: SAGVAE,
        noisy: torch.Tensor,
        clean: torch.Tensor,
        batch_size: int = 256,
) -> tuple[float, float]:
    model.eval()
    x_rec = model.reconstruct(noisy, batch_size=batch_size)
    model.train()
    return float(F.mse_loss(x_rec, clean)), float(F.mse_loss(x_rec, noisy))


def train(
        dataset: Any,
        model: SAGVAE,
        cfg: TrainConfig,
        clean: Any = None,
) -> tuple[SAGVAE, TrainReport]:
    """Adam으로 SAG-VAE를 학습합니다.

    셔플 순서와 모든 잡음은 cfg.seed로 만든 하나의 generator에서 뽑으므로 같은 시드는
    같은 결과를 냅니다. checkpoint_dir가 있으면 매 에폭 체크포인트를 덮어씁니다.
    clean이 주어지면 (노이즈 입력으로 학습하는 경우) 에폭마다 원본/노이즈 입력 대비
    재구성 MSE를 기록합니다.

    Train with Adam. Shuffling and all noise come from one generator seeded with
    ``cfg.seed``. A checkpoint is overwritten every epoch when ``checkpoint_dir`` is
    set. With ``clean`` given, per-epoch reconstruction MSE against the clean and the
    noisy inputs is recorded.

    Args:
        dataset: [m, n, d] / [m, n·d] 텐서 또는 training_tensor()를 제공하는 데이터셋
        model (SAGVAE): 학습할 모델 (제자리에서 갱신)
        cfg (TrainConfig): 학습 설정
        clean: dataset과 같은 형태의 깨끗한 원본 (선택)

    Raises:
        ConfigurationError: 데이터셋이 비었거나 특징 폭이 모델과 맞지 않는 경우
        TrainingDivergedError: 손실이 divergence_threshold를 넘거나 NaN이 된 경우.
                               모델은 마지막 정상 에폭 상태로 되돌려집니다.
    """
    data = _training_tensor(dataset)
    clean_data = _training_tensor(clean) if clean is not None else None
    if data.shape[1] != model.n * model.d:
        raise ConfigurationError(f"dataset has {data.shape[1]} features per sample, model expects {model.n * model.d}.")
    if clean_data is not None and clean_data.shape != data.shape:
        raise ConfigurationError(f"clean data shape {tuple(clean_data.shape)} differs from {tuple(data.shape)}.")

    m = data.shape[0]
    generator = seeded_generator(cfg.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    checkpoint_path = Path(cfg.checkpoint_dir) / CHECKPOINT_NAME if cfg.checkpoint_dir else None
    good_state = copy.deepcopy(model.state_dict())
    last_good_checkpoint: Optional[str] = None
    report = TrainReport()

    logger.info(
        f"training started: m={m}, n={model.n}, epochs={cfg.epochs}, batch={cfg.batch_size}, "
        f"lr={cfg.learning_rate}, beta_a={cfg.beta_a_for(model.n):.6g}, seed={cfg.seed}"
    )
    started = time.perf_counter()
    model.train()

    def diverged(epoch: int, reason: str) -> TrainingDivergedError:
        model.load_state_dict(good_state)
        logger.warning(f"epoch {epoch}: training diverged ({reason}); rolled back to the last good state")
        return TrainingDivergedError(
            f"training diverged at epoch {epoch}: {reason}",
            checkpoint_path=last_good_checkpoint,
        )

    for epoch in range(1, cfg.epochs + 1):
        tau = temperature_schedule(epoch - 1, cfg)
        order = torch.randperm(m, generator=generator)
        sums = {"recon": 0.0, "kl_z": 0.0, "kl_a": 0.0, "total": 0.0, "gap": 0.0}

        for start in range(0, m, cfg.batch_size):
            batch = data[order[start:start + cfg.batch_size]]
            optimizer.zero_grad(set_to_none=True)
            try:
                terms = elbo_loss(batch, model, tau, generator, cfg)
            except NonFiniteLossError as e:
                raise diverged(epoch, f"non-finite loss {e.diagnostics}") from e
            total = float(terms.total)
            if total > cfg.divergence_threshold:
                raise diverged(epoch, f"loss {total:.6g} exceeds {cfg.divergence_threshold:.6g}")
            try:
                backward(terms.total, model.parameters())
            except NonFiniteError as e:
                raise diverged(epoch, str(e)) from e
            optimizer.step()

            weight = batch.shape[0] / m
            values = terms.as_floats()
            for key in ("recon", "kl_z", "kl_a", "total"):
                sums[key] += weight * values[key]
            sums["gap"] += weight * terms.edge_prior_gap

        record = EpochRecord(
            epoch=epoch,
            recon=sums["recon"],
            kl_z=sums["kl_z"],
            kl_a=sums["kl_a"],
            total=sums["total"],
            tau=tau,
            edge_prior_gap=sums["gap"],
        )
        if clean_data is not None:
            record.mse_to_original, record.mse_to_perturbed = _reconstruction_errors(
                model, data, clean_data, cfg.batch_size
            )
        report.epochs.append(record)

        good_state = copy.deepcopy(model.state_dict())
        if checkpoint_path is not None:
            save_checkpoint(model, checkpoint_path, {"epoch": epoch, "seed": cfg.seed, "tau": tau})
            last_good_checkpoint = str(checkpoint_path)

        if epoch == 1 or epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            logger.info(
                f"total={record.total:.4f} recon={record.recon:.4f} kl_z={record.kl_z:.4f} kl_a={record.kl_a:.6f} "
                f"tau={tau:.3f} edge_prior_gap={record.edge_prior_gap:.4f}",
                extra={"epoch": f"{epoch}/{cfg.epochs}"},
            )

    report.wall_clock = time.perf_counter() - started
    report.checkpoint_path = last_good_checkpoint
    if report.epochs:
        last = report.epochs[-1]
        report.metrics = {
            "final_total": last.total,
            "final_recon": last.recon,
            "final_edge_prior_gap": last.edge_prior_gap,
        }
    logger.info(f"training finished in {report.wall_clock:.1f}s")
    return model, report
