from celery import shared_task

from bench.datasets import prepare_dataset
from sagvae.model import build_model
from sagvae.models.config import RunConfig
from sagvae.training import train
from utils import Logger
from ..names import TRAIN_TASK_NAME

logger = Logger(__name__)


@shared_task(name=TRAIN_TASK_NAME)
def train_task(run_config: dict) -> dict:
    """직렬화된 RunConfig로 학습하고 보고서 CSV 경로와 최종 지표를 돌려줍니다."""
    run = RunConfig.model_validate(run_config)
    if run.train.checkpoint_dir is None:
        run = run.model_copy(update={"train": run.train.model_copy(update={"checkpoint_dir": run.output_dir})})
    data = prepare_dataset(run.dataset, run.train.seed)
    model = build_model(run.model, seed=run.train.seed)
    _, report = train(data.train, model, run.train, clean=data.clean)
    report_path = report.to_csv(run.output_dir / "report.csv")
    logger.info(f"train task finished: {report_path}")
    return {"report": str(report_path), "checkpoint": report.checkpoint_path, "metrics": report.metrics}
