from typing import Any

from celery import shared_task

from bench.harness import run_experiment
from utils import Logger
from ..names import BENCHMARK_TASK_NAME

logger = Logger(__name__)


# 시드 하나 = 작업 하나. 워커 프로세스끼리 공유하는 상태가 없으므로 동시에 여러 개 실행해도 됨
@shared_task(name=BENCHMARK_TASK_NAME)
def benchmark_seed_task(experiment: str, seed: int, kwargs: dict[str, Any] | None = None) -> dict[str, float]:
    result = run_experiment(experiment, seed, **(kwargs or {}))
    logger.info(f"benchmark `{experiment}` seed {seed} finished: {result}")
    return result
