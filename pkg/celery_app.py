from celery import Celery
from kombu import Queue, Exchange

import tasks
from core.constants import CELERY_BROKER_URL, CELERY_RESULT_BACKEND

app = Celery(
    "sagvae",
    broker=CELERY_BROKER_URL,
    backend=CELERY_RESULT_BACKEND,
    include=[
        tasks.benchmark_module_name,
        tasks.train_module_name,
    ],
)

default_exchange = Exchange("celery", type="topic", durable=True, )

def setup_celery():
    app.conf.update(
        task_default_exchange="celery",
        task_default_exchange_type="topic",
        task_queues=(
            Queue("train",  default_exchange, routing_key="train.#", durable=True,),
            Queue("bench",  default_exchange, routing_key="bench.#", durable=True,),
            Queue("default",default_exchange, routing_key="default", durable=True,),
        ),
        task_default_queue="default",
        # Karate 1000 에폭 실행이 20분 안쪽이므로 여유를 둔 제한
        task_time_limit=60 * 60,
        worker_prefetch_multiplier=1,
        task_serializer="json",
        result_serializer="json",
    )

    # 작업을 .delay() / group으로 발행할 때 사용할 큐와 routing key
    app.conf.task_routes = {
        tasks.names.TRAIN_TASK_NAME: {"queue": "train", "routing_key": "train.run"},
        tasks.names.BENCHMARK_TASK_NAME: {"queue": "bench", "routing_key": "bench.seed"},
    }

setup_celery()
