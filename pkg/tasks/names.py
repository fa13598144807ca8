TRAIN_TASK_NAME = "sagvae.train"
BENCHMARK_TASK_NAME = "sagvae.bench.seed"
