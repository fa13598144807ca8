"""SAG-VAE에서 사용되는 열거형 타입 정의 모듈

설정 파일(YAML), 체크포인트 메타데이터, CLI 인자에 그대로 문자열로 기록되는
고정 값 집합들을 StrEnum으로 정의합니다.

Enumeration types used by SAG-VAE

Defines the fixed value sets that are written verbatim as strings into YAML run
configs, checkpoint metadata and CLI arguments.
"""

from enum import StrEnum


class LatentMode(StrEnum):
    """잠재 변수 Z의 분포 구성 방식

    Layout of the Gaussian posterior over Z.

    Attributes:
        DATA_POINT_WISE (str): 데이터 포인트마다 하나의 저차원 잠재 벡터
                               One low-dimensional latent vector per data point
        DIMENSION_WISE (str): 특징 차원(노드)마다 하나의 가우시안 분포
                              One Gaussian per feature dimension (node)
    """
    DATA_POINT_WISE = "data-point-wise"
    DIMENSION_WISE = "dimension-wise"


class Activation(StrEnum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"
    IDENTITY = "identity"


class ReconstructionLoss(StrEnum):
    """재구성 우도 종류. 출력 활성화와 짝을 이룹니다 (sigmoid ↔ bernoulli).

    Reconstruction likelihood, matched to the decoder output activation.
    """
    BERNOULLI_CROSS_ENTROPY = "bernoulli-cross-entropy"
    MEAN_SQUARED_ERROR = "mean-squared-error"


class ElementwiseOp(StrEnum):
    ADD = "add"
    MUL = "mul"
    SUB = "sub"
    EXP = "exp"
    LOG = "log"
    SIGMOID = "sigmoid"
    RELU = "relu"
    TANH = "tanh"
    SCALE = "scale"


class DatasetKind(StrEnum):
    KARATE = "karate"
    GRAPH = "graph"
    IMAGES = "images"


class DatasetSplit(StrEnum):
    TRAIN = "train"
    HELD_OUT = "held-out"


class Perturbation(StrEnum):
    NONE = "none"
    UNIFORM = "uniform"
    MASK = "mask"
