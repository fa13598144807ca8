"""SAG-VAE 예외 처리 모듈 - 수치 연산, 학습, 데이터 입출력 관련 커스텀 예외

이 모듈은 SAG-VAE 라이브러리와 벤치마크 하네스 전반에서 발생할 수 있는 예외 상황을
구분하기 위한 커스텀 예외 클래스들을 정의합니다. 모든 예외는 SagVaeError를 상속하므로
CLI 등 상위 계층에서는 하나의 기반 클래스로 일괄 처리할 수 있습니다.

SAG-VAE Exception Module - Custom exceptions for numerics, training and data I/O

This module defines the custom exception classes used across the SAG-VAE library and
the benchmark harness. Every exception derives from SagVaeError so upper layers such as
the CLI can handle them through a single base class.
"""

from typing import Optional

__all__ = [
    'SagVaeError',
    'DimensionError',
    'BroadcastError',
    'NumericDomainError',
    'DegenerateRowError',
    'BackwardStateError',
    'NonFiniteError',
    'ParameterError',
    'InfiniteKLError',
    'ConfigurationError',
    'NonFiniteLossError',
    'TrainingDivergedError',
    'IdxFormatError',
    'DatasetFileMissingError',
    'ClassNotFoundError',
    'CheckpointFormatError',
]


class SagVaeError(Exception):
    """SAG-VAE 예외의 기반 클래스

    Base class of every SAG-VAE exception.
    """
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "SAG-VAE error.")


class DimensionError(SagVaeError):
    """행렬 곱 등에서 피연산자 차원이 맞지 않는 경우의 예외

    Raised when operand dimensions do not line up, e.g. the inner dimensions of a matmul.

    Examples:
        raise DimensionError(f"matmul inner dimensions differ: {a.shape} vs {b.shape}")
    """
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Tensor dimensions do not match.")


class BroadcastError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Operand shapes cannot be broadcast together.")


class NumericDomainError(SagVaeError):
    """log/exp 등 정의역을 벗어난 입력에 대한 예외

    Raised when an elementwise op receives input outside its numeric domain
    (log of a non-positive value, exp overflow).
    """
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Input lies outside the numeric domain of the operation.")


class DegenerateRowError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "A softmax row has no unmasked entry.")


class BackwardStateError(SagVaeError):
    """기록된 순전파 없이 역전파를 호출한 경우의 예외

    Raised when backward is requested for a value that was not produced by a recorded
    forward pass, or for a non-scalar loss.
    """
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "backward() requires a scalar loss produced by a recorded forward pass.")


class NonFiniteError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Tensor contains NaN or Inf values.")


class ParameterError(SagVaeError):
    """잘못된 하이퍼파라미터 값(온도, 픽셀 수, 비율 등)에 대한 예외

    Raised for invalid scalar parameters such as a non-positive temperature,
    a pixel count larger than the image, or a dropout rate outside [0, 1).
    """
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Invalid parameter value.")


class InfiniteKLError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "KL divergence is infinite: the prior assigns zero probability to a supported class.")


class ConfigurationError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Configuration is inconsistent with the data.")


class NonFiniteLossError(SagVaeError):
    """손실 항 중 하나라도 NaN/Inf가 된 경우의 예외

    학습 단계를 중단하고 어떤 항이 유한하지 않은지 진단 정보를 함께 전달합니다.

    Raised when any ELBO term is NaN or Inf. Aborts the step and carries the per-term
    diagnostics.

    Attributes:
        diagnostics (dict[str, float]): 항 이름별 값
                                       Value of every loss term by name
    """
    def __init__(self, msg: Optional[str] = None, diagnostics: Optional[dict[str, float]] = None):
        self.diagnostics = diagnostics or {}
        detail = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        super().__init__(msg or f"Loss is not finite ({detail}).")


class TrainingDivergedError(SagVaeError):
    """학습이 발산했을 때의 예외 (손실 > 임계값 또는 NaN)

    마지막으로 정상이었던 체크포인트 경로를 함께 보관합니다.

    Raised when training diverges (loss above threshold or NaN). Holds the path of the
    last good checkpoint the model was rolled back to.
    """
    def __init__(self, msg: Optional[str] = None, checkpoint_path: Optional[str] = None):
        self.checkpoint_path = checkpoint_path
        super().__init__(msg or f"Training diverged. Last good checkpoint: {checkpoint_path}")


class IdxFormatError(SagVaeError):
    """IDX 파일 형식이 올바르지 않은 경우의 예외 (잘못된 매직 넘버, 잘린 파일)

    Raised for malformed IDX files. The byte offset at which parsing failed is kept.
    """
    def __init__(self, msg: Optional[str] = None, offset: Optional[int] = None):
        self.offset = offset
        super().__init__(msg or f"Malformed IDX file at byte offset {offset}.")


class DatasetFileMissingError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Required dataset file is missing.")


class ClassNotFoundError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Requested class is absent from the dataset.")


class CheckpointFormatError(SagVaeError):
    def __init__(self, msg: Optional[str] = None):
        super().__init__(msg or "Checkpoint file is malformed or incompatible with the model.")
