"""로거 설정 및 핸들러 구성 모듈

회전 로그 파일 핸들러와 컬러 콘솔 핸들러를 만들고, 패키지 최상위 로거("sagvae", "bench",
"tasks", "main")에 연결합니다. 하위 모듈 로거(``sagvae.training`` 등)는 전파를 통해 같은
핸들러를 사용합니다.

Logger Setup Module - builds the rotating file handler and the colored console handler and
attaches them to the top-level package loggers; module loggers propagate to them.
"""

import logging
import os
from logging.handlers import RotatingFileHandler

from core.constants import LOG_PATH, SAGVAE_LOG_LEVEL
from .logger_config import ColorFormatter, FileFormatter

os.makedirs(os.path.dirname(LOG_PATH) or ".", exist_ok=True)

PACKAGE_LOGGERS = ("sagvae", "bench", "tasks", "main")


def get_file_handler(formatter: logging.Formatter = None) -> RotatingFileHandler:
    """회전 로그 파일 핸들러 (10MB, 백업 5개, UTF-8)

    Rotating file handler writing to ``core.constants.LOG_PATH``.
    """
    handler = RotatingFileHandler(LOG_PATH, maxBytes=10_000_000, backupCount=5, encoding='utf-8')
    handler.setFormatter(formatter or FileFormatter())
    return handler


def get_console_handler(formatter: logging.Formatter = None) -> logging.StreamHandler:
    handler = logging.StreamHandler()
    handler.setFormatter(formatter or ColorFormatter())
    return handler


def setup_logger(
        name: str = None,
        file_handler: logging.Handler = None,
        console_handler: logging.Handler = None,
        level: int | str = SAGVAE_LOG_LEVEL,
) -> logging.Logger:
    """로거에 핸들러를 연결하고 레벨을 설정합니다.

    기존 핸들러는 모두 제거한 뒤 새로 추가하므로 여러 번 호출해도 로그가 중복되지 않습니다.
    상위 로거로의 전파는 끕니다.

    Attaches handlers (after clearing the old ones) and sets the level; propagation to the
    parent logger is disabled.

    Args:
        name (Optional[str]): 로거 이름 (None인 경우 루트 로거)
                            Logger name (root logger if None)
        file_handler (Optional[logging.Handler]): 파일 출력용 핸들러
        console_handler (Optional[logging.Handler]): 콘솔 출력용 핸들러
        level (int | str): 로깅 레벨 / logging level

    Returns:
        logging.Logger: 구성된 로거
                       Configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers.clear()
    if file_handler:
        logger.addHandler(file_handler)
    if console_handler:
        logger.addHandler(console_handler)
    logger.propagate = False
    return logger


def _root_package(name: str) -> str:
    return name.split(".", 1)[0]


def get_customized_logger(name: str = "sagvae") -> logging.Logger:
    """커스터마이징된 로거를 반환합니다.

    ``sagvae.training``처럼 패키지 최상위 로거 아래에 있는 이름이면 최상위 로거에만
    핸들러를 달고 하위 로거는 전파로 출력합니다. 그 외의 이름은 직접 핸들러를 답니다.

    Returns the named logger. Names below a package logger propagate to it; other names
    get their own handlers.

    Args:
        name (str): 로거 이름 (기본값: "sagvae")
                   Logger name (default: "sagvae")

    Examples:
        logger = get_customized_logger("sagvae.training")
        logger.info("recon=0.31", extra={"epoch": 10})
    """
    root = _root_package(name)
    if root in PACKAGE_LOGGERS:
        package_logger = logging.getLogger(root)
        if not package_logger.handlers:
            setup_logger(root, get_file_handler(), get_console_handler())
        return logging.getLogger(name)
    return setup_logger(name, get_file_handler(), get_console_handler())
