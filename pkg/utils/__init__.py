"""유틸리티 패키지 - 로깅

환경 변수 CUSTOMIZE_LOGGER가 "true"이면 회전 파일 + 컬러 콘솔 로거를, 아니면 표준
``logging.getLogger``를 돌려줍니다. 테스트(pytest의 caplog)는 표준 로거 경로를 사용합니다.

Utility package: a Logger factory returning the customized logger when CUSTOMIZE_LOGGER is
"true" and the standard logger otherwise.

Examples:
    from utils import Logger
    logger = Logger(__name__)
    logger.info("training started")
"""

import os
from logging import getLogger

from dotenv import load_dotenv

from .logger_setup import get_customized_logger

load_dotenv()


class Logger:
    """환경 설정에 따라 표준 또는 커스텀 로거를 반환하는 팩토리

    ``Logger(name)``은 Logger 인스턴스가 아닌 ``logging.Logger`` 객체를 반환합니다.

    Factory returning a ``logging.Logger`` (standard or customized) rather than an instance
    of this class.

    Environment Variables:
        CUSTOMIZE_LOGGER (str): "true"(대소문자 무시)이면 커스텀 로거 사용
                               Use the customized logger when "true" (case-insensitive)
    """

    def __new__(cls, *args, **kwargs):
        if os.getenv("CUSTOMIZE_LOGGER", "false").lower() == "true":
            if args:
                return get_customized_logger(args[0])
            elif kwargs and (name := kwargs.get("name")):
                return get_customized_logger(name)
            else:
                return get_customized_logger()
        else:
            return getLogger(*args, **kwargs)
