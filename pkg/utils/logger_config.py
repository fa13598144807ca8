"""로그 포맷터 및 색상 설정 모듈 - 학습/벤치마크 로그의 출력 형태

콘솔에는 레벨별 ANSI 색상을 적용한 한 줄 로그를, 파일에는 나중에 분석하기 쉬운
쉼표 구분 로그를 기록합니다. 학습 루프가 ``extra={"epoch": ...}``를 넘기면 두 포맷터 모두
에폭 번호를 메시지 앞에 붙입니다.

Log Formatter Module - Output format of training and benchmark logs

Console logs are single colored lines; file logs are comma separated. When the training
loop passes ``extra={"epoch": ...}`` both formatters prefix the message with the epoch.
"""

import logging
import os
import time


class Ansi:
    """터미널 색상 코드 / ANSI escape sequences used by ColorFormatter"""
    RESET = '\033[0m'
    BOLD = '\033[1m'

    FG = {
        'white': '\033[37m',
    }

    # 밝은(bright) 전경색
    BR_FG = {
        'white': '\033[97m',
        'red': '\033[91m',
        'green': '\033[92m',
        'yellow': '\033[93m',
        'blue': '\033[94m',
        'magenta': '\033[95m',
        'cyan': '\033[96m'
    }


PROJECT_ROOT = str(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class BasicFormatter(logging.Formatter):
    """밀리초 시간, 프로젝트 기준 상대 경로, 에폭 접두어를 처리하는 기본 포맷터

    Base formatter: millisecond timestamps, project-relative directories and the
    optional epoch prefix.
    """

    def formatTime(self, record, date_fmt=None) -> str:
        # "2024-01-15 14:30:25.123"
        ct = self.converter(record.created)
        s = time.strftime("%Y-%m-%d %H:%M:%S", ct)
        return f"{s}.{int(record.msecs):03d}"

    def format(self, record: logging.LogRecord) -> str:
        record.directory = self.get_directory_format(record)
        record.epoch_prefix = f"[epoch {record.epoch}] " if getattr(record, "epoch", None) is not None else ""
        return super().format(record)

    @staticmethod
    def get_directory_format(record: logging.LogRecord) -> str:
        """로그가 발생한 파일의 디렉토리를 프로젝트 루트 기준 상대 경로로 변환합니다.

        프로젝트 루트 자체는 ``"\\"``, 프로젝트 외부 경로는 절대 경로 그대로 반환합니다.

        Args:
            record (logging.LogRecord): 경로 정보를 추출할 로그 레코드
                                      Log record to extract the path from

        Returns:
            str: 프로젝트 루트 기준 상대 경로
                Path relative to the project root
        """
        directory = os.path.dirname(record.pathname)
        if directory == PROJECT_ROOT:
            directory = "\\"
        elif directory.lower().startswith(PROJECT_ROOT.lower()):
            directory = directory[len(PROJECT_ROOT):]

        return directory


class FileFormatter(BasicFormatter):
    """파일 저장용 포맷터 (색상 코드 없음, 쉼표 구분)

    Plain comma separated formatter for the rotating log file.

    Examples:
        # "sagvae.training, 2024-01-15 14:30:25.123, INFO, [epoch 10] recon=..., training.py, /sagvae"
        formatter = FileFormatter()
    """

    def __init__(self, fmt: str = None):
        fmt = fmt or "%(name)s, %(asctime)s, %(levelname)s, %(epoch_prefix)s%(message)s, %(filename)s, %(directory)s"
        super().__init__(fmt)


class ColorFormatter(BasicFormatter):
    """콘솔 출력용 컬러 포맷터

    로그 레벨에 따라 레벨 이름에 색을 입힙니다.
    Colors the level name by severity.

    Attributes:
        COLORS (dict): 로그 레벨별 색상 매핑
                      Color mapping by log level
    """

    COLORS = {
        logging.DEBUG: Ansi.BR_FG['blue'],
        logging.INFO: Ansi.BR_FG['green'],
        logging.WARNING: Ansi.BR_FG['yellow'],
        logging.ERROR: Ansi.BR_FG['red'],
        logging.CRITICAL: Ansi.BR_FG['magenta'],
    }

    def __init__(self, fmt: str = None):
        fmt = fmt or (
            Ansi.FG['white']
            + "[%(asctime)s] %(levelname)s : [%(name)s] %(epoch_prefix)s%(message)s (%(filename)s in %(directory)s)"
            + Ansi.RESET
        )
        super().__init__(fmt)

    def format(self, record: logging.LogRecord) -> str:
        # 레코드는 다른 핸들러와 공유되므로 원래 레벨 이름을 복원
        levelname = record.levelname
        color = self.COLORS.get(record.levelno, Ansi.BR_FG['white'])
        record.levelname = f"{Ansi.BOLD}{color}{levelname}{Ansi.RESET}{Ansi.FG['white']}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname
