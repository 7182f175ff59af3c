"""
日志模块
控制台处理器写 stderr（stdout 留给 JSON 报告），可选追加 UTF-8 日志文件；
工作线程共用同一个命名记录器
"""

import logging
import sys
from pathlib import Path

DEFAULT_NAME = 'isopar_lab'
DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
# 带此属性的记录只写日志文件，控制台已由 print_* 输出过
FILE_ONLY = 'file_only'


def _level(level) -> int:
    if isinstance(level, int):
        return level
    # getLevelNamesMapping 自 Python 3.11 起提供；旧版本退回同内容的 _nameToLevel
    mapping = getattr(logging, 'getLevelNamesMapping', lambda: dict(logging._nameToLevel))()
    return mapping.get(str(level).upper(), logging.WARNING)


class _SkipFileOnly(logging.Filter):
    def filter(self, record):
        return not getattr(record, FILE_ONLY, False)


def _file_handler(log_file, formatter: logging.Formatter) -> logging.FileHandler:
    path = Path(log_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding='utf-8')
    handler.setFormatter(formatter)
    return handler


def setup_logger(name=DEFAULT_NAME, log_file=None, level='WARNING', format_string=None) -> logging.Logger:
    """
    配置命名记录器，重复调用时替换已有处理器
    :param name: 记录器名称
    :param log_file: 日志文件路径，None 时只写 stderr
    :param level: 级别名或数值，无法识别时为 WARNING
    :param format_string: 日志格式字符串
    :return: 配置好的日志记录器
    """
    logger = logging.getLogger(name)
    logger.setLevel(_level(level))
    logger.propagate = False
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(format_string or DEFAULT_FORMAT)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.addFilter(_SkipFileOnly())
    logger.addHandler(console_handler)
    if log_file:
        logger.addHandler(_file_handler(log_file, formatter))
    return logger


# 全局日志记录器实例，之后只替换处理器，不重新绑定
logger = setup_logger()


def set_log_level(level):
    logger.setLevel(_level(level))


def set_log_file(log_file, format_string=None):
    """
    替换文件处理器，级别保持不变
    :param log_file: 日志文件路径，None 时移除文件处理器
    :param format_string: 同时应用到控制台与文件的格式
    """
    for handler in [h for h in logger.handlers if isinstance(h, logging.FileHandler)]:
        logger.removeHandler(handler)
        handler.close()
    if format_string:
        formatter = logging.Formatter(format_string)
        for handler in logger.handlers:
            handler.setFormatter(formatter)
    if log_file:
        logger.addHandler(_file_handler(log_file, logger.handlers[0].formatter))


def debug(message):
    logger.debug(message)


def info(message):
    logger.info(message)


def warning(message):
    logger.warning(message)


def error(message):
    logger.error(message)


def file_only(level, message, exc_info=False):
    """只写到日志文件的记录，用于已经在终端上显示过的信息"""
    logger.log(_level(level), message, exc_info=exc_info, extra={FILE_ONLY: True})
