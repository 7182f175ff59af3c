"""
CLI Utilities Module
Contains command-line interface utilities and helper functions
状态信息一律写到 stderr，stdout 只输出 JSON 报告；
同一条信息另以 file_only 记录写入日志文件，不在终端重复出现
"""

import dataclasses
import json
import sys
from typing import Any, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from ..i18n.i18n import t
from .logger import file_only


# ANSI 颜色代码
COLOR_GREEN = "\033[92m"    # 成功信息
COLOR_RED = "\033[91m"      # 错误信息
COLOR_YELLOW = "\033[93m"   # 警告和提示
COLOR_RESET = "\033[0m"     # 重置颜色
COLOR_CYAN = "\033[96m"     # 信息提示


def _emit(text: str) -> None:
    print(text, file=sys.stderr)


def print_success(message: str) -> None:
    """
    打印成功信息，同时记录日志
    Print success information and log at the same time
    """
    _emit(f"{COLOR_GREEN}{t('success_prefix')} {message}{COLOR_RESET}")
    file_only('INFO', f"SUCCESS: {message}")


def print_error(message: str) -> None:
    """
    打印错误信息，同时记录日志
    Print error information and log at the same time
    """
    _emit(f"{COLOR_RED}{t('error_prefix')} {message}{COLOR_RESET}")
    file_only('ERROR', f"ERROR: {message}")


def print_warning(message: str) -> None:
    """
    打印警告信息，同时记录日志
    Print warning information and log at the same time
    """
    _emit(f"{COLOR_YELLOW}{t('warning_prefix')} {message}{COLOR_RESET}")
    file_only('WARNING', f"WARNING: {message}")


def print_info(message: str) -> None:
    """
    打印普通信息，同时记录日志
    Print regular information and log at the same time
    """
    _emit(f"{COLOR_CYAN}{t('info_prefix')} {message}{COLOR_RESET}")
    file_only('INFO', message)


def print_table(headers: List[str], rows: List[List[Any]], title: Optional[str] = None) -> None:
    """
    以 rich 表格形式打印数据
    Print data in table format
    """
    table = Table(title=title)
    for header in headers:
        table.add_column(str(header))
    for row in rows:
        table.add_row(*(str(cell) for cell in row))
    Console(file=sys.stderr).print(table)


def to_jsonable(obj: Any) -> Any:
    """
    把 numpy 数组与标量、dataclass、元组转换成可 JSON 序列化的类型，
    整数值数组保持整数
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, 'to_dict'):
            return to_jsonable(obj.to_dict())
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.issubdtype(obj.dtype, np.bool_):
            return obj.tolist()
        if np.issubdtype(obj.dtype, np.integer):
            return obj.tolist()
        if np.issubdtype(obj.dtype, np.complexfloating):
            return {'real': np.real(obj).tolist(), 'imag': np.imag(obj).tolist()}
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def format_json(data: Any, indent: int = 2) -> str:
    return json.dumps(to_jsonable(data), ensure_ascii=False, indent=indent, sort_keys=False)


def handle_exception(e: Exception, context: str = "operation") -> None:
    """
    统一处理未预期的异常：终端一行错误信息，堆栈只写日志文件
    Handle exceptions in a consistent way
    """
    print_error(t("exception_occurred", context=context, error=str(e)))
    file_only('ERROR', f"{context} - Exception: {e}", exc_info=e)
