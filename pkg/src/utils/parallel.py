"""
并行处理模块
按点并行执行验证任务，结果按输入顺序返回；每个点使用独立派生的随机数流
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional

import numpy as np
import psutil

from .logger import debug, error, warning

THREADS_ENV = 'ISOPAR_THREADS'


def resolve_worker_count(configured: Optional[int] = None) -> int:
    """
    线程数来源的优先级：ISOPAR_THREADS 环境变量、配置值、物理核心数、逻辑核心数、1
    :param configured: 配置中的线程数，0 或 None 表示自动
    :return: 线程数
    """
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
        warning(f"ignoring invalid {THREADS_ENV}={raw!r}")
    if configured and int(configured) > 0:
        return int(configured)
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


def parallel_map(items: List[Any],
                 func: Callable,
                 max_workers: Optional[int] = None,
                 *args, **kwargs) -> List[Any]:
    """
    并行处理项目列表，结果顺序与输入一致
    :param items: 要处理的项目列表
    :param func: 处理函数
    :param max_workers: 最大工作线程数，默认按 resolve_worker_count 决定
    :param args: 传递给处理函数的额外位置参数
    :param kwargs: 传递给处理函数的额外关键字参数
    :return: 处理结果列表
    :raises Exception: 第一个失败任务的异常，记录日志后重新抛出
    """
    items = list(items)
    if not items:
        return []
    workers = max_workers or resolve_worker_count()
    debug(f"parallel_map: {len(items)} items on {workers} workers")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(func, item, *args, **kwargs) for item in items]
        results = []
        for index, future in enumerate(futures):
            try:
                results.append(future.result())
            except Exception as e:
                error(f"task {index} failed: {e}")
                for pending in futures[index + 1:]:
                    pending.cancel()
                raise
    return results


def derive_rngs(seed: int, count: int, *salt: int) -> List[np.random.Generator]:
    """
    由种子派生 count 个相互独立的随机数生成器
    :param seed: 非负整数种子
    :param count: 生成器个数
    :param salt: 区分不同用途的附加整数
    """
    sequence = np.random.SeedSequence([int(seed), *(int(s) for s in salt)])
    return [np.random.default_rng(child) for child in sequence.spawn(count)]
