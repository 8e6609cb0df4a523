"""
共享依赖 - 线程预算与按序并行映射
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """线程数：None 或 0 表示使用 CPU 核数"""
    if threads is None or threads <= 0:
        return max(1, os.cpu_count() or 1)
    return threads


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = 1) -> list[R]:
    """
    并行执行 fn，结果按输入顺序返回

    每个任务是纯函数，因此结果与线程数无关
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
