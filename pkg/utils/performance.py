#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Performance monitoring utilities for WeatherForge

- Throughput of batch jobs (samples per minute)
- Per-category profiling of pipeline stages
- Process CPU / memory sampling via psutil
- Small LRU cache for decoded inputs inside worker processes
"""

import os
import time
import threading
import logging
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from functools import wraps
from typing import Dict, List, Optional, Any, Callable, TypeVar, ParamSpec

import psutil

P = ParamSpec('P')
R = TypeVar('R')

logger = logging.getLogger("WeatherForge.Performance")


@dataclass
class PerformanceMetrics:
    """Метрики пакетной обработки"""
    items_done: int = 0
    elapsed_s: float = 0.0
    cpu_percent: float = 0.0
    memory_mb: float = 0.0

    # Длительность обработки последних элементов, мс
    item_time_history: deque = field(default_factory=lambda: deque(maxlen=256))

    def record_item(self, item_time_ms: float):
        self.items_done += 1
        self.item_time_history.append(item_time_ms)

    def sample_system(self):
        """Обновляет CPU и RSS текущего процесса"""
        try:
            process = psutil.Process()
            self.cpu_percent = process.cpu_percent()
            self.memory_mb = process.memory_info().rss / 1024 / 1024
        except psutil.Error:
            pass

    @property
    def items_per_minute(self) -> float:
        if self.elapsed_s <= 0:
            return 0.0
        return self.items_done / self.elapsed_s * 60.0

    def get_average_item_time(self) -> float:
        if not self.item_time_history:
            return 0.0
        return sum(self.item_time_history) / len(self.item_time_history)

    def to_dict(self) -> dict:
        return {
            'items_done': self.items_done,
            'elapsed_s': round(self.elapsed_s, 3),
            'items_per_minute': round(self.items_per_minute, 1),
            'avg_item_time_ms': round(self.get_average_item_time(), 3),
            'cpu_percent': self.cpu_percent,
            'memory_mb': round(self.memory_mb, 1),
        }


class PerformanceMonitor:
    """
    Монитор производительности для:
    - Измерения пропускной способности пакетных задач
    - Профилирования времени выполнения стадий
    - Обнаружения проблем с памятью и CPU
    """

    def __init__(self):
        self.metrics = PerformanceMetrics()
        self._run_start: Optional[float] = None

        # Профилировщик: открытые замеры и завершённые длительности (мс)
        self._open: Dict[str, List[float]] = {}
        self._durations: Dict[str, List[float]] = {}

        # Пороги предупреждений
        self.cpu_warning_threshold = 95  # процент
        self.memory_warning_threshold = 4096  # MB

        self._lock = threading.Lock()

    def start_run(self):
        """Начинает измерение пакетной задачи"""
        self.metrics = PerformanceMetrics()
        self._run_start = time.perf_counter()
        self.metrics.sample_system()

    def record_item(self, item_time_ms: float = 0.0):
        with self._lock:
            self.metrics.record_item(item_time_ms)

    def end_run(self) -> PerformanceMetrics:
        """Завершает измерение и возвращает метрики"""
        if self._run_start is not None:
            self.metrics.elapsed_s = time.perf_counter() - self._run_start
            self._run_start = None
        self.metrics.sample_system()
        return self.metrics

    def start_profile(self, category: str):
        with self._lock:
            self._open.setdefault(category, []).append(time.perf_counter())

    def end_profile(self, category: str) -> float:
        """
        Завершает профилирование и возвращает время выполнения

        Returns:
            Время выполнения в миллисекундах
        """
        with self._lock:
            starts = self._open.get(category)
            if not starts:
                return 0.0
            elapsed_ms = (time.perf_counter() - starts.pop()) * 1000
            self._durations.setdefault(category, []).append(elapsed_ms)
        return elapsed_ms

    def get_profile_stats(self) -> Dict[str, Dict[str, float]]:
        stats = {}
        with self._lock:
            for category, times in self._durations.items():
                if times:
                    stats[category] = {
                        'avg_ms': sum(times) / len(times),
                        'max_ms': max(times),
                        'min_ms': min(times),
                        'total_ms': sum(times),
                        'count': len(times),
                    }
        return stats

    def check_warnings(self) -> List[str]:
        warnings = []
        m = self.metrics
        if m.cpu_percent > self.cpu_warning_threshold:
            warnings.append(f"High CPU usage: {m.cpu_percent:.1f}%")
        if m.memory_mb > self.memory_warning_threshold:
            warnings.append(f"High memory usage: {m.memory_mb:.1f}MB")
        return warnings


class LRUCache:
    """
    LRU (Least Recently Used) кэш с ограниченным размером
    Хранит декодированные входные изображения и карты глубины
    """

    def __init__(self, max_size: int = 8):
        if max_size < 1:
            raise ValueError(f"max_size must be >= 1, got {max_size}")
        self.max_size = max_size
        self._cache: "OrderedDict[Any, Any]" = OrderedDict()
        self._lock = threading.Lock()

        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def get(self, key: Any) -> Optional[Any]:
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                self.hits += 1
                return self._cache[key]
            self.misses += 1
            return None

    def put(self, key: Any, value: Any):
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
            elif len(self._cache) >= self.max_size:
                self._cache.popitem(last=False)
                self.evictions += 1
            self._cache[key] = value

    def get_or_load(self, key: Any, loader: Callable[[], Any]) -> Any:
        """Возвращает значение из кэша или загружает его через loader"""
        value = self.get(key)
        if value is None:
            value = loader()
            self.put(key, value)
        return value

    def clear(self):
        with self._lock:
            self._cache.clear()

    def get_stats(self) -> dict:
        total = self.hits + self.misses
        hit_rate = (self.hits / total * 100) if total > 0 else 0
        return {
            'size': len(self._cache),
            'max_size': self.max_size,
            'hits': self.hits,
            'misses': self.misses,
            'evictions': self.evictions,
            'hit_rate_percent': round(hit_rate, 2)
        }

    def __contains__(self, key: Any) -> bool:
        with self._lock:
            return key in self._cache

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)


def available_workers() -> int:
    """Число доступных процессору ядер (учитывает CPU affinity)"""
    try:
        return max(1, len(psutil.Process().cpu_affinity()))
    except (AttributeError, psutil.Error):
        return max(1, os.cpu_count() or 1)


def resolve_jobs(jobs: int) -> int:
    """jobs <= 0 means all available cores"""
    return available_workers() if jobs <= 0 else jobs


def profile_function(
    monitor: Optional[PerformanceMonitor] = None,
    category: str = "default"
) -> Callable[[Callable[P, R]], Callable[P, R]]:
    """
    Декоратор для профилирования функции

    Usage:
        @profile_function(monitor, category="restore")
        def restore_batch():
            ...
    """
    def decorator(func: Callable[P, R]) -> Callable[P, R]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
            active = monitor or get_performance_monitor()
            active.start_profile(category)
            try:
                return func(*args, **kwargs)
            finally:
                active.end_profile(category)

        return wrapper
    return decorator


# Глобальный монитор производительности
_performance_monitor: Optional[PerformanceMonitor] = None


def get_performance_monitor() -> PerformanceMonitor:
    global _performance_monitor
    if _performance_monitor is None:
        _performance_monitor = PerformanceMonitor()
    return _performance_monitor
