#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Utility modules for WeatherForge

This package provides:
- logger: Enhanced logging and error reporting
- performance: Throughput monitoring, profiling and caching
"""

from .logger import (
    EnhancedLogger,
    LogContext,
    LogLevel,
    log_function_call,
    get_logger,
    init_logger,
    level_from_env,
)

from .performance import (
    PerformanceMonitor,
    PerformanceMetrics,
    LRUCache,
    profile_function,
    available_workers,
    resolve_jobs,
    get_performance_monitor,
)

__all__ = [
    # Logger
    'EnhancedLogger',
    'LogContext',
    'LogLevel',
    'log_function_call',
    'get_logger',
    'init_logger',
    'level_from_env',

    # Performance
    'PerformanceMonitor',
    'PerformanceMetrics',
    'LRUCache',
    'profile_function',
    'available_workers',
    'resolve_jobs',
    'get_performance_monitor',
]
