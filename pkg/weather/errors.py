#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exception hierarchy for WeatherForge

Value-like errors subclass ValueError, file errors subclass OSError,
so callers may catch either family.
"""

from typing import Optional


class WeatherForgeError(Exception):
    """Базовая ошибка инструментария"""


class ImageIOError(WeatherForgeError, OSError):
    """Файл не читается / не записывается"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)


class ImageFormatError(WeatherForgeError, ValueError):
    """Unsupported bit depth, channel count or malformed header"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)


class ShapeError(WeatherForgeError, ValueError):
    """Несовпадение размеров растров"""


class ConfigError(WeatherForgeError, ValueError):
    """Недопустимые параметры или конфигурация"""


class DomainError(WeatherForgeError, ValueError):
    """Value outside of the physical domain (e.g. negative depth)"""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class DatasetError(WeatherForgeError):
    """Ошибка генерации или чтения датасета"""
