#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Toolkit configuration module for WeatherForge
"""

import os
import json
import logging
from dataclasses import dataclass, asdict, fields
from typing import Optional

from weather.priors import EstimatorSettings

logger = logging.getLogger("WeatherForge.Config")

DEFAULT_CONFIG_FILE = "config.json"


@dataclass
class ToolkitConfig:
    """
    Централизованная конфигурация инструментария: пороги обращения,
    параметры классических оценщиков, размеры внимания и пул воркеров.
    """

    # Пороги обращения моделей
    t_min: float = 0.05
    alpha_max: float = 0.95

    # Тёмный канал и атмосферный свет
    dark_patch: int = 15
    omega: float = 0.95
    top_frac: float = 0.001

    # Эвристика окклюзии
    bright_thresh: float = 0.08
    size_max: int = 4000
    background_window: int = 7

    # Внимание (игрушечный масштаб)
    r: int = 4
    window: int = 4
    heads: int = 1

    # Пул воркеров: 0 = все доступные ядра
    jobs: int = 0

    @classmethod
    def load_from_file(cls, filename: str = DEFAULT_CONFIG_FILE) -> "ToolkitConfig":
        """Загружает конфигурацию из файла; при любой ошибке возвращает значения по умолчанию"""
        try:
            if os.path.exists(filename):
                with open(filename, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                known = {f.name for f in fields(cls)}
                unknown = sorted(set(data) - known)
                if unknown:
                    logger.warning(f"Ignoring unknown settings in {filename}: {', '.join(unknown)}")
                logger.info(f"Configuration loaded from {filename}")
                return cls(**{k: v for k, v in data.items() if k in known})
            else:
                logger.warning(f"Configuration file {filename} not found, using defaults")
        except json.JSONDecodeError as e:
            logger.error(f"Invalid JSON in configuration file {filename}: {e}")
        except (OSError, TypeError, AttributeError) as e:
            logger.error(f"Error loading configuration from {filename}: {e}")
        logger.info("Using default configuration")
        return cls()

    def save_to_file(self, filename: str = DEFAULT_CONFIG_FILE) -> None:
        try:
            with open(filename, 'w', encoding='utf-8') as f:
                json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
            logger.info(f"Configuration saved to {filename}")
        except OSError as e:
            logger.error(f"Error saving configuration to {filename}: {e}")

    def to_dict(self) -> dict:
        return asdict(self)

    def estimator_settings(self) -> EstimatorSettings:
        """Параметры для restore_with_estimated (ConfigError при недопустимых значениях)"""
        return EstimatorSettings(
            dark_patch=self.dark_patch,
            omega=self.omega,
            top_frac=self.top_frac,
            bright_thresh=self.bright_thresh,
            size_max=self.size_max,
            background_window=self.background_window,
            t_min=self.t_min,
            alpha_max=self.alpha_max,
        )


# Глобальная конфигурация (создаётся лениво, чтобы импорт не читал файлы)
_toolkit_config: Optional[ToolkitConfig] = None


def get_toolkit_config(filename: Optional[str] = None) -> ToolkitConfig:
    """Возвращает глобальную конфигурацию; filename принудительно перечитывает файл"""
    global _toolkit_config
    if _toolkit_config is None or filename is not None:
        _toolkit_config = ToolkitConfig.load_from_file(filename or DEFAULT_CONFIG_FILE)
    return _toolkit_config
