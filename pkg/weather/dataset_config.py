#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dataset synthesis configuration: sampled ranges and the synth JSON document

Unlike the toolkit settings, dataset documents are loaded strictly:
invalid JSON, unknown keys or out-of-range values raise ConfigError.
"""

import os
import json
import logging
from dataclasses import dataclass, field, fields, asdict
from typing import Dict, List, Tuple, Any, Optional

from .errors import ConfigError

logger = logging.getLogger("WeatherForge.DatasetConfig")

Range = Tuple[float, float]

IMAGE_FORMATS = ("png8", "png16", "pfm")
COUNT_KEYS = ("haze", "rain", "snow")


def _as_range(name: str, value: Any, lo: Optional[float] = None, hi: Optional[float] = None) -> Range:
    try:
        a, b = (float(v) for v in value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"range '{name}' must be a pair of numbers, got {value!r}") from e
    if a > b:
        raise ConfigError(f"range '{name}' is inverted: [{a}, {b}]")
    if (lo is not None and a < lo) or (hi is not None and b > hi):
        raise ConfigError(f"range '{name}' must lie within [{lo}, {hi}], got [{a}, {b}]")
    return a, b


@dataclass
class SamplingRanges:
    """
    Все диапазоны, из которых равномерно разыгрываются параметры погоды

    Densities are particles per megapixel; lengths, widths, radii and
    blur sigmas are in pixels; angles are degrees from vertical.
    """

    # Рассеяние и освещение
    beta: Range = (0.005, 0.03)
    A: Range = (0.75, 1.0)
    O: Range = (0.8, 1.0)
    gamma: Range = (1.0, 2.2)
    scatter_probability: float = 0.5

    # Слои частиц
    far_layers: int = 4
    near_layers: int = 1

    # Дождь
    rain_density_far: Range = (800.0, 2000.0)
    rain_density_near: Range = (150.0, 400.0)
    rain_angle: Range = (-20.0, 20.0)
    rain_angle_jitter: float = 3.0
    rain_length_far: Range = (8.0, 20.0)
    rain_length_near: Range = (25.0, 50.0)
    rain_width_far: Range = (1.0, 1.5)
    rain_width_near: Range = (1.5, 3.0)

    # Снег
    snow_density_far: Range = (1000.0, 3000.0)
    snow_density_near: Range = (100.0, 300.0)
    snow_radius_far: Range = (0.8, 2.0)
    snow_radius_near: Range = (2.5, 5.0)

    # Общее для слоёв
    blur_far: Range = (0.0, 0.8)
    blur_near: Range = (0.5, 1.5)
    peak_alpha_far: Range = (0.3, 0.6)
    peak_alpha_near: Range = (0.6, 0.9)

    def __post_init__(self):
        self.beta = _as_range("beta", self.beta, lo=0.0)
        self.A = _as_range("A", self.A, 0.0, 1.0)
        self.O = _as_range("O", self.O, 0.0, 1.0)
        self.gamma = _as_range("gamma", self.gamma, lo=1.0)
        for name in ("rain_density_far", "rain_density_near", "snow_density_far", "snow_density_near",
                     "blur_far", "blur_near"):
            setattr(self, name, _as_range(name, getattr(self, name), lo=0.0))
        self.rain_angle = _as_range("rain_angle", self.rain_angle, -90.0, 90.0)
        for name in ("rain_length_far", "rain_length_near", "rain_width_far", "rain_width_near"):
            setattr(self, name, _as_range(name, getattr(self, name), lo=1.0))
        for name in ("snow_radius_far", "snow_radius_near"):
            r = _as_range(name, getattr(self, name))
            if r[0] <= 0:
                raise ConfigError(f"range '{name}' must be positive, got {list(r)}")
            setattr(self, name, r)
        for name in ("peak_alpha_far", "peak_alpha_near"):
            setattr(self, name, _as_range(name, getattr(self, name), 0.0, 1.0))

        if not (0.0 <= self.scatter_probability <= 1.0):
            raise ConfigError(f"scatter_probability must be in [0, 1], got {self.scatter_probability}")
        if self.rain_angle_jitter < 0:
            raise ConfigError(f"rain_angle_jitter must be >= 0, got {self.rain_angle_jitter}")
        if self.far_layers < 0 or self.near_layers < 0:
            raise ConfigError("layer counts must be >= 0")
        # Штрих не может быть уже, чем длинный
        if self.rain_width_far[1] > self.rain_length_far[0] or self.rain_width_near[1] > self.rain_length_near[0]:
            raise ConfigError("rain streak widths must not exceed streak lengths")

    def to_dict(self) -> dict:
        data = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SamplingRanges":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown sampling range keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class InputPair:
    """Чистое изображение и его карта глубины (PFM)"""
    clean: str
    depth: str

    def to_dict(self) -> dict:
        return {'clean': self.clean, 'depth': self.depth}


@dataclass
class DatasetConfig:
    """Документ конфигурации для генерации датасета"""
    inputs: List[InputPair] = field(default_factory=list)
    counts: Dict[str, int] = field(default_factory=lambda: {k: 0 for k in COUNT_KEYS})
    seed: int = 0
    out_dir: str = "dataset"
    image_format: str = "png8"
    pfm_sidecars: bool = False
    test_fraction: float = 0.1
    ranges: SamplingRanges = field(default_factory=SamplingRanges)

    def __post_init__(self):
        self.inputs = [p if isinstance(p, InputPair) else self._parse_pair(p) for p in self.inputs]
        unknown = sorted(set(self.counts) - set(COUNT_KEYS))
        if unknown:
            raise ConfigError(f"unknown weather counts: {', '.join(unknown)}")
        counts = {}
        for key in COUNT_KEYS:
            value = self.counts.get(key, 0)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"count '{key}' must be a non-negative integer, got {value!r}")
            counts[key] = value
        self.counts = counts
        if self.image_format not in IMAGE_FORMATS:
            raise ConfigError(f"image_format must be one of {', '.join(IMAGE_FORMATS)}, got {self.image_format!r}")
        if not (0.0 <= self.test_fraction <= 1.0):
            raise ConfigError(f"test_fraction must be in [0, 1], got {self.test_fraction}")
        if isinstance(self.ranges, dict):
            self.ranges = SamplingRanges.from_dict(self.ranges)
        if self.total_samples > 0 and not self.inputs:
            raise ConfigError("dataset config requests samples but lists no inputs")

    @staticmethod
    def _parse_pair(item: Any) -> InputPair:
        if not isinstance(item, dict) or set(item) != {'clean', 'depth'}:
            raise ConfigError(f"each input must be an object with 'clean' and 'depth', got {item!r}")
        return InputPair(clean=str(item['clean']), depth=str(item['depth']))

    @property
    def total_samples(self) -> int:
        return sum(self.counts.values())

    def with_seed(self, seed: int) -> "DatasetConfig":
        """Копия конфигурации с другим master seed (флаг --seed)"""
        return DatasetConfig(
            inputs=list(self.inputs), counts=dict(self.counts), seed=seed, out_dir=self.out_dir,
            image_format=self.image_format, pfm_sidecars=self.pfm_sidecars,
            test_fraction=self.test_fraction, ranges=self.ranges,
        )

    def to_dict(self) -> dict:
        return {
            'inputs': [p.to_dict() for p in self.inputs],
            'counts': dict(self.counts),
            'seed': self.seed,
            'out_dir': self.out_dir,
            'image_format': self.image_format,
            'pfm_sidecars': self.pfm_sidecars,
            'test_fraction': self.test_fraction,
            'ranges': self.ranges.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[str] = None) -> "DatasetConfig":
        """
        Builds a config from a parsed JSON document

        Relative input and output paths are resolved against base_dir.
        """
        if not isinstance(data, dict):
            raise ConfigError("dataset config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown dataset config keys: {', '.join(unknown)}")
        data = dict(data)
        if base_dir:
            data['inputs'] = [
                {k: _resolve(base_dir, v) for k, v in item.items()} if isinstance(item, dict) else item
                for item in data.get('inputs', [])
            ]
            if 'out_dir' in data:
                data['out_dir'] = _resolve(base_dir, data['out_dir'])
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"invalid dataset config: {e}") from e

    @classmethod
    def load_from_file(cls, filename: str) -> "DatasetConfig":
        """Загружает конфигурацию датасета (строго, без значений по умолчанию при ошибке)"""
        try:
            with open(filename, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"dataset config not found: {filename}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in dataset config {filename}: {e}") from e
        config = cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(filename)))
        logger.info(f"Dataset configuration loaded from {filename}: {config.total_samples} samples")
        return config

    def save_to_file(self, filename: str) -> None:
        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
        logger.info(f"Dataset configuration saved to {filename}")


def _resolve(base_dir: str, path: Any) -> Any:
    if isinstance(path, str) and not os.path.isabs(path):
        return os.path.join(base_dir, path)
    return path
