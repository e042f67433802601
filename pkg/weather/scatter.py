#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Atmospheric scattering: transmission, compositing and its closed-form inversion

    t(x) = exp(-beta * d(x))
    B(x) = J(x) t(x) + A (1 - t(x))
    J^(x) = (B(x) - A (1 - t')) / t',   t' = max(t(x), t_min)
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .imgcore import Image, ScalarMap, ensure_image, ensure_scalar_map, require_same_size

logger = logging.getLogger("WeatherForge.Scatter")

DEFAULT_T_MIN = 0.05


@dataclass(frozen=True)
class Atmosphere:
    """Атмосфера: яркость A и коэффициент рассеяния beta (1/м)"""
    A: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.A <= 1.0):
            raise ConfigError(f"atmospheric light A must be in [0, 1], got {self.A}")
        if self.beta < 0.0:
            raise ConfigError(f"scattering coefficient beta must be >= 0, got {self.beta}")


def transmission_from_depth(depth: ScalarMap, beta: float) -> ScalarMap:
    """
    t(x) = exp(-beta * d(x))

    Raises:
        DomainError: negative depth sample (index of the first offending pixel)
        ConfigError: beta < 0
    """
    depth = ensure_scalar_map(depth, "depth")
    if beta < 0.0:
        raise ConfigError(f"scattering coefficient beta must be >= 0, got {beta}")
    negative = depth < 0.0
    if negative.any():
        index = int(np.flatnonzero(negative)[0])
        raise DomainError(
            f"negative depth {float(depth.flat[index])} at pixel index {index}", index=index
        )
    t = np.exp(-np.float32(beta) * depth)
    return t.astype(np.float32)


def scattering_composite(J: Image, t: ScalarMap, A: float) -> Image:
    """B = J t + A (1 - t); a convex combination, no clamping needed"""
    J = ensure_image(J, "J")
    t = ensure_scalar_map(t, "transmission")
    require_same_size(("J", J), ("transmission", t))
    if not (0.0 <= A <= 1.0):
        raise ConfigError(f"atmospheric light A must be in [0, 1], got {A}")
    t3 = t[..., None]
    return (J * t3 + np.float32(A) * (1.0 - t3)).astype(np.float32)


def scattering_invert(B: Image, t: ScalarMap, A: float, t_min: float = DEFAULT_T_MIN) -> Image:
    """
    Обратное преобразование: J^ = (B - A (1 - t')) / t', t' = max(t, t_min)

    The result is clamped to [0, 1].
    """
    if not (0.0 < t_min <= 1.0):
        raise ConfigError(f"t_min must be in (0, 1], got {t_min}")
    if not (0.0 <= A <= 1.0):
        raise DomainError(f"atmospheric light A must be in [0, 1], got {A}")
    B = ensure_image(B, "B")
    t = ensure_scalar_map(t, "transmission")
    require_same_size(("B", B), ("transmission", t))
    t_c = np.maximum(t, np.float32(t_min))[..., None]
    J = (B - np.float32(A) * (1.0 - t_c)) / t_c
    return np.clip(J, 0.0, 1.0).astype(np.float32)
