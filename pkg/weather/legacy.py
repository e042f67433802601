#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Classical single-weather imaging models as reductions of the unified model

    haze:       I = J t + A (1 - t)
    rain:       I = J + sum_l S_l                 (additive streaks)
    rain+haze:  I = haze(J + sum_l S_l)
    snow:       I = O alpha + J (1 - alpha)       (matting)
    snow+haze:  I = haze(O alpha + J (1 - alpha))
"""

from typing import Sequence, Union

import numpy as np

from .imgcore import Image, ScalarMap, ensure_image, ensure_scalar_map, require_same_size
from .occlusion import OcclusionField, occlusion_composite
from .scatter import scattering_composite

StreakLayer = Union[Image, ScalarMap]


def haze_model(J: Image, t: ScalarMap, A: float) -> Image:
    """Модель рассеяния (дымка/туман)"""
    return scattering_composite(J, t, A)


def rain_additive(J: Image, streak_layers: Sequence[StreakLayer]) -> Image:
    """
    Аддитивная модель дождя: I = clamp(J + sum S_l, 0, 1)

    Grey (H x W) layers are broadcast over the colour channels.
    """
    J = ensure_image(J, "J")
    total = J.astype(np.float32).copy()
    for i, layer in enumerate(streak_layers):
        arr = np.asarray(layer, dtype=np.float32)
        if arr.ndim == 2:
            arr = ensure_scalar_map(arr, f"streak layer {i}")[..., None]
        else:
            arr = ensure_image(arr, f"streak layer {i}", check_range=False)
        require_same_size(("J", J), (f"streak layer {i}", arr))
        total += arr
    return np.clip(total, 0.0, 1.0).astype(np.float32)


def rain_haze_model(J: Image, streak_layers: Sequence[StreakLayer], t: ScalarMap, A: float) -> Image:
    return haze_model(rain_additive(J, streak_layers), t, A)


def snow_matting(J: Image, alpha: ScalarMap, O: float) -> Image:
    """Модель матирования снега"""
    return occlusion_composite(J, OcclusionField(alpha=alpha, brightness=O))


def snow_haze_model(J: Image, alpha: ScalarMap, O: float, t: ScalarMap, A: float) -> Image:
    return haze_model(snow_matting(J, alpha, O), t, A)
