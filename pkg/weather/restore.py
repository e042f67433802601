#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Physics-based restoration: occlusion inversion followed by scattering inversion

    B^ = (I - O alpha') / (1 - alpha')
    J^ = (B^ - A (1 - t')) / t'

The priors are either the exact ones recorded at synthesis time (oracle)
or classical estimates (see priors). The target is the post-low-light
scene J'; invert_gamma additionally undoes the recorded gamma.
"""

import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Dict, Any

import numpy as np

from .errors import ConfigError
from .imgcore import Image, ScalarMap, ensure_image, ensure_scalar_map, read_scalar_map, require_same_size
from .occlusion import DEFAULT_ALPHA_MAX, OcclusionField, occlusion_invert
from .priors import (
    EstimatorSettings, dark_channel, estimate_atmospheric_light, estimate_occlusion, estimate_transmission
)
from .scatter import DEFAULT_T_MIN, scattering_invert
from .synth import DegradedSample, invert_low_light

logger = logging.getLogger("WeatherForge.Restore")


@dataclass(frozen=True)
class OraclePriors:
    """Точные приоры, записанные при синтезе"""
    transmission: ScalarMap
    alpha: ScalarMap
    O: float
    A: float
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "transmission", ensure_scalar_map(self.transmission, "transmission"))
        object.__setattr__(self, "alpha", ensure_scalar_map(self.alpha, "alpha"))
        require_same_size(("transmission", self.transmission), ("alpha", self.alpha))
        if self.gamma < 1.0:
            raise ConfigError(f"low-light gamma must be >= 1, got {self.gamma}")

    @classmethod
    def from_sample(cls, sample: DegradedSample) -> "OraclePriors":
        p = sample.params
        return cls(transmission=sample.transmission, alpha=sample.alpha, O=p.occlusion_O,
                   A=p.atmosphere.A, gamma=p.lowlight_gamma)

    @classmethod
    def from_meta(cls, meta: Dict[str, Any], transmission: ScalarMap, alpha: ScalarMap) -> "OraclePriors":
        """meta is a sample sidecar ({'params': {...}}) or a bare params record"""
        params = meta.get('params', meta) if isinstance(meta, dict) else None
        if not isinstance(params, dict):
            raise ConfigError("sample metadata must be a JSON object")
        try:
            return cls(
                transmission=transmission,
                alpha=alpha,
                O=float(params['occlusion_O']),
                A=float(params['atmosphere']['A']),
                gamma=float(params.get('lowlight_gamma', 1.0)),
            )
        except (KeyError, TypeError) as e:
            raise ConfigError(f"sample metadata is missing prior field {e}") from e

    @classmethod
    def from_files(cls, meta_path: str, t_path: str, alpha_path: str) -> "OraclePriors":
        try:
            with open(meta_path, 'r', encoding='utf-8') as f:
                meta = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in sample metadata {meta_path}: {e}") from e
        return cls.from_meta(meta, read_scalar_map(t_path), read_scalar_map(alpha_path))


@dataclass(frozen=True)
class EstimatedPriors:
    """Оценённые приоры (для просмотра и сохранения)"""
    transmission: ScalarMap
    alpha: ScalarMap
    A: float
    O: float

    def to_dict(self) -> dict:
        return {'A': self.A, 'O': self.O}


def valid_mask(t: ScalarMap, alpha: ScalarMap, t_min: float = DEFAULT_T_MIN,
               alpha_max: float = DEFAULT_ALPHA_MAX) -> np.ndarray:
    """Pixels where the closed-form inversion is exact: t >= t_min and alpha <= alpha_max"""
    t = ensure_scalar_map(t, "transmission")
    alpha = ensure_scalar_map(alpha, "alpha")
    require_same_size(("transmission", t), ("alpha", alpha))
    return (t >= np.float32(t_min)) & (alpha <= np.float32(alpha_max))


def _invert_chain(I: Image, occ: OcclusionField, t: ScalarMap, A: float,
                  t_min: float, alpha_max: float) -> Image:
    B = occlusion_invert(I, occ, alpha_max=alpha_max)
    return scattering_invert(B, t, A, t_min=t_min)


def restore_with_oracle(I: Image, priors: OraclePriors, t_min: float = DEFAULT_T_MIN,
                        alpha_max: float = DEFAULT_ALPHA_MAX, invert_gamma: bool = False) -> Image:
    """
    Восстановление по точным приорам

    Args:
        I: degraded image
        priors: t, alpha, O, A (and gamma) recorded at synthesis
        invert_gamma: also undo the low-light gamma (J instead of J')
    """
    if priors is None:
        raise ConfigError("oracle restoration requires recorded priors")
    I = ensure_image(I, "I")
    J = _invert_chain(I, OcclusionField(priors.alpha, priors.O), priors.transmission, priors.A,
                      t_min, alpha_max)
    if invert_gamma:
        J = invert_low_light(J, priors.gamma)
    return J


def restore_with_estimated(I: Image, settings: Optional[EstimatorSettings] = None,
                           gamma: Optional[float] = None) -> Tuple[Image, EstimatedPriors]:
    """
    Восстановление по оценённым приорам

    A and t are estimated on I first (bright particles barely move the
    dark channel); occlusion is then detected with a threshold scaled by
    the estimated transmission and removed before dehazing. When gamma
    is given the low-light adjustment is undone as well.

    Returns:
        (restored image, estimated priors)
    """
    settings = settings or EstimatorSettings()
    I = ensure_image(I, "I")

    dc = dark_channel(I, settings.dark_patch)
    A = estimate_atmospheric_light(I, dc, settings.top_frac)
    if A <= 0.0:
        # Полностью чёрный фон: рассеяния нет, t = 1
        logger.debug("Zero atmospheric light estimate, skipping dehazing")
        t = np.ones(dc.shape, dtype=np.float32)
    else:
        t = estimate_transmission(I, A, settings.omega, settings.dark_patch, settings.t_min)

    occ = estimate_occlusion(I, settings.bright_thresh, settings.size_max, settings.background_window,
                             transmission=t)
    B = occlusion_invert(I, occ, alpha_max=settings.alpha_max)
    J = B if A <= 0.0 else scattering_invert(B, t, A, t_min=settings.t_min)

    if gamma is not None:
        J = invert_low_light(J, gamma)
    return J, EstimatedPriors(transmission=t, alpha=occ.alpha, A=A, O=occ.brightness)
