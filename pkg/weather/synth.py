#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sample synthesis: degradation parameters, low-light adjustment and the
unified scattering + occlusion pipeline

    J' = J ^ gamma
    t  = exp(-beta d)              (t = 1 when the sample carries no scattering)
    B  = J' t + A (1 - t)
    I  = O alpha + B (1 - alpha)   (alpha from the volumetric particle layers)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Any, Optional, Sequence, Union

import numpy as np

from .dataset_config import SamplingRanges, Range
from .errors import ConfigError
from .imgcore import Image, ScalarMap, ensure_image, ensure_scalar_map, require_same_size, spatial_shape
from .occlusion import OcclusionField, VolumetricConfig, occlusion_composite, volumetric_alpha
from .particles import LayerSpec, ParticleKind
from .scatter import Atmosphere, scattering_composite, transmission_from_depth
from .seeding import STREAM_PARAMS, derive_seed, layer_seed, make_rng

logger = logging.getLogger("WeatherForge.Synth")


class WeatherType(Enum):
    """Типы погодных условий"""
    HAZE = "haze"
    RAIN = "rain"
    RAIN_HAZE = "rain_haze"
    SNOW = "snow"
    SNOW_HAZE = "snow_haze"

    @property
    def particle_kind(self) -> Optional[ParticleKind]:
        if self in (WeatherType.RAIN, WeatherType.RAIN_HAZE):
            return ParticleKind.RAIN
        if self in (WeatherType.SNOW, WeatherType.SNOW_HAZE):
            return ParticleKind.SNOW
        return None

    @property
    def scattering(self) -> bool:
        return self in (WeatherType.HAZE, WeatherType.RAIN_HAZE, WeatherType.SNOW_HAZE)

    def with_scattering(self, scattering: bool) -> "WeatherType":
        kind = self.particle_kind
        if kind is None:
            return WeatherType.HAZE
        if kind is ParticleKind.RAIN:
            return WeatherType.RAIN_HAZE if scattering else WeatherType.RAIN
        return WeatherType.SNOW_HAZE if scattering else WeatherType.SNOW


@dataclass(frozen=True)
class WeatherParams:
    """Полный набор параметров деградации одного сэмпла"""
    weather_type: WeatherType
    atmosphere: Atmosphere
    volumetric: VolumetricConfig
    occlusion_O: float
    lowlight_gamma: float
    seed: int

    def __post_init__(self):
        if not isinstance(self.weather_type, WeatherType):
            object.__setattr__(self, "weather_type", WeatherType(self.weather_type))
        if self.weather_type is WeatherType.HAZE and not self.volumetric.is_empty:
            raise ConfigError("haze samples must not carry particle layers")
        if self.lowlight_gamma < 1.0:
            raise ConfigError(f"low-light gamma must be >= 1, got {self.lowlight_gamma}")
        if not (0.0 <= self.occlusion_O <= 1.0):
            raise ConfigError(f"occlusion brightness O must be in [0, 1], got {self.occlusion_O}")

    @property
    def scattering(self) -> bool:
        return self.weather_type.scattering

    def to_dict(self) -> dict:
        return {
            'weather_type': self.weather_type.value,
            'scattering': self.scattering,
            'atmosphere': {'A': self.atmosphere.A, 'beta': self.atmosphere.beta},
            'volumetric': self.volumetric.to_dict(),
            'occlusion_O': self.occlusion_O,
            'lowlight_gamma': self.lowlight_gamma,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WeatherParams":
        try:
            weather_type = WeatherType(data['weather_type'])
            params = cls(
                weather_type=weather_type,
                atmosphere=Atmosphere(A=float(data['atmosphere']['A']), beta=float(data['atmosphere']['beta'])),
                volumetric=VolumetricConfig.from_dict(data.get('volumetric', {})),
                occlusion_O=float(data['occlusion_O']),
                lowlight_gamma=float(data['lowlight_gamma']),
                seed=int(data['seed']),
            )
        except ConfigError:
            raise
        except KeyError as e:
            raise ConfigError(f"weather params record is missing field {e}") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"malformed weather params record: {e}") from e
        if 'scattering' in data and bool(data['scattering']) != params.scattering:
            raise ConfigError("'scattering' flag contradicts weather_type")
        return params


@dataclass(frozen=True)
class DegradedSample:
    """Результат синтеза: деградированное изображение и все промежуточные данные"""
    degraded: Image
    clean: Image            # J' (после low-light)
    transmission: ScalarMap
    alpha: ScalarMap
    params: WeatherParams

    def __post_init__(self):
        require_same_size(("degraded", self.degraded), ("clean", self.clean),
                          ("transmission", self.transmission), ("alpha", self.alpha))


# ==================== LOW LIGHT ====================

def apply_low_light(J: Image, gamma: float) -> Image:
    """J' = J ^ gamma; gamma = 1 is the identity"""
    if gamma < 1.0:
        raise ConfigError(f"low-light gamma must be >= 1, got {gamma}")
    J = ensure_image(J, "J")
    if gamma == 1.0:
        return J.copy()
    return np.clip(np.power(J, np.float32(gamma)), 0.0, 1.0).astype(np.float32)


def invert_low_light(J_prime: Image, gamma: float) -> Image:
    """J = J' ^ (1 / gamma)"""
    if gamma < 1.0:
        raise ConfigError(f"low-light gamma must be >= 1, got {gamma}")
    J_prime = ensure_image(J_prime, "J'")
    if gamma == 1.0:
        return J_prime.copy()
    return np.clip(np.power(J_prime, np.float32(1.0 / gamma)), 0.0, 1.0).astype(np.float32)


# ==================== SAMPLING ====================

def _uniform(rng: np.random.Generator, r: Range) -> float:
    return float(rng.uniform(r[0], r[1]))


def _layer_spec(rng: np.random.Generator, kind: ParticleKind, near: bool,
                ranges: SamplingRanges, seed: int, angle: float) -> LayerSpec:
    tier = "near" if near else "far"
    blur = _uniform(rng, getattr(ranges, f"blur_{tier}"))
    peak = _uniform(rng, getattr(ranges, f"peak_alpha_{tier}"))
    if kind is ParticleKind.RAIN:
        length = _uniform(rng, getattr(ranges, f"rain_length_{tier}"))
        width = min(_uniform(rng, getattr(ranges, f"rain_width_{tier}")), length)
        return LayerSpec(
            kind=kind, density=_uniform(rng, getattr(ranges, f"rain_density_{tier}")),
            peak_alpha=peak, seed=seed, blur_sigma=blur,
            angle=angle, angle_jitter=ranges.rain_angle_jitter, length=length, width=width,
        )
    return LayerSpec(
        kind=kind, density=_uniform(rng, getattr(ranges, f"snow_density_{tier}")),
        peak_alpha=peak, seed=seed, blur_sigma=blur,
        radius_range=getattr(ranges, f"snow_radius_{tier}"),
    )


def sample_layer_config(rng: np.random.Generator, weather_type: Union[WeatherType, str], beta: float,
                        ranges: Optional[SamplingRanges] = None,
                        layer_seeds: Optional[Sequence[int]] = None) -> VolumetricConfig:
    """
    Разыгрывает ближние и дальние слои частиц

    Near layers come first, then far layers; layer_seeds (if given) are
    assigned in that order, otherwise they are drawn from rng. All rain
    layers of one sample share a base angle.
    """
    weather_type = WeatherType(weather_type)
    ranges = ranges or SamplingRanges()
    kind = weather_type.particle_kind
    if kind is None:
        return VolumetricConfig(beta=beta)

    n_near, n_far = ranges.near_layers, ranges.far_layers
    if layer_seeds is None:
        layer_seeds = [int(s) for s in rng.integers(0, 2 ** 63, size=n_near + n_far, dtype=np.uint64)]
    elif len(layer_seeds) != n_near + n_far:
        raise ConfigError(f"expected {n_near + n_far} layer seeds, got {len(layer_seeds)}")

    angle = _uniform(rng, ranges.rain_angle)
    near = tuple(_layer_spec(rng, kind, True, ranges, layer_seeds[i], angle) for i in range(n_near))
    far = tuple(_layer_spec(rng, kind, False, ranges, layer_seeds[n_near + i], angle) for i in range(n_far))
    return VolumetricConfig(near_layers=near, far_layers=far, beta=beta)


def sample_weather_params(master_seed: int, index: int, weather_type: Union[WeatherType, str],
                          ranges: Optional[SamplingRanges] = None) -> WeatherParams:
    """
    Детерминированно разыгрывает параметры сэмпла по (master_seed, index)

    Plain rain/snow requests get scattering with ranges.scatter_probability
    and come back as rain_haze/snow_haze when it applies; *_haze requests
    always carry scattering. beta is sampled for every sample since it
    also weights the far particle layers.
    """
    weather_type = WeatherType(weather_type)
    ranges = ranges or SamplingRanges()
    seed = derive_seed(master_seed, index, STREAM_PARAMS)
    rng = make_rng(seed)

    # Фиксированный порядок розыгрыша
    scatter_draw = float(rng.random())
    beta = _uniform(rng, ranges.beta)
    A = _uniform(rng, ranges.A)
    O = _uniform(rng, ranges.O)
    gamma = _uniform(rng, ranges.gamma)

    if weather_type in (WeatherType.RAIN, WeatherType.SNOW):
        weather_type = weather_type.with_scattering(scatter_draw < ranges.scatter_probability)

    n_layers = ranges.near_layers + ranges.far_layers
    seeds = [layer_seed(master_seed, index, i) for i in range(n_layers)]
    volumetric = sample_layer_config(rng, weather_type, beta, ranges,
                                     layer_seeds=seeds if weather_type.particle_kind else None)

    params = WeatherParams(
        weather_type=weather_type,
        atmosphere=Atmosphere(A=A, beta=beta),
        volumetric=volumetric,
        occlusion_O=O,
        lowlight_gamma=gamma,
        seed=seed,
    )
    logger.debug(f"Sample {index}: {weather_type.value} beta={beta:.4f} A={A:.3f} O={O:.3f} gamma={gamma:.3f}")
    return params


# ==================== SYNTHESIS ====================

def synthesize_sample(clean: Image, depth: ScalarMap, params: WeatherParams) -> DegradedSample:
    """
    Применяет low-light, рассеяние и окклюзию по порядку

    Returns every intermediate needed for oracle restoration.
    """
    clean = ensure_image(clean, "clean")
    depth = ensure_scalar_map(depth, "depth")
    require_same_size(("clean", clean), ("depth", depth))

    J_prime = apply_low_light(clean, params.lowlight_gamma)
    # Проверяет глубину даже без рассеяния: она же взвешивает дальние слои
    t = transmission_from_depth(depth, params.atmosphere.beta)
    if not params.scattering:
        t = np.ones(spatial_shape(depth), dtype=np.float32)
    B = scattering_composite(J_prime, t, params.atmosphere.A)

    if params.volumetric.is_empty:
        alpha = np.zeros(spatial_shape(depth), dtype=np.float32)
    else:
        alpha = volumetric_alpha(params.volumetric, depth)
    degraded = occlusion_composite(B, OcclusionField(alpha=alpha, brightness=params.occlusion_O))

    return DegradedSample(degraded=degraded, clean=J_prime, transmission=t, alpha=alpha, params=params)
