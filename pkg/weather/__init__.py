#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Weather imaging package for WeatherForge
"""

from .errors import (
    WeatherForgeError,
    ImageIOError,
    ImageFormatError,
    ShapeError,
    ConfigError,
    DomainError,
    DatasetError
)

from .imgcore import (
    Image,
    ScalarMap,
    read_image,
    write_image,
    read_scalar_map,
    write_scalar_map,
    rgb_to_y
)

from .scatter import (
    Atmosphere,
    transmission_from_depth,
    scattering_composite,
    scattering_invert
)

from .particles import (
    ParticleKind,
    LayerSpec,
    generate_layer
)

from .occlusion import (
    VisibilityRegime,
    VisibilityParams,
    OcclusionField,
    VolumetricConfig,
    visibility_regime,
    particle_visibility,
    volumetric_alpha,
    occlusion_composite,
    occlusion_invert
)

from .legacy import (
    haze_model,
    rain_additive,
    rain_haze_model,
    snow_matting,
    snow_haze_model
)

from .synth import (
    WeatherType,
    WeatherParams,
    DegradedSample,
    sample_weather_params,
    apply_low_light,
    invert_low_light,
    synthesize_sample
)

from .dataset_config import (
    SamplingRanges,
    InputPair,
    DatasetConfig
)

from .dataset import (
    generate_dataset,
    load_sample,
    plan_samples
)

from .priors import (
    EstimatorSettings,
    dark_channel,
    estimate_atmospheric_light,
    estimate_transmission,
    estimate_occlusion
)

from .restore import (
    OraclePriors,
    EstimatedPriors,
    restore_with_oracle,
    restore_with_estimated,
    valid_mask
)

from .waca import (
    AttentionParams,
    FuserParams,
    downsample_avg,
    transmission_similarity,
    tgga_forward,
    ogla_forward,
    waf_fuse,
    waca_forward
)

from .metrics import (
    MetricMode,
    psnr,
    ssim,
    evaluate_directories
)

__all__ = [
    # Errors
    'WeatherForgeError', 'ImageIOError', 'ImageFormatError', 'ShapeError',
    'ConfigError', 'DomainError', 'DatasetError',

    # Images
    'Image', 'ScalarMap', 'read_image', 'write_image', 'read_scalar_map',
    'write_scalar_map', 'rgb_to_y',

    # Physics
    'Atmosphere', 'transmission_from_depth', 'scattering_composite', 'scattering_invert',
    'ParticleKind', 'LayerSpec', 'generate_layer',
    'VisibilityRegime', 'VisibilityParams', 'OcclusionField', 'VolumetricConfig',
    'visibility_regime', 'particle_visibility', 'volumetric_alpha',
    'occlusion_composite', 'occlusion_invert',
    'haze_model', 'rain_additive', 'rain_haze_model', 'snow_matting', 'snow_haze_model',

    # Synthesis
    'WeatherType', 'WeatherParams', 'DegradedSample', 'sample_weather_params',
    'apply_low_light', 'invert_low_light', 'synthesize_sample',
    'SamplingRanges', 'InputPair', 'DatasetConfig',
    'generate_dataset', 'load_sample', 'plan_samples',

    # Restoration
    'EstimatorSettings', 'dark_channel', 'estimate_atmospheric_light',
    'estimate_transmission', 'estimate_occlusion',
    'OraclePriors', 'EstimatedPriors', 'restore_with_oracle', 'restore_with_estimated', 'valid_mask',

    # Attention
    'AttentionParams', 'FuserParams', 'downsample_avg', 'transmission_similarity',
    'tgga_forward', 'ogla_forward', 'waf_fuse', 'waca_forward',

    # Metrics
    'MetricMode', 'psnr', 'ssim', 'evaluate_directories'
]
