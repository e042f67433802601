#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Synthetic scenes shared by the test modules

Scenes are smooth (no texture a brightness heuristic would take for a
particle) and carry a dark grid so that every 15 x 15 window holds a
zero-valued pixel: the dark channel of the clean scene is exactly 0.
"""

import os
import sys
import json
from typing import Dict, Optional, Tuple

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from weather.dataset_config import InputPair
from weather.imgcore import write_image, write_scalar_map
from weather.occlusion import VolumetricConfig
from weather.particles import LayerSpec, ParticleKind
from weather.scatter import Atmosphere
from weather.synth import WeatherParams, WeatherType

GRID_STEP = 8
SKY_ROWS = 4
SKY_DEPTH = 1000.0


def smooth_scene(h: int = 64, w: int = 64, seed: int = 0, grid: bool = True,
                 sky_rows: int = 0) -> np.ndarray:
    """Low-frequency colour scene in [0.1, 0.9] with an optional dark grid"""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.empty((h, w, 3), dtype=np.float64)
    for c in range(3):
        fy, fx, phase = rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0, 2 * np.pi)
        img[..., c] = 0.5 + 0.4 * np.sin(2 * np.pi * (fy * yy / h + fx * xx / w) + phase)
    if grid:
        img[sky_rows:][(yy[sky_rows:] % GRID_STEP == 0) | (xx[sky_rows:] % GRID_STEP == 0)] = 0.0
    if sky_rows:
        img[:sky_rows] = 0.9
    return img.astype(np.float32)


def depth_gradient(h: int = 64, w: int = 64, far: float = 50.0, near: float = 5.0,
                   sky_rows: int = 0) -> np.ndarray:
    """Depth falling from `far` at the top row to `near` at the bottom; sky rows are very far"""
    rows = np.linspace(far, near, h, dtype=np.float64)
    depth = np.repeat(rows[:, None], w, axis=1)
    if sky_rows:
        depth[:sky_rows] = SKY_DEPTH
    return depth.astype(np.float32)


def haze_scene(h: int = 64, w: int = 64, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scene plus depth with a small sky band, for atmospheric light estimation

    The blue channel of the ground is zero, so its dark channel is 0
    without any texture.
    """
    img = smooth_scene(h, w, seed, grid=False, sky_rows=SKY_ROWS)
    img[SKY_ROWS:, :, 2] = 0.0
    return img, depth_gradient(h, w, sky_rows=SKY_ROWS)


def rain_layer(seed: int = 1, density: float = 3000.0, near: bool = False) -> LayerSpec:
    return LayerSpec(kind=ParticleKind.RAIN, density=density, peak_alpha=0.8 if near else 0.5,
                     seed=seed, angle=10.0, length=30.0 if near else 12.0, width=2.0 if near else 1.0)


def snow_layer(seed: int = 2, density: float = 3000.0) -> LayerSpec:
    return LayerSpec(kind=ParticleKind.SNOW, density=density, peak_alpha=0.7, seed=seed,
                     radius_range=(1.0, 3.0))


def explicit_params(weather_type: WeatherType, beta: float = 0.02, A: float = 0.9, O: float = 0.9,
                    gamma: float = 1.0, volumetric: Optional[VolumetricConfig] = None) -> WeatherParams:
    """WeatherParams with hand-picked values (no sampling)"""
    if volumetric is None:
        if weather_type.particle_kind is ParticleKind.RAIN:
            volumetric = VolumetricConfig((rain_layer(7, near=True),), (rain_layer(8), rain_layer(9)), beta)
        elif weather_type.particle_kind is ParticleKind.SNOW:
            volumetric = VolumetricConfig((snow_layer(7),), (snow_layer(8),), beta)
        else:
            volumetric = VolumetricConfig(beta=beta)
    return WeatherParams(weather_type=weather_type, atmosphere=Atmosphere(A=A, beta=beta),
                         volumetric=volumetric, occlusion_O=O, lowlight_gamma=gamma, seed=0)


def write_pair(directory: str, name: str, clean: np.ndarray, depth: np.ndarray) -> InputPair:
    """Writes clean (PFM) and depth (PFM) inputs; returns the pair"""
    clean_path = os.path.join(directory, f"{name}_clean.pfm")
    depth_path = os.path.join(directory, f"{name}_depth.pfm")
    write_image(clean, clean_path)
    write_scalar_map(depth, depth_path)
    return InputPair(clean=clean_path, depth=depth_path)


def write_dataset_config(path: str, pairs, counts: Dict[str, int], seed: int = 0,
                         out_dir: str = "out", **extra) -> str:
    document = {
        'inputs': [p.to_dict() for p in pairs],
        'counts': counts,
        'seed': seed,
        'out_dir': out_dir,
    }
    document.update(extra)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2)
    return path


def masked_psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    """PSNR over the masked pixels (all channels), peak 1.0"""
    diff = (a.astype(np.float64) - b.astype(np.float64))[mask]
    mse = float(np.mean(diff * diff))
    return float('inf') if mse == 0.0 else 10.0 * np.log10(1.0 / mse)


def tree_digest(directory: str) -> Dict[str, bytes]:
    """File name -> content for every file directly in directory"""
    digest = {}
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if os.path.isfile(path):
            with open(path, 'rb') as f:
                digest[name] = f.read()
    return digest
