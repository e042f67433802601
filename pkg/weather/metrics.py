#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Full-reference quality metrics: PSNR and SSIM in RGB or on the BT.601 Y channel

Features:
- PSNR with peak 1.0; identical images give math.inf
- Gaussian-window SSIM (11 x 11, sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1)
- Directory evaluation matched by file name, with CSV output
"""

import os
import csv
import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Sequence, TextIO, Tuple, Union

import numpy as np
from skimage.metrics import mean_squared_error, structural_similarity

from utils.performance import resolve_jobs

from .errors import ConfigError, DatasetError, ShapeError
from .imgcore import Image, ensure_image, read_image, rgb_to_y

logger = logging.getLogger("WeatherForge.Metrics")

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
IMAGE_EXTENSIONS = (".png", ".pfm")
MEAN_ROW = "MEAN"


class MetricMode(Enum):
    """Цветовое пространство сравнения"""
    RGB = "rgb"
    Y = "y"


class Metric(Enum):
    PSNR = "psnr"
    SSIM = "ssim"


def _prepare(a: Image, b: Image, mode: Union[MetricMode, str]) -> Tuple[np.ndarray, np.ndarray]:
    mode = MetricMode(mode)
    a = ensure_image(a, "a")
    b = ensure_image(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    a64, b64 = a.astype(np.float64), b.astype(np.float64)
    if mode is MetricMode.Y:
        return rgb_to_y(a64), rgb_to_y(b64)
    return a64, b64


def psnr(a: Image, b: Image, mode: Union[MetricMode, str] = MetricMode.RGB) -> float:
    """
    PSNR = 10 log10(1 / MSE), пик 1.0

    Returns:
        Decibels, or math.inf for identical images
    """
    x, y = _prepare(a, b, mode)
    mse = float(mean_squared_error(x, y))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim(a: Image, b: Image, mode: Union[MetricMode, str] = MetricMode.RGB) -> float:
    """
    Gaussian-window SSIM, mean over pixels; RGB averages the per-channel scores

    Raises:
        ConfigError: image smaller than the 11 x 11 window
    """
    x, y = _prepare(a, b, mode)
    if min(x.shape[0], x.shape[1]) < SSIM_WINDOW:
        raise ConfigError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {x.shape[0]}x{x.shape[1]}")
    return float(structural_similarity(
        x, y,
        data_range=1.0,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        channel_axis=-1 if x.ndim == 3 else None,
    ))


_METRIC_FUNCS = {Metric.PSNR: psnr, Metric.SSIM: ssim}


# ==================== BATCH EVALUATION ====================

@dataclass(frozen=True)
class MetricRow:
    """Строка отчёта: имя файла, метрика, значение"""
    name: str
    metric: str
    value: float


@dataclass
class EvaluationReport:
    rows: List[MetricRow] = field(default_factory=list)
    means: Dict[str, float] = field(default_factory=dict)

    def all_rows(self) -> List[MetricRow]:
        return self.rows + [MetricRow(MEAN_ROW, m, v) for m, v in self.means.items()]


def evaluate_pair(pred_path: str, ref_path: str, metrics: Sequence[Union[Metric, str]] = (Metric.PSNR,),
                  mode: Union[MetricMode, str] = MetricMode.RGB) -> List[MetricRow]:
    """Считает метрики для одной пары файлов"""
    pred = read_image(pred_path)
    ref = read_image(ref_path)
    name = os.path.basename(pred_path)
    return [MetricRow(name, Metric(m).value, _METRIC_FUNCS[Metric(m)](pred, ref, mode)) for m in metrics]


def _evaluate_task(task: Tuple[str, str, Tuple[str, ...], str]) -> List[MetricRow]:
    return evaluate_pair(*task)


def _list_images(directory: str) -> Dict[str, str]:
    if not os.path.isdir(directory):
        raise DatasetError(f"not a directory: {directory}")
    return {
        name: os.path.join(directory, name)
        for name in sorted(os.listdir(directory))
        if name.lower().endswith(IMAGE_EXTENSIONS)
    }


def evaluate_directories(pred_dir: str, ref_dir: str, metrics: Sequence[Union[Metric, str]] = (Metric.PSNR,),
                         mode: Union[MetricMode, str] = MetricMode.RGB, jobs: int = 1) -> EvaluationReport:
    """
    Оценивает все одноимённые пары файлов из двух директорий

    Unmatched names are logged and skipped; means are arithmetic over
    images (an infinite PSNR makes the PSNR mean infinite).

    Raises:
        DatasetError: no file name is present in both directories
    """
    metric_keys = tuple(Metric(m).value for m in metrics)
    mode_key = MetricMode(mode).value
    preds = _list_images(pred_dir)
    refs = _list_images(ref_dir)

    common = sorted(set(preds) & set(refs))
    for name in sorted(set(preds) ^ set(refs)):
        side = "prediction" if name in preds else "reference"
        logger.warning(f"Skipping unmatched {side} file {name}")
    if not common:
        raise DatasetError(f"no matching image names in {pred_dir} and {ref_dir}")

    tasks = [(preds[name], refs[name], metric_keys, mode_key) for name in common]
    jobs = min(resolve_jobs(jobs), len(tasks))
    if jobs <= 1:
        per_pair = [_evaluate_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            per_pair = list(executor.map(_evaluate_task, tasks))

    rows = [row for pair_rows in per_pair for row in pair_rows]
    means = {}
    for key in metric_keys:
        values = [r.value for r in rows if r.metric == key]
        means[key] = math.fsum(values) / len(values) if not any(math.isinf(v) for v in values) else math.inf
    logger.info(f"Evaluated {len(common)} pairs ({mode_key}): " +
                ", ".join(f"{k}={v:.4f}" for k, v in means.items()))
    return EvaluationReport(rows=rows, means=means)


def format_value(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6f}"


def write_csv(rows: Sequence[MetricRow], stream: TextIO) -> None:
    """Пишет CSV с заголовком name,metric,value"""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("name", "metric", "value"))
    for row in rows:
        writer.writerow((row.name, row.metric, format_value(row.value)))
