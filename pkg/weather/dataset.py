#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Parallel dataset generation with a deterministic manifest

Features:
- Per-sample work is a pure function of (config, index): seeds are derived
  from the master seed, so worker count and completion order never change
  the output bytes
- Decoded inputs are cached per worker process
- Partial files of a failed sample are removed and the failure is recorded
- manifest.json lists every sample with its parameter record
"""

import os
import sys
import json
import time
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Any, Tuple

from tqdm import tqdm

from utils.performance import LRUCache, get_performance_monitor, resolve_jobs

from .dataset_config import DatasetConfig, InputPair, SamplingRanges, COUNT_KEYS
from .errors import DatasetError, ImageIOError
from .imgcore import (
    Image, ScalarMap, read_image, read_scalar_map, require_same_size, write_image, write_scalar_map
)
from .seeding import STREAM_SPLIT, derive_seed, make_rng
from .synth import DegradedSample, WeatherParams, WeatherType, sample_weather_params, synthesize_sample

logger = logging.getLogger("WeatherForge.Dataset")

MANIFEST_NAME = "manifest.json"
SCHEMA_VERSION = 1

# Кэш декодированных входов (свой в каждом процессе-воркере)
_INPUT_CACHE = LRUCache(max_size=8)


@dataclass(frozen=True)
class PlannedSample:
    """Одна запланированная задача синтеза"""
    index: int
    weather_type: WeatherType
    pair: InputPair

    @property
    def name(self) -> str:
        return f"{self.index:05d}"


@dataclass(frozen=True)
class SampleJob:
    """Всё, что нужно воркеру для одного сэмпла (сериализуемо для пула процессов)"""
    planned: PlannedSample
    master_seed: int
    ranges: SamplingRanges
    out_dir: str
    image_format: str
    pfm_sidecars: bool
    test_fraction: float


@dataclass
class SampleResult:
    index: int
    name: str
    entry: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    elapsed_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


def plan_samples(config: DatasetConfig) -> List[PlannedSample]:
    """
    Порядок сэмплов: haze, затем rain, затем snow

    Input pairs are assigned round-robin: pair = index mod len(inputs).
    """
    planned = []
    index = 0
    for key in COUNT_KEYS:
        for _ in range(config.counts[key]):
            pair = config.inputs[index % len(config.inputs)]
            planned.append(PlannedSample(index=index, weather_type=WeatherType(key), pair=pair))
            index += 1
    return planned


def sample_split(master_seed: int, index: int, test_fraction: float) -> str:
    """Детерминированное разбиение train/test по индексу"""
    draw = float(make_rng(derive_seed(master_seed, index, STREAM_SPLIT)).random())
    return "test" if draw < test_fraction else "train"


def sample_files(name: str, image_format: str, pfm_sidecars: bool) -> Dict[str, str]:
    """Имена файлов сэмпла относительно out_dir"""
    ext = ".pfm" if image_format == "pfm" else ".png"
    files = {
        'lq': f"{name}_lq{ext}",
        'gt': f"{name}_gt{ext}",
        't': f"{name}_t.pfm",
        'alpha': f"{name}_alpha.pfm",
        'meta': f"{name}_meta.json",
    }
    if pfm_sidecars and image_format != "pfm":
        files['lq_pfm'] = f"{name}_lq.pfm"
        files['gt_pfm'] = f"{name}_gt.pfm"
    return files


def _load_pair(pair: InputPair) -> Tuple[Image, ScalarMap]:
    def loader() -> Tuple[Image, ScalarMap]:
        clean = read_image(pair.clean)
        depth = read_scalar_map(pair.depth)
        require_same_size((pair.clean, clean), (pair.depth, depth))
        return clean, depth
    return _INPUT_CACHE.get_or_load((pair.clean, pair.depth), loader)


def write_json(data: Any, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def write_sample(sample: DegradedSample, out_dir: str, files: Dict[str, str], image_format: str,
                 meta: Dict[str, Any], written: Optional[List[str]] = None) -> None:
    """Записывает файлы сэмпла; пути добавляются в written по мере записи"""
    if written is None:
        written = []

    def path_of(key: str) -> str:
        path = os.path.join(out_dir, files[key])
        written.append(path)
        return path

    bit_depth = 16 if image_format == "png16" else 8
    write_image(sample.degraded, path_of('lq'), bit_depth=bit_depth)
    write_image(sample.clean, path_of('gt'), bit_depth=bit_depth)
    if 'lq_pfm' in files:
        write_image(sample.degraded, path_of('lq_pfm'))
        write_image(sample.clean, path_of('gt_pfm'))
    write_scalar_map(sample.transmission, path_of('t'))
    write_scalar_map(sample.alpha, path_of('alpha'))
    write_json(meta, path_of('meta'))


def _remove_files(paths: List[str]) -> None:
    for path in paths:
        try:
            os.remove(path)
        except FileNotFoundError:
            pass
        except OSError as e:
            logger.warning(f"Could not remove partial file {path}: {e}")


def run_sample_job(job: SampleJob) -> SampleResult:
    """Генерирует и записывает один сэмпл; ошибки возвращаются, а не пробрасываются"""
    planned = job.planned
    start = time.perf_counter()
    written: List[str] = []
    try:
        clean, depth = _load_pair(planned.pair)
        params = sample_weather_params(job.master_seed, planned.index, planned.weather_type, job.ranges)
        sample = synthesize_sample(clean, depth, params)

        files = sample_files(planned.name, job.image_format, job.pfm_sidecars)
        entry = {
            'index': planned.index,
            'name': planned.name,
            'split': sample_split(job.master_seed, planned.index, job.test_fraction),
            'weather_type': params.weather_type.value,
            'scattering': params.scattering,
            'inputs': planned.pair.to_dict(),
            'files': files,
            'params': params.to_dict(),
        }
        write_sample(sample, job.out_dir, files, job.image_format, entry, written)
    except Exception as e:
        _remove_files(written)
        logger.error(f"Sample {planned.name} failed: {type(e).__name__}: {e}")
        return SampleResult(planned.index, planned.name, error=f"{type(e).__name__}: {e}",
                            elapsed_ms=(time.perf_counter() - start) * 1000)
    return SampleResult(planned.index, planned.name, entry=entry,
                        elapsed_ms=(time.perf_counter() - start) * 1000)


def _check_inputs(config: DatasetConfig, planned: List[PlannedSample]) -> None:
    used = {s.pair for s in planned}
    for i, pair in enumerate(config.inputs):
        if pair not in used:
            continue
        for path in (pair.clean, pair.depth):
            if not os.path.isfile(path):
                raise ImageIOError(f"missing file of input pair #{i} (clean={pair.clean}, depth={pair.depth})", path)


def build_manifest(config: DatasetConfig, results: List[SampleResult]) -> Dict[str, Any]:
    ordered = sorted(results, key=lambda r: r.index)
    return {
        'schema_version': SCHEMA_VERSION,
        'seed': config.seed,
        'image_format': config.image_format,
        'pfm_sidecars': config.pfm_sidecars,
        'test_fraction': config.test_fraction,
        'counts': dict(config.counts),
        'ranges': config.ranges.to_dict(),
        'samples': [r.entry for r in ordered if r.ok],
        'failures': [{'index': r.index, 'name': r.name, 'error': r.error} for r in ordered if not r.ok],
    }


def generate_dataset(config: DatasetConfig, jobs: int = 1, progress: bool = False) -> Dict[str, Any]:
    """
    Генерирует датасет по конфигурации и записывает manifest.json

    Args:
        config: Dataset configuration
        jobs: Worker processes (0 = all available cores, 1 = in-process)
        progress: Show a tqdm progress bar on stderr

    Returns:
        The manifest dictionary

    Raises:
        ImageIOError: an input pair is missing
        DatasetError: one or more samples failed (the manifest is still written)
    """
    planned = plan_samples(config)
    _check_inputs(config, planned)
    os.makedirs(config.out_dir, exist_ok=True)

    jobs = min(resolve_jobs(jobs), max(len(planned), 1))
    tasks = [
        SampleJob(planned=p, master_seed=config.seed, ranges=config.ranges, out_dir=config.out_dir,
                  image_format=config.image_format, pfm_sidecars=config.pfm_sidecars,
                  test_fraction=config.test_fraction)
        for p in planned
    ]
    logger.info(f"Generating {len(tasks)} samples into {config.out_dir} with {jobs} worker(s)")

    monitor = get_performance_monitor()
    monitor.start_run()
    results: List[SampleResult] = []
    with tqdm(total=len(tasks), desc="synth", unit="sample", file=sys.stderr, disable=not progress) as bar:
        if jobs <= 1:
            for task in tasks:
                results.append(run_sample_job(task))
                monitor.record_item(results[-1].elapsed_ms)
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                futures = [executor.submit(run_sample_job, task) for task in tasks]
                for future in as_completed(futures):
                    results.append(future.result())
                    monitor.record_item(results[-1].elapsed_ms)
                    bar.update(1)
    metrics = monitor.end_run()
    logger.info(f"Synthesis throughput: {metrics.items_per_minute:.0f} samples/min "
                f"({metrics.elapsed_s:.2f}s total)")
    for warning in monitor.check_warnings():
        logger.warning(warning)

    manifest = build_manifest(config, results)
    write_json(manifest, os.path.join(config.out_dir, MANIFEST_NAME))

    if manifest['failures']:
        names = ", ".join(f['name'] for f in manifest['failures'])
        raise DatasetError(f"{len(manifest['failures'])} sample(s) failed: {names}")
    return manifest


def load_manifest(out_dir: str) -> Dict[str, Any]:
    path = os.path.join(out_dir, MANIFEST_NAME)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            manifest = json.load(f)
    except FileNotFoundError as e:
        raise DatasetError(f"manifest not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"invalid manifest {path}: {e}") from e
    if manifest.get('schema_version') != SCHEMA_VERSION:
        raise DatasetError(f"unsupported manifest schema version {manifest.get('schema_version')!r}")
    return manifest


def load_sample(out_dir: str, name: str) -> DegradedSample:
    """
    Читает сэмпл обратно; PFM (полная точность) предпочтительнее PNG

    Returns:
        DegradedSample with degraded, clean (J'), transmission, alpha and params
    """
    meta_path = os.path.join(out_dir, f"{name}_meta.json")
    try:
        with open(meta_path, 'r', encoding='utf-8') as f:
            meta = json.load(f)
    except FileNotFoundError as e:
        raise DatasetError(f"sample metadata not found: {meta_path}") from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"invalid sample metadata {meta_path}: {e}") from e

    def image(kind: str) -> Image:
        pfm = os.path.join(out_dir, f"{name}_{kind}.pfm")
        return read_image(pfm if os.path.exists(pfm) else os.path.join(out_dir, f"{name}_{kind}.png"))

    return DegradedSample(
        degraded=image("lq"),
        clean=image("gt"),
        transmission=read_scalar_map(os.path.join(out_dir, f"{name}_t.pfm")),
        alpha=read_scalar_map(os.path.join(out_dir, f"{name}_alpha.pfm")),
        params=WeatherParams.from_dict(meta['params']),
    )
