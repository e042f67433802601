#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WEATHERFORGE — unified adverse-weather imaging toolkit

Команды:
    synth       генерация датасета по JSON-конфигурации
    degrade     деградация одного изображения с явными параметрами
    restore     восстановление по точным (--oracle) или оценённым (--estimate) приорам
    eval        PSNR / SSIM для двух директорий, CSV в stdout
    attn-check  проверка инвариантов weather-aware attention
    visibility  таблица режимов видимости частиц
    config      просмотр и проверка настроек

Exit codes: 0 success, 1 operational failure, 2 usage error.
Log level: WEATHERFORGE_LOG (DEBUG/INFO/WARNING/ERROR/CRITICAL).
"""

import os
import sys
import argparse
import dataclasses
from typing import List, Optional

from forge_config import ToolkitConfig, DEFAULT_CONFIG_FILE, get_toolkit_config
from config_manager import validate_config, validate_dataset_config, show_config, print_warnings
from utils.logger import get_logger, init_logger, log_function_call
from utils.performance import get_performance_monitor, profile_function
from weather.dataset import generate_dataset, sample_files, write_json, write_sample
from weather.dataset_config import DatasetConfig, IMAGE_FORMATS
from weather.errors import WeatherForgeError
from weather.imgcore import read_image, read_scalar_map, write_image, write_scalar_map
from weather.metrics import Metric, MetricMode, evaluate_directories, write_csv
from weather.occlusion import VisibilityParams, particle_visibility, visibility_regime
from weather.restore import OraclePriors, restore_with_estimated, restore_with_oracle
from weather.scatter import Atmosphere
from weather.synth import WeatherType, sample_weather_params, synthesize_sample
from weather.waca_checks import format_results, run_invariance_suite

PROG = "weatherforge"


# ==================== COMMANDS ====================

@log_function_call(log_args=False)
def cmd_synth(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    config = DatasetConfig.load_from_file(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out_dir:
        config.out_dir = args.out_dir
    jobs = args.jobs if args.jobs is not None else settings.jobs

    with get_logger().log_context(f"Generating dataset into {config.out_dir}"):
        manifest = generate_dataset(config, jobs=jobs, progress=args.progress)
    print(f"Generated {len(manifest['samples'])} samples into {config.out_dir}")
    return 0


@log_function_call(log_args=False)
def cmd_degrade(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    clean = read_image(args.clean)
    depth = read_scalar_map(args.depth)
    seed = args.seed if args.seed is not None else 0
    params = sample_weather_params(seed, args.index, WeatherType(args.type))

    # Явные параметры перекрывают разыгранные
    if args.scattering is not None and params.weather_type is not WeatherType.HAZE:
        params = dataclasses.replace(params, weather_type=params.weather_type.with_scattering(args.scattering))
    if args.beta is not None or args.A is not None:
        beta = args.beta if args.beta is not None else params.atmosphere.beta
        A = args.A if args.A is not None else params.atmosphere.A
        params = dataclasses.replace(
            params,
            atmosphere=Atmosphere(A=A, beta=beta),
            volumetric=dataclasses.replace(params.volumetric, beta=beta),
        )
    if args.O is not None:
        params = dataclasses.replace(params, occlusion_O=args.O)
    if args.gamma is not None:
        params = dataclasses.replace(params, lowlight_gamma=args.gamma)

    sample = synthesize_sample(clean, depth, params)
    out_dir, name = os.path.split(args.out_prefix)
    out_dir = out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    files = sample_files(name, args.format, args.pfm_sidecars)
    meta = {
        'name': name,
        'weather_type': params.weather_type.value,
        'scattering': params.scattering,
        'inputs': {'clean': args.clean, 'depth': args.depth},
        'files': files,
        'params': params.to_dict(),
    }
    write_sample(sample, out_dir, files, args.format, meta)
    print(f"Wrote {params.weather_type.value} sample {os.path.join(out_dir, files['lq'])}")
    return 0


@log_function_call(log_args=False)
@profile_function(category="restore")
def cmd_restore(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    degraded = read_image(args.input)

    if args.oracle:
        missing = [flag for flag, value in (("--meta", args.meta), ("--t", args.t), ("--alpha", args.alpha))
                   if not value]
        if missing:
            raise argparse.ArgumentError(None, f"--oracle requires {', '.join(missing)}")
        priors = OraclePriors.from_files(args.meta, args.t, args.alpha)
        restored = restore_with_oracle(degraded, priors, t_min=settings.t_min, alpha_max=settings.alpha_max,
                                       invert_gamma=args.invert_gamma)
    else:
        restored, estimated = restore_with_estimated(degraded, settings.estimator_settings(), gamma=args.gamma)
        if args.priors_dir:
            os.makedirs(args.priors_dir, exist_ok=True)
            stem = os.path.splitext(os.path.basename(args.out))[0]
            write_scalar_map(estimated.transmission, os.path.join(args.priors_dir, f"{stem}_t_est.pfm"))
            write_scalar_map(estimated.alpha, os.path.join(args.priors_dir, f"{stem}_alpha_est.pfm"))
            write_json(estimated.to_dict(), os.path.join(args.priors_dir, f"{stem}_priors.json"))
        get_logger().info(f"Estimated priors: A={estimated.A:.4f}, O={estimated.O:.4f}")

    write_image(restored, args.out, bit_depth=args.bit_depth)
    print(f"Restored image written to {args.out}")
    return 0


@log_function_call(log_args=False)
@profile_function(category="eval")
def cmd_eval(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    metrics = [Metric.PSNR, Metric.SSIM] if args.metric == "all" else [Metric(args.metric)]
    jobs = args.jobs if args.jobs is not None else settings.jobs
    report = evaluate_directories(args.pred, args.ref, metrics, MetricMode(args.mode), jobs=jobs)
    write_csv(report.all_rows(), sys.stdout)
    return 0


@log_function_call(log_args=False)
def cmd_attn_check(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    results = run_invariance_suite(seed=args.seed if args.seed is not None else 0)
    print(format_results(results))
    return 0 if all(r.passed for r in results) else 1


@log_function_call(log_args=False)
def cmd_visibility(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    params = VisibilityParams(focal_length=args.focal_length, drop_radius=args.drop_radius, ratio=args.ratio)
    print(f"z1 = {params.z1:.6g} m, z2 = {params.z2:.6g} m")
    print(f"{'z (m)':>12}  {'regime':<20}  visibility")
    for z in args.z:
        regime = visibility_regime(z, params)
        print(f"{z:>12.6g}  {regime.value:<20}  {particle_visibility(z, params):.6f}")
    return 0


@log_function_call(log_args=False)
def cmd_config(args: argparse.Namespace, settings: ToolkitConfig) -> int:
    if args.action == "show":
        show_config(settings)
        return 0
    print_warnings(validate_config(settings))
    if args.dataset:
        _, warnings = validate_dataset_config(args.dataset)
        print_warnings(warnings)
    return 0


# ==================== PARSER ====================

def _positive_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    # Общие флаги допустимы и до, и после имени команды
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-dir", default=argparse.SUPPRESS, help="write log files and error reports here")
    common.add_argument("--settings", default=argparse.SUPPRESS, help=f"toolkit settings JSON (default {DEFAULT_CONFIG_FILE})")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the master seed")
    common.add_argument("--jobs", type=_positive_int, default=argparse.SUPPRESS, help="worker processes (0 = all cores)")

    parser = argparse.ArgumentParser(prog=PROG, description="Unified adverse-weather imaging toolkit",
                                     parents=[common])
    parser.set_defaults(log_dir=None, settings=None, seed=None, jobs=None)
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a dataset from a JSON config")
    p.add_argument("--config", required=True, help="dataset config JSON")
    p.add_argument("--out-dir", help="override the output directory")
    p.add_argument("--progress", action=argparse.BooleanOptionalAction, default=True, help="show a progress bar")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("degrade", parents=[common], help="degrade one image with explicit parameters")
    p.add_argument("--clean", required=True, help="clean RGB image (PNG or PFM)")
    p.add_argument("--depth", required=True, help="depth map (single-channel PFM, metres)")
    p.add_argument("--type", required=True, choices=[t.value for t in WeatherType])
    p.add_argument("--index", type=_positive_int, default=0, help="sample index used for seed derivation")
    p.add_argument("--beta", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--O", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--scattering", action=argparse.BooleanOptionalAction, default=None,
                   help="force scattering on or off for rain/snow")
    p.add_argument("--out-prefix", required=True, help="output path prefix, e.g. out/sample")
    p.add_argument("--format", choices=IMAGE_FORMATS, default="png8")
    p.add_argument("--pfm-sidecars", action="store_true", help="also write full-precision PFM images")
    p.set_defaults(handler=cmd_degrade)

    p = sub.add_parser("restore", parents=[common], help="restore a degraded image")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--oracle", action="store_true", help="use recorded priors (--meta, --t, --alpha)")
    mode.add_argument("--estimate", action="store_true", help="estimate priors classically")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--meta", help="sample metadata JSON")
    p.add_argument("--t", help="transmission map PFM")
    p.add_argument("--alpha", help="occlusion alpha PFM")
    p.add_argument("--invert-gamma", action="store_true", help="oracle: also undo the recorded low-light gamma")
    p.add_argument("--gamma", type=float, help="estimate: undo this low-light gamma")
    p.add_argument("--priors-dir", help="estimate: write estimated t, alpha, A and O here")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.set_defaults(handler=cmd_restore)

    p = sub.add_parser("eval", parents=[common], help="PSNR/SSIM of two directories as CSV")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=("psnr", "ssim", "all"), default="psnr")
    p.add_argument("--mode", choices=[m.value for m in MetricMode], default="rgb")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("attn-check", parents=[common], help="run the attention invariance suite")
    p.set_defaults(handler=cmd_attn_check)

    p = sub.add_parser("visibility", parents=[common], help="print particle visibility regimes")
    p.add_argument("--focal-length", type=float, required=True, help="f (m)")
    p.add_argument("--drop-radius", type=float, required=True, help="a (m)")
    p.add_argument("--ratio", type=float, default=100.0, help="R = z2 / z1")
    p.add_argument("--z", type=float, nargs="+", required=True, help="distances (m)")
    p.set_defaults(handler=cmd_visibility)

    p = sub.add_parser("config", parents=[common], help="show or validate settings")
    p.add_argument("action", choices=("show", "validate"))
    p.add_argument("--dataset", help="also validate this dataset config")
    p.set_defaults(handler=cmd_config)

    return parser


def _load_settings(path: Optional[str]) -> ToolkitConfig:
    if path:
        return get_toolkit_config(path)
    if os.path.exists(DEFAULT_CONFIG_FILE):
        return get_toolkit_config(DEFAULT_CONFIG_FILE)
    return ToolkitConfig()


def run(argv: Optional[List[str]] = None) -> int:
    """Точка входа CLI; возвращает код завершения"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    error_dir = os.path.join(args.log_dir, "error_reports") if args.log_dir else None
    logger = init_logger(log_dir=args.log_dir, error_report_dir=error_dir)

    try:
        settings = _load_settings(args.settings)
        return args.handler(args, settings)
    except argparse.ArgumentError as e:
        parser.print_usage(sys.stderr)
        print(f"{PROG}: error: {e.message}", file=sys.stderr)
        return 2
    except (WeatherForgeError, OSError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=e)
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return 1
    finally:
        for category, stats in get_performance_monitor().get_profile_stats().items():
            logger.debug(f"Profile {category}: {stats['count']} call(s), {stats['total_ms']:.1f}ms total")


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
