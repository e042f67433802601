#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration manager for WeatherForge

Validates and displays toolkit settings and dataset documents. Hard
errors raise ConfigError; soft issues come back as warning strings.
"""

import os
import sys
from typing import List, Optional, TextIO, Tuple

from forge_config import ToolkitConfig, DEFAULT_CONFIG_FILE
from weather.dataset_config import DatasetConfig
from weather.errors import ConfigError


def validate_config(config: ToolkitConfig) -> List[str]:
    """
    Validate the toolkit configuration

    Raises:
        ConfigError: a value no estimator or inversion accepts
    """
    config.estimator_settings()
    if config.r < 1 or config.window < 1 or config.heads < 1:
        raise ConfigError(f"attention sizes must be >= 1, got r={config.r}, window={config.window}, heads={config.heads}")
    if config.jobs < 0:
        raise ConfigError(f"jobs must be >= 0, got {config.jobs}")

    warnings = []
    if config.t_min > 0.2:
        warnings.append(f"High t_min: {config.t_min} (dense haze will be left unrestored)")
    if config.alpha_max < 0.5:
        warnings.append(f"Low alpha_max: {config.alpha_max} (bright particles will leave residue)")
    if config.dark_patch < 3:
        warnings.append(f"Very small dark channel patch: {config.dark_patch}")
    if config.omega < 0.8:
        warnings.append(f"Unusually low omega: {config.omega}")
    if config.top_frac > 0.05:
        warnings.append(f"Large top_frac: {config.top_frac} (atmospheric light will be underestimated)")
    if config.background_window < 5:
        warnings.append(f"Small background window: {config.background_window} (wide streaks become background)")
    return warnings


def validate_dataset_config(filename: str) -> Tuple[DatasetConfig, List[str]]:
    """
    Validate a synth JSON document

    Raises:
        ConfigError: invalid JSON, unknown keys or out-of-range values
    """
    config = DatasetConfig.load_from_file(filename)
    warnings = []
    if config.total_samples == 0:
        warnings.append("Dataset config requests no samples")
    for i, pair in enumerate(config.inputs):
        for path in (pair.clean, pair.depth):
            if not os.path.isfile(path):
                warnings.append(f"Input pair #{i}: missing file {path}")
        if not pair.depth.lower().endswith(".pfm"):
            warnings.append(f"Input pair #{i}: depth map {pair.depth} is not a PFM file")
    if config.image_format == "png8" and not config.pfm_sidecars:
        warnings.append("8-bit PNG without PFM sidecars: oracle round trips are limited by quantization")
    if config.test_fraction == 0.0:
        warnings.append("test_fraction is 0: every sample goes to the train split")
    return config, warnings


def show_config(config: ToolkitConfig, stream: Optional[TextIO] = None) -> None:
    """Show current configuration."""
    out = stream or sys.stdout
    out.write("Current configuration:\n")
    for key, value in config.to_dict().items():
        out.write(f"  {key}: {value}\n")


def print_warnings(warnings: List[str], stream: Optional[TextIO] = None) -> None:
    out = stream or sys.stdout
    if warnings:
        out.write("Configuration warnings:\n")
        for w in warnings:
            out.write(f"  - {w}\n")
    else:
        out.write("Configuration is valid.\n")


def reset_config(filename: str = DEFAULT_CONFIG_FILE) -> None:
    """Reset configuration to defaults."""
    ToolkitConfig().save_to_file(filename)
    print(f"Configuration reset to defaults and saved to {filename}.")


def main():
    """Main function."""
    command = sys.argv[1] if len(sys.argv) > 1 else "show"
    config = ToolkitConfig.load_from_file()

    try:
        if command == "show":
            show_config(config)
        elif command == "validate":
            print_warnings(validate_config(config))
            if len(sys.argv) > 2:
                _, warnings = validate_dataset_config(sys.argv[2])
                print_warnings(warnings)
        elif command == "reset":
            reset_config()
        else:
            print("Usage:")
            print("  python config_manager.py show                - Show current configuration")
            print("  python config_manager.py validate [cfg.json] - Validate settings (and a dataset config)")
            print("  python config_manager.py reset               - Reset to defaults")
            sys.exit(2)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
