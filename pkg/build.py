#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Build script for WeatherForge
Creates a standalone command-line executable using PyInstaller

Usage:
    python build.py [--clean] [--onedir] [--debug]
"""

import os
import sys
import subprocess
import shutil
import argparse
from pathlib import Path

APP_NAME = "weatherforge"


def get_version() -> str:
    """Получает версию из CHANGELOG.md"""
    changelog_path = Path(__file__).parent / "CHANGELOG.md"
    if changelog_path.exists():
        with open(changelog_path, 'r', encoding='utf-8') as f:
            for line in f:
                if line.startswith("## ["):
                    # Извлекаем версию из строки ## [0.1.0]
                    return line.split('[')[1].split(']')[0]
    return "0.1.0"


def check_dependencies() -> bool:
    """Проверяет наличие PyInstaller"""
    try:
        import PyInstaller
        print(f"✓ PyInstaller found: {PyInstaller.__version__}")
        return True
    except ImportError:
        print("✗ PyInstaller not found. Please install it:")
        print("  pip install pyinstaller")
        return False


def clean_build_dirs():
    """Очищает директории сборки"""
    for dir_name in ('build', 'dist', '__pycache__'):
        dir_path = Path(dir_name)
        if dir_path.exists():
            shutil.rmtree(dir_path)
            print(f"✓ Removed {dir_name}")


def build_pyinstaller(onefile: bool = True, debug: bool = False) -> bool:
    """Собирает исполняемый файл с помощью PyInstaller"""
    version = get_version()
    project_root = Path(__file__).parent
    script_path = project_root / "weatherforge.py"

    if not script_path.exists():
        print(f"✗ Main script not found: {script_path}")
        return False

    cmd = [
        sys.executable, "-m", "PyInstaller",
        "--name", f"{APP_NAME}_v{version}",
        "--add-data", f"config.json{os.pathsep}.",
        "--console",
        "--hidden-import", "numpy",
        "--hidden-import", "scipy.ndimage",
        "--hidden-import", "scipy.special",
        "--hidden-import", "skimage.metrics",
        "--hidden-import", "PIL",
        "--hidden-import", "png",
        "--hidden-import", "psutil",
        "--hidden-import", "tqdm",
        "--onefile" if onefile else "--onedir",
    ]
    if debug:
        cmd.append("--debug=all")
    cmd.append(str(script_path))

    print(f"\n🔨 Building WeatherForge v{version}...")
    print(f"Command: {' '.join(cmd)}\n")

    try:
        subprocess.run(cmd, check=True, cwd=str(project_root))
    except subprocess.CalledProcessError as e:
        print(f"\n✗ Build failed: {e}")
        return False

    print("\n✓ Build completed successfully!")
    dist_dir = project_root / "dist"
    suffix = ".exe" if sys.platform == 'win32' and onefile else ""
    exe_path = dist_dir / f"{APP_NAME}_v{version}{suffix}"
    if exe_path.exists() and exe_path.is_file():
        size_mb = exe_path.stat().st_size / (1024 * 1024)
        print(f"\n📦 Executable: {exe_path}")
        print(f"📊 Size: {size_mb:.2f} MB")
    return True


def create_readme_dist():
    """Создаёт README для дистрибутива"""
    version = get_version()

    readme_content = f"""# WeatherForge v{version}

## Запуск

    {APP_NAME}_v{version} synth --config synth.json
    {APP_NAME}_v{version} restore --estimate --input hazy.png --out clear.png
    {APP_NAME}_v{version} eval --pred restored/ --ref gt/ --metric all

## Настройка

Пороги обращения и параметры оценщиков задаются в config.json
(или через --settings). Уровень логирования: WEATHERFORGE_LOG.

## Коды завершения

- 0 — успех
- 1 — ошибка выполнения (файл, данные, конфигурация)
- 2 — ошибка использования

## Лицензия

MIT License
"""

    dist_dir = Path("dist")
    if dist_dir.exists():
        with open(dist_dir / "README.txt", 'w', encoding='utf-8') as f:
            f.write(readme_content)
        print("✓ Created distribution README")


def main():
    parser = argparse.ArgumentParser(description="Build the WeatherForge executable")
    parser.add_argument('--clean', action='store_true', help='Clean build directories first')
    parser.add_argument('--onedir', action='store_true', help='Build as directory instead of single file')
    parser.add_argument('--debug', action='store_true', help='Build with debug information')

    args = parser.parse_args()

    print("=" * 60)
    print("WEATHERFORGE - Build Script")
    print("=" * 60)

    if not check_dependencies():
        sys.exit(1)

    if args.clean:
        print("\n🧹 Cleaning build directories...")
        clean_build_dirs()

    if not build_pyinstaller(onefile=not args.onedir, debug=args.debug):
        sys.exit(1)
    create_readme_dist()


if __name__ == "__main__":
    main()
