#!/usr/bin/env python3
"""
svtail - numerical lab for least singular value tails of sparse Gaussian matrices

Usage:
    python run.py <command> [flags]            # Run an experiment
    python run.py <command> --help             # Flags of one command
    python run.py --from-manifest FILE         # Repeat a saved run
    python run.py --help                       # Show this message and the command list

Global flags (before or after the command):
    --config FILE         key=value file, keys mirror flag names
    --out DIR             Output directory (default runs/<command>-<config hash>)
    --jobs N              Worker cap, does not change results
    --seed S              Master seed (default SVTAIL_SEED or 0)
    --from-manifest FILE  Re-run the command and configuration of a manifest

Every run writes manifest.json, data.csv and summary.json. Exit code 0 on
success, 1 on configuration or feasibility errors, 2 when a solver does not
converge.
"""

import importlib.util
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGENCE = 2


# ANSI color codes for prettier output
class Colors:
    BLUE = '\033[94m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    BOLD = '\033[1m'
    END = '\033[0m'


def check_dependencies():
    """Check if required dependencies are installed"""
    required_packages = {
        'numpy': 'numpy', 'scipy': 'scipy', 'pydantic': 'pydantic', 'rich': 'rich',
        'colorama': 'colorama', 'dotenv': 'python-dotenv', 'docstring_parser': 'docstring-parser',
        'thefuzz': 'thefuzz', 'psutil': 'psutil',
    }

    missing = [package for module, package in required_packages.items() if importlib.util.find_spec(module) is None]

    if missing:
        print(f"{Colors.RED}Missing dependencies: {', '.join(missing)}{Colors.END}")
        print(f"Install them with: {Colors.YELLOW}uv sync{Colors.END} or pip install {' '.join(missing)}")
        return False

    return True


def error_print(msg: str):
    print(f"{Colors.RED}Error: {msg}{Colors.END}", file=sys.stderr)


def list_commands():
    from commands import CommandExecuter

    print(__doc__)
    print(f"{Colors.BOLD}Available commands:{Colors.END}")
    command_dict = {}
    for name, func in CommandExecuter.get_commands().items():
        command_dict.setdefault(func, []).append(name)

    for func, names in command_dict.items():
        print(f"  {Colors.GREEN}{', '.join(names)}{Colors.END}: {getattr(func, 'help', 'No help provided')}")


def _global_parser():
    from func_to_args import ArgumentParser

    parser = ArgumentParser(prog="run.py", add_help=False, allow_abbrev=False)
    parser.add_argument("--config")
    parser.add_argument("--out")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--from-manifest", dest="from_manifest")
    parser.add_argument("-h", "--help", action="store_true")
    return parser


def _read_config_file(path: str, command_name: str) -> dict[str, str]:
    from dotenv import dotenv_values

    from commands.validation import normalize_key, validate_config
    from svtail.errors import ConfigError

    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    settings = {normalize_key(k): v for k, v in dotenv_values(path).items()}
    ok, message = validate_config(command_name, settings)
    if not ok:
        raise ConfigError(message)
    return settings


def resolve(flags, rest: list[str]) -> dict:
    """
    Resolves the command, its parameters, the solver settings, seed, worker
    cap and output directory. Flags override the config file, which overrides
    the defaults.

    Returns:
        dict with keys command, params, settings, master_seed, jobs, out.
    """
    import config as conf
    from commands import CommandExecuter
    from commands.manifest import load_manifest
    from commands.validation import GLOBAL_KEYS, SETTINGS_KEYS
    from func_to_args import flag_name
    from svtail.errors import ConfigError

    if flags.from_manifest:
        if rest:
            raise ConfigError(f"--from-manifest takes no command or flags, got {' '.join(rest)}")
        try:
            manifest = load_manifest(flags.from_manifest)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read manifest {flags.from_manifest}: {e}") from e
        CommandExecuter.get(manifest.command)
        return {
            "command": manifest.command,
            "params": dict(manifest.config["params"]),
            "settings": dict(manifest.config["settings"]),
            "master_seed": manifest.master_seed,
            "jobs": flags.jobs,
            "out": flags.out,
        }

    command_name, command_args = rest[0], rest[1:]
    func = CommandExecuter.get(command_name)

    file_settings = _read_config_file(flags.config, command_name) if flags.config else {}
    file_args = []
    for key, value in file_settings.items():
        if key in GLOBAL_KEYS or key in SETTINGS_KEYS:
            continue
        file_args += [flag_name(key)] + value.split()
    params = CommandExecuter.parse(command_name, file_args + command_args)

    settings = conf.update_config({k: v for k, v in file_settings.items() if k in SETTINGS_KEYS})
    settings = {k: settings[k] for k in sorted(SETTINGS_KEYS)}

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in file_settings:
            return file_settings[key]
        return default

    try:
        master_seed = int(pick(flags.seed, "seed", conf.MASTER_SEED))
        jobs = pick(flags.jobs, "jobs", conf.JOBS)
        jobs = None if jobs is None else int(jobs)
    except ValueError as e:
        raise ConfigError(f"seed and jobs must be integers: {e}") from e
    if not 0 <= master_seed < 2**64:
        raise ConfigError(f"seed must lie in [0, 2^64), got {master_seed}")

    return {
        "command": command_name,
        "params": params,
        "settings": settings,
        "master_seed": master_seed,
        "jobs": jobs,
        "out": pick(flags.out, "out", None),
    }


def _print_summary(command: str, summary: dict, out_dir: Path, elapsed: float):
    from rich.console import Console
    from rich.table import Table

    from commands.utils import seconds_to_hms

    table = Table(title=f"{command} summary")
    table.add_column("key", style="cyan")
    table.add_column("value", style="yellow")
    for key, value in summary.items():
        if isinstance(value, (dict, list)):
            continue
        table.add_row(key, str(value))
    console = Console()
    console.print(table)
    console.print(f"[green]Results in {out_dir}[/green] ({seconds_to_hms(elapsed)})")


def execute(resolved: dict) -> Path:
    """Runs a resolved command and writes manifest.json, data.csv and summary.json."""
    import config as conf
    from commands import CommandExecuter
    from commands.manifest import (
        DATA_FILE,
        SUMMARY_FILE,
        RunManifest,
        config_hash,
        write_csv,
        write_json,
        write_manifest,
    )
    from commands.utils import print_header
    from svtail.errors import ConfigError

    command = resolved["command"]
    conf.update_config(resolved["settings"])
    run_config = {"params": resolved["params"], "settings": resolved["settings"]}
    digest = config_hash(command, run_config, resolved["master_seed"])

    out_dir = Path(resolved["out"] or os.path.join(conf.OUTPUT_DIR, f"{command}-{digest[:12]}"))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out_dir}: {e}") from e
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"output directory {out_dir} is not writable")

    print_header(f"svtail {command}", [("seed", resolved["master_seed"]), ("config", digest[:12]),
                                       ("out", out_dir)])
    manifest = RunManifest(command=command, config=run_config, config_hash=digest,
                           master_seed=resolved["master_seed"], started=datetime.now(timezone.utc))
    start = time.perf_counter()
    result = CommandExecuter.execute(command, resolved["params"], master_seed=resolved["master_seed"],
                                     jobs=resolved["jobs"])

    try:
        data = write_csv(out_dir / DATA_FILE, result.headers, result.rows)
        summary = write_json(out_dir / SUMMARY_FILE, result.summary)
        manifest.finished = datetime.now(timezone.utc)
        manifest.outputs = [str(data), str(summary)]
        write_manifest(out_dir, manifest)
    except OSError as e:
        raise ConfigError(f"cannot write results to {out_dir}: {e}") from e

    if conf.VERBOSE:
        _print_summary(command, result.summary, out_dir, time.perf_counter() - start)
    return out_dir


def main(argv: list[str] = None) -> int:
    """Main entry point"""
    if not check_dependencies():
        return EXIT_CONFIG

    from pydantic import ValidationError

    from commands import CommandExecuter, CommandNotFound, InvalidCommand
    from func_to_args import ArgsError
    from svtail.errors import NonConvergenceError, SvtailError

    argv = sys.argv[1:] if argv is None else list(argv)

    try:
        flags, rest = _global_parser().parse_known_args(argv)
        if flags.help and rest:
            CommandExecuter.parser(rest[0]).print_help()
            return EXIT_OK
        if flags.help or (not rest and not flags.from_manifest):
            list_commands()
            return EXIT_OK if flags.help else EXIT_CONFIG
        execute(resolve(flags, rest))
    except NonConvergenceError as e:
        error_print(str(e))
        return EXIT_NONCONVERGENCE
    except (ArgsError, InvalidCommand, CommandNotFound, SvtailError, ValidationError, ValueError) as e:
        error_print(str(e))
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
