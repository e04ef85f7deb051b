"""
Command handlers for the qdmollow command line.
"""
import argparse
import json
import logging
from pathlib import Path

import numpy as np

from qdmollow.models.schemas import RunConfig
from qdmollow.services.ldos_loader import ingest_ldos
from qdmollow.services.presets import PresetLibrary
from qdmollow.services.sweep_runner import RATES_COLUMNS, load_config, rates_report, run_sweep
from qdmollow.settings import Settings
from qdmollow.utils.errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def parse_detuning_range(text: str) -> np.ndarray:
    """
    'a:b:n' -> n evenly spaced detunings from a to b (meV).

    Raises:
        ConfigError: on a malformed range
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"detuning range must look like a:b:n, got {text!r}", field="detuning-range")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise ConfigError(f"detuning range {text!r}: {e}", field="detuning-range") from e
    if count < 1 or not (np.isfinite(start) and np.isfinite(stop)):
        raise ConfigError(f"detuning range {text!r} needs finite limits and n >= 1", field="detuning-range")
    return np.linspace(start, stop, count)


def _load_run_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    if getattr(args, "preset", None):
        config = PresetLibrary(settings.presets_dir).load(args.preset)
    else:
        config = load_config(args.config)
    if args.no_phonons:
        config = config.model_copy(update={"phonon": config.phonon.model_copy(update={"enabled": False})})
    return config


def cmd_run(args: argparse.Namespace, settings: Settings) -> int:
    config = _load_run_config(args, settings)
    manifest = run_sweep(config, output_dir=args.output_dir, workers=args.workers, settings=settings)

    print(f"\n{'='*60}")
    print("📊 SWEEP COMPLETE")
    print(f"{'='*60}")
    print(f"Variable: {config.sweep.variable}")
    print(f"Points: {len(manifest.entries)} ({len(manifest.failed)} failed)")
    for entry in manifest.entries:
        marker = "✅" if entry.status == "ok" else "❌"
        detail = entry.path if entry.status == "ok" else entry.error
        reused = " (reused)" if entry.reused else ""
        print(f"   {marker} {entry.variable}={entry.value:+.6g}: {detail}{reused}")
    print(f"{'='*60}\n")

    if manifest.entries and len(manifest.failed) == len(manifest.entries):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_rates(args: argparse.Namespace, settings: Settings) -> int:
    config = _load_run_config(args, settings)
    detunings = parse_detuning_range(args.detuning_range)
    directory = Path(args.output_dir or config.output.directory or settings.output_dir)
    output = Path(args.output) if args.output else directory / "rates.csv"
    table = rates_report(config, detunings, output)

    print(f"\n{'='*60}")
    print("📈 DRIVE-DEPENDENT RATES (μeV)")
    print(f"{'='*60}")
    shown = ("Delta_Lx", "Gamma_p", "Re_M_p", "Im_M_p", "Re_Gamma_u", "Im_Gamma_u")
    columns = [RATES_COLUMNS.index(name) for name in shown]
    print("  ".join(f"{name:>12}" for name in shown))
    for row in table:
        print("  ".join(f"{row[i]:>12.5g}" for i in columns))
    print(f"\nTable: {output}")
    print(f"{'='*60}\n")
    return EXIT_OK


def cmd_ldos_check(args: argparse.Namespace, settings: Settings) -> int:
    res = ingest_ldos(args.file)

    print(f"\n{'='*60}")
    print("🔍 LDOS CHECK")
    print(f"{'='*60}")
    print(f"File: {args.file}")
    print(f"Rows: {res.omega.size}")
    print(f"Range: {res.omega[0]:.6f} .. {res.omega[-1]:.6f} meV")
    print(f"PF_scale: {res.pf_scale:g}")
    peak = res.ldos_maximum()
    print(f"LDOS maximum: {peak:.6f} meV (J_ph = {res.j_ph(peak):.5g} μeV)")
    try:
        lower, upper = res.resonances()
        print(f"Resonances: {lower:.6f}, {upper:.6f} meV (separation {upper - lower:.4f} meV)")
    except ValueError as e:
        print(f"Resonances: {e}")
    print(f"{'='*60}\n")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace, settings: Settings) -> int:
    library = PresetLibrary(settings.presets_dir)
    if args.action == "list":
        names = library.names()
        print(f"\n{'='*60}")
        print(f"📋 PRESETS ({library.directory})")
        print(f"{'='*60}")
        for name in names:
            print(f"   - {name}")
        print(f"{'='*60}\n")
        return EXIT_OK

    if not args.name:
        raise ConfigError("presets emit needs a preset name", field="name")
    text = library.emit(args.name)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_schema(args: argparse.Namespace, settings: Settings) -> int:
    print(json.dumps(RunConfig.model_json_schema(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="Overrides QDMOLLOW_LOG_LEVEL")
    common.add_argument("--workers", type=int, default=None, help="Overrides QDMOLLOW_WORKERS")
    common.add_argument("--output-dir", default=None, help="Overrides QDMOLLOW_OUTPUT_DIR")
    common.add_argument("--no-phonons", action="store_true", help="Disable the phonon bath")

    parser = argparse.ArgumentParser(
        prog="qdmollow",
        description="Resonance fluorescence of a driven quantum dot with phonon and structured photon baths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Run a sweep and write spectra")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="JSON run config")
    source.add_argument("--preset", help="Named preset")
    run.set_defaults(handler=cmd_run)

    rates = sub.add_parser("rates", parents=[common], help="Tabulate rates against detuning")
    source = rates.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="JSON run config")
    source.add_argument("--preset", help="Named preset")
    rates.add_argument("--detuning-range", required=True, help="a:b:n in meV")
    rates.add_argument("--output", default=None, help="CSV path (default <output-dir>/rates.csv)")
    rates.set_defaults(handler=cmd_rates)

    check = sub.add_parser("ldos-check", parents=[common], help="Validate a tabulated LDOS file")
    check.add_argument("file")
    check.set_defaults(handler=cmd_ldos_check)

    presets = sub.add_parser("presets", parents=[common], help="List or emit presets")
    presets.add_argument("action", choices=["list", "emit"])
    presets.add_argument("name", nargs="?")
    presets.add_argument("--output", default=None, help="Write the emitted preset to a file")
    presets.set_defaults(handler=cmd_presets)

    schema = sub.add_parser("schema", parents=[common], help="Print the run config JSON schema")
    schema.set_defaults(handler=cmd_schema)
    return parser


def dispatch(args: argparse.Namespace, settings: Settings) -> int:
    """
    Run the selected command and map failures to exit codes.

    Returns:
        0 on success, 1 for configuration errors, 2 for numerical failures
    """
    try:
        return args.handler(args, settings)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        print(f"❌ Numerical failure: {e}")
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(f"❌ Invalid input: {e}")
        return EXIT_CONFIG

