"""ccqme command line: run | sweep | compare | kernels | coeffs | steady."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List

from ccqme import __version__
from ccqme.cli.config import ExperimentConfig, load_config
from ccqme.cli.experiment import (
    build_experiment,
    check_sweepable,
    coefficient_table,
    correlator_table,
    rate_table,
    run_trajectories,
    steady_report,
    sweep_experiment,
    verification_rows,
)
from ccqme.cli.io import compare_observable, load_reference, write_csv, write_manifest
from ccqme.errors import CcqmeError, ConfigError
from ccqme.propagate import sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

WARNINGS_FILE = "warnings.txt"


def _configure_logging(level: str, out_dir: Path) -> logging.Handler:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / WARNINGS_FILE).unlink(missing_ok=True)
    # created on the first warning only
    handler = logging.FileHandler(out_dir / WARNINGS_FILE, mode="w", encoding="utf-8", delay=True)
    handler.setLevel(logging.WARNING)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logging.getLogger().addHandler(handler)
    return handler


def _manifest(command: str, cfg: ExperimentConfig | None, outputs: List[Path], **extra: Any) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "command": command,
        "version": __version__,
        "outputs": sorted(p.name for p in outputs),
        **extra,
    }
    if cfg is not None:
        payload["config"] = cfg.as_dict()
        payload["config_sha1"] = cfg.source_sha1
        payload["tolerances"] = cfg.tolerances.as_dict()
    return payload


def cmd_run(args, cfg: ExperimentConfig, out: Path) -> List[Path]:
    exp = build_experiment(cfg)
    files = []
    for name, traj in run_trajectories(exp, progress=args.progress).items():
        files.append(write_csv(out / f"{name}.csv", traj.columns()))
    if args.verify:
        files.append(write_csv(out / "verify.csv", verification_rows(exp)))
    return files


def cmd_sweep(args, cfg: ExperimentConfig, out: Path) -> List[Path]:
    check_sweepable(cfg)
    result = sweep(cfg.sweep, sweep_experiment(cfg), workers=args.threads, progress=args.progress)
    return [write_csv(out / "sweep.csv", result.to_rows())]


def cmd_steady(args, cfg: ExperimentConfig, out: Path) -> List[Path]:
    exp = build_experiment(cfg)
    rows, populations = steady_report(exp)
    pops = {"level": list(range(exp.model.dim)), **populations}
    return [write_csv(out / "steady.csv", rows), write_csv(out / "steady_populations.csv", pops)]


def cmd_kernels(args, cfg: ExperimentConfig, out: Path) -> List[Path]:
    exp = build_experiment(cfg)
    files = []
    for k in range(len(cfg.baths)):
        files.append(write_csv(out / f"correlator_bath{k}.csv", correlator_table(cfg, k, verify=args.verify)))
        files.append(write_csv(out / f"rates_bath{k}.csv", rate_table(exp, k)))
    return files


def cmd_coeffs(args, cfg: ExperimentConfig, out: Path) -> List[Path]:
    exp = build_experiment(cfg)
    table, asymptotic = coefficient_table(exp, verify=args.verify)
    args.extra["asymptotic_coefficients"] = asymptotic
    return [write_csv(out / "coefficients.csv", table)]


def cmd_compare(args, cfg: ExperimentConfig | None, out: Path) -> List[Path]:
    run = load_reference(args.run)
    reference = load_reference(args.reference)
    table, summary = compare_observable(run, reference, args.observable)
    args.extra["comparison"] = summary
    logger.info(
        "%s: max |diff| %.3g, mean %.3g over %d points",
        args.observable, summary["max_abs_diff"], summary["mean_abs_diff"], summary["points"],
    )
    return [write_csv(out / f"compare_{args.observable}.csv", table)]


COMMANDS: Dict[str, Callable] = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "kernels": cmd_kernels,
    "coeffs": cmd_coeffs,
    "steady": cmd_steady,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment TOML file")
    common.add_argument("--out-dir", help="output directory (default: [output] dir of the config)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweep cells")
    common.add_argument("--seed-irrelevant", action="store_true",
                        help="accepted for scripted runs; nothing in ccqme draws random numbers")
    common.add_argument("--verify", action="store_true",
                        help="run the expensive cross-checks (Matsubara, memory-kernel ODE, finite differences)")
    common.add_argument("--log-level", default="INFO")
    common.add_argument("--progress", action="store_true", help="show progress bars")

    parser = argparse.ArgumentParser(prog="ccqme", description="Canonically consistent quantum master equations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "kernels", "coeffs", "steady"):
        sub.add_parser(name, parents=[common])
    compare = sub.add_parser("compare", parents=[common])
    compare.add_argument("--run", required=True, help="CSV emitted by 'ccqme run'")
    compare.add_argument("--reference", required=True, help="external reference CSV with a 't' column")
    compare.add_argument("--observable", default="ground_pop")
    return parser


def main(argv: List[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.extra = {}

    try:
        cfg = load_config(args.config) if args.config else None
        if cfg is None and args.command != "compare":
            raise ConfigError(f"'{args.command}' needs --config")
    except ConfigError as exc:
        logging.basicConfig(level=logging.INFO)
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG

    out = Path(args.out_dir or (cfg.output_dir if cfg else "out/compare"))
    handler = _configure_logging(args.log_level, out)
    try:
        files = COMMANDS[args.command](args, cfg, out)
        write_manifest(out, _manifest(args.command, cfg, files, **args.extra))
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except CcqmeError as exc:
        logger.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    finally:
        handler.close()
        logging.getLogger().removeHandler(handler)

    if (out / WARNINGS_FILE).exists():
        logger.info("diagnostics were reported; see %s", out / WARNINGS_FILE)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
