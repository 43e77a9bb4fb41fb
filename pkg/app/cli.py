# =============================================================================
# app/cli.py — Interface en ligne de commande
#
# Trois sous-commandes :
#
#   simulate   une acquisition → detector1.ttag, detector2.ttag
#   align      deux fichiers .ttag → alignment.csv + ligne de résumé
#   scan       balayage complet → scan.csv, reconstruction.csv
#
# Chaque exécution écrit config_snapshot.json dans le répertoire de sortie :
# relancer avec --config <snapshot> reproduit les fichiers octet pour octet.
#
# Codes de sortie :
#   0  succès
#   2  configuration invalide (chemins des champs fautifs sur stderr)
#   3  pas d'alignement (statistique de détection affichée)
#   4  erreur d'entrée/sortie ou fichier .ttag mal formé
#
# Exemples :
#   python -m app.cli simulate --profile filtre_850 --set simulate.duration_s=0.5
#   python -m app.cli align out/detector1.ttag out/detector2.ttag --window-ns 5
#   python -m app.cli scan --profile filtre_886 --analytic
#   THREADS=4 OUTPUT_DIR=/tmp/run python -m app.cli scan
# =============================================================================

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.analysis.coincidence import CoincidenceWindow, align, export_alignment_csv
from app.analysis.scan import (
    analytic_scan,
    reconstruction_table,
    run_scan,
    simulate,
    summarize_reconstruction,
    write_config_snapshot,
    write_reconstruction_csv,
    write_scan_csv,
)
from app.config import settings
from app.data.profiles import PROFILES
from app.errors import (
    ConfigError,
    DomainError,
    EmptyReconstructionError,
    NoAlignmentError,
    TtagParseError,
)
from app.io.timetag import read_stream, write_stream
from app.models.config import load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_ALIGNMENT = 3
EXIT_IO = 4


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s : %(message)s")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Document RunConfig JSON")
    parser.add_argument("--profile", default="defaults", choices=sorted(PROFILES),
                        help="Profil de base (défaut : defaults)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="CHEMIN=VALEUR", help="Surcharge pointée, ex : scan.n_points=30")
    parser.add_argument("--out", type=Path, help="Répertoire de sortie")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.cli",
        description="Spectromètre distant à paires de photons : simulation et analyse.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Journal DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_parser = commands.add_parser("simulate", help="Produire deux flux .ttag")
    _add_config_arguments(simulate_parser)

    align_parser = commands.add_parser("align", help="Aligner deux flux .ttag")
    align_parser.add_argument("file1", type=Path)
    align_parser.add_argument("file2", type=Path)
    align_parser.add_argument("--window-ns", type=float, default=5.0)
    align_parser.add_argument("--search-s", type=float, default=1.0)
    align_parser.add_argument("--coarse-ns", type=float, default=100.0)
    align_parser.add_argument("--threshold", type=float, default=5.0,
                              help="Significance minimale")
    align_parser.add_argument("--out", type=Path, help="Répertoire de sortie")

    scan_parser = commands.add_parser("scan", help="Balayer le monochromateur")
    _add_config_arguments(scan_parser)
    scan_parser.add_argument("--analytic", action="store_true",
                             help="Moteur analytique au lieu du Monte Carlo")
    scan_parser.add_argument("--threads", type=int, help="Processus (défaut : THREADS)")
    return parser


def _output_dir(requested: Path | None, configured: str | None) -> Path:
    out = requested or Path(configured or settings.output_dir or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_validation_error(exc: ValidationError) -> None:
    print("Configuration invalide :", file=sys.stderr)
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "(document)"
        print(f"  {location} : {error['msg']}", file=sys.stderr)


# =============================================================================
# SOUS-COMMANDES
# =============================================================================


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, args.profile, args.overrides)
    out = _output_dir(args.out, config.output_dir)
    acquisition = simulate(config)
    write_stream(acquisition.stream_1, out / "detector1.ttag")
    write_stream(acquisition.stream_2, out / "detector2.ttag")
    write_config_snapshot(config, out / "config_snapshot.json")
    print(
        f"lambda_M_nm={acquisition.lambda_M_nm:.4f} events1={len(acquisition.stream_1)} "
        f"events2={len(acquisition.stream_2)}"
    )
    return EXIT_OK


def _cmd_align(args: argparse.Namespace) -> int:
    s1 = read_stream(args.file1)
    s2 = read_stream(args.file2)
    result = align(
        s1, s2,
        search_range=args.search_s,
        coarse_bin=args.coarse_ns * 1e-9,
        window=CoincidenceWindow(width=args.window_ns * 1e-9),
        significance_threshold=args.threshold,
    )
    out = _output_dir(args.out, None)
    export_alignment_csv(result, out / "alignment.csv")
    print(
        f"offset_ps={result.best_offset_ps} centroid_ps={result.centroid_offset_ps} "
        f"peak={result.peak_count} background={result.background_mean:.2f} "
        f"significance={result.significance:.2f} detection={result.detection_significance:.2f}"
    )
    result.ensure_aligned()
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, args.profile, args.overrides)
    out = _output_dir(args.out, config.output_dir)
    write_config_snapshot(config, out / "config_snapshot.json")
    curve = analytic_scan(config) if args.analytic else run_scan(config, threads=args.threads)
    write_scan_csv(curve, out / "scan.csv")

    try:
        rows = reconstruction_table(curve)
    except EmptyReconstructionError as exc:
        logger.warning("Reconstruction vide : %s", exc)
        rows = []
    write_reconstruction_csv(rows, out / "reconstruction.csv")
    if rows:
        summary = summarize_reconstruction(rows)
        fwhm = "n/a" if summary.fwhm_nm is None else f"{summary.fwhm_nm:.3f}"
        print(f"center_nm={summary.center_nm:.3f} peak_nm={summary.peak_nm:.3f} fwhm_nm={fwhm}")
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "align": _cmd_align, "scan": _cmd_scan}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        _print_validation_error(exc)
        return EXIT_CONFIG
    except (ConfigError, DomainError, json.JSONDecodeError) as exc:
        print(f"Configuration invalide : {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoAlignmentError as exc:
        print(f"Pas d'alignement : significance={exc.significance:.2f}", file=sys.stderr)
        return EXIT_NO_ALIGNMENT
    except (TtagParseError, OSError) as exc:
        print(f"Erreur d'entrée/sortie : {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
