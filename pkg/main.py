"""
Command-line entry point.

    python main.py build-ham --n 4 --k 1 --out ham.json
    python main.py verify-spectrum --n 2..8 --k 1
    python main.py simulate --n 4 --k 1 --shots 16384 --seed 7 --out-dir runs/w4
    python main.py certify --ham ham.json --records runs/w4
    python main.py ingest --ham ham.json --files x.json y.json z.json
    python main.py sweep --n 2..8 --k 1 --seeds 0..4 --jobs 4
    python main.py alpha --n 3..10 --k 1..9

Exit codes: 0 success, 2 input or schema error, 3 spectral verification failure.
"""

import argparse
import asyncio
import csv
import io
import json
import logging
import sys
from typing import List, Optional, Sequence

from certification.certify import CSV_COLUMNS, CertificationReport
from certification.dicke import DickeSpec, alpha_table
from certification.errors import InputError, SpectralVerificationError
from certification.parent_ham import MAX_VERIFY_QUBITS, build_pauli, verify_spectrum
from certification.pipeline import certify_ingested, preparation_gate_counts, simulate_records
from certification.records import (
    find_record_files,
    read_hamiltonian,
    read_record_set,
    run_label,
    write_hamiltonian,
    write_record_set,
    write_report,
)
from certification.sim import NoiseModel
from env_utils import DEFAULT_SHOTS, OUTPUT_DIR, configure_logging
from sweep import load_sweep_config, run_sweep, sweep_csv, write_sweep_outputs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SPECTRAL = 3


def int_list(text: str) -> List[int]:
    """'4', '2,3,5' or the inclusive range '2..8'."""
    values: List[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..", 1)
                values.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 4, 2,3,5 or 2..8, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def single_int(values: List[int], flag: str) -> int:
    if len(values) != 1:
        raise InputError(f"{flag} takes a single value here, got {values}")
    return values[0]


def emit_report(report: CertificationReport, fmt: str, out: Optional[str]):
    if out:
        write_report(report, out)
        logger.info(f"Report written to {out}")
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerow(report.csv_row())
        sys.stdout.write(buffer.getvalue())
    else:
        print(report.model_dump_json(indent=2))


def cmd_build_ham(args) -> int:
    h = build_pauli(args.n, args.k)
    if args.out:
        write_hamiltonian(h, args.out)
        logger.info(f"Hamiltonian with {len(h)} terms written to {args.out}")
    else:
        print(json.dumps(h.to_dict(), indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    """Spectral certificate per n; the first failure aborts with exit code 3."""
    if max(args.n) > MAX_VERIFY_QUBITS:
        raise InputError(f"dense verification is limited to n <= {MAX_VERIFY_QUBITS}")
    rows = []
    for n in args.n:
        report = verify_spectrum(n, args.k)
        rows.append(report.model_dump(mode="json"))
        logger.info(f"n={n} k={args.k}: gap={report.gap:.12f} fidelity={report.ground_fidelity:.12f}")
    print(json.dumps(rows, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    n = single_int(args.n, "--n")
    spec = DickeSpec(n, args.k)
    noise = NoiseModel(args.noise_p, args.noise_lambda)
    records = simulate_records(spec, args.shots, args.seed, noise)
    gates = preparation_gate_counts(spec)
    if gates:
        logger.info(f"W circuit: {gates['two_qubit']} two-qubit, {gates['single_qubit']} single-qubit gates")
    label = run_label(n, args.k, args.seed, args.noise_p, args.noise_lambda)
    paths = write_record_set(records, args.out_dir, label, form=args.form)
    for basis, path in paths.items():
        print(f"{basis}\t{path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    if len(args.files) != 3:
        raise InputError(f"ingest needs exactly three record files (X, Y, Z), got {len(args.files)}")
    return _certify_files(args, args.files)


def cmd_certify(args) -> int:
    return _certify_files(args, find_record_files(args.records))


def _certify_files(args, paths: Sequence) -> int:
    h = read_hamiltonian(args.ham)
    records = read_record_set(paths)
    files = {basis: str(path) for basis, path in zip(records, paths)}
    report = certify_ingested(h, records, k=args.k, verify=not args.no_verify, files=files)
    emit_report(report, args.format, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_sweep_config(
        args.config,
        n_range=args.n,
        k=args.k,
        shots=args.shots,
        seeds=args.seeds,
        noise_p=args.noise_p,
        noise_lambda=args.noise_lambda,
        output_dir=args.out_dir,
        jobs=args.jobs,
        verify=False if args.no_verify else None,
        use_cache=False if args.no_cache else None,
    )
    outcome = asyncio.run(run_sweep(config))
    csv_path = write_sweep_outputs(outcome, config.output_dir)
    if args.format == "csv":
        sys.stdout.write(sweep_csv(outcome.rows))
    else:
        print(csv_path)
    if not outcome.failures:
        return EXIT_OK
    logger.warning(f"{len(outcome.failures)} sweep point(s) failed; see {config.output_dir}")
    return EXIT_SPECTRAL if SpectralVerificationError.__name__ in outcome.failure_types else EXIT_INPUT


def cmd_alpha(args) -> int:
    rows = alpha_table(args.n, args.k)
    if args.format == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["n", "k", "alpha", "closed_form", "bruteforce", "agree"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(buffer.getvalue())
    else:
        print(json.dumps(rows, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dicke-certify",
        description="Tomography-free certification of Dicke states from three-basis shot data.",
    )
    parser.add_argument("--log-level", default=None, help="overrides DICKE_CERT_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ham", help="emit the Pauli-form parent Hamiltonian as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.set_defaults(func=cmd_build_ham)

    p = sub.add_parser("verify-spectrum", help="dense spectral certificate for n <= 10")
    p.add_argument("--n", type=int_list, required=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="write X, Y and Z shot records of a simulated preparation")
    p.add_argument("--n", type=int_list, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-p", type=float, default=0.0, help="two-qubit gate depolarizing probability (k=1)")
    p.add_argument("--noise-lambda", type=float, default=0.0, help="global depolarizing probability")
    p.add_argument("--out-dir", default=OUTPUT_DIR)
    p.add_argument("--form", choices=("counts", "outcomes"), default="counts")
    p.set_defaults(func=cmd_simulate)

    for name, helptext in (("certify", "certify the record files in a directory"),
                           ("ingest", "certify three external record files")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--ham", required=True, help="Hamiltonian JSON from build-ham")
        if name == "certify":
            p.add_argument("--records", required=True, help="directory with *-x.json, *-y.json, *-z.json")
            p.set_defaults(func=cmd_certify)
        else:
            p.add_argument("--files", nargs="+", required=True, help="the X, Y and Z record files")
            p.set_defaults(func=cmd_ingest)
        p.add_argument("--k", type=int, default=None, help="excitation number (inferred from the Hamiltonian if omitted)")
        p.add_argument("--out", help="also write the report JSON here")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--no-verify", action="store_true", help="skip the dense spectrum (no upper bound)")

    p = sub.add_parser("sweep", help="certify a grid of (n, seed) points")
    p.add_argument("--config", help="JSON sweep config; flags win on conflict")
    p.add_argument("--n", type=int_list, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seeds", type=int_list, default=None)
    p.add_argument("--noise-p", type=float, default=None)
    p.add_argument("--noise-lambda", type=float, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--no-verify", action="store_true")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--format", choices=("path", "csv"), default="path", help="print the CSV path or the CSV itself")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("alpha", help="biseparable thresholds, closed form against brute force")
    p.add_argument("--n", type=int_list, required=True)
    p.add_argument("--k", type=int_list, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_alpha)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except SpectralVerificationError as e:
        logger.error(f"Spectral verification failed: {e}")
        return EXIT_SPECTRAL
    except InputError as e:
        logger.error(str(e))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
