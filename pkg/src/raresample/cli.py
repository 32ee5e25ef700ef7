"""Command-line interface.

Exit status: 0 success, 2 invalid input, 3 numerical failure. Every file
written with ``--out`` gets a ``<out>.manifest.json`` recording the
arguments, input digests and RNG so the run can be repeated exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .errors import InputError, MarkovOrderMismatch, ModelFormatError, NotUnifilar, RareSampleError
from .hmm import (
    RNG_ALGORITHM,
    check_unifilar,
    entropy_rate,
    markov_order,
    sample_path,
    stationary_distribution,
    statistical_complexity,
    validate,
)
from .io import dumps_hmm, format_symbols, hmm_from_dict
from .models import BUNDLED, bundled_path
from .qmachine import q_machine, quantum_memory, quantum_sample
from .spin import SpinModel, ising_nnn_process
from .sweep import beta_sweep, log_grid, records_to_csv, uniform_grid
from .tilt import tilt_hmm

BUNDLED_PREFIX = "@"


def _read_model_text(spec: str) -> tuple[str, bytes]:
    if spec.startswith(BUNDLED_PREFIX):
        name = spec[len(BUNDLED_PREFIX):]
        if name not in BUNDLED:
            raise InputError(f"no bundled model {name!r}; choose from {', '.join(BUNDLED)}")
        return spec, bundled_path(name).read_bytes()
    path = Path(spec)
    try:
        return spec, path.read_bytes()
    except OSError as exc:
        raise InputError(f"{spec}: {exc.strerror}") from None


def _load(spec: str, repair_rows: bool = False, check: bool = True):
    label, raw = _read_model_text(spec)
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        where = f"line {exc.lineno}, column {exc.colno}: {exc.msg}" if hasattr(exc, "lineno") else str(exc)
        raise ModelFormatError(f"{label}: {where}") from None
    try:
        hmm = hmm_from_dict(doc, repair_rows=repair_rows, check=check)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{label}: {exc}") from None
    return hmm, {label: digest}


def _emit(args, text: str, inputs: dict, rng=None) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.write_text(text, encoding="utf-8")
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "argv")}
    manifest = {
        "tool": "raresample",
        "version": __version__,
        "command": args.command,
        "argv": args.argv,
        "parameters": params,
        "inputs": inputs,
        "rng": rng,
        "outputs": [str(out)],
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


def _order(hmm, r_max):
    if not check_unifilar(hmm):
        raise NotUnifilar("model is not unifilar")
    r = markov_order(hmm, r_max)
    if r is None:
        raise MarkovOrderMismatch(f"no Markov order <= {r_max}; raise --r-max or use a finite-order model")
    return r


def cmd_validate(args) -> int:
    hmm, _ = _load(args.model, args.repair_rows, check=False)
    problems = validate(hmm)
    for v in problems:
        print(v)
    if not problems:
        print(f"ok: {hmm.n_states} states, {hmm.n_symbols} symbols")
    return 2 if problems else 0


def analyze(hmm, r_max: int = 8) -> dict:
    """Summary statistics of a model; quantum fields are "n/a" when undefined."""
    pi = stationary_distribution(hmm)
    unifilar = check_unifilar(hmm)
    report = {
        "name": hmm.name,
        "n_states": hmm.n_states,
        "n_symbols": hmm.n_symbols,
        "unifilar": unifilar,
        "markov_order": None,
        "stationary_distribution": {s: float(p) for s, p in zip(hmm.states, pi)},
        "Cmu": statistical_complexity(hmm),
        "hmu": entropy_rate(hmm) if unifilar else "n/a",
        "Cq": "n/a",
    }
    if not unifilar:
        report["Cq_reason"] = "not unifilar"
        return report
    r = markov_order(hmm, r_max)
    report["markov_order"] = r
    if r is None:
        report["Cq_reason"] = f"no finite Markov order <= {r_max}"
        return report
    try:
        report["Cq"] = quantum_memory(hmm, r)
    except RareSampleError as exc:
        report["Cq_reason"] = f"{type(exc).__name__}: {exc}"
    return report


def cmd_analyze(args) -> int:
    hmm, inputs = _load(args.model, args.repair_rows)
    report = analyze(hmm, args.r_max)
    _emit(args, json.dumps(report, indent=2, ensure_ascii=False) + "\n", inputs)
    return 0


def cmd_tilt(args) -> int:
    hmm, inputs = _load(args.model, args.repair_rows)
    tilted = tilt_hmm(hmm, args.beta)
    _emit(args, dumps_hmm(tilted.hmm, tilted.metadata()), inputs)
    return 0


def cmd_sweep(args) -> int:
    hmm, inputs = _load(args.model, args.repair_rows)
    r = _order(hmm, args.r_max)
    make = log_grid if args.log_grid else uniform_grid
    grid = make(args.beta_min, args.beta_max, args.steps)
    records = beta_sweep(hmm, grid, r, workers=args.workers)
    _emit(args, records_to_csv(records), inputs)
    return 0


def cmd_sample(args) -> int:
    hmm, inputs = _load(args.model, args.repair_rows)
    if args.n < 0:
        raise InputError("--n must be nonnegative")
    if args.engine == "quantum":
        qm = q_machine(hmm, _order(hmm, args.r_max))
        symbols = quantum_sample(qm, args.n, args.seed)
    else:
        symbols = sample_path(hmm, args.n, args.seed)
    _emit(args, format_symbols(symbols), inputs, rng={"algorithm": RNG_ALGORITHM, "seed": args.seed})
    return 0


def cmd_ising(args) -> int:
    model = SpinModel(args.j1, args.j2, args.h, args.temp)
    _emit(args, dumps_hmm(ising_nnn_process(model)), {})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raresample",
        description="Classical and quantum memory of rare-event (biased) sampling for finite HMM generators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("model", help=f"model JSON file, or {BUNDLED_PREFIX}NAME for a bundled model ({', '.join(BUNDLED)})")
        p.add_argument("--repair-rows", action="store_true", help="rescale each state's outgoing probabilities to 1")
        p.add_argument("--out", help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = model_cmd("validate", cmd_validate, "check a model file against all generator invariants")
    p = model_cmd("analyze", cmd_analyze, "report pi, Cmu, hmu, Markov order and Cq")
    p.add_argument("--r-max", type=int, default=8)

    p = model_cmd("tilt", cmd_tilt, "apply the beta-map and write the driven model")
    p.add_argument("--beta", type=float, required=True)

    p = model_cmd("sweep", cmd_sweep, "CSV of (beta, lambda, U, hmu, Cmu, Cq, eta) over a beta grid")
    p.add_argument("--beta-min", type=float, required=True)
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--log-grid", action="store_true", help="log-spaced |beta| on each side of zero")
    p.add_argument("--r-max", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)

    p = model_cmd("sample", cmd_sample, "draw a realization with the classical or quantum generator")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--engine", choices=("classical", "quantum"), default="classical")
    p.add_argument("--r-max", type=int, default=8)

    p = sub.add_parser("ising", help="generator of the next-nearest-neighbour Ising chain")
    p.add_argument("--j1", type=float, default=1.0)
    p.add_argument("--j2", type=float, default=0.25)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--temp", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ising)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except RareSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
