"""``ms-ladder`` command-line front end.

Exit codes: 0 success, 1 input error, 2 system is not decomposable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .decompose import decompose, interior_residuals, quasi_two_level_reduce
from .dynamics import PropagatorConfig, compare_bases, propagate, propagate_decomposed
from .errors import MsLadderError, NotDecomposable, PreconditionFailed
from .ladder import coupling_operators, system_from_dict
from .linalg import dagger, fro
from .random_systems import random_state
from .scenarios import EXAMPLES, example_document
from .serialize import dumps, report_to_dict, sparsity_pattern, system_hash
from .tolerances import DEFAULT, ENV_VAR, Tolerances

EXIT_OK, EXIT_INPUT, EXIT_NOT_DECOMPOSABLE = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    input_path: str | None
    output_dir: str | None
    tolerance_overrides: dict = field(default_factory=dict)
    seed: int = 0
    version: str = __version__

    def __post_init__(self):
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        if self.output_dir is not None:
            os.makedirs(self.output_dir, exist_ok=True)
            if not os.access(self.output_dir, os.W_OK):
                raise InputError(f"output directory {self.output_dir} is not writable")


def _tolerances(args) -> tuple:
    """Defaults, then the ``MS_LADDER_TOLERANCES`` file, then ``--tol-commute``."""
    overrides = {}
    path = os.environ.get(ENV_VAR)
    try:
        if path:
            with open(path, encoding="utf-8") as fh:
                overrides.update(json.load(fh))
        if getattr(args, "tol_commute", None) is not None:
            overrides["commute"] = args.tol_commute
        tol = Tolerances.from_mapping(overrides, DEFAULT)
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"bad tolerance override: {exc}") from None
    return tol, overrides


def _load(path):
    if not path:
        raise InputError("--spec is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None
    return doc, system_from_dict(doc)


def parse_initial(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """``"i:re,im;j:re,im"`` (0-based indices) or ``"random"``; normalized."""
    if text.strip() == "random":
        return random_state(np.random.default_rng(seed), dim)
    c = np.zeros(dim, dtype=complex)
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            idx, val = item.split(":")
            parts = [float(x) for x in val.split(",")]
            if len(parts) not in (1, 2):
                raise ValueError
            i = int(idx)
        except ValueError:
            raise InputError(f"cannot parse initial amplitude {item!r}; use i:re,im") from None
        if not 0 <= i < dim:
            raise InputError(f"initial index {i} outside 0..{dim - 1}")
        c[i] = complex(parts[0], parts[1] if len(parts) == 2 else 0.0)
    norm = np.linalg.norm(c)
    if norm == 0:
        raise InputError("initial state is zero")
    return c / norm


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _decompose(system, tol, quasi):
    return quasi_two_level_reduce(system, tol) if quasi else decompose(system, tol)


def cmd_check(args) -> int:
    tol, _ = _tolerances(args)
    _, system = _load(args.spec)
    residuals = [] if args.quasi else interior_residuals(system, tol)
    for k, r in enumerate(residuals, start=1):
        print(f"level {k}: commutator residual {r:.3e} ({'ok' if r <= tol.commute else 'too large'})")
    if not residuals and not args.quasi:
        print("two-level system: always decomposable")
    try:
        report = _decompose(system, tol, args.quasi)
    except PreconditionFailed as exc:
        print(f"FAIL: {exc}")
        return EXIT_NOT_DECOMPOSABLE
    except NotDecomposable as exc:
        print(f"FAIL: {exc}")
        print(f"not decomposable at level {exc.level}: {exc.reason} (residual {exc.residual:.3e})",
              file=sys.stderr)
        return EXIT_NOT_DECOMPOSABLE
    print(f"PASS: {report.census}")
    return EXIT_OK


def _ms_pattern(report, system, tol):
    diagonal, ops = coupling_operators(system)
    h = np.diag(diagonal).astype(complex) + sum(ops)
    s = report.transformation.matrix()
    h_ms = s @ h @ dagger(s)
    return sparsity_pattern(h_ms, tol.null * max(fro(h), tol.abs))


def _census_table(report) -> str:
    lines = [f"{'length':>6}  {'count':>5}"]
    for length, count in sorted(report.census.by_length.items(), reverse=True):
        lines.append(f"{length:>6}  {count:>5}")
    lines += ["", "chain  levels  couplings"]
    for i, c in enumerate(report.chains):
        levels = "-".join(str(lv) for lv, _ in c.members)
        lams = ", ".join(f"{x:.6g}" for x in c.couplings) or "dark"
        lines.append(f"{i:>5}  {levels:>6}  {lams}")
    lines += ["", f"total: {report.census}"]
    return "\n".join(lines) + "\n"


def cmd_decompose(args) -> int:
    tol, overrides = _tolerances(args)
    out = args.out or "."
    manifest = RunManifest("decompose", args.spec, out, overrides, args.seed)
    doc, system = _load(args.spec)
    report = _decompose(system, tol, args.quasi)
    payload = {"manifest": asdict(manifest), "system_hash": system_hash(system),
               "report": report_to_dict(report, tol)}
    _write(os.path.join(out, "report.json"), dumps(payload))
    _write(os.path.join(out, "sparsity.txt"), _ms_pattern(report, system, tol))
    _write(os.path.join(out, "census.txt"), _census_table(report))
    print(f"{report.census}")
    print(f"wrote report.json, sparsity.txt, census.txt to {out}")
    return EXIT_OK


def _gnuplot(files, dim) -> str:
    lines = ["set datafile separator ','", "set key outside", "set xlabel 't'", "set ylabel 'population'"]
    for name in files:
        lines.append(f"set title '{name}'")
        terms = [f"'{name}' using 1:(${2 * k + 2}**2 + ${2 * k + 3}**2) with lines title 'P{k + 1}'"
                 for k in range(dim)]
        lines.append("plot " + ", \\\n     ".join(terms))
        lines.append("pause -1")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    tol, overrides = _tolerances(args)
    out = args.out or "."
    manifest = RunManifest("simulate", args.spec, out, overrides, args.seed)
    doc, system = _load(args.spec)
    defaults = doc.get("simulation", {}) if isinstance(doc.get("simulation"), dict) else {}
    t0 = args.t0 if args.t0 is not None else float(defaults.get("t0", 0.0))
    t1 = args.t1 if args.t1 is not None else float(defaults.get("t1", 1.0))
    samples = args.samples if args.samples is not None else int(defaults.get("samples", 101))
    initial = parse_initial(args.initial or defaults.get("initial", "0:1,0"), system.dim, args.seed)
    try:
        config = PropagatorConfig(t0, t1, args.method, args.step, sample_count=samples)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    extra = {"manifest": asdict(manifest)}
    orig = propagate(system, initial, config)
    orig.write_csv(os.path.join(out, "trajectory_original.csv"), extra)
    files = ["trajectory_original.csv"]
    try:
        report = _decompose(system, tol, args.quasi)
    except (NotDecomposable, PreconditionFailed) as exc:
        print(f"warning: {exc}; writing the original-basis trajectory only", file=sys.stderr)
        report = None
    if report is not None:
        ms = propagate_decomposed(report, system, initial, config)
        ms.write_csv(os.path.join(out, "trajectory_ms.csv"), extra)
        files.append("trajectory_ms.csv")
        cmp = compare_bases(orig, ms, report)
        _write(os.path.join(out, "comparison.json"),
               dumps({"manifest": asdict(manifest), "system_hash": orig.system_hash,
                      "census": str(report.census), **cmp.to_dict(),
                      "norm_drift_original": orig.norm_drift(), "norm_drift_ms": ms.norm_drift()}))
        files.append("comparison.json")
        print(f"max |S C_orig - C_ms| = {cmp.max_deviation:.3e}")
    _write(os.path.join(out, "plot.gp"), _gnuplot([f for f in files if f.endswith(".csv")], system.dim))
    print(f"wrote {', '.join(files)}, plot.gp to {out}")
    return EXIT_OK


def cmd_example(args) -> int:
    coeffs = None
    if args.coeffs:
        try:
            coeffs = [float(x) for x in args.coeffs.split(",")]
        except ValueError:
            raise InputError(f"cannot parse coefficients {args.coeffs!r}") from None
    if args.seed < 0:
        raise InputError("seed must be a non-negative integer")
    doc = example_document(args.name, args.seed, coeffs)
    system_from_dict(doc)  # refuse to write anything that would not load
    out = args.out or "."
    path = out if out.endswith(".json") else os.path.join(out, f"{args.name}.json")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    _write(path, dumps(doc))
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ms-ladder",
                                     description="Morris-Shore decomposition of degenerate ladders")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument("--spec", help="system JSON file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--tol-commute", type=float, help="commutator acceptance threshold")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized modes")

    p = sub.add_parser("check", help="test the commutation conditions")
    common(p)
    p.add_argument("--quasi", action="store_true", help="check the quasi-two-level preconditions instead")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decompose", help="write the MS transformation and chain census")
    common(p)
    p.add_argument("--quasi", action="store_true", help="use the quasi-two-level merge")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="propagate in both bases and compare")
    common(p)
    p.add_argument("--initial", help='amplitudes "i:re,im;..." (0-based) or "random"')
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--method", choices=("rk45_adaptive", "rk4_fixed"), default="rk45_adaptive")
    p.add_argument("--step", type=float, help="step size for rk4_fixed")
    p.add_argument("--quasi", action="store_true", help="use the quasi-two-level merge")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="write a bundled system file")
    p.add_argument("name", help=f"one of {', '.join(EXAMPLES)}")
    common(p, spec=False)
    p.add_argument("--coeffs", help="polynomial coefficients c0,c1,... (frobenius_demo)")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotDecomposable as exc:
        print(f"error: not decomposable at level {exc.level}: {exc.reason} "
              f"(residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_NOT_DECOMPOSABLE
    except PreconditionFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_DECOMPOSABLE
    except (InputError, MsLadderError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
