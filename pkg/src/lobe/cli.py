"""Command-line front end: encode, verify and sweep block-encodings.

Examples::

    lobe encode --model quartic --omega 3 --method lobe
    lobe verify --expr "b0 b1 + h.c." --method pauli_expansion
    lobe sweep --model static_yukawa --sweep omega=1,3,7 --method lobe,pauli_expansion

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .circuit import QubitCapError, qubit_cap
from .fock_algebra import ModeSpec, OperatorExpr, infer_modes, parse_operator, to_matrix
from .models import MODELS, ModelParams, build_model, read_coefficients
from .pauli import BlockEncoding, encode_pauli_expansion, encode_piecewise_pauli
from .synthesis import lobe_encode
from .verify import DEFAULT_TOL, verify_encoding

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
METHODS = ("lobe", "pauli_expansion", "piecewise_pauli")
SWEEP_PARAMS = ("omega", "modes", "B", "K", "g")
NORM_DIMENSION_CAP = 4096


class UsageError(ValueError):
    pass


def _fermion_hc(B: int) -> tuple[OperatorExpr, ModeSpec]:
    text = " ".join(f"b{k}" for k in range(B)) + " + h.c."
    return parse_operator(text), ModeSpec(B, 0, 0)


def _boson_lower(B: int) -> tuple[OperatorExpr, ModeSpec]:
    return parse_operator("a0"), ModeSpec(0, 0, 1)


# Expression families parameterized by a mode count B, alongside the physics models.
FAMILIES: dict[str, Callable[[int], tuple[OperatorExpr, ModeSpec]]] = {
    "fermion_hc": _fermion_hc,
    "boson_lower": _boson_lower,
}


@dataclass(frozen=True)
class Problem:
    """One fully specified encoding task."""

    expr: OperatorExpr
    modes: ModeSpec
    omega: int


@dataclass(frozen=True)
class Settings:
    expr_text: str | None
    model: str | None
    omega: int
    modes: ModeSpec | None
    B: int
    params: ModelParams
    elbow_mode: str
    controlled: bool
    tol: float


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]
    methods: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.param not in SWEEP_PARAMS:
            raise UsageError(f"cannot sweep {self.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
        if not self.values:
            raise UsageError("sweep value list is empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise UsageError("sweep values must be strictly increasing")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")


def parse_modes(text: str) -> ModeSpec:
    """``"F,A,B"`` (fermion, antifermion, boson counts) or a single boson count."""
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --modes value {text!r}") from None
    if len(parts) == 1:
        return ModeSpec(0, 0, parts[0])
    if len(parts) != 3 or min(parts) < 0:
        raise UsageError("--modes takes 'F,A,B' or a single boson count")
    return ModeSpec(*parts)


def parse_sweep(text: str, methods: Sequence[str]) -> SweepSpec:
    name, sep, raw = text.partition("=")
    if not sep:
        raise UsageError("--sweep expects <param>=<v1,v2,...>")
    try:
        values = tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"bad sweep values {raw!r}") from None
    if name.strip() != "g" and any(v != int(v) for v in values):
        raise UsageError(f"{name} takes integer values")
    return SweepSpec(name.strip(), values, tuple(methods))


def with_param(s: Settings, param: str, value: float) -> Settings:
    if param == "omega":
        return replace(s, omega=int(value), params=replace(s.params, omega=int(value)))
    if param == "g":
        return replace(s, params=replace(s.params, g=float(value)))
    if param == "K" or (param == "modes" and s.model in ("phi4", "yukawa")):
        return replace(s, params=replace(s.params, K=int(value)))
    if param in ("B", "modes"):
        if s.model not in FAMILIES:
            raise UsageError(f"sweeping {param} needs --model {' or '.join(FAMILIES)}")
        return replace(s, B=int(value))
    raise UsageError(f"cannot sweep {param!r}")


def build_problem(s: Settings) -> Problem:
    if s.expr_text is not None:
        expr = parse_operator(s.expr_text, s.modes)
        return Problem(expr, s.modes or infer_modes(expr), s.omega)
    assert s.model is not None
    if s.model in FAMILIES:
        expr, modes = FAMILIES[s.model](s.B)
        return Problem(expr, modes, s.omega)
    m = build_model(s.model, replace(s.params, omega=s.omega))
    return Problem(m.expr, m.modes, m.omega)


def encode(problem: Problem, method: str, controlled: bool = True) -> BlockEncoding:
    if method == "lobe":
        return lobe_encode(problem.expr, problem.modes, problem.omega, controlled=controlled)
    if method == "pauli_expansion":
        enc = encode_pauli_expansion(problem.expr, problem.modes, problem.omega)
    elif method == "piecewise_pauli":
        enc = encode_piecewise_pauli(problem.expr, problem.modes, problem.omega)
    else:
        raise UsageError(f"unknown method {method!r}")
    return enc if controlled else enc.uncontrolled()


def resource_row(enc: BlockEncoding, elbow_mode: str) -> dict:
    row = enc.resources(elbow_mode).to_dict()
    row["t_compiled"] = row["t_count"]
    row["t_formula"] = enc.t_formula
    return row


def oracle_norm(problem: Problem) -> float | None:
    """Spectral norm of the oracle, or ``None`` when the Fock space is too large."""
    dim = math.prod(
        [2] * (problem.modes.n_fermion + problem.modes.n_antifermion) + [problem.omega + 1] * problem.modes.n_boson
    )
    if dim > NORM_DIMENSION_CAP:
        return None
    return float(np.linalg.norm(to_matrix(problem.expr, problem.modes, problem.omega), 2))


def check_sim_cap(enc: BlockEncoding) -> None:
    cap = qubit_cap()
    if enc.layout.total > cap:
        raise QubitCapError(f"{enc.layout.total} qubits exceed the simulation cap {cap} (set LOBE_SIM_QUBIT_CAP)")


def verify_row(enc: BlockEncoding, problem: Problem, s: Settings) -> dict:
    check_sim_cap(enc)
    rep = verify_encoding(enc, problem.expr, problem.modes, problem.omega, s.tol, elbow_mode=s.elbow_mode)
    return rep.to_dict()


def run_point(s: Settings, method: str, verify: bool, dump_path: str | None = None) -> dict:
    problem = build_problem(s)
    enc = encode(problem, method, s.controlled)
    if dump_path:
        Path(dump_path).write_text(enc.circuit.to_text())
    row = {"method": method, **resource_row(enc, s.elbow_mode)}
    if verify:
        row["verification"] = verify_row(enc, problem, s)
    return row


def _sweep_row(s: Settings, spec: SweepSpec, value: float, method: str, verify: bool) -> dict:
    point = with_param(s, spec.param, value)
    problem = build_problem(point)
    enc = encode(problem, method, point.controlled)
    row: dict = {"param": spec.param, "value": value if spec.param == "g" else int(value), "method": method}
    row.update(resource_row(enc, point.elbow_mode))
    row["l2_norm"] = oracle_norm(problem)
    if verify:
        rep = verify_row(enc, problem, point)
        row["max_abs_error"] = rep["max_abs_error"]
        row["passed"] = rep["passed"]
    return row


def run_sweep(s: Settings, spec: SweepSpec, verify: bool = False, jobs: int = 1) -> list[dict]:
    tasks = [(v, m) for v in spec.values for m in spec.methods]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda t: _sweep_row(s, spec, t[0], t[1], verify), tasks))


def rows_to_csv(rows: Sequence[dict]) -> str:
    fields: list[str] = []
    for row in rows:
        fields += [k for k in row if k not in fields]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in fields})
    return buf.getvalue()


def _flatten(row: dict) -> dict:
    flat = {k: v for k, v in row.items() if k != "verification"}
    for k, v in row.get("verification", {}).items():
        flat[f"verify_{k}"] = v
    return flat


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr", help='operator text, e.g. "b0^ b1 a0 + h.c."')
    src.add_argument("--model", choices=sorted([*MODELS, *FAMILIES]))
    common.add_argument("--omega", type=int, default=1, help="bosonic occupation cutoff")
    common.add_argument("--modes", help="mode counts 'F,A,B' (default: inferred from the expression)")
    common.add_argument("--resolution", "-K", dest="K", type=int, default=2, help="momentum resolution K")
    common.add_argument("--B", type=int, default=2, help="mode count for the expression families")
    common.add_argument("--g", type=float, default=1.0, help="coupling")
    common.add_argument("--C-f", dest="C_f", type=float, default=1.0)
    common.add_argument("--C-b", dest="C_b", type=float, default=1.0)
    common.add_argument("--coeff-file", help="CSV with columns i,j,k,l,re,im")
    common.add_argument("--elbow-mode", choices=("unitary", "measured"), default="measured")
    common.add_argument("--uncontrolled", action="store_true", help="drop the control qubit")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))

    p = argparse.ArgumentParser(prog="lobe", description="Block-encode second-quantized operators.")
    sub = p.add_subparsers(dest="command", required=True)
    enc = sub.add_parser("encode", parents=[common], help="encode and report resources")
    enc.add_argument("--method", choices=METHODS, default="lobe")
    enc.add_argument("--verify", action="store_true", help="also verify against the Fock oracle")
    enc.add_argument("--dump-circuit", help="write the circuit in text form to this path")
    ver = sub.add_parser("verify", parents=[common], help="encode and verify against the Fock oracle")
    ver.add_argument("--method", choices=METHODS, default="lobe")
    sw = sub.add_parser("sweep", parents=[common], help="sweep one parameter; one row per (value, method)")
    sw.add_argument("--sweep", required=True, metavar="PARAM=V1,V2,...")
    sw.add_argument("--method", default="lobe,pauli_expansion", help="comma-separated methods")
    sw.add_argument("--verify", action="store_true")
    sw.add_argument("--jobs", type=int, default=1, help="sweep points evaluated concurrently")
    return p


def settings_from(args: argparse.Namespace) -> Settings:
    coeffs = read_coefficients(args.coeff_file) if args.coeff_file else {}
    if args.omega < 1:
        raise UsageError("--omega must be at least 1")
    params = ModelParams(g=args.g, C_f=args.C_f, C_b=args.C_b, omega=args.omega, K=args.K, coefficients=coeffs)
    return Settings(
        expr_text=args.expr,
        model=args.model,
        omega=args.omega,
        modes=parse_modes(args.modes) if args.modes else None,
        B=args.B,
        params=params,
        elbow_mode=args.elbow_mode,
        controlled=not args.uncontrolled,
        tol=args.tol,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run(args: argparse.Namespace) -> int:
    s = settings_from(args)
    if args.command == "sweep":
        spec = parse_sweep(args.sweep, [m.strip() for m in args.method.split(",") if m.strip()])
        rows = run_sweep(s, spec, args.verify, args.jobs)
        fmt = args.format or "csv"
        _emit(rows_to_csv(rows) if fmt == "csv" else json.dumps(rows, indent=2) + "\n", args.out)
        return EXIT_FAILED if args.verify and not all(r["passed"] for r in rows) else EXIT_OK

    verify = args.command == "verify" or args.verify
    row = run_point(s, args.method, verify, getattr(args, "dump_circuit", None))
    if args.command == "verify":
        row = {**row["verification"], "method": args.method, "lambda": row["lambda"]}
    fmt = args.format or "json"
    flat = row if args.command == "verify" else _flatten(row)
    _emit(json.dumps(row, indent=2) + "\n" if fmt == "json" else rows_to_csv([flat]), args.out)
    if verify:
        passed = row["passed"] if args.command == "verify" else row["verification"]["passed"]
        return EXIT_OK if passed else EXIT_FAILED
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (ValueError, OSError) as exc:
        print(f"lobe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
