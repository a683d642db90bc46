"""Command-line driver: ``qkud exact``, ``qkud run`` and ``qkud sweep``.

Models are written ``tfim:N,J,h``, ``hubbard:SITES,t,U`` or ``file:PATH``
(Pauli text format). Run output is a CSV whose first line is ``# `` followed
by a JSON preamble holding the resolved run spec and the schema version.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import hamiltonian as ham
from .krylov import CHEMICAL_ACCURACY, ConvergenceRecord, KrylovConfig, Method, Status, run, spectral_cache
from .lcu import run_lcu
from .linalg import basis_state, plus_state

log = logging.getLogger("qkud")

SCHEMA_VERSION = 1
COLUMNS = ("iter", "e_min", "e_exact_gap", "cond_s", "kept_dim")
SUMMARY_COLUMNS = ("parameter", "final_e_min", "iters_to_chemical_accuracy", "final_cond_s", "status", "error")

EXIT_CODES = {
    Status.CONVERGED_BY_DELTA: 0,
    Status.MAX_ITER_REACHED: 2,
    Status.SUBSPACE_EXHAUSTED: 3,
}
EXIT_ERROR = 1


class SpecError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RunSpec:
    model: str
    method: str = "qkud"
    parameter: float = 0.1
    path: str = "direct"
    max_iter: int = 20
    stop_delta: float = 1e-9
    gevp_threshold: float = 1e-12
    psi0: int | str = 0
    noise_sigma: float = 0.0
    seed: int = 0
    output_path: str | None = None

    def validate(self, n_qubits: int) -> None:
        if self.method not in ("qkud", "qrte"):
            raise SpecError(f"unknown method {self.method!r}")
        if self.path not in ("direct", "lcu"):
            raise SpecError(f"unknown path {self.path!r}")
        if not (math.isfinite(self.parameter) and self.parameter > 0):
            raise SpecError("parameter must be a positive number")
        if self.max_iter < 1:
            raise SpecError("max-iter must be at least 1")
        if self.stop_delta < 0 or not self.gevp_threshold > 0:
            raise SpecError("delta must be >= 0 and gevp-threshold > 0")
        if self.noise_sigma < 0:
            raise SpecError("noise-sigma must be non-negative")
        if self.noise_sigma > 0 and self.path != "lcu":
            raise SpecError("noise is injected into primitives and needs --path lcu")
        if self.path == "lcu" and self.method != "qkud":
            raise SpecError("--path lcu is only defined for qkud")
        if self.psi0 != "plus":
            if not isinstance(self.psi0, int) or not 0 <= self.psi0 < (1 << n_qubits):
                raise SpecError(f"psi0 must be 'plus' or a basis index below {1 << n_qubits}")

    def config(self) -> KrylovConfig:
        return KrylovConfig(
            method=Method(self.method),
            epsilon=self.parameter,
            delta_t=self.parameter,
            max_iter=self.max_iter,
            stop_delta=self.stop_delta,
            gevp_threshold=self.gevp_threshold,
            psi0_index=self.psi0 if isinstance(self.psi0, int) else 0,
        )


def parse_model(text: str) -> ham.PauliSum:
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "file":
            return ham.parse_pauli_file(Path(args).read_text(encoding="utf-8"))
        values = [float(a) for a in args.split(",")]
        if kind == "tfim" and len(values) == 3:
            return ham.build_tfim(int(values[0]), values[1], values[2])
        if kind == "hubbard" and len(values) == 3:
            return ham.build_hubbard_chain(int(values[0]), values[1], values[2])
    except (OSError, ValueError) as exc:
        raise SpecError(f"bad model {text!r}: {exc}") from exc
    raise SpecError(f"bad model {text!r}; expected tfim:N,J,h, hubbard:SITES,t,U or file:PATH")


def _psi0_value(raw: Any) -> int | str:
    if isinstance(raw, int) or raw == "plus":
        return raw
    try:
        return int(str(raw))
    except ValueError:
        raise SpecError(f"psi0 must be an integer or 'plus', got {raw!r}") from None


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def format_record(spec: RunSpec, record: ConvergenceRecord) -> str:
    buf = io.StringIO()
    preamble = {"schema_version": SCHEMA_VERSION, **dataclasses.asdict(spec)}
    buf.write("# " + json.dumps(preamble, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in record.rows:
        writer.writerow([r.iter, _fmt(r.e_min), _fmt(r.e_exact_gap), _fmt(r.cond_s), r.kept_dim])
    return buf.getvalue()


def read_record(text: str) -> tuple[dict, list[dict]]:
    """Parse a run CSV back into its preamble and typed rows."""
    first, _, body = text.partition("\n")
    if not first.startswith("# "):
        raise ValueError("missing JSON preamble")
    preamble = json.loads(first[2:])
    if preamble.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {preamble.get('schema_version')}")
    reader = csv.DictReader(io.StringIO(body))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    rows = []
    for raw in reader:
        rows.append(
            {
                "iter": int(raw["iter"]),
                "e_min": float(raw["e_min"]),
                "e_exact_gap": float(raw["e_exact_gap"]) if raw["e_exact_gap"] else None,
                "cond_s": float(raw["cond_s"]),
                "kept_dim": int(raw["kept_dim"]),
            }
        )
    return preamble, rows


def summary_row(parameter: float, rows: list[dict], status: str = "", error: str = "") -> dict:
    if not rows:
        return dict(parameter=parameter, final_e_min=None, iters_to_chemical_accuracy=None,
                    final_cond_s=None, status=status, error=error)
    hit = next(
        (r["iter"] for r in rows if r["e_exact_gap"] is not None and abs(r["e_exact_gap"]) <= CHEMICAL_ACCURACY),
        None,
    )
    return dict(
        parameter=parameter,
        final_e_min=rows[-1]["e_min"],
        iters_to_chemical_accuracy=hit,
        final_cond_s=rows[-1]["cond_s"],
        status=status,
        error=error,
    )


def format_summary(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                _fmt(r["parameter"]),
                _fmt(r["final_e_min"]),
                "" if r["iters_to_chemical_accuracy"] is None else r["iters_to_chemical_accuracy"],
                _fmt(r["final_cond_s"]),
                r["status"],
                r["error"],
            ]
        )
    return buf.getvalue()


def execute(spec: RunSpec) -> ConvergenceRecord:
    h = parse_model(spec.model)
    spec.validate(h.n_qubits)
    cache = spectral_cache(h)
    psi0 = plus_state(h.n_qubits) if spec.psi0 == "plus" else basis_state(h.dim, spec.psi0)
    if spec.path == "lcu":
        record, _ = run_lcu(spec.config(), h, psi0, cache, spec.noise_sigma, spec.seed)
    else:
        record, _ = run(spec.config(), h, psi0, cache)
    return record


def cmd_exact(args: argparse.Namespace) -> int:
    h = parse_model(args.model)
    try:
        cache = spectral_cache(h)
    except ham.DimensionTooLarge as exc:
        raise SpecError(str(exc)) from exc
    print(repr(float(cache.eigvals[0])))
    if args.out:
        Path(args.out).write_text("".join(f"{float(e)!r}\n" for e in cache.eigvals), encoding="utf-8")
    return 0


def cmd_run(spec: RunSpec) -> int:
    record = execute(spec)
    text = format_record(spec, record)
    if spec.output_path:
        Path(spec.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_CODES[record.status]


def _sweep_child(spec: RunSpec) -> dict:
    try:
        record = execute(spec)
    except Exception as exc:  # recorded in the summary, siblings continue
        return summary_row(spec.parameter, [], error=f"{type(exc).__name__}: {exc}")
    text = format_record(spec, record)
    Path(spec.output_path).write_text(text, encoding="utf-8")
    _, rows = read_record(text)
    return summary_row(spec.parameter, rows, status=record.status.value)


def cmd_sweep(template: RunSpec, parameters: Sequence[float], out_dir: Path, jobs: int = 1) -> int:
    if not parameters:
        raise SpecError("sweep needs at least one parameter value")
    if any(not (math.isfinite(p) and p > 0) for p in parameters):
        raise SpecError("sweep parameters must all be positive")
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = [
        dataclasses.replace(template, parameter=p, output_path=str(out_dir / f"run_{i:03d}.csv"))
        for i, p in enumerate(parameters)
    ]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        summary = list(pool.map(_sweep_child, specs))
    (out_dir / "summary.csv").write_text(format_summary(summary), encoding="utf-8")
    return EXIT_ERROR if any(r["error"] for r in summary) else 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunSpec fields; flags override it")
    p.add_argument("--model", help="tfim:N,J,h | hubbard:SITES,t,U | file:PATH")
    p.add_argument("--method", choices=("qkud", "qrte"))
    p.add_argument("--path", choices=("direct", "lcu"))
    p.add_argument("--max-iter", type=int)
    p.add_argument("--delta", type=float, help="stop when |E_n - E_{n-1}| < delta")
    p.add_argument("--gevp-threshold", type=float)
    p.add_argument("--psi0", help="basis-state index or 'plus'")
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkud", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="ground energy by full diagonalization")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="write the full spectrum, one value per line")

    p = sub.add_parser("run", help="one Krylov run, CSV to --out or stdout")
    _common(p)
    p.add_argument("--param", type=float, help="epsilon (qkud) or delta t (qrte)")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="one run per parameter value plus summary.csv")
    _common(p)
    p.add_argument("--param", help="comma-separated parameter values")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    return parser


_FLAG_FIELDS = {
    "model": "model",
    "method": "method",
    "path": "path",
    "max_iter": "max_iter",
    "delta": "stop_delta",
    "gevp_threshold": "gevp_threshold",
    "psi0": "psi0",
    "noise_sigma": "noise_sigma",
    "seed": "seed",
}


def resolve_spec(args: argparse.Namespace, single_param: bool) -> RunSpec:
    fields: dict[str, Any] = {}
    if args.config:
        try:
            fields.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read config {args.config}: {exc}") from exc
        fields.pop("schema_version", None)
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            fields[name] = value
    if single_param and args.param is not None:
        fields["parameter"] = args.param
    if single_param and args.out is not None:
        fields["output_path"] = args.out
    known = {f.name for f in dataclasses.fields(RunSpec)}
    unknown = set(fields) - known
    if unknown:
        raise SpecError(f"unknown config keys {sorted(unknown)}")
    if "model" not in fields:
        raise SpecError("--model is required")
    if "psi0" in fields:
        fields["psi0"] = _psi0_value(fields["psi0"])
    for name in ("parameter", "stop_delta", "gevp_threshold", "noise_sigma"):
        if name in fields:
            fields[name] = float(fields[name])
    for name in ("max_iter", "seed"):
        if name in fields:
            fields[name] = int(fields[name])
    return RunSpec(**fields)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "exact":
            return cmd_exact(args)
        if args.command == "run":
            return cmd_run(resolve_spec(args, single_param=True))
        template = resolve_spec(args, single_param=False)
        raw = args.param if args.param is not None else ""
        try:
            params = [float(x) for x in raw.split(",") if x.strip()]
        except ValueError as exc:
            raise SpecError(f"bad parameter list {raw!r}") from exc
        return cmd_sweep(template, params, Path(args.out), args.jobs)
    except Exception as exc:
        print(f"qkud: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
