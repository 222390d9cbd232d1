"""Command-line front end.

    centralmap analyze  [--input PATH|-] [--format auto|text|json] [--tol-rel X] [--tol-abs X] [--tol-rank X] [--pretty]
    centralmap spectrum [--input PATH|-] [--format ...] [tolerance flags]
    centralmap generate --n N --m M --kind central|orthogonal|spectrum|random [--sigma LIST] --seed S
    centralmap batch    --input PATH|-  [tolerance flags]

Exit status: 0 when the analysis ran (whatever the verdicts), 2 for unusable
input, 3 when a numerical routine failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import criterion, generator
from .criterion import AnalysisReport, CoordinateMatrix, ToleranceConfig
from .linalg import NumericalError

SCHEMA_VERSION = "1"
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

TOLERANCE_KEYS = ("tau_rel", "tau_abs", "tau_rank")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class InputDocument:
    matrix: np.ndarray
    tolerances: dict = field(default_factory=dict)

    def coordinate_matrix(self) -> CoordinateMatrix:
        return CoordinateMatrix(self.matrix)


# -- parsing -----------------------------------------------------------------


def _check_shape(rows: int, cols: int) -> None:
    if rows < 3:
        raise ParseError(f"need at least 3 rows (m >= 2), got {rows}")
    if cols < 4:
        raise ParseError(f"need at least 4 columns (n >= 3), got {cols}")
    if rows >= cols:
        raise ParseError(f"need fewer rows than columns (m < n), got {rows}x{cols}")


def _parse_text(text: str) -> InputDocument:
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        row = []
        for col, token in enumerate(line.split(), start=1):
            try:
                value = float(token)
            except ValueError:
                raise ParseError(f"not a number: {token!r}", lineno, col) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite entry {token!r}", lineno, col)
            row.append(value)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} entries, got {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no matrix rows found")
    _check_shape(len(rows), width)
    return InputDocument(np.array(rows, dtype=np.float64))


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{what}: not a number: {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{what}: non-finite entry")
    return value


def _parse_json(text: str) -> InputDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise ParseError('expected an object with a "matrix" key')
    matrix = doc["matrix"]
    if not isinstance(matrix, list) or not matrix:
        raise ParseError('"matrix" must be a non-empty list of rows')
    rows = []
    for i, row in enumerate(matrix):
        if not isinstance(row, list):
            raise ParseError(f"row {i} is not a list")
        if rows and len(row) != len(rows[0]):
            raise ParseError(f"row {i} has {len(row)} entries, expected {len(rows[0])}")
        rows.append([_number(x, f"row {i}, column {j}") for j, x in enumerate(row)])
    _check_shape(len(rows), len(rows[0]))

    tolerances = doc.get("tolerances") or {}
    if not isinstance(tolerances, dict):
        raise ParseError('"tolerances" must be an object')
    unknown = set(tolerances) - set(TOLERANCE_KEYS)
    if unknown:
        raise ParseError(f"unknown tolerance keys: {sorted(unknown)}")
    tolerances = {k: _number(v, f"tolerance {k}") for k, v in tolerances.items()}
    try:
        ToleranceConfig(**tolerances)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return InputDocument(np.array(rows, dtype=np.float64), tolerances)


def parse_input(data: bytes | str, format: str = "auto") -> InputDocument:
    """Parse a coordinate matrix from the text or JSON input format.

    Text: one row per line, whitespace-separated entries, ``#`` starts a
    comment, blank lines are skipped. JSON: ``{"matrix": [[...], ...],
    "tolerances": {...}}`` with optional, partial tolerances. ``auto`` picks
    JSON when the first non-blank character is ``{``.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    if format == "auto":
        format = "json" if data.lstrip().startswith("{") else "text"
    if format == "text":
        return _parse_text(data)
    if format == "json":
        return _parse_json(data)
    raise ValueError(f"unknown format {format!r}")


# -- serialization -------------------------------------------------------------


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj) -> str:
    # json.dumps would write floats with repr; reports use 17 significant digits
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(x) for x in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def report_document(r: AnalysisReport) -> dict:
    spec = r.spectrum
    return {
        "schema_version": SCHEMA_VERSION,
        "dims": {"n": r.n, "m": r.m, "threshold": r.threshold},
        "preconditions": {
            "central": r.preconditions.central,
            "surjective": r.preconditions.surjective,
        },
        "reduced_matrix": None if r.reduced is None else r.reduced.a_tilde,
        "singular_values": None if spec is None else spec.sigma,
        "least_multiplicity": None if spec is None else spec.least_multiplicity,
        "central_similarity": r.central_similarity,
        "orthogonal_similarity": r.orthogonal_similarity,
        "v_hat": r.v_hat,
        "principal_point": r.principal_point,
        "vanishing_hyperplane": r.vanishing_hyperplane,
        "tolerances": {k: getattr(r.tolerances, k) for k in TOLERANCE_KEYS},
    }


def _verdict(value: bool | None) -> str:
    return "n/a (hypothesis fails)" if value is None else ("yes" if value else "no")


def _summary(r: AnalysisReport) -> str:
    pre = r.preconditions
    lines = [
        f"mapping of projective {r.n}-space onto projective {r.m}-space",
        f"  central: {'yes' if pre.central else 'no'}",
        f"  hyperplane at infinity mapped onto target's: {'yes' if pre.surjective else 'no'}",
    ]
    if r.spectrum is not None:
        sigma = ", ".join(f"{s:.10g}" for s in r.spectrum.sigma)
        lines.append(f"  singular values of reduced matrix: {sigma}")
        lines.append(
            f"  least singular value multiplicity: {r.spectrum.least_multiplicity}"
            f" (needed: {r.threshold})"
        )
    lines.append(f"  central projection + similarity: {_verdict(r.central_similarity)}")
    lines.append(f"  orthogonal central projection + similarity: {_verdict(r.orthogonal_similarity)}")
    if r.v_hat is not None:
        lines.append(f"  common squared singular value: {r.v_hat:.10g}")
    return "\n".join(lines) + "\n"


def format_report(r: AnalysisReport, pretty: bool = False) -> bytes:
    out = _encode(report_document(r)) + "\n"
    if pretty:
        out += "\n" + _summary(r)
    return out.encode("utf-8")


def instance_document(inst: generator.GeneratedInstance) -> dict:
    doc = {
        "label": inst.label.value,
        "n": inst.cm.n,
        "m": inst.cm.m,
        "seed": inst.seed,
        "matrix": inst.cm.a,
        "witness": None,
    }
    w = inst.witness
    if w is not None:
        doc["witness"] = {
            "kernel_basis": w.kernel_basis,
            "flat_point_q": w.flat_point_q,
            "flat_frame_u": w.flat_frame_u,
            "similarity": {
                "ratio": w.similarity.ratio,
                "rotation": w.similarity.rotation,
                "shift": w.similarity.shift,
            },
        }
    return doc


def format_instance(inst: generator.GeneratedInstance, format: str = "json") -> bytes:
    if format == "json":
        return (_encode(instance_document(inst)) + "\n").encode("utf-8")
    if format == "text":
        rows = (" ".join(format_float(x) for x in row) for row in inst.cm.a)
        return ("\n".join(rows) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


# -- commands -------------------------------------------------------------------


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _tolerances(args, doc_tolerances: dict) -> ToleranceConfig:
    # flags win over tolerances embedded in the document
    values = dict(doc_tolerances)
    for key, flag in zip(TOLERANCE_KEYS, ("tol_rel", "tol_abs", "tol_rank")):
        if getattr(args, flag) is not None:
            values[key] = getattr(args, flag)
    return replace(criterion.DEFAULT_TOLERANCES, **values)


def _cmd_analyze(args, out) -> int:
    doc = parse_input(_read(args.input), args.format)
    report = criterion.analyze(doc.coordinate_matrix(), _tolerances(args, doc.tolerances))
    out.write(format_report(report, pretty=args.pretty))
    return EXIT_OK


def _cmd_spectrum(args, out) -> int:
    doc = parse_input(_read(args.input), args.format)
    report = criterion.analyze(doc.coordinate_matrix(), _tolerances(args, doc.tolerances))
    sigma = None if report.spectrum is None else report.spectrum.sigma
    out.write((_encode(sigma) + "\n").encode("utf-8"))
    return EXIT_OK


def _cmd_generate(args, out) -> int:
    if args.kind == "spectrum":
        if args.sigma is None:
            raise ParseError("--kind spectrum requires --sigma")
        try:
            sigma = [float(s) for s in args.sigma.split(",")]
        except ValueError:
            raise ParseError(f"--sigma: not a comma-separated list of numbers: {args.sigma!r}") from None
        inst = generator.gen_prescribed_spectrum(args.n, args.m, sigma, args.seed)
    else:
        make = {
            "central": generator.gen_geometric_central,
            "orthogonal": generator.gen_geometric_orthogonal,
            "random": generator.gen_random_valid,
        }[args.kind]
        inst = make(args.n, args.m, args.seed)
    report = criterion.analyze(inst.cm, _tolerances(args, {}))
    doc = {"instance": instance_document(inst), "report": report_document(report)}
    out.write((_encode(doc) + "\n").encode("utf-8"))
    return EXIT_OK


def _cmd_batch(args, out) -> int:
    status = EXIT_OK
    for lineno, line in enumerate(_read(args.input).decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = parse_input(line, "json")
            tol = _tolerances(args, doc.tolerances)
            out.write(format_report(criterion.analyze(doc.coordinate_matrix(), tol)))
        except (ParseError, ValueError) as exc:
            out.write((_encode({"error": {"line": lineno, "message": str(exc)}}) + "\n").encode("utf-8"))
            status = max(status, EXIT_INPUT)
        except NumericalError as exc:
            out.write((_encode({"error": {"line": lineno, "message": str(exc)}}) + "\n").encode("utf-8"))
            status = max(status, EXIT_NUMERICAL)
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centralmap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tolerance_flags(p):
        p.add_argument("--tol-rel", type=float, help="singular value clustering width relative to sigma_max")
        p.add_argument("--tol-abs", type=float, help="absolute floor of the clustering width")
        p.add_argument("--tol-rank", type=float, help="relative threshold for numerical rank")

    for name in ("analyze", "spectrum"):
        p = sub.add_parser(name)
        p.add_argument("--input", default="-")
        p.add_argument("--format", choices=("auto", "text", "json"), default="auto")
        tolerance_flags(p)
        if name == "analyze":
            p.add_argument("--pretty", action="store_true", help="append a readable summary")

    p = sub.add_parser("generate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", choices=("central", "orthogonal", "spectrum", "random"), required=True)
    p.add_argument("--sigma", help="comma-separated singular values for --kind spectrum")
    p.add_argument("--seed", type=int, required=True)
    tolerance_flags(p)

    p = sub.add_parser("batch")
    p.add_argument("--input", required=True)
    tolerance_flags(p)
    return parser


COMMANDS = {
    "analyze": _cmd_analyze,
    "spectrum": _cmd_spectrum,
    "generate": _cmd_generate,
    "batch": _cmd_batch,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout.buffer
    stderr = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "generate" and args.seed < 0:
            raise ParseError("--seed must be non-negative")
        return COMMANDS[args.command](args, stdout)
    except NumericalError as exc:
        print(f"centralmap: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (ParseError, ValueError, OSError) as exc:
        print(f"centralmap: {exc}", file=stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
