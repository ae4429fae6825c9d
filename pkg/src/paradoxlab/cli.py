"""Command-line front end for the lab's experiments.

Every subcommand computes a JSON-ready payload once and renders it as an
aligned table, CSV, or indented JSON. Floating-point output is rounded to
nine significant digits (six in tables) before rendering so that repeated
invocations with the same arguments produce byte-identical text.

Exit codes: 0 on success, 1 when a numerical procedure fails to converge
or an audit reports a violation, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import ctc, epr, szilard
from .circuit import Circuit, run_density, sample
from .descriptor import locality_audit
from .errors import NoConvergence, ParadoxLabError, UsageError
from .qmath import load_unitary, matrix_to_entries

_JSON_SIG = 9
_TABLE_SIG = 6
# Magnitudes below the tightest reported tolerance are rendering noise.
_DISPLAY_FLOOR = 1e-12

Row = Tuple[object, ...]


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting the process."""

    def error(self, message):
        raise UsageError(message)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _add_output_flags(parser: argparse.ArgumentParser, sampling: bool = False) -> None:
    parser.add_argument(
        "--format", choices=("table", "json", "csv"), default="table"
    )
    if sampling:
        parser.add_argument("--shots", type=_nonneg_int, default=0)
        parser.add_argument("--seed", type=_nonneg_int, default=0)


def _add_label_source(parser: argparse.ArgumentParser, labels: Sequence[str]) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", choices=tuple(labels))
    group.add_argument("--prompt", action="store_true")


def build_parser() -> _Parser:
    top = _Parser(prog="paradoxlab", add_help=True)
    commands = top.add_subparsers(dest="command", required=True)

    p_epr = commands.add_parser("epr", help="entangled-pair parity check")
    p_epr.add_argument("--theta", type=float)
    p_epr.add_argument("--phi", type=float)
    _add_output_flags(p_epr, sampling=True)
    p_sweep = commands.add_parser(
        "epr-sweep", help="parity probability over an angle grid (spelled: epr sweep)"
    )
    p_sweep.add_argument("--theta-steps", type=_positive_int, default=17)
    p_sweep.add_argument("--phi-steps", type=_positive_int, default=17)
    _add_output_flags(p_sweep)

    p_szi = commands.add_parser("szilard", help="single-particle engine ledger")
    p_szi.add_argument("--cycles", type=_positive_int, default=1)
    p_szi.add_argument("--skip-reset", action="store_true")
    _add_output_flags(p_szi, sampling=True)

    p_ctc = commands.add_parser("ctc", help="closed-timelike-curve fixed points")
    ctc_sub = p_ctc.add_subparsers(dest="ctc_command", required=True)
    p_dist = ctc_sub.add_parser("distinguish", help="tell |0> from |-> in one shot")
    _add_label_source(p_dist, ("0", "-"))
    _add_output_flags(p_dist)
    p_bb84 = ctc_sub.add_parser("bb84", help="identify all four conjugate-basis states")
    _add_label_source(p_bb84, ctc.STATE_LABELS)
    _add_output_flags(p_bb84)
    p_solve = ctc_sub.add_parser("solve", help="fixed point of a saved interaction")
    p_solve.add_argument("--unitary", required=True, metavar="FILE")
    p_solve.add_argument("--system-state", choices=ctc.STATE_LABELS)
    p_solve.add_argument("--tol", type=_positive_float, default=1e-12)
    _add_output_flags(p_solve)
    p_grand = ctc_sub.add_parser("grandfather", help="bit flip fed back on itself")
    _add_output_flags(p_grand)

    p_audit = commands.add_parser(
        "audit-locality", help="per-gate support check of the Heisenberg engine"
    )
    p_audit.add_argument("--circuit", required=True, metavar="FILE")
    _add_output_flags(p_audit)

    return top


@dataclass(frozen=True)
class CliInvocation:
    command: str
    flags: Dict[str, object] = field(default_factory=dict)
    format: str = "table"
    shots: int = 0
    seed: int = 0


_CONSUMED = {"command", "epr_command", "ctc_command", "format", "shots", "seed"}


def parse(argv: Sequence[str]) -> CliInvocation:
    args = list(argv)
    if args[:2] == ["epr", "sweep"]:
        args = ["epr-sweep"] + args[2:]
    ns = build_parser().parse_args(args)
    command = ns.command
    if command == "ctc":
        command = f"ctc-{ns.ctc_command}"
    if command == "epr":
        missing = [
            flag
            for flag, value in (("--theta", ns.theta), ("--phi", ns.phi))
            if value is None
        ]
        if missing:
            raise UsageError(
                f"the following arguments are required: {', '.join(missing)}"
            )
        for flag, value in (("--theta", ns.theta), ("--phi", ns.phi)):
            if not math.isfinite(value):
                raise UsageError(f"argument {flag}: must be finite")
    flags = {k: v for k, v in vars(ns).items() if k not in _CONSUMED}
    return CliInvocation(
        command=command,
        flags=flags,
        format=getattr(ns, "format", "table"),
        shots=getattr(ns, "shots", 0),
        seed=getattr(ns, "seed", 0),
    )


def _round_float(value: float, sig: int = _JSON_SIG) -> float:
    value = float(value)
    if not math.isfinite(value):
        return value
    if abs(value) < _DISPLAY_FLOOR:
        return 0.0
    return float(f"{value:.{sig}g}")


def _json_ready(value):
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round_float(value)
    return value


def _cell(value, sig: int) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{_round_float(value, sig):.{sig}g}"
    if isinstance(value, tuple):
        return " ".join(_cell(v, sig) for v in value)
    return str(value)


def _render_json(payload) -> str:
    return json.dumps(_json_ready(payload), indent=2) + "\n"


def _render_table(headers: Sequence[str], rows: Sequence[Row]) -> str:
    grid = [list(headers)] + [
        [_cell(v, _TABLE_SIG) for v in row] for row in rows
    ]
    widths = [max(len(line[i]) for line in grid) for i in range(len(headers))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
        for line in grid
    ]
    return "\n".join(lines) + "\n"


def _render_csv(headers: Sequence[str], rows: Sequence[Row]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_cell(v, _JSON_SIG) for v in row])
    return buffer.getvalue()


def _render(inv: CliInvocation, payload, headers, rows) -> str:
    if inv.format == "json":
        return _render_json(payload)
    if inv.format == "csv":
        return _render_csv(headers, rows)
    return _render_table(headers, rows)


def _read_label(inv: CliInvocation, allowed: Sequence[str]) -> str:
    if inv.flags.get("prompt"):
        label = sys.stdin.readline().strip()
        if label not in allowed:
            raise UsageError(
                f"prompt input {label!r} is not one of {', '.join(allowed)}"
            )
        return label
    return str(inv.flags["input"])


def _cmd_epr(inv: CliInvocation):
    cfg = epr.EprConfig(float(inv.flags["theta"]), float(inv.flags["phi"]))
    report = epr.info_flow_report(cfg)
    payload = {
        "theta": report.theta,
        "phi": report.phi,
        "p_check_one": report.p_check_one,
        "correlation": report.correlation,
        "dependence": report.dependence,
        "shots": inv.shots,
        "seed": inv.seed,
    }
    rows: List[Row] = [
        ("theta", report.theta),
        ("phi", report.phi),
        ("p_check_one", report.p_check_one),
        ("correlation", report.correlation),
    ]
    for who, angles in report.dependence.items():
        for angle, depends in angles.items():
            rows.append((f"dependence.{who}.{angle}", depends))
    rows.append(("shots", inv.shots))
    rows.append(("seed", inv.seed))
    if inv.shots > 0:
        result = run_density(epr.build_epr_circuit(cfg))
        counts = sample(result, inv.shots, inv.seed)
        payload["counts"] = counts
        for key in sorted(counts):
            rows.append((f"counts[{key}]", counts[key]))
    return payload, ("field", "value"), rows, 0


def _cmd_epr_sweep(inv: CliInvocation):
    thetas = np.linspace(-math.pi, math.pi, int(inv.flags["theta_steps"]))
    phis = np.linspace(-math.pi, math.pi, int(inv.flags["phi_steps"]))
    points = epr.sweep(thetas, phis)
    payload = {
        "rows": [
            {"theta": pt.theta, "phi": pt.phi, "p_check_one": pt.p_check_one}
            for pt in points
        ]
    }
    rows = [(pt.theta, pt.phi, pt.p_check_one) for pt in points]
    return payload, ("theta", "phi", "p_check_one"), rows, 0


def _cmd_szilard(inv: CliInvocation):
    cfg = szilard.SzilardConfig(
        cycles=int(inv.flags["cycles"]), skip_reset=bool(inv.flags["skip_reset"])
    )
    ledger = szilard.run_cycles(cfg, shots=inv.shots, seed=inv.seed)
    payload = [rec.to_dict() for rec in ledger.records]
    headers = (
        "cycle",
        "expected_work",
        "sampled_work",
        "memory_entropy_pre_reset",
        "memory_entropy_post",
        "mutual_info_particle_memory",
    )
    rows = [tuple(rec.to_dict()[h] for h in headers) for rec in ledger.records]
    return payload, headers, rows, 0


def _ctc_report(result: ctc.CtcRunResult):
    sol = result.solution
    payload = {
        "distribution": dict(result.distribution),
        "fixed_point": matrix_to_entries(sol.rho_loop.mat),
        "residual": sol.residual,
        "iterations": sol.iterations,
    }
    rows: List[Row] = [
        (f"p[{key}]", value) for key, value in sorted(result.distribution.items())
    ]
    rows.append(("residual", sol.residual))
    rows.append(("iterations", sol.iterations))
    dim = sol.rho_loop.mat.shape[0]
    for i in range(dim):
        for j in range(dim):
            entry = sol.rho_loop.mat[i, j]
            rows.append(
                (f"fixed_point[{i}][{j}]", (float(entry.real), float(entry.imag)))
            )
    return payload, ("field", "value"), rows, 0


def _cmd_ctc_distinguish(inv: CliInvocation):
    label = _read_label(inv, ("0", "-"))
    problem = ctc.distinguisher_problem(label)
    return _ctc_report(ctc.run_ctc_circuit(problem, [problem.n_loop]))


def _cmd_ctc_bb84(inv: CliInvocation):
    label = _read_label(inv, ctc.STATE_LABELS)
    problem = ctc.bb84_problem(label)
    measure = [problem.n_loop, problem.n_loop + 1]
    return _ctc_report(ctc.run_ctc_circuit(problem, measure))


def _cmd_ctc_solve(inv: CliInvocation):
    path = str(inv.flags["unitary"])
    try:
        u = load_unitary(path)
    except (OSError, ValueError, ParadoxLabError) as exc:
        raise UsageError(f"--unitary: {exc}")
    n_total = int(u.shape[0]).bit_length() - 1
    if 2**n_total != u.shape[0]:
        raise UsageError("--unitary: matrix dimension must be a power of two")
    label = inv.flags.get("system_state")
    try:
        if label is None:
            problem = ctc.CtcProblem(u, None, 0, n_total)
            measure: List[int] = []
        else:
            if n_total < 2:
                raise UsageError(
                    "--system-state: the unitary must act on at least two qubits"
                )
            system = ctc.state_from_label(str(label)).density()
            problem = ctc.CtcProblem(u, system, 1, n_total - 1)
            measure = [problem.n_loop]
    except UsageError:
        raise
    except ParadoxLabError as exc:
        raise UsageError(f"--unitary: {exc}")
    tol = float(inv.flags["tol"])
    return _ctc_report(ctc.run_ctc_circuit(problem, measure, tol=tol))


def _cmd_ctc_grandfather(inv: CliInvocation):
    return _ctc_report(ctc.run_ctc_circuit(ctc.grandfather_problem(), []))


def _cmd_audit(inv: CliInvocation):
    path = str(inv.flags["circuit"])
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"--circuit: {exc}")
    try:
        circuit = Circuit.from_json(text)
        report = locality_audit(circuit)
    except (ValueError, ParadoxLabError) as exc:
        raise UsageError(f"--circuit: {exc}")
    payload = report.to_dict()
    rows: List[Row] = [
        (step.instr, step.max_offsupport_delta, step.ok) for step in report.steps
    ]
    rows.append(("overall", None, report.overall))
    headers = ("instr", "max_offsupport_delta", "pass")
    return payload, headers, rows, 0 if report.overall else 1


_HANDLERS = {
    "epr": _cmd_epr,
    "epr-sweep": _cmd_epr_sweep,
    "szilard": _cmd_szilard,
    "ctc-distinguish": _cmd_ctc_distinguish,
    "ctc-bb84": _cmd_ctc_bb84,
    "ctc-solve": _cmd_ctc_solve,
    "ctc-grandfather": _cmd_ctc_grandfather,
    "audit-locality": _cmd_audit,
}


def execute(inv: CliInvocation) -> Tuple[str, int]:
    """Run one parsed invocation; returns rendered text and an exit code."""
    handler = _HANDLERS.get(inv.command)
    if handler is None:
        raise UsageError(f"unknown command {inv.command!r}")
    payload, headers, rows, code = handler(inv)
    return _render(inv, payload, headers, rows), code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        inv = parse(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        text, code = execute(inv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParadoxLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
