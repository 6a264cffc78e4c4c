"""Pulse-template profiling and VQE from the command line.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from pulseforge import __version__
from pulseforge import report as rpt
from pulseforge.constraints import ConstraintSpec, constraint_spec_for, validate_params
from pulseforge.device import DeviceModel, device_for, load_device
from pulseforge.gates import gate_duration
from pulseforge.ir import Envelope, PulseParams, ScheduleParseError, deserialize_schedule
from pulseforge.metrics import profile, worker_count
from pulseforge.qcore import PAULI
from pulseforge.sim import sqp_unitary
from pulseforge.templates import (
    ALL_TEMPLATES,
    FAMILY_IDS,
    TemplateError,
    TemplateSpec,
    canonical_template_id,
)
from pulseforge.vqa import OptimizerConfig, load_hamiltonian, vqe
from pulseforge.vqa.hamiltonian import HamiltonianParseError
from pulseforge.vqa.vqe import vqe_summary

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

BLOCH_ANGLE_SWEEP_AMPLITUDE = 0.08


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"2-4"`` or ``"2,3,5"`` (ranges inclusive)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                a, b = (int(x) for x in part.split("-", 1))
                if b < a:
                    raise UsageError(f"empty range {part!r}")
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return sorted(set(out))


def parse_templates(values: list[str]) -> list[str]:
    names: list[str] = []
    for value in values:
        for part in value.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part and all(p.isdigit() for p in part.split("-", 1)):
                ids = parse_int_list(part)
                bad = [i for i in ids if i not in FAMILY_IDS]
                if bad:
                    raise UsageError(f"unknown pulse id {bad[0]}")
                names.extend(FAMILY_IDS[i] for i in ids)
                continue
            try:
                names.append(canonical_template_id(part))
            except TemplateError as exc:
                raise UsageError(str(exc)) from None
    if not names:
        raise UsageError("no templates given")
    return list(dict.fromkeys(names))


def resolve_jobs(requested: int | None) -> int:
    if requested is None:
        env = os.environ.get("PULSEFORGE_THREADS")
        requested = int(env) if env else 1
    return worker_count(requested)


def _device(args) -> DeviceModel:
    try:
        return load_device(args.device)
    except FileNotFoundError:
        raise FileNotFoundError(f"device file not found: {args.device}") from None


def _constraints(args) -> ConstraintSpec | None:
    return constraint_spec_for(args.backend) if args.backend else None


def _write(out_dir: Path | None, name: str, text: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


# -- subcommands ----------------------------------------------------------------


def bloch_rows(sweep: str, samples: int, seed: int, device: DeviceModel):
    """``(value, <X>, <Y>, <Z>)`` after one calibrated-length SQP from ``|0>``."""
    rng = np.random.default_rng(seed)
    env = Envelope("gaussian", drag_beta=device.drag_beta)
    rows = []
    for _ in range(samples):
        if sweep == "amplitude":
            value = float(rng.uniform(-1.0, 1.0))
            params = PulseParams(value, 0.0, device.cal_duration)
        else:
            value = float(rng.uniform(0.0, 2 * math.pi))
            params = PulseParams(BLOCH_ANGLE_SWEEP_AMPLITUDE, value, device.cal_duration)
        psi = sqp_unitary(params, env, device)[:, 0]
        x, y, z = (float(np.vdot(psi, PAULI[p] @ psi).real) for p in "XYZ")
        rows.append((value, x, y, z))
    return rows


def cmd_bloch(args) -> int:
    device = _device(args)
    rows = bloch_rows(args.sweep, args.samples, args.seed, device)
    meta = rpt.provenance(args.seed, device.digest(), sweep=args.sweep, samples=args.samples)
    text = rpt.rows_csv([args.sweep, "x", "y", "z"], rows, meta)
    _write(args.out, f"bloch_{args.sweep}.csv", text)
    return EXIT_OK


def _specs(args) -> list[TemplateSpec]:
    names = parse_templates(args.template)
    qubits = parse_int_list(args.qubits)
    layers = parse_int_list(args.layers)
    fixed = frozenset(f.strip() for f in (args.fix or "").split(",") if f.strip())
    specs = []
    for name in names:
        for n in qubits:
            for layer in layers:
                try:
                    specs.append(TemplateSpec(name, n, layer, fixed, args.seed if name.startswith("RAND_") else None))
                except (TemplateError, ValueError) as exc:
                    raise UsageError(f"{name} N={n} L={layer}: {exc}") from None
    order = {name: i for i, name in enumerate(ALL_TEMPLATES)}
    return sorted(specs, key=lambda s: (order[s.id], s.label, s.n_qubits, s.n_layers))


def run_report(args, metrics: tuple[str, ...]) -> int:
    device = _device(args)
    constraints = _constraints(args)
    jobs = resolve_jobs(args.jobs)
    specs = _specs(args)
    n_expr = args.samples if args.samples is not None else (5000 if "expr" in metrics else 0)
    n_ent = args.ent_samples if args.ent_samples is not None else 500
    if metrics == ("ent",) and args.samples is not None:
        n_ent = args.samples
    reports = []
    for spec in specs:
        dev = device_for(spec.n_qubits, device)
        reports.append(
            profile(
                spec,
                dev,
                n_samples=n_expr if "expr" in metrics else 0,
                ent_samples=n_ent if "ent" in metrics else 0,
                bins=args.bins,
                epd_points=args.epd_points,
                seed=args.seed,
                n_jobs=jobs,
                constraints=constraints,
                metrics=metrics,
            )
        )
    meta = rpt.provenance(
        args.seed,
        device.digest(),
        bins=args.bins,
        backend=args.backend or "default",
        metrics="+".join(metrics),
    )
    formats = args.format or ["csv"]
    stem = args.command
    if "csv" in formats:
        _write(args.out, f"{stem}.csv", rpt.reports_csv(reports, meta))
    if "json" in formats:
        _write(args.out, f"{stem}.json", rpt.reports_json(reports, meta))
    if "svg" in formats:
        if args.out is None:
            raise UsageError("--format svg needs --out")
        for r in reports:
            if r.histogram is None:
                continue
            name = f"hist_{r.template}_n{r.n_qubits}_l{r.n_layers}.svg"
            title = f"{r.template} N={r.n_qubits} L={r.n_layers} expr={r.expr_kl:.4f}"
            _write(args.out, name, rpt.histogram_svg(r.histogram, title, meta))
    return EXIT_OK


def cmd_vqe(args) -> int:
    path = Path(args.hamiltonian)
    if not path.is_file():
        raise FileNotFoundError(f"Hamiltonian file not found: {path}")
    h = load_hamiltonian(path)
    names = parse_templates(args.template)
    if len(names) != 1:
        raise UsageError("vqe takes exactly one template")
    layers = parse_int_list(args.layers)
    if len(layers) != 1:
        raise UsageError("vqe takes exactly one layer count")
    fixed = frozenset(f.strip() for f in (args.fix or "").split(",") if f.strip())
    try:
        spec = TemplateSpec(names[0], h.n_qubits, layers[0], fixed)
    except TemplateError as exc:
        raise UsageError(str(exc)) from None
    source = _device(args)
    device = device_for(h.n_qubits, source)
    config = OptimizerConfig(
        method=args.optimizer,
        max_iterations=args.iterations,
        seed=args.seed,
        calibrate=not args.no_calibrate,
    )
    trace = vqe(h, spec, device, config, restarts=args.restarts, constraints=_constraints(args))
    summary = vqe_summary(h, spec, trace, device)
    if h.n_qubits >= 2:
        summary["baseline"] = "TWOLOCAL"
        summary["baseline_duration_dt"] = gate_duration("TWOLOCAL", h.n_qubits, device)
    summary["hamiltonian"] = path.name
    summary["n_terms"] = len(h)
    summary["restarts"] = args.restarts
    summary["best_theta"] = [float(v) for v in trace.best_theta]
    meta = rpt.provenance(args.seed, source.digest(), template=spec.label, hamiltonian=path.name)
    _write(args.out, "vqe_trace.csv", rpt.provenance_line(meta) + trace.to_csv())
    _write(args.out, "vqe_summary.json", rpt.to_json({"meta": meta, "summary": summary}))
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.schedule)
    if not path.is_file():
        raise FileNotFoundError(f"schedule file not found: {path}")
    try:
        schedule = deserialize_schedule(path.read_text())
    except ScheduleParseError as exc:
        print(f"{path}: parse error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    spec = constraint_spec_for(args.backend)
    device = _device(args)
    failures = 0
    lines = [f"# backend={spec.name} amplitude_range={list(spec.amplitude_range)} "
             f"duration_range={list(spec.duration_range)} granularity={spec.duration_granularity}"]
    for i, ins in enumerate(schedule.instructions):
        if ins.kind == "delay":
            continue
        pinned = device.cal_duration if ins.kind == "play_sqp" else None
        result = validate_params(ins.params, spec, pinned_duration=pinned)
        if result:
            lines.append(f"instruction {i} ({ins.kind} on {ins.channel}): ok")
        else:
            failures += 1
            for v in result.violations:
                lines.append(f"instruction {i} ({ins.kind} on {ins.channel}): {v}")
    lines.append(f"{failures} of {len(schedule.instructions)} instructions invalid")
    print("\n".join(lines))
    return EXIT_INVALID if failures else EXIT_OK


# -- parser -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--device", default=None, help="device JSON (default: packaged ideal2l.json)")
    p.add_argument("--backend", default=None, help="constraint LUT entry, e.g. ibmq_guadalupe")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")


def _sweep(p: argparse.ArgumentParser, samples_help: str) -> None:
    p.add_argument("--template", action="append", required=True, help="name, id, or id range like 1-6")
    p.add_argument("--qubits", default="2", help="N, N1-N2 or a comma list")
    p.add_argument("--layers", default="1", help="L, L1-L2 or a comma list")
    p.add_argument("--fix", default="", help="comma list of fields to fix, e.g. cr_duration")
    p.add_argument("--samples", type=int, default=None, help=samples_help)
    p.add_argument("--ent-samples", type=int, default=None, help="Q-measure samples (default 500)")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--epd-points", type=int, default=5)
    p.add_argument("--jobs", type=int, default=None, help="workers (default PULSEFORGE_THREADS or 1)")
    p.add_argument("--format", action="append", choices=("csv", "json", "svg"))
    _common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulseforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pulseforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bloch", help="sample single-pulse Bloch vectors")
    p.add_argument("--sweep", choices=("amplitude", "angle"), default="amplitude")
    p.add_argument("--samples", type=int, default=5000)
    _common(p)

    p = sub.add_parser("report", help="expressivity, entanglement and EPD table")
    _sweep(p, "fidelity samples (default 5000)")
    p = sub.add_parser("expr", help="expressivity only")
    _sweep(p, "fidelity samples (default 5000)")
    p = sub.add_parser("ent", help="entanglement capability only")
    _sweep(p, "Q-measure samples (default 500)")
    p = sub.add_parser("epd", help="effective parameter dimension only")
    _sweep(p, "unused")

    p = sub.add_parser("vqe", help="variational ground-state search")
    p.add_argument("hamiltonian", help="Pauli Hamiltonian text file")
    p.add_argument("--template", action="append", default=None)
    p.add_argument("--layers", default="1")
    p.add_argument("--fix", default="")
    p.add_argument("--optimizer", choices=("spsa", "nelder-mead"), default="spsa")
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--no-calibrate", action="store_true", help="use the fixed SPSA gain a")
    _common(p)

    p = sub.add_parser("validate", help="check a schedule against hardware constraints")
    p.add_argument("schedule", help="schedule JSON file")
    _common(p)
    return parser


_METRICS = {"report": ("expr", "ent", "epd"), "expr": ("expr",), "ent": ("ent",), "epd": ("epd",)}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "bloch":
            if args.samples < 0:
                raise UsageError("--samples must be >= 0")
            return cmd_bloch(args)
        if args.command in _METRICS:
            return run_report(args, _METRICS[args.command])
        if args.command == "vqe":
            if args.template is None:
                args.template = ["HE_fixCR"]
            return cmd_vqe(args)
        return cmd_validate(args)
    except UsageError as exc:
        print(f"pulseforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HamiltonianParseError as exc:
        print(f"pulseforge: {args.hamiltonian}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"pulseforge: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
