"""Command-line entry point: ``qsparith <command> ...``.

Exit codes: 0 success, 2 usage or input error, 3 numerical non-convergence,
4 invariant violation detected during simulation.

Output paths that are not absolute are resolved against ``$QSPARITH_OUT``
(default: the working directory). ``--config FILE`` reads a JSON object
whose keys are option names (``grid``, ``seed``, ...) used as defaults;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .angles import OptimizationProblem, certify, optimize
from .arithmetic import (
    TruthTableFunction,
    build_projector_oracle,
    build_qso,
    qft_adder_circuit,
    qso_amplitudes,
    qso_flags,
    qso_schedule,
    run_qse,
)
from .circuits import build_controlled_qsp, build_controlled_wy, build_qsp_circuit, build_wy_kickback
from .functions import SubspaceWindow, get_target, kickback_signal, window_map
from .qsp import PhaseSchedule, merge_phases, qsp_response
from .resources import KINDS, audit, estimate
from .schedules import ScheduleFormatError, load_bundled, read_schedule, target_for_schedule, write_schedule
from .simulator import Statevector, apply, distribution_csv

log = logging.getLogger("qsparith")

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_INVARIANT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _out_path(path: str) -> Path:
    p = Path(path)
    if not p.is_absolute():
        p = Path(os.environ.get("QSPARITH_OUT", ".")) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(_out_path(path), "w", newline="\n") as fh:
        fh.write(text)


def _schedule(ref: str) -> PhaseSchedule:
    """A bundled name or a path to a schedule file."""
    if os.path.exists(ref):
        try:
            return read_schedule(ref)
        except ScheduleFormatError as exc:
            raise UsageError(f"{ref}: {exc}") from None
    try:
        return load_bundled(ref)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _int_range(text: str) -> list[int]:
    """``2:6`` (inclusive) or ``2,4,6`` or ``5``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer list or lo:hi range, got {text!r}") from None


def _band(text: str) -> tuple[float, float]:
    """``W`` or ``W@C``: exclude |x - C| < W (C defaults to 0)."""
    try:
        w, _, c = text.partition("@")
        return float(c or 0.0), float(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad band {text!r}; use WIDTH or WIDTH@CENTER") from None


def _truth_table(text: str, N: int, F: int) -> TruthTableFunction:
    """``poly:c0,c1,...`` (mod 2^F), ``mod:k`` or ``identity``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "identity":
            return TruthTableFunction.from_callable(lambda x: x, N, F)
        if kind == "poly":
            coeffs = [int(c) for c in arg.split(",")]
            return TruthTableFunction.from_callable(lambda x: sum(c * x**i for i, c in enumerate(coeffs)), N, F)
        if kind == "mod":
            k = int(arg)
            return TruthTableFunction.from_callable(lambda x: x % k, N, F)
    except ValueError:
        pass
    raise UsageError(f"unknown function {text!r}; use identity, poly:c0,c1,.. or mod:k")


def _svg(xs, errs, width=640, height=240) -> str:
    xs, errs = np.asarray(xs), np.asarray(errs)
    lo, hi = float(xs.min()), float(xs.max())
    top = float(np.max(np.abs(errs))) or 1.0
    px = (xs - lo) / (hi - lo or 1) * (width - 20) + 10
    py = height / 2 - errs / top * (height / 2 - 10)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<line x1="10" y1="{height / 2}" x2="{width - 10}" y2="{height / 2}" stroke="#999"/>\n'
        f'<polyline fill="none" stroke="#1f77b4" points="{pts}"/>\n'
        f'<text x="12" y="14" font-size="11">max |error| = {top:.4g}</text>\n</svg>\n'
    )


def cmd_find_angles(args) -> int:
    if args.degree < 1:
        raise UsageError("--degree must be >= 1")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    target = get_target(args.target)
    if args.domain:
        target = target.with_domain(*args.domain)
    if args.exclude_band:
        target = target.with_bands(args.exclude_band)
    offset = {"auto": None, "0": False, "1": True}[args.end_offset]
    try:
        prob = OptimizationProblem(target, args.degree, args.grid, seed=args.seed, end_offset=offset,
                                   loss_kind=args.loss)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = optimize(prob, restarts=args.restarts, threshold=args.threshold)
    stem = args.out or f"{target.name.replace(':', '_')}_m{args.degree}"
    sched = PhaseSchedule(res.schedule.angles, res.schedule.end_offset, antisymmetric=True, name=Path(stem).name,
                          meta=res.schedule.meta)
    write_schedule(sched, _out_path(stem + ".txt"))
    _write(stem + "_residual.csv", certify(sched, target, prob.grid()).to_csv())
    print(res.summary())
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_certify(args) -> int:
    sched = _schedule(args.angles)
    try:
        target = get_target(args.target) if args.target else target_for_schedule(sched)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.target and "domain" in sched.meta:
        lo, hi = (float(v) for v in sched.meta["domain"].split(","))
        target = target.with_domain(lo, hi)
    rep = certify(sched, target, target.grid(args.grid))
    _write(args.out, rep.to_csv())
    if args.svg:
        _write(args.svg, _svg(rep.x, rep.error))
    print(f"max_err={rep.max_err:.12g} mean_err={rep.mean_err:.12g} points={rep.x.size}", file=sys.stderr)
    return EXIT_OK


def _window(args) -> SubspaceWindow:
    try:
        return SubspaceWindow(args.delta, args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    kind = args.kind
    if kind == "adder":
        F = args.F
        for v in (args.a, args.b):
            if not 0 <= v < 2**F:
                raise UsageError(f"adder inputs must lie in [0, 2^{F})")
        circ = qft_adder_circuit(F)
        out = apply(Statevector.basis(circ.layout, X=args.a, F=args.b), circ)
        dist = out.register_marginal("F")
        _write(args.out, distribution_csv(dist, F, "F"))
        best = int(np.argmax(dist))
        print(best)
        return EXIT_OK if abs(dist[best] - 1) < 1e-10 and best == (args.a + args.b) % 2**F else EXIT_INVARIANT
    w = _window(args)
    N = args.N
    if N < 1:
        raise UsageError("--N must be >= 1")
    if kind == "qso":
        f, p2a = _schedule(args.f), _schedule(args.p2a)
        a = np.arange(2**N)
        if args.filter:
            filt = _schedule(args.filter)
            table = qso_flags(f, p2a, filt, target_for_schedule(filt), N, w, args.threshold,
                              "sgn" if filt.meta.get("target", "").lstrip("-") == "sgn" else "step", args.band)
            _write(args.out, table.to_csv())
            return EXIT_INVARIANT if table.mismatches.size else EXIT_OK
        circ = build_qso(f, p2a, N, w)
        vals = qso_amplitudes(circ, N)
        ref = qsp_response(qso_schedule(f, p2a), kickback_signal(a, N, w)) / 2**N
        lines = ["a,x,hadamard_real,oracle_real"]
        x = window_map(a, N, w)
        lines += [f"{i},{x[i]:.12e},{vals[i]:.12e},{ref[i]:.12e}" for i in a]
        _write(args.out, "\n".join(lines) + "\n")
        return EXIT_INVARIANT if np.max(np.abs(vals - ref)) > 1e-9 else EXIT_OK
    if kind == "qse":
        if args.F < 3:
            raise UsageError("--F must be >= 3 for quadrant readout")
        merged = merge_phases(_schedule(args.a2p), merge_phases(_schedule(args.f), _schedule(args.p2a)))
        res = run_qse(merged, N, args.F, w)
        _write(args.out, res.to_csv())
        o = res.oracle
        bad = (res.argmax != o["bin"]) & ~(o["near_boundary"] & (np.abs(res.argmax - o["bin"]) <= 1))
        return EXIT_INVARIANT if bad.any() else EXIT_OK
    if kind == "oracle":
        f = _truth_table(args.function, N, args.F)
        if not 0 <= args.y < 2**args.F:
            raise UsageError(f"--y must lie in [0, 2^{args.F})")
        circ = build_projector_oracle(f, args.y, args.oracle_kind)
        lay = circ.layout
        lines = ["x,f_x,flagged,amplitude_sign"]
        ok = True
        for x in range(2**N):
            out = apply(Statevector.basis(lay, N=x), circ)
            amp = out.amplitudes
            hit = f(x) == args.y
            if args.oracle_kind == "projector":
                idx = lay.index(N=x, B=1) if hit else lay.index(N=x)
                ok &= abs(abs(amp[idx]) - 1) < 1e-10
                lines.append(f"{x},{f(x)},{int(hit)},1")
            else:
                sign = float(np.real(amp[lay.index(N=x)]))
                ok &= abs(sign - (-1 if hit else 1)) < 1e-10
                lines.append(f"{x},{f(x)},{int(hit)},{int(round(sign))}")
        _write(args.out, "\n".join(lines) + "\n")
        return EXIT_OK if ok else EXIT_INVARIANT
    raise UsageError(f"unknown simulation {kind!r}")


def _audited(kind: str, N: int, F: int, m: int):
    w = SubspaceWindow(0.0, 2.0)
    sched = PhaseSchedule.zeros(m)
    if kind == "Wy":
        return audit(build_wy_kickback(N, w))
    if kind == "QSO":
        return audit(build_qsp_circuit(sched, N, w))
    if kind == "CWy":
        return audit(build_controlled_wy(N, w))
    if kind == "CQSP":
        return audit(build_controlled_qsp(sched, N, w))
    from .arithmetic import qse_circuit

    return audit(qse_circuit(sched, N, F, w))


def cmd_resources(args) -> int:
    kinds = KINDS if args.kind == "all" else (args.kind,)
    cons = ("sequential", "printed") if args.construction == "both" else (args.construction,)
    if min(args.N + args.F + args.m) < 1:
        raise UsageError("sweep values must be >= 1")
    header = ["kind", "N", "F", "degree", "construction", "qubits", "depth", "QFT_F", "R_Z", "R_Y", "CZ", "CR_Y"]
    if args.audit:
        header += ["audit_qubits", "audit_depth", "audit_QFT_F", "audit_R_Z", "audit_R_Y", "audit_CZ", "audit_CR_Y",
                   "audit_match"]
    lines = [",".join(header)]
    status = EXIT_OK
    for kind in kinds:
        fs = args.F if kind == "QSE" else [args.F[0]]
        ms = args.m if kind in ("QSO", "CQSP", "QSE") else [args.m[0]]
        for N in args.N:
            for F in fs:
                for m in ms:
                    got = _audited(kind, N, F, m) if args.audit else None
                    for c in cons if kind == "QSE" else ("sequential",):
                        e = estimate(kind, N, F, m, c)
                        row = [kind, N, F, m, c, *e.headline()]
                        if got is not None:
                            match = got == e
                            row += [*got.headline(), int(match)]
                            if c == "sequential" and not match:
                                status = EXIT_INVARIANT
                        lines.append(",".join(str(v) for v in row))
    _write(args.out, "\n".join(lines) + "\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsparith", description="QSP arithmetic toolkit")
    p.add_argument("--version", action="version", version=f"qsparith {__version__}")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    fa = sub.add_parser("find-angles", help="fit an antisymmetric phase schedule to a target")
    fa.add_argument("--target", required=True, help="p2a, a2p, sgn, identity, example_f, step:<d>, chebyshev:<n>")
    fa.add_argument("--degree", type=int, required=True, help="number of signal-operator applications")
    fa.add_argument("--grid", type=int, default=200, help="grid parameter d (d + 1 points)")
    fa.add_argument("--seed", type=int, default=0)
    fa.add_argument("--restarts", type=int, default=8)
    fa.add_argument("--exclude-band", type=_band, action="append", metavar="W[@C]")
    fa.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
    fa.add_argument("--end-offset", choices=("auto", "0", "1"), default="auto")
    fa.add_argument("--loss", choices=("amplitude", "phase"), default="amplitude")
    fa.add_argument("--threshold", type=float, help="loss above this exits with code 3")
    fa.add_argument("--out", help="output stem (writes STEM.txt and STEM_residual.csv)")
    fa.set_defaults(func=cmd_find_angles)

    ce = sub.add_parser("certify", help="residual table of a schedule against its target")
    ce.add_argument("--angles", required=True, help="schedule file or bundled name")
    ce.add_argument("--target", help="override the file's target= header")
    ce.add_argument("--grid", type=int, default=1000)
    ce.add_argument("--out", help="CSV path (default stdout)")
    ce.add_argument("--svg", help="optional residual plot")
    ce.set_defaults(func=cmd_certify)

    si = sub.add_parser("simulate", help="statevector simulations")
    si.add_argument("kind", choices=("adder", "qso", "qse", "oracle"))
    si.add_argument("--N", type=int, default=4)
    si.add_argument("--F", type=int, default=4)
    si.add_argument("--a", type=int, default=0)
    si.add_argument("--b", type=int, default=0)
    si.add_argument("--delta", type=float, default=0.0)
    si.add_argument("--alpha", type=float, default=2.0)
    si.add_argument("--p2a", default="p2a_2x10")
    si.add_argument("--f", default="f_2x22")
    si.add_argument("--a2p", default="a2p_2x3")
    si.add_argument("--filter", help="filter schedule for qso (e.g. step0.1_2x17)")
    si.add_argument("--threshold", type=float, default=0.1)
    si.add_argument("--band", type=float, default=0.01)
    si.add_argument("--function", default="identity", help="oracle truth table: identity, poly:c0,c1,.., mod:k")
    si.add_argument("--y", type=int, default=0)
    si.add_argument("--oracle-kind", choices=("projector", "grover"), default="projector")
    si.add_argument("--out", help="CSV path (default stdout)")
    si.set_defaults(func=cmd_simulate)

    re_ = sub.add_parser("resources", help="gate, qubit and depth sweeps")
    re_.add_argument("--kind", choices=KINDS + ("all",), default="all")
    re_.add_argument("--N", type=_int_range, default=[4])
    re_.add_argument("--F", type=_int_range, default=[3])
    re_.add_argument("--m", type=_int_range, default=[6])
    re_.add_argument("--construction", choices=("sequential", "printed", "both"), default="both")
    re_.add_argument("--audit", action="store_true", help="also count gates of the emitted circuits")
    re_.add_argument("--out", help="CSV path (default stdout)")
    re_.set_defaults(func=cmd_resources)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            cfg = json.loads(Path(known.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                sp.set_defaults(**{k: v for k, v in cfg.items() if any(a.dest == k for a in sp._actions)})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qsparith: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
