"""Quantum arithmetic constructions on top of the simulator.

Two routes to a function f of an N-bit register:

* truth-table arithmetic, the value oracle |x>|b> -> |x>|b + f(x) mod 2^F>, realized as a
  basis permutation (the reference) or as multi-controlled phase adders;
* phase estimation of the diagonal phase oracle exp(2 pi i f(x) / norm), and its QSP
  generalization, the signal-estimation pipeline (QSE) that reads an
  embedded-QSP amplitude into the F register.

Projector/Grover oracles and QSP-based oraclization (QSO) reuse the same parts.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuits import build_controlled_qsp, build_phase_adder, build_qsp_circuit
from .functions import SubspaceWindow, TargetFunction, kickback_signal, window_map
from .qsp import PhaseSchedule, merge_phases, phase_from_amplitude, qsp_response
from .simulator import (
    Circuit,
    Gate,
    RegisterLayout,
    Statevector,
    apply,
    hadamard_test,
    qpe_circuit,
    qpe_kernel,
)

__all__ = [
    "TruthTableFunction",
    "value_oracle_permutation",
    "build_value_oracle",
    "build_phase_oracle",
    "qpe_phase_oracle_circuit",
    "qft_adder_circuit",
    "qft_add",
    "qft_add_state",
    "adder_eigenphase",
    "adder_eigenphase_check",
    "build_projector_oracle",
    "qso_schedule",
    "build_qso",
    "qso_amplitudes",
    "FlagTable",
    "qso_flags",
    "QuadrantReading",
    "quadrant_translate",
    "QseResult",
    "qse_circuit",
    "run_qse",
    "qse_oracle",
]


@dataclass(frozen=True)
class TruthTableFunction:
    """Integer function on N-bit inputs, values reduced mod 2^F.

    Parameters
    ----------
    values : sequence of int, length 2^N
    N, F : int
    """

    values: tuple
    N: int
    F: int

    def __post_init__(self):
        if self.N < 1 or self.F < 1:
            raise ValueError("N and F must be >= 1")
        vals = tuple(int(v) % 2**self.F for v in self.values)
        if len(vals) != 2**self.N:
            raise ValueError(f"truth table needs {2**self.N} entries, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, f: Callable[[int], int], N: int, F: int) -> "TruthTableFunction":
        return cls(tuple(int(f(x)) for x in range(2**N)), N, F)

    def __call__(self, x: int) -> int:
        return self.values[x]

    def affine_coefficients(self) -> tuple[int, int] | None:
        """(c1, c0) with f(x) = c1 x + c0 mod 2^F, or None."""
        m = 2**self.F
        c0 = self.values[0]
        c1 = (self.values[1] - c0) % m if self.N >= 1 and len(self.values) > 1 else 0
        if all((c1 * x + c0) % m == v for x, v in enumerate(self.values)):
            return c1, c0
        return None


def value_oracle_permutation(f: TruthTableFunction) -> np.ndarray:
    """Image of each index of the (N, F) register pair under the value oracle."""
    nf = 2**f.F
    idx = np.arange(2**f.N * nf)
    x, b = idx // nf, idx % nf
    return x * nf + (b + np.asarray(f.values)[x]) % nf


def build_value_oracle(f: TruthTableFunction, layout: RegisterLayout | None = None, realization: str = "oracle") -> Circuit:
    """Value oracle |x>|b> -> |x>|b + f(x)> on registers N and F.

    ``realization="oracle"`` emits one PERM gate (the classical reference);
    ``"network"`` emits QFT(F), one constant phase adder per input value
    controlled on all N qubits, and the inverse QFT.
    """
    lay = layout or RegisterLayout.of(N=f.N, F=f.F)
    nq, fq = lay["N"], lay["F"]
    if len(nq) != f.N or len(fq) != f.F:
        raise ValueError("layout registers do not match the function's N and F")
    if realization == "oracle":
        return Circuit.on(lay, [Gate("PERM", nq + fq, data=value_oracle_permutation(f))])
    if realization != "network":
        raise ValueError(f"unknown realization {realization!r}")
    gates = [Gate("QFT", fq)]
    for x, v in enumerate(f.values):
        if v == 0:
            continue
        bits = tuple(int(c) for c in format(x, f"0{f.N}b"))
        gates.extend(build_phase_adder(f.F, v, fq, lay.n_qubits, controls=nq, ctrl_state=bits).gates)
    gates.append(Gate("IQFT", fq))
    return Circuit.on(lay, gates)


def build_phase_oracle(
    f,
    N: int,
    layout: RegisterLayout | None = None,
    norm: float | str | None = None,
    power: int = 1,
    control: int | None = None,
    use_ladder: bool = True,
) -> Circuit:
    """Diagonal the phase oracle to a power = exp(2 pi i power f(x) / norm) on the N register.

    Parameters
    ----------
    f : TruthTableFunction or callable
    norm : float, "max" or None
        Phase normalization. Defaults to 2^F for a truth table, so phase
        estimation with F bits reads f exactly; "max" uses max |f|.
    control : int, optional
        Qubit controlling the whole operator.
    use_ladder : bool
        Emit single-qubit phase gates for affine truth tables instead of one
        DIAG gate.
    """
    lay = layout or RegisterLayout.of(N=N)
    nq = lay["N"]
    if isinstance(f, TruthTableFunction):
        vals = np.asarray(f.values, dtype=float)
        default_norm = 2.0**f.F
    else:
        vals = np.array([float(f(x)) for x in range(2**N)])
        default_norm = None
    if norm == "max":
        norm = float(np.max(np.abs(vals)))
    elif norm is None:
        norm = default_norm
    if norm is None or not norm > 0:
        raise ValueError("phase oracle needs a positive normalization (max |f| > 0)")
    ctl = () if control is None else (control,)
    affine = f.affine_coefficients() if isinstance(f, TruthTableFunction) and use_ladder else None
    if affine is not None:
        c1, c0 = affine
        gates = []
        for i in range(N):
            theta = math.remainder(2 * math.pi * power * c1 * 2**i / norm, 2 * math.pi)
            if theta:
                gates.append(Gate("P", (nq[N - 1 - i],), ctl, theta))
        g0 = math.remainder(2 * math.pi * power * c0 / norm, 2 * math.pi)
        if g0 and control is not None:
            gates.append(Gate("P", (control,), (), g0))
        return Circuit.on(lay, gates)
    phases = np.exp(2j * np.pi * power * vals / norm)
    return Circuit.on(lay, [Gate("DIAG", nq, ctl, data=phases)])


def qpe_phase_oracle_circuit(f: TruthTableFunction, layout: RegisterLayout | None = None, use_ladder: bool = True) -> Circuit:
    """Phase estimation of the phase oracle with F readout bits; acts as the value oracle on basis inputs."""
    lay = layout or RegisterLayout.of(N=f.N, F=f.F)
    return qpe_circuit(
        lay.n_qubits, lay["F"],
        lambda k, c: build_phase_oracle(f, f.N, lay, power=2**k, control=c, use_ladder=use_ladder),
        lay,
    )


def qft_adder_circuit(F: int, addend: int | None = None) -> Circuit:
    """QFT(F), phase ladder, inverse QFT.

    With ``addend=None`` the addend is a second F-qubit register X laid out
    before F; otherwise it is a classical constant.
    """
    if addend is None:
        lay = RegisterLayout.of(X=F, F=F)
        core = build_phase_adder(F, lay["X"], lay["F"], lay.n_qubits)
    else:
        lay = RegisterLayout.of(F=F)
        core = build_phase_adder(F, int(addend), lay["F"], lay.n_qubits)
    fq = lay["F"]
    return Circuit.on(lay, [Gate("QFT", fq), *core.gates, Gate("IQFT", fq)])


def qft_add(a: int, b: int, F: int) -> int:
    """Run the register-addend adder on |a>_X |b>_F and return the F outcome.

    Raises ``ArithmeticError`` unless the outcome has probability 1.
    """
    for v, name in ((a, "a"), (b, "b")):
        if not 0 <= v < 2**F:
            raise ValueError(f"{name} must lie in [0, 2^{F})")
    circ = qft_adder_circuit(F)
    out = apply(Statevector.basis(circ.layout, X=a, F=b), circ)
    dist = out.register_marginal("F")
    best = int(np.argmax(dist))
    if abs(dist[best] - 1) > 1e-10:
        raise ArithmeticError(f"adder outcome not deterministic (p = {dist[best]})")
    return best


def qft_add_state(amplitudes, b: int, F: int) -> np.ndarray:
    """Add the constant b to an arbitrary F-register state; returns amplitudes."""
    circ = qft_adder_circuit(F, b)
    out = apply(Statevector(amplitudes, circ.layout), circ)
    return out.amplitudes


def adder_eigenphase(l: int, f_val: int, F: int) -> tuple[complex, float]:
    """Apply the constant adder to QFT|l>; return (overlap ratio, amplitude drift).

    The ratio is <QFT l| ADD_f |QFT l>, whose angle should be -2 pi l f / 2^F.
    """
    if not 0 <= l < 2**F:
        raise ValueError(f"l must lie in [0, 2^{F})")
    lay = RegisterLayout.of(F=F)
    psi = apply(Statevector.basis(lay, F=l), Circuit.on(lay, [Gate("QFT", lay["F"])]))
    out = apply(psi, qft_adder_circuit(F, f_val))
    ratio = complex(np.vdot(psi.amplitudes, out.amplitudes))
    drift = float(np.max(np.abs(np.abs(out.amplitudes) - np.abs(psi.amplitudes))))
    return ratio, drift


def adder_eigenphase_check(l: int, f_val: int, F: int, tol: float = 1e-9) -> bool:
    """QFT|l> is an eigenvector of ADD_f with eigenvalue exp(-2 pi i l f / 2^F)."""
    ratio, drift = adder_eigenphase(l, f_val, F)
    expected = np.exp(-2j * np.pi * l * f_val / 2**F)
    return abs(ratio - expected) <= tol and drift <= tol


def _select(qubits: Sequence[int], value: int) -> tuple[tuple, tuple]:
    bits = tuple(int(c) for c in format(value, f"0{len(qubits)}b"))
    return tuple(qubits), bits


def build_projector_oracle(f: TruthTableFunction, y: int, kind: str = "projector") -> Circuit:
    """Value oracle, flag or phase-flip on F = y, then its inverse.

    ``kind="projector"`` sets the flag qubit B to |1> exactly on inputs with
    f(x) = y; ``kind="grover"`` negates those amplitudes and has no B.
    """
    if not 0 <= y < 2**f.F:
        raise ValueError(f"y must lie in [0, 2^{f.F})")
    if kind == "projector":
        lay = RegisterLayout.of(N=f.N, F=f.F, B=1)
    elif kind == "grover":
        lay = RegisterLayout.of(N=f.N, F=f.F)
    else:
        raise ValueError(f"kind must be 'projector' or 'grover', got {kind!r}")
    uf = build_value_oracle(f, lay)
    fq = lay["F"]
    if kind == "projector":
        ctl, state = _select(fq, y)
        mark = [Gate("X", lay["B"], ctl, ctrl_state=state)]
    else:
        target = fq[-1]
        ctl, state = _select(fq[:-1], y >> 1) if len(fq) > 1 else ((), ())
        flip = [] if y & 1 else [Gate("X", (target,))]
        mark = flip + [Gate("Z", (target,), ctl, ctrl_state=state)] + flip
    return Circuit.on(lay, [*uf.gates, *mark, *uf.inverse().gates])


def qso_schedule(f_phases: PhaseSchedule, p2a_phases: PhaseSchedule, filter_phases: PhaseSchedule | None = None) -> PhaseSchedule:
    """Nest p2a, then f, then the optional filter into one schedule."""
    merged = merge_phases(f_phases, p2a_phases)
    if filter_phases is not None:
        merged = merge_phases(filter_phases, merged)
    return merged


def build_qso(
    f_phases: PhaseSchedule,
    p2a_phases: PhaseSchedule,
    N: int,
    w: SubspaceWindow,
    filter_phases: PhaseSchedule | None = None,
) -> Circuit:
    """Single QSP over the kickback with merged phases p2a, f and filter."""
    return build_qsp_circuit(qso_schedule(f_phases, p2a_phases, filter_phases), N, w)


def qso_amplitudes(circuit: Circuit, N: int) -> np.ndarray:
    """Hadamard-test values on the uniform N superposition, one per input."""
    lay = circuit.layout or RegisterLayout.of(N=N, A=1)
    return hadamard_test(circuit, Statevector.uniform(lay, "N"), lay["N"])


@dataclass(frozen=True)
class FlagTable:
    """Per-input flags from the circuit and from the classical oracle."""

    a: np.ndarray
    x: np.ndarray
    inner: np.ndarray
    response: np.ndarray
    circuit_flag: np.ndarray
    oracle_flag: np.ndarray
    in_band: np.ndarray

    @property
    def mismatches(self) -> np.ndarray:
        return np.flatnonzero((self.circuit_flag != self.oracle_flag) & ~self.in_band)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "x", "inner", "response", "circuit_flag", "oracle_flag", "in_band"])
        for row in zip(self.a, self.x, self.inner, self.response, self.circuit_flag, self.oracle_flag, self.in_band):
            w.writerow([int(row[0]), f"{row[1]:.12e}", f"{row[2]:.12e}", f"{row[3]:.12e}", int(row[4]), int(row[5]), int(row[6])])
        return buf.getvalue()


def qso_flags(
    f_phases: PhaseSchedule,
    p2a_phases: PhaseSchedule,
    filter_phases: PhaseSchedule,
    filter_target: TargetFunction,
    N: int,
    w: SubspaceWindow,
    threshold: float,
    kind: str = "step",
    band: float = 0.01,
) -> FlagTable:
    """Compare circuit flags of a filtered QSO with the classical oracle.

    The oracle evaluates the unfiltered merged polynomial y_a exactly and
    flags |y_a| < threshold (``kind="step"``) or y_a < 0 (``kind="sgn"``).
    The circuit flag is read from the sign of the filtered Hadamard-test
    value: flagged inputs sit where the filter target is -1 before any
    negation recorded on ``filter_target``. Inputs within ``band`` of the
    threshold are marked and excluded from mismatch counting.
    """
    circ = build_qso(f_phases, p2a_phases, N, w, filter_phases)
    vals = qso_amplitudes(circ, N) * 2**N
    a = np.arange(2**N)
    signal = kickback_signal(a, N, w)
    inner = qsp_response(qso_schedule(f_phases, p2a_phases), signal)
    flag_sign = 1.0 if filter_target.name.startswith("-") else -1.0
    circuit_flag = np.sign(vals) == flag_sign
    if kind == "step":
        oracle_flag = np.abs(inner) < threshold
        in_band = np.abs(np.abs(inner) - threshold) < band
    elif kind == "sgn":
        oracle_flag = inner < 0
        in_band = np.abs(inner) < band
    else:
        raise ValueError(f"kind must be 'step' or 'sgn', got {kind!r}")
    return FlagTable(a, window_map(a, N, w), inner, vals, circuit_flag, oracle_flag, in_band)


@dataclass(frozen=True)
class QuadrantReading:
    """F-bit phase register read in sign + magnitude form.

    ``value`` is sign * magnitude / 2^(F-2), so a full-scale reading is +-1.
    """

    msb_pair: str
    raw_bits: str
    sign: int
    magnitude: int

    @property
    def F(self) -> int:
        return len(self.raw_bits) + 2

    @property
    def value(self) -> float:
        return self.sign * self.magnitude / 2 ** (self.F - 2)

    @property
    def bits(self) -> str:
        return self.msb_pair + self.raw_bits

    @property
    def translated_bits(self) -> str:
        """Sign bit (1 = negative) followed by the F-2 magnitude bits."""
        return ("1" if self.sign < 0 else "0") + format(self.magnitude, f"0{self.F - 2}b")


def quadrant_translate(reading: str | int, F: int | None = None) -> QuadrantReading:
    """Translate a phase-register readout with the four quadrant rules.

    With r the F-2 low bits and r~ their one's complement:
    11 -> +r, 01 -> -r, 00 -> +r~, 10 -> -r~.
    """
    if isinstance(reading, str):
        bits = reading.strip()
        if F is not None and len(bits) != F:
            raise ValueError(f"expected {F} bits, got {bits!r}")
        if any(c not in "01" for c in bits):
            raise ValueError(f"not a bit string: {reading!r}")
    else:
        if F is None:
            raise ValueError("F is required for an integer reading")
        if not 0 <= reading < 2**F:
            raise ValueError(f"reading must lie in [0, 2^{F})")
        bits = format(reading, f"0{F}b")
    if len(bits) < 3:
        raise ValueError("quadrant translation needs F >= 3")
    msb, raw = bits[:2], bits[2:]
    r = int(raw, 2)
    comp = (2 ** len(raw) - 1) - r
    sign, mag = {"11": (1, r), "01": (-1, r), "00": (1, comp), "10": (-1, comp)}[msb]
    return QuadrantReading(msb, raw, sign, mag)


def qse_oracle(phases: PhaseSchedule, N: int, F: int, w: SubspaceWindow, boundary_tol: float = 0.25) -> dict:
    """Classical QSE prediction per input from the exact 2x2 polynomial.

    Returns arrays ``P``, ``phase`` (principal, turns), ``bin`` (nearest
    F-bit bin of the principal phase), ``near_boundary`` (phase within
    ``boundary_tol`` bins of a rounding boundary) and ``distribution``
    (analytic QPE kernel for the equally weighted phase pair).
    """
    a = np.arange(2**N)
    p = np.clip(qsp_response(phases, kickback_signal(a, N, w)), -1, 1)
    ph = phase_from_amplitude(p)
    scaled = ph * 2**F
    nearest = np.floor(scaled + 0.5).astype(int)
    frac = np.abs(scaled - np.floor(scaled) - 0.5)
    dist = np.array([qpe_kernel([v, 1 - v], F) for v in ph])
    return {"P": p, "phase": ph, "bin": nearest, "near_boundary": frac < boundary_tol,
            "distribution": dist}


@dataclass(frozen=True)
class QseResult:
    N: int
    F: int
    window: SubspaceWindow
    distributions: np.ndarray
    argmax: np.ndarray
    readings: tuple
    oracle: dict

    def to_csv(self) -> str:
        """a, x, classical P, phase, argmax bits, translated value, oracle value."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["a", "x", "P_classical", "phase", "argmax_bits", "translated_value", "oracle_value"])
        x = window_map(np.arange(2**self.N), self.N, self.window)
        for a in range(2**self.N):
            oracle_val = quadrant_translate(int(self.oracle["bin"][a]) % 2**self.F, self.F).value
            wr.writerow([a, f"{x[a]:.12e}", f"{self.oracle['P'][a]:.12e}", f"{self.oracle['phase'][a]:.12e}",
                         self.readings[a].bits, f"{self.readings[a].value:.12g}", f"{oracle_val:.12g}"])
        return buf.getvalue()


def _argmax_lowest(row: np.ndarray, tol: float = 1e-9) -> int:
    return int(np.flatnonzero(row >= row.max() - tol)[0])


def qse_circuit(phases: PhaseSchedule, N: int, F: int, w: SubspaceWindow) -> Circuit:
    """QPE over sequential copies of the controlled QSP (2^k copies for bit k)."""
    lay = RegisterLayout.of(N=N, F=F, A=1)

    def power(k: int, c: int) -> Circuit:
        # (-I)^(2^k) = I on control |0> for k >= 1, so only the single copy needs the fix
        return build_controlled_qsp(phases, N, w, lay, control=c, correct_phase=(k == 0)).repeat(2**k)

    return qpe_circuit(lay.n_qubits, lay["F"], power, lay)


def run_qse(phases: PhaseSchedule, N: int, F: int, w: SubspaceWindow) -> QseResult:
    """Run the full QSE circuit once on the uniform N superposition.

    The circuit never changes the N register, so conditioning the final
    state on N = a gives the exact F-register distribution of input |a>.
    """
    if F < 3:
        raise ValueError("QSE readout needs F >= 3 (two quadrant bits plus data)")
    circ = qse_circuit(phases, N, F, w)
    lay = circ.layout
    out = apply(Statevector.uniform(lay, "N"), circ)
    dists = out.conditional("N", "F")
    argmax = np.array([_argmax_lowest(row) for row in dists])
    readings = tuple(quadrant_translate(int(b), F) for b in argmax)
    return QseResult(N, F, w, dists, argmax, readings, qse_oracle(phases, N, F, w))
