"""Signal-operator and QSP circuit builders over N (input) and A (ancilla).

The kickback maps |a>_N |0>_A to an R_Y(theta_a + Delta) rotation of the
ancilla, which is the W_Y signal operator at signal cos((theta_a + Delta)/2).
The signal processor exp(i phi Z) is emitted as the gate R_Z(-2 phi), which
is exact including the global phase, so circuit blocks equal the 2x2 products
of :mod:`qsparith.qsp` entry by entry.
"""

from __future__ import annotations

import math
from typing import Sequence

from .functions import SubspaceWindow
from .qsp import PhaseSchedule
from .simulator import Circuit, Gate, RegisterLayout

__all__ = [
    "CORRECTION_TAG",
    "kickback_gates",
    "build_wy_kickback",
    "build_qsp_circuit",
    "build_controlled_wy",
    "build_controlled_qsp",
    "controlled_qsp_needs_correction",
    "build_phase_adder",
]

CORRECTION_TAG = "phase-correction"


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")


def _layout_or_default(layout, n, **extra):
    if layout is None:
        return RegisterLayout.of(N=n, **extra)
    if layout.size("N") != n:
        raise ValueError(f"layout N register has {layout.size('N')} qubits, expected {n}")
    return layout


def kickback_gates(
    n_qubits_reg: Sequence[int], ancilla: int, w: SubspaceWindow, scale: float = 1.0, controls: tuple = ()
) -> list[Gate]:
    """R_Y(scale * Delta) then one controlled R_Y(scale * theta_i) per bit.

    ``n_qubits_reg`` is the N register, MSB first, so bit i (weight 2^i) is
    ``n_qubits_reg[-1 - i]``.
    """
    n = len(n_qubits_reg)
    gates = [Gate("RY", (ancilla,), controls, scale * w.shift_angle)]
    for i in range(n):
        q = n_qubits_reg[n - 1 - i]
        gates.append(Gate("RY", (ancilla,), (q,) + controls, scale * w.bit_angle(i, n)))
    return gates


def build_wy_kickback(N: int, w: SubspaceWindow, layout: RegisterLayout | None = None) -> Circuit:
    """Controlled-rotation block realizing W_Y with signal cos((theta_a + Delta)/2).

    1 R_Y and N controlled R_Y on N + 1 qubits, depth N + 1.
    """
    _check_n(N)
    lay = _layout_or_default(layout, N, A=1)
    return Circuit.on(lay, kickback_gates(lay["N"], lay["A"][0], w))


def build_qsp_circuit(phases: PhaseSchedule, N: int, w: SubspaceWindow, layout: RegisterLayout | None = None) -> Circuit:
    """Uncontrolled QSP: R_Z(-2 phi_0), then (kickback, R_Z(-2 phi_j)) for j = 1..m."""
    _check_n(N)
    lay = _layout_or_default(layout, N, A=1)
    anc = lay["A"][0]
    eff = phases.effective_angles
    gates = [Gate("RZ", (anc,), (), -2 * eff[0])]
    kick = kickback_gates(lay["N"], anc, w)
    for phi in eff[1:]:
        gates.extend(kick)
        gates.append(Gate("RZ", (anc,), (), -2 * phi))
    return Circuit.on(lay, gates)


def _cwy_gates(reg, anc: int, control: int, w: SubspaceWindow) -> list[Gate]:
    # control=0: R(-h) R(h) = I. control=1: Z R(-h) Z R(h) = R(2h) = W_Y.
    gates = kickback_gates(reg, anc, w, 0.5)
    gates.append(Gate("Z", (anc,), (control,)))
    gates.extend(kickback_gates(reg, anc, w, -0.5))
    gates.append(Gate("Z", (anc,), (control,)))
    return gates


def build_controlled_wy(
    N: int, w: SubspaceWindow, layout: RegisterLayout | None = None, control: int | None = None
) -> Circuit:
    """Controlled W_Y from two half-angle kickbacks and two CZ conjugations.

    Control |0> gives the identity and control |1> gives W_Y exactly. 2 R_Y,
    2 CZ and 2N CR_Y on N + 2 qubits, depth 2(N + 2).
    """
    _check_n(N)
    lay = _layout_or_default(layout, N, F=1, A=1)
    ctl = lay["F"][0] if control is None else control
    return Circuit.on(lay, _cwy_gates(lay["N"], lay["A"][0], ctl, w))


def controlled_qsp_needs_correction(phases: PhaseSchedule) -> bool:
    """True when the product of all processors is -I (effective angle sum = pi mod 2 pi)."""
    total = float(sum(phases.effective_angles))
    return abs(math.remainder(total, 2 * math.pi)) > math.pi / 2


def build_controlled_qsp(
    phases: PhaseSchedule,
    N: int,
    w: SubspaceWindow,
    layout: RegisterLayout | None = None,
    control: int | None = None,
    correct_phase: bool = True,
) -> Circuit:
    """Controlled QSP built from controlled signal operators.

    The processors stay uncontrolled. On control |0> they multiply to
    exp(i sum(phi) Z), which is I for a zero angle sum and -I when the sum is
    pi (end offsets). In the second case a diag(-1, 1) on the control,
    emitted as X Z X and tagged as a correction, restores identity on |0>.
    Headline counts: m+1 R_Z, 2m R_Y, 2m CZ, 2mN CR_Y.
    """
    _check_n(N)
    lay = _layout_or_default(layout, N, F=1, A=1)
    ctl = lay["F"][0] if control is None else control
    anc = lay["A"][0]
    gates: list[Gate] = []
    if correct_phase and controlled_qsp_needs_correction(phases):
        gates += [Gate(k, (ctl,), tag=CORRECTION_TAG) for k in ("X", "Z", "X")]
    eff = phases.effective_angles
    gates.append(Gate("RZ", (anc,), (), -2 * eff[0]))
    cwy = _cwy_gates(lay["N"], anc, ctl, w)
    for phi in eff[1:]:
        gates.extend(cwy)
        gates.append(Gate("RZ", (anc,), (), -2 * phi))
    return Circuit.on(lay, gates)


def build_phase_adder(
    F: int,
    addend: int | Sequence[int],
    f_qubits: Sequence[int] | None = None,
    n_qubits: int | None = None,
    controls: tuple = (),
    ctrl_state: tuple | None = None,
) -> Circuit:
    """Phase-rotation core of the QFT adder (no QFTs).

    With an integer addend ``a`` each F qubit of weight 2^k gets
    P(2 pi a 2^k / 2^F). With a register addend (sequence of qubits, MSB
    first) bit i and F bit k are joined by a controlled phase of
    2 pi 2^(i+k) / 2^F; lines with i + k >= F are multiples of 2 pi and are
    dropped. Sandwiched between QFT and inverse QFT on F this adds the
    addend modulo 2^F.
    """
    if F < 1:
        raise ValueError("F must be >= 1")
    if f_qubits is None:
        f_qubits = tuple(range(F))
    f_qubits = tuple(f_qubits)
    if len(f_qubits) != F:
        raise ValueError("f_qubits must list F qubits")
    gates = []
    if isinstance(addend, (int,)) and not isinstance(addend, bool):
        width = max(f_qubits) + 1 if n_qubits is None else n_qubits
        for k in range(F):
            theta = math.remainder(2 * math.pi * addend * 2**k / 2**F, 2 * math.pi)
            if theta != 0:
                gates.append(Gate("P", (f_qubits[F - 1 - k],), controls, theta, ctrl_state))
        return Circuit(width, tuple(gates))
    reg = tuple(addend)
    width = max(f_qubits + reg) + 1 if n_qubits is None else n_qubits
    n = len(reg)
    for i in range(n):
        for k in range(F):
            if i + k >= F:
                continue
            theta = 2 * math.pi * 2 ** (i + k) / 2**F
            gates.append(Gate("P", (f_qubits[F - 1 - k],), (reg[n - 1 - i],) + tuple(controls), theta,
                              None if ctrl_state is None else (1,) + tuple(ctrl_state)))
    return Circuit(width, tuple(gates))
