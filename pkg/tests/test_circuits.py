import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsparith.circuits import (
    CORRECTION_TAG,
    build_controlled_qsp,
    build_controlled_wy,
    build_phase_adder,
    build_qsp_circuit,
    build_wy_kickback,
    controlled_qsp_needs_correction,
)
from qsparith.functions import STANDARD_WINDOWS, SubspaceWindow, kickback_angle, kickback_signal, p2a
from qsparith.qsp import WY, PhaseSchedule, qsp_matrices, signal_operator
from qsparith.schedules import load_bundled
from qsparith.simulator import Gate, RegisterLayout, Statevector, ancilla_block, apply, circuit_unitary

W2 = SubspaceWindow(0.0, 2.0)


def test_kickback_single_qubit_zero_input():
    circ = build_wy_kickback(1, W2)
    block = ancilla_block(circ, circ.layout, "A", N=0)
    assert np.allclose(block, np.eye(2), atol=1e-15)
    assert p2a(kickback_signal(0, 1, W2)) == -1.0


def test_kickback_angle_example():
    assert kickback_angle(5, 3, W2) == pytest.approx(2 * math.pi * 5 / 16)
    circ = build_wy_kickback(3, W2)
    block = ancilla_block(circ, circ.layout, "A", N=5)
    assert np.allclose(block, Gate("RY", (0,), theta=2 * math.pi * 5 / 16).matrix(), atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("key", sorted(STANDARD_WINDOWS))
def test_kickback_equals_signal_operator(n, key):
    w = STANDARD_WINDOWS[key]
    circ = build_wy_kickback(n, w)
    for a in range(2**n):
        block = ancilla_block(circ, circ.layout, "A", N=a)
        ref = signal_operator(kickback_signal(a, n, w), WY).matrix
        assert np.max(np.abs(block - ref)) <= 1e-12


def test_kickback_shape():
    circ = build_wy_kickback(4, W2)
    assert circ.n_qubits == 5 and len(circ) == 5
    assert sum(1 for g in circ.gates if g.controls) == 4


@given(st.lists(st.floats(-math.pi, math.pi), min_size=1, max_size=3), st.booleans(), st.integers(0, 7))
@settings(max_examples=25)
def test_qsp_circuit_equals_2x2(half, off, a):
    s = PhaseSchedule.from_half(half, 2 * len(half) - 1, end_offset=off)
    circ = build_qsp_circuit(s, 3, W2)
    block = ancilla_block(circ, circ.layout, "A", N=a)
    ref = qsp_matrices(s, kickback_signal(a, 3, W2), WY)
    assert np.max(np.abs(block - ref)) <= 1e-12


def _split(u, lay, ctl_reg="F"):
    # blocks of the unitary on control 0 and control 1
    n = lay.n_qubits
    idx = np.arange(2**n)
    ctl = lay[ctl_reg][0]
    bit = (idx >> (n - 1 - ctl)) & 1
    zero, one = idx[bit == 0], idx[bit == 1]
    return u[np.ix_(zero, zero)], u[np.ix_(one, one)], u[np.ix_(zero, one)]


def test_controlled_wy():
    circ = build_controlled_wy(3, W2)
    u0, u1, off = _split(circuit_unitary(circ), circ.layout)
    assert np.max(np.abs(u0 - np.eye(16))) <= 1e-12
    assert np.max(np.abs(off)) <= 1e-12
    ref = circuit_unitary(build_wy_kickback(3, W2))
    assert np.max(np.abs(u1 - ref)) <= 1e-12


@pytest.mark.parametrize("name", ["p2a_2x3", "a2p_2x3", "sgn_2x4"])
def test_controlled_qsp(name):
    s = load_bundled(name)
    circ = build_controlled_qsp(s, 2, W2)
    u0, u1, off = _split(circuit_unitary(circ), circ.layout)
    assert np.max(np.abs(u0 - np.eye(8))) <= 1e-12
    assert np.max(np.abs(off)) <= 1e-12
    ref = circuit_unitary(build_qsp_circuit(s, 2, W2))
    assert np.max(np.abs(u1 - ref)) <= 1e-12


def test_correction_only_when_needed():
    with_offset = load_bundled("p2a_2x3")
    assert controlled_qsp_needs_correction(with_offset) == with_offset.end_offset
    assert not controlled_qsp_needs_correction(PhaseSchedule.zeros(3))
    circ = build_controlled_qsp(PhaseSchedule.zeros(3), 2, W2)
    assert not any(g.tag == CORRECTION_TAG for g in circ.gates)


def test_phase_adder_constant_angles():
    circ = build_phase_adder(3, 1)
    angles = sorted(g.theta for g in circ.gates)
    assert np.allclose(angles, [math.pi / 4, math.pi / 2, math.pi])
    # bit 0 weight gets pi/4, the top bit pi
    assert circ.gates[0].targets == (2,) and circ.gates[-1].targets == (0,)


def test_phase_adder_drops_full_turns():
    # register addend: lines with i + k >= F would be multiples of 2 pi
    circ = build_phase_adder(3, (3, 4, 5))
    assert len(circ) == 6
    assert all(not math.isclose(g.theta % (2 * math.pi), 0) for g in circ.gates)


def test_phase_adder_register_diagonal():
    lay = RegisterLayout.of(X=4, F=4)
    circ = build_phase_adder(4, lay["X"], lay["F"], lay.n_qubits)
    for b in range(16):
        out = apply(Statevector.basis(lay, X=3, F=b), circ)
        amp = out.amplitudes[lay.index(X=3, F=b)]
        assert abs(amp - np.exp(2j * np.pi * 3 * b / 16)) <= 1e-12


def test_builders_validate():
    with pytest.raises(ValueError):
        build_wy_kickback(0, W2)
    with pytest.raises(ValueError):
        build_phase_adder(0, 1)
    with pytest.raises(ValueError):
        build_phase_adder(3, 1, f_qubits=(0, 1))
