import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsparith.qsp import (
    REFLECTION,
    WX,
    WY,
    WZ,
    DomainError,
    PhaseSchedule,
    Unitary2,
    equal_up_to_global_phase,
    grover_square_check,
    merge_phases,
    phase_from_amplitude,
    qsp_evaluate,
    qsp_evaluate_with_operator,
    qsp_matrices,
    qsp_response,
    signal_operator,
    twisted,
    validate_embeddable,
)
from qsparith.schedules import list_bundled, load_bundled

CONVENTIONS = [WX, WY, WZ, REFLECTION, twisted(0.7), twisted(-2.1)]

angles = st.floats(-math.pi, math.pi, allow_nan=False)
signals = st.floats(-1, 1, allow_nan=False)


@st.composite
def antisymmetric(draw, max_degree=12):
    m = draw(st.integers(1, max_degree))
    half = draw(st.lists(angles, min_size=(m + 1) // 2, max_size=(m + 1) // 2))
    return PhaseSchedule.from_half(half, m, end_offset=draw(st.booleans()))


def test_signal_operator_trivial_values():
    assert np.allclose(signal_operator(1.0).matrix, np.eye(2))
    assert np.allclose(signal_operator(0.0).matrix, [[0, 1j], [1j, 0]])


def test_twisted_signal_operator_matches_oracle(golden):
    u = signal_operator(0.6, twisted(math.pi / 3)).matrix.reshape(-1)
    ref = np.array([complex(*v) for v in golden["derived"]["twisted_0.6_pi3"]])
    assert np.max(np.abs(u - ref)) <= 1e-12
    assert abs(abs(u[1]) - 0.8) < 1e-12
    assert abs(np.angle(u[1] / 1j) - math.pi / 3) < 1e-12
    assert abs(np.angle(u[2] / 1j) + math.pi / 3) < 1e-12


def test_signal_domain_error():
    with pytest.raises(DomainError):
        signal_operator(1.01)
    with pytest.raises(DomainError):
        qsp_response(PhaseSchedule.zeros(2), -1.5)
    signal_operator(1 + 1e-13)


def test_unitary2_contract():
    with pytest.raises(ValueError):
        Unitary2(1, 1, 0, 1)
    u = signal_operator(0.3)
    assert (u @ u.dagger()).allclose(Unitary2(1, 0, 0, 1))
    assert not u.allclose(Unitary2.from_matrix(-u.matrix))
    assert equal_up_to_global_phase(u, Unitary2.from_matrix(1j * u.matrix))


def test_degree_zero_is_single_processor():
    s = PhaseSchedule((0.4,))
    u = qsp_evaluate(s, 0.2)
    assert np.allclose(u.matrix, np.diag([np.exp(0.4j), np.exp(-0.4j)]))


def test_p2a_at_zero_matches_oracle(golden):
    s = load_bundled("p2a_2x3")
    assert abs(qsp_response(s, 0.0) - golden["derived"]["p2a_2x3_at_0"]) <= 1e-9
    assert abs(qsp_response(s, 0.0)) < 1e-12


def test_sgn_at_point_eight(golden):
    s = load_bundled("sgn_2x8")
    val = qsp_response(s, 0.8)
    assert abs(val - golden["derived"]["sgn_2x8_at_0.8"]) <= 1e-9
    assert abs(val - 1) <= golden["schedules"]["sgn_2x8"]["max_residual"]


def test_chebyshev_small_case():
    assert abs(qsp_response(PhaseSchedule.zeros(2), 0.5) + 0.5) < 1e-15


@given(antisymmetric(), signals)
def test_unitarity(s, a):
    for conv in CONVENTIONS:
        Unitary2.from_matrix(qsp_matrices(s, a, conv))


@given(antisymmetric(), signals)
def test_conventions_agree(s, a):
    ref = qsp_matrices(s, a, WX)
    for conv in CONVENTIONS[1:]:
        assert np.max(np.abs(qsp_matrices(s, a, conv, normalize=True) - ref)) <= 1e-10


@given(antisymmetric(), signals, angles)
def test_embedding_closure(s, a, phi):
    u = qsp_matrices(s, a, twisted(phi))
    p = u[0, 0].real
    q2 = 1 - p * p
    assert abs(u[0, 0] - u[1, 1]) <= 1e-9 and abs(u[0, 0].imag) <= 1e-9
    assert abs(abs(u[0, 1]) ** 2 - q2) <= 1e-9 and abs(abs(u[1, 0]) ** 2 - q2) <= 1e-9


@given(st.lists(angles, min_size=2, max_size=14), signals)
def test_antisymmetrization_identity(phi, a):
    # S0 U(phi)^dag S0 = U(-reverse(phi)) on the Wx product
    s0 = np.diag([-1.0, 1.0])
    fwd = qsp_matrices(PhaseSchedule(tuple(phi)), a)
    rev = qsp_matrices(PhaseSchedule(tuple(-x for x in reversed(phi))), a)
    assert np.max(np.abs(s0 @ fwd.conj().T @ s0 - rev)) <= 1e-10


@given(antisymmetric(6), antisymmetric(6), st.lists(signals, min_size=1, max_size=5))
def test_merge_law_random(outer, inner, xs):
    merged = merge_phases(outer, inner)
    assert merged.degree == outer.degree * inner.degree
    assert merged.antisymmetric
    x = np.array(xs)
    nested = qsp_evaluate_with_operator(outer, qsp_matrices(inner, x))
    assert np.max(np.abs(qsp_matrices(merged, x) - nested)) <= 1e-9


def test_merge_examples():
    s = load_bundled("p2a_2x4")
    assert merge_phases(PhaseSchedule((0.0, 0.0)), s).angles == s.angles
    m = merge_phases(PhaseSchedule.zeros(8), PhaseSchedule.zeros(6))
    assert m.degree == 48 and len(m) == 49


def test_merge_p2a_a2p_nested():
    outer, inner = load_bundled("p2a_2x4"), load_bundled("a2p_2x3")
    x = np.linspace(-1, 1, 101)
    nested = qsp_evaluate_with_operator(outer, qsp_matrices(inner, x))
    assert np.max(np.abs(qsp_matrices(merge_phases(outer, inner), x) - nested)) <= 1e-9


def test_merge_rejects_non_antisymmetric():
    bad = PhaseSchedule((0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        merge_phases(bad, PhaseSchedule.zeros(2))
    with pytest.raises(ValueError):
        merge_phases(PhaseSchedule.zeros(2), bad)


def test_schedule_invariants():
    with pytest.raises(ValueError):
        PhaseSchedule(())
    with pytest.raises(ValueError):
        PhaseSchedule((0.1, 0.2), antisymmetric=True)
    with pytest.raises(ValueError):
        PhaseSchedule((0.0, 0.0, 0.0), parity="odd")
    s = PhaseSchedule((0.3, -0.3))
    assert s.antisymmetric and s.parity == "odd" and s.degree == 1


def test_validate_embeddable_examples():
    rep = validate_embeddable(load_bundled("p2a_2x10"))
    assert rep.checks["antisymmetry"][0]
    assert not validate_embeddable(PhaseSchedule((0.1, 0.2, 0.3))).checks["antisymmetry"][0]
    rep = validate_embeddable(PhaseSchedule.zeros(4))
    assert rep.passed and abs(rep.p_plus_one - 1) < 1e-15


@pytest.mark.parametrize("name", list_bundled())
def test_bundled_boundary_constraints(name, golden):
    s = load_bundled(name)
    rep = validate_embeddable(s)
    assert rep.passed, rep.lines()
    # odd schedules fix P(0)=0; +pi/2 end offsets flip P(1) to -1
    expected = -1.0 if s.end_offset else 1.0
    assert abs(rep.p_plus_one - expected) < 1e-12


def test_phase_from_amplitude():
    assert phase_from_amplitude(1.0) == 0.0
    assert abs(phase_from_amplitude(0.0) - 0.25) < 1e-15
    x = np.linspace(-1, 1, 11)
    assert np.allclose(phase_from_amplitude(np.sin(np.pi * x / 2)), (1 - x) / 4, atol=1e-12)
    with pytest.raises(DomainError):
        phase_from_amplitude(1.2)


@pytest.mark.parametrize("a,phi", [(1.0, 0.0), (0.3, 0.0), (-0.7, 1.1)])
def test_grover_square(a, phi):
    assert grover_square_check(a, phi)


@given(signals, angles)
def test_grover_square_random(a, phi):
    assert grover_square_check(a, phi)
