"""Two-by-two quantum signal processing.

Everything here works on single-qubit unitaries: signal operators in the
usual conventions, the alternating QSP product, antisymmetric-schedule checks,
phase nesting (schedule merging) and the amplitude/eigenphase relation used by
phase-estimation readout.

The signal processor is ``exp(i*phi*Z)`` and the reference signal operator is

    W_X(a) = [[a, i*sqrt(1-a^2)], [i*sqrt(1-a^2), a]]

so that Re<0|U|0> of the QSP product is the realized polynomial P(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DomainError",
    "Unitary2",
    "PhaseSchedule",
    "Convention",
    "WX",
    "WY",
    "WZ",
    "REFLECTION",
    "twisted",
    "signal_operator",
    "signal_processor",
    "qsp_matrices",
    "qsp_evaluate",
    "qsp_evaluate_with_operator",
    "qsp_response",
    "merge_phases",
    "validate_embeddable",
    "EmbeddabilityReport",
    "phase_from_amplitude",
    "grover_square_check",
    "equal_up_to_global_phase",
]

DOMAIN_SLACK = 1e-12
UNITARY_TOL = 1e-10
ANTISYMMETRY_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])
_SDG = np.diag([1, -1j])


class DomainError(ValueError):
    """Raised when a signal or amplitude lies outside [-1, 1]."""


def _check_signal(a, name="a"):
    arr = np.asarray(a, dtype=float)
    if np.any(np.abs(arr) > 1 + DOMAIN_SLACK):
        raise DomainError(f"{name} must lie in [-1, 1], got {arr[np.abs(arr) > 1 + DOMAIN_SLACK].ravel()[:3]}")
    return np.clip(arr, -1.0, 1.0)


def _wrap(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(angle, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class Unitary2:
    """A 2x2 unitary matrix stored entrywise.

    Equality is strict and elementwise: no global phase is factored out. Use
    :func:`equal_up_to_global_phase` for the looser comparison.
    """

    u00: complex
    u01: complex
    u10: complex
    u11: complex

    def __post_init__(self):
        m = self.matrix
        err = np.max(np.abs(m @ m.conj().T - _I2))
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |UU^dag - I| = {err:.3g})")

    @classmethod
    def from_matrix(cls, m) -> "Unitary2":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u00, self.u01], [self.u10, self.u11]], dtype=complex)

    def __matmul__(self, other: "Unitary2") -> "Unitary2":
        return Unitary2.from_matrix(self.matrix @ other.matrix)

    def dagger(self) -> "Unitary2":
        return Unitary2.from_matrix(self.matrix.conj().T)

    def allclose(self, other: "Unitary2", atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= atol)


def equal_up_to_global_phase(u, v, atol: float = 1e-10) -> bool:
    """Compare two unitaries modulo a global phase factor."""
    u = u.matrix if isinstance(u, Unitary2) else np.asarray(u)
    v = v.matrix if isinstance(v, Unitary2) else np.asarray(v)
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[k]) < 1e-14:
        return False
    phase = u[k] / v[k]
    phase /= abs(phase)
    return bool(np.max(np.abs(u - phase * v)) <= atol)


@dataclass(frozen=True)
class PhaseSchedule:
    """Ordered signal-processor angles phi_0 .. phi_m.

    ``angles`` hold the bare values. When ``end_offset`` is set, +pi/2 is added
    to the first and last angle at evaluation time (Table-style entries written
    as ``x + pi/2``), so the antisymmetry of the stored list stays literal.

    Parameters
    ----------
    angles : sequence of float
        Radians, ``degree + 1`` of them.
    end_offset : bool
        Apply +pi/2 to both end angles when evaluating.
    parity : {"odd", "even"}, optional
        Parity of the realized polynomial. Defaults to the parity of ``degree``;
        a contradicting value is rejected.
    antisymmetric : bool, optional
        Declared antisymmetry. Defaults to whether the bare angles satisfy
        phi_j = -phi_{m-j} (mod 2 pi); declaring it on a list that fails the
        check raises ``ValueError``.
    name : str
        Free-form label.
    meta : dict
        Extra header fields (target, domain, ...) carried through file IO.
    """

    angles: tuple
    end_offset: bool = False
    parity: str | None = None
    antisymmetric: bool | None = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        angles = tuple(float(x) for x in self.angles)
        if not angles:
            raise ValueError("a phase schedule needs at least one angle")
        if not all(math.isfinite(x) for x in angles):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "angles", angles)
        natural = "odd" if self.degree % 2 else "even"
        if self.parity is None:
            object.__setattr__(self, "parity", natural)
        elif self.parity not in ("odd", "even"):
            raise ValueError(f"parity must be 'odd' or 'even', got {self.parity!r}")
        elif self.parity != natural:
            raise ValueError(
                f"declared parity {self.parity!r} contradicts degree {self.degree} "
                f"(a degree-{self.degree} product realizes a {natural} polynomial)"
            )
        actual = antisymmetry_residual(angles) <= ANTISYMMETRY_TOL
        if self.antisymmetric is None:
            object.__setattr__(self, "antisymmetric", actual)
        elif self.antisymmetric and not actual:
            raise ValueError(
                f"schedule declared antisymmetric but residual is {antisymmetry_residual(angles):.3g}"
            )

    @property
    def degree(self) -> int:
        return len(self.angles) - 1

    def __len__(self) -> int:
        return len(self.angles)

    @property
    def effective_angles(self) -> np.ndarray:
        eff = np.array(self.angles, dtype=float)
        if self.end_offset:
            eff[0] += math.pi / 2
            eff[-1] += math.pi / 2
        return eff

    @property
    def end_sum(self) -> float:
        """phi_0 + phi_m including offsets; 0 or pi for embeddable schedules."""
        eff = self.effective_angles
        return float(eff[0] + eff[-1]) if self.degree > 0 else float(eff[0])

    @classmethod
    def zeros(cls, degree: int, **kw) -> "PhaseSchedule":
        return cls(tuple([0.0] * (degree + 1)), **kw)

    @classmethod
    def from_half(cls, half: Sequence[float], degree: int, end_offset: bool = False, **kw) -> "PhaseSchedule":
        """Mirror free half-angles into an antisymmetric schedule.

        ``half`` holds phi_0 .. phi_{ceil(m/2)-1}; for even ``degree`` the middle
        angle is pinned to zero.
        """
        n = degree + 1
        k = n // 2
        half = [float(x) for x in half]
        if len(half) != k:
            raise ValueError(f"degree {degree} has {k} free angles, got {len(half)}")
        mid = [0.0] if n % 2 else []
        angles = half + mid + [-x for x in reversed(half)]
        return cls(tuple(angles), end_offset=end_offset, antisymmetric=True, **kw)

    def free_half(self) -> np.ndarray:
        return np.array(self.angles[: len(self.angles) // 2])


def antisymmetry_residual(angles: Sequence[float]) -> float:
    """max_j |phi_j + phi_{m-j}| with each sum wrapped to (-pi, pi]."""
    a = list(angles)
    return max(abs(_wrap(x + y)) for x, y in zip(a, reversed(a)))


@dataclass(frozen=True)
class Convention:
    """One row of the QSP convention table.

    ``kind`` is one of ``"Wx"``, ``"Wy"``, ``"Wz"``, ``"Reflection"`` or
    ``"WxTwisted"``; ``twist`` is only meaningful for the twisted oracle.
    """

    kind: str
    twist: float = 0.0

    def __post_init__(self):
        if self.kind not in ("Wx", "Wy", "Wz", "Reflection", "WxTwisted"):
            raise ValueError(f"unknown QSP convention {self.kind!r}")

    def basis_change(self) -> tuple[np.ndarray, np.ndarray]:
        """(U_a, U_b) with U_a @ product @ U_b equal to the Wx-convention product."""
        if self.kind == "Wx":
            return _I2, _I2
        if self.kind == "Wy":
            return _S, _SDG
        if self.kind == "Wz":
            return _H, _H
        if self.kind == "Reflection":
            return _SDG, _SDG
        half = self.twist / 2
        return _ez(-half), _ez(half)


WX = Convention("Wx")
WY = Convention("Wy")
WZ = Convention("Wz")
REFLECTION = Convention("Reflection")


def twisted(phi: float) -> Convention:
    return Convention("WxTwisted", float(phi))


def _ez(theta):
    """exp(i*theta*Z); vectorized over theta."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * theta)
    out[..., 1, 1] = np.exp(-1j * theta)
    return out


def _wx(a):
    a = np.asarray(a, dtype=float)
    s = np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 1, 1] = a
    out[..., 0, 1] = 1j * s
    out[..., 1, 0] = 1j * s
    return out


def _signal_ops(a, conv: Convention):
    w = _wx(a)
    if conv.kind == "Wx":
        return w
    if conv.kind == "Wy":
        return _SDG @ w @ _S
    if conv.kind == "Wz":
        return _H @ w @ _H
    if conv.kind == "Reflection":
        return (_SDG @ w @ _S) @ _Z
    d = _ez(conv.twist / 2)
    return d @ w @ d.conj()


def _processors(phi, conv: Convention):
    p = _ez(phi)
    if conv.kind == "Wz":
        return _H @ p @ _H
    if conv.kind == "Reflection":
        return _Z @ p
    return p


def signal_operator(a: float, conv: Convention = WX) -> Unitary2:
    """The convention's signal operator at signal value ``a``."""
    a = float(_check_signal(a))
    return Unitary2.from_matrix(_signal_ops(a, conv))


def signal_processor(phi: float, conv: Convention = WX) -> Unitary2:
    return Unitary2.from_matrix(_processors(float(phi), conv))


def _product(procs: np.ndarray, sig: np.ndarray) -> np.ndarray:
    """S(phi_m) W ... W S(phi_0) for a batch of signal operators ``sig``."""
    u = np.broadcast_to(procs[0], sig.shape).copy()
    for p in procs[1:]:
        u = p @ (sig @ u)
    return u


def qsp_matrices(phases: PhaseSchedule, a, conv: Convention = WX, normalize: bool = False) -> np.ndarray:
    """Raw QSP products for an array of signals, shape ``a.shape + (2, 2)``.

    With ``normalize=True`` the convention's basis change is applied so that
    every convention returns the Wx-form matrix.
    """
    arr = _check_signal(a)
    sig = _signal_ops(arr.reshape(-1), conv)
    procs = _processors(phases.effective_angles, conv)
    u = _product(procs, sig)
    if normalize:
        ua, ub = conv.basis_change()
        u = ua @ u @ ub
    return u.reshape(arr.shape + (2, 2))


def qsp_evaluate(phases: PhaseSchedule, a: float, conv: Convention = WX) -> Unitary2:
    """U_phi = S(phi_m) W S(phi_{m-1}) ... W S(phi_0) at a single signal value."""
    return Unitary2.from_matrix(qsp_matrices(phases, float(a), conv))


def qsp_evaluate_with_operator(phases: PhaseSchedule, signal) -> np.ndarray:
    """QSP product with an arbitrary 2x2 (or batched) signal operator.

    Used to evaluate nested QSP: feed the output of an inner schedule as the
    signal operator of an outer one.
    """
    sig = signal.matrix if isinstance(signal, Unitary2) else np.asarray(signal, dtype=complex)
    return _product(_ez(phases.effective_angles), sig)


def qsp_response(phases: PhaseSchedule, a, conv: Convention = WX):
    """Re<0|U|0> after the convention's basis change: the realized P(a).

    Accepts a scalar or an array of signal values.
    """
    u = qsp_matrices(phases, a, conv, normalize=True)
    out = u[..., 0, 0].real
    return float(out) if np.ndim(a) == 0 else out


def merge_phases(outer: PhaseSchedule, inner: PhaseSchedule) -> PhaseSchedule:
    """Phase nesting: the schedule realizing outer(inner(a)).

    Follows

        (i_0 + o_0, i[1:m_i-1], o_1, i[1:m_i-1], o_2, ..., i[1:m_i-1], i_m + o_m)

    When the inner schedule's effective end angles sum to pi (end offsets),
    every junction picks up S(pi) = -I; that factor is folded into the
    interior outer angles, so the merged product equals the nested product
    elementwise, not just up to sign.
    """
    for label, s in (("outer", outer), ("inner", inner)):
        if not s.antisymmetric:
            raise ValueError(f"{label} schedule is not antisymmetric and cannot be nested")
    if inner.degree == 0:
        raise ValueError("inner schedule must have degree >= 1")
    i = inner.angles
    o = outer.angles
    junction = _wrap(inner.end_sum)
    shift = 0.0 if abs(junction) < 1e-9 else math.pi
    interior = list(i[1:-1])
    merged = [i[0] + o[0]]
    for k in range(1, outer.degree + 1):
        merged.extend(interior)
        if k < outer.degree:
            merged.append(_wrap(o[k] + shift) if shift else o[k])
    merged.append(i[-1] + o[-1])
    if outer.degree == 0:
        merged = list(i)
        merged[0] += o[0]
        merged[-1] += o[0]
    # two +pi/2 offsets on each end multiply to (-1)^2; only an odd count survives
    end_offset = inner.end_offset != outer.end_offset
    name = f"{outer.name or 'outer'}o{inner.name or 'inner'}"
    return PhaseSchedule(tuple(merged), end_offset=end_offset, antisymmetric=True, name=name)


@dataclass(frozen=True)
class EmbeddabilityReport:
    antisymmetry_residual: float
    p_plus_one: float
    p_minus_one: float
    p_zero: float
    checks: dict

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def lines(self) -> list[str]:
        return [f"{name}: {'pass' if ok else 'FAIL'} (residual {res:.3g})" for name, (ok, res) in self.checks.items()]


def validate_embeddable(phases: PhaseSchedule, tol: float = 1e-9) -> EmbeddabilityReport:
    """Check antisymmetry and the boundary values forced by it.

    For an antisymmetric product the end values are fixed: P(1) = cos(phi_0 +
    phi_m) = +-1 (the sign flips with end offsets), P(-1) = (-1)^m P(1), and
    P(0) is 0 for odd degree and +-1 for even degree.
    """
    res = antisymmetry_residual(phases.angles)
    p1, pm1, p0 = (qsp_response(phases, x) for x in (1.0, -1.0, 0.0))
    expected_p1 = math.cos(phases.end_sum)
    checks = {
        "antisymmetry": (res <= ANTISYMMETRY_TOL, res),
        "P(+1)": (abs(abs(p1) - 1) <= tol and abs(p1 - expected_p1) <= tol, abs(p1 - expected_p1)),
        "P(-1)": (abs(pm1 - (-1) ** phases.degree * p1) <= tol, abs(pm1 - (-1) ** phases.degree * p1)),
    }
    if phases.degree % 2:
        checks["P(0)"] = (abs(p0) <= tol, abs(p0))
    else:
        checks["P(0)"] = (abs(abs(p0) - 1) <= tol, abs(abs(p0) - 1))
    return EmbeddabilityReport(res, p1, pm1, p0, checks)


def phase_from_amplitude(p):
    """Principal eigenphase in turns, acos(P) / (2 pi), in [0, 1/2].

    The QPE reader sees this value and its complement 1 - value.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(np.abs(arr) > 1 + DOMAIN_SLACK):
        raise DomainError("amplitude must lie in [-1, 1]")
    out = np.arccos(np.clip(arr, -1.0, 1.0)) / (2 * math.pi)
    return float(out) if out.ndim == 0 else out


def grover_square_check(a: float, phi: float, atol: float = 1e-10) -> bool:
    """Verify A S_0 A^dag S_psi = U^2 for U = W_XY(phi)(a) and |psi> = |0>.

    Reflections are S_psi = U_psi S_0 U_psi^dag with S_0 = I - 2|0><0|, and
    A = U U_psi.
    """
    u = signal_operator(a, twisted(phi)).matrix
    psi = np.array([1.0, 0.0], dtype=complex)
    s0 = _I2 - 2 * np.outer([1, 0], [1, 0])
    psi_perp = np.array([-psi[1].conjugate(), psi[0].conjugate()])
    u_psi = np.column_stack([psi, psi_perp])
    s_psi = u_psi @ s0 @ u_psi.conj().T
    a_op = u @ u_psi
    lhs = a_op @ s0 @ a_op.conj().T @ s_psi
    return bool(np.max(np.abs(lhs - u @ u)) <= atol)
