"""Dense statevector simulation over named registers.

Qubit 0 is the most significant bit of the basis index, and registers are
laid out as contiguous, MSB-first index ranges in declaration order (the
default order is N, F, A, B). A register's value is the integer spelled by
its qubits read left to right.

Gates act in place on an ``ndarray`` of shape ``(2,) * n`` (plus an optional
trailing batch axis) through basic-indexing views, so a gate on ``k`` targets
costs one pass over the touched amplitudes. Simulation is exact; every
readout function returns probabilities, never samples.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "RegisterLayout",
    "Gate",
    "Circuit",
    "Statevector",
    "apply",
    "circuit_unitary",
    "qft_matrix",
    "qpe_circuit",
    "qpe_read",
    "qpe_kernel",
    "hadamard_test",
    "ancilla_block",
    "distribution_csv",
]

MAX_QUBITS = 24
NORM_TOL = 1e-10

_ONE_QUBIT = {"X", "Y", "Z", "H", "S", "SDG", "RY", "RZ", "P"}
_MULTI = {"QFT", "IQFT", "DIAG", "PERM"}
KINDS = _ONE_QUBIT | _MULTI


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered, contiguous registers.

    Parameters
    ----------
    registers : sequence of (name, size)
        Zero-size registers are allowed and own no qubits.

    Examples
    --------
    >>> lay = RegisterLayout.of(N=3, A=1)
    >>> lay["A"]
    (3,)
    """

    registers: tuple

    def __post_init__(self):
        regs = tuple((str(n), int(s)) for n, s in self.registers)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        if any(s < 0 for _, s in regs):
            raise ValueError("register sizes must be non-negative")
        object.__setattr__(self, "registers", regs)
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"layout needs {self.n_qubits} qubits; the dense simulator supports {MAX_QUBITS}")

    @classmethod
    def of(cls, **sizes) -> "RegisterLayout":
        return cls(tuple(sizes.items()))

    @property
    def n_qubits(self) -> int:
        return sum(s for _, s in self.registers)

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.registers)

    def __contains__(self, name) -> bool:
        return name in self.names

    def __getitem__(self, name: str) -> tuple:
        start = 0
        for n, s in self.registers:
            if n == name:
                return tuple(range(start, start + s))
            start += s
        raise KeyError(f"no register {name!r} in layout {self.names}")

    def size(self, name: str) -> int:
        return len(self[name])

    def index(self, **values) -> int:
        """Basis index of the product state with the given register values."""
        out = 0
        for n, s in self.registers:
            v = int(values.pop(n, 0))
            if not 0 <= v < 2**s or (s == 0 and v):
                raise ValueError(f"value {v} does not fit register {n} of size {s}")
            out = (out << s) | v
        if values:
            raise KeyError(f"unknown registers {sorted(values)}")
        return out

    def decode(self, index: int) -> dict:
        out = {}
        shift = self.n_qubits
        for n, s in self.registers:
            shift -= s
            out[n] = (index >> shift) & ((1 << s) - 1)
        return out

    def label(self, index: int) -> str:
        """e.g. ``N=0101|A=0`` (bit strings, zero-size registers omitted)."""
        vals = self.decode(index)
        return "|".join(f"{n}={vals[n]:0{s}b}" for n, s in self.registers if s)


def _qft_matrix(k: int, inverse: bool = False) -> np.ndarray:
    m = 2**k
    j = np.arange(m)
    sign = -1 if inverse else 1
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / m) / math.sqrt(m)


def qft_matrix(k: int) -> np.ndarray:
    """Forward QFT on k qubits: |j> -> 2^{-k/2} sum_l e^{+2 pi i j l / 2^k} |l>."""
    return _qft_matrix(k)


@dataclass(frozen=True, eq=False)
class Gate:
    """One operation.

    ``kind`` is a single-qubit kind (X, Y, Z, H, S, SDG, RY, RZ, P) acting on
    ``targets[0]``, or a register kind (QFT, IQFT, DIAG, PERM) acting on all
    ``targets`` read MSB-first. ``controls`` fire on ``ctrl_state`` (default
    all ones). DIAG carries ``data`` = 2^k complex phases, PERM carries
    ``data`` = integer image of each basis value. ``tag`` marks gates that
    resource audits should keep out of the headline columns.
    """

    kind: str
    targets: tuple
    controls: tuple = ()
    theta: float = 0.0
    ctrl_state: tuple | None = None
    data: np.ndarray | None = field(default=None, repr=False)
    tag: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if not self.targets:
            raise ValueError(f"{self.kind} needs at least one target")
        if self.kind in _ONE_QUBIT and len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on exactly one target")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind}: qubit indices must be distinct, got {qubits}")
        cs = tuple(int(b) for b in self.ctrl_state) if self.ctrl_state is not None else (1,) * len(self.controls)
        if len(cs) != len(self.controls) or any(b not in (0, 1) for b in cs):
            raise ValueError("ctrl_state must give one 0/1 value per control")
        object.__setattr__(self, "ctrl_state", cs)
        if self.kind in ("DIAG", "PERM"):
            k = len(self.targets)
            data = np.asarray(self.data)
            if data.shape != (2**k,):
                raise ValueError(f"{self.kind} on {k} qubits needs {2**k} entries")
            if self.kind == "DIAG":
                data = data.astype(complex)
                if np.max(np.abs(np.abs(data) - 1)) > 1e-12:
                    raise ValueError("DIAG entries must have unit modulus")
            else:
                data = data.astype(np.int64)
                if sorted(data.tolist()) != list(range(2**k)):
                    raise ValueError("PERM data must be a permutation")
            data.setflags(write=False)
            object.__setattr__(self, "data", data)

    @property
    def qubits(self) -> tuple:
        return self.controls + self.targets

    def matrix(self) -> np.ndarray:
        """2x2 matrix of a single-qubit kind (without controls)."""
        t = self.theta
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind == "Y":
            return np.array([[0, -1j], [1j, 0]])
        if self.kind == "Z":
            return np.diag([1, -1]).astype(complex)
        if self.kind == "H":
            return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        if self.kind == "S":
            return np.diag([1, 1j])
        if self.kind == "SDG":
            return np.diag([1, -1j])
        if self.kind == "RY":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind == "RZ":
            return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        if self.kind == "P":
            return np.diag([1, np.exp(1j * t)])
        raise ValueError(f"{self.kind} is not a single-qubit kind")

    def inverse(self) -> "Gate":
        inv = {"S": "SDG", "SDG": "S", "QFT": "IQFT", "IQFT": "QFT"}
        kind = inv.get(self.kind, self.kind)
        theta = -self.theta if self.kind in ("RY", "RZ", "P") else self.theta
        data = self.data
        if self.kind == "DIAG":
            data = data.conj()
        elif self.kind == "PERM":
            data = np.argsort(self.data)
        return Gate(kind, self.targets, self.controls, theta, self.ctrl_state, data, self.tag)

    def audit_name(self) -> str:
        """Resource label: R_Y, CR_Y, CZ, C2X, QFT, ..."""
        base = {"RY": "R_Y", "RZ": "R_Z", "SDG": "S_dg"}.get(self.kind, self.kind)
        nc = len(self.controls)
        if nc == 0:
            return base
        return ("C" if nc == 1 else f"C{nc}") + base

    def describe(self) -> str:
        ang = f"{self.theta:.17g}" if self.kind in ("RY", "RZ", "P") else "-"
        ctl = ",".join(f"{q}" if s else f"!{q}" for q, s in zip(self.controls, self.ctrl_state)) or "-"
        tgt = ",".join(str(q) for q in self.targets)
        extra = f" {self.tag}" if self.tag else ""
        return f"{self.kind} {ang} {ctl} {tgt}{extra}"


@dataclass(frozen=True, eq=False)
class Circuit:
    """Immutable gate sequence over ``n_qubits`` qubits."""

    n_qubits: int
    gates: tuple = ()
    layout: RegisterLayout | None = None

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.layout is not None and self.layout.n_qubits != self.n_qubits:
            raise ValueError("layout size does not match n_qubits")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise TypeError(f"expected Gate, got {type(g).__name__}")
            bad = [q for q in g.qubits if not 0 <= q < self.n_qubits]
            if bad:
                raise IndexError(f"{g.kind} uses qubits {bad} outside [0, {self.n_qubits})")
        object.__setattr__(self, "gates", gates)

    @classmethod
    def on(cls, layout: RegisterLayout, gates: Iterable[Gate] = ()) -> "Circuit":
        return cls(layout.n_qubits, tuple(gates), layout)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates, self.layout or other.layout)

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.n_qubits, self.gates + tuple(gates), self.layout)

    def repeat(self, times: int) -> "Circuit":
        return Circuit(self.n_qubits, self.gates * times, self.layout)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)), self.layout)

    def netlist(self) -> str:
        """One gate per line: kind, angle, controls (``!q`` = on |0>), targets."""
        return "".join(g.describe() + "\n" for g in self.gates)


def _apply_gate(psi: np.ndarray, g: Gate, n: int) -> None:
    idx: list = [slice(None)] * psi.ndim
    for c, s in zip(g.controls, g.ctrl_state):
        idx[c] = s
    sub = psi[tuple(idx)] if g.controls else psi
    shift = sorted(g.controls)

    def axis(q):
        return q - sum(1 for c in shift if c < q)

    if g.kind in _ONE_QUBIT:
        ax = axis(g.targets[0])
        i0 = [slice(None)] * sub.ndim
        i1 = list(i0)
        i0[ax], i1[ax] = 0, 1
        i0, i1 = tuple(i0), tuple(i1)
        m = g.matrix()
        if m[0, 1] == 0 and m[1, 0] == 0:
            if m[0, 0] != 1:
                sub[i0] *= m[0, 0]
            sub[i1] *= m[1, 1]
            return
        a = sub[i0].copy()
        b = sub[i1]
        sub[i0] = m[0, 0] * a + m[0, 1] * b
        sub[i1] = m[1, 0] * a + m[1, 1] * b
        return
    k = len(g.targets)
    axes = [axis(q) for q in g.targets]
    view = np.moveaxis(sub, axes, list(range(k)))
    flat = view.reshape((2**k, -1))
    if g.kind == "QFT":
        out = np.fft.ifft(flat, axis=0, norm="ortho")
    elif g.kind == "IQFT":
        out = np.fft.fft(flat, axis=0, norm="ortho")
    elif g.kind == "DIAG":
        out = flat * g.data[:, None]
    else:
        out = np.empty_like(flat)
        out[g.data] = flat
    view[...] = out.reshape(view.shape)


class Statevector:
    """Dense amplitude vector of ``n_qubits`` qubits.

    Parameters
    ----------
    amplitudes : array_like of complex, length 2^n
    layout : RegisterLayout, optional
        Register names used for labels and marginals.
    """

    def __init__(self, amplitudes, layout: RegisterLayout | None = None):
        amp = np.array(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amp.size))) if amp.size else -1
        if n < 1 or 2**n != amp.size:
            raise ValueError(f"amplitude count must be a power of two >= 2, got {amp.size}")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        if layout is not None and layout.n_qubits != n:
            raise ValueError("layout size does not match the state")
        self.n_qubits = n
        self.amplitudes = amp
        self.layout = layout

    @classmethod
    def basis(cls, layout: RegisterLayout, **values) -> "Statevector":
        amp = np.zeros(2**layout.n_qubits, dtype=complex)
        amp[layout.index(**values)] = 1
        return cls(amp, layout)

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        amp = np.zeros(2**n_qubits, dtype=complex)
        amp[0] = 1
        return cls(amp)

    @classmethod
    def from_register_amplitudes(cls, layout: RegisterLayout, register: str, amps, **fixed) -> "Statevector":
        """Superpose values of one register (others fixed) with given amplitudes."""
        amps = np.asarray(amps, dtype=complex)
        size = layout.size(register)
        if amps.shape != (2**size,):
            raise ValueError(f"register {register} needs {2**size} amplitudes")
        out = np.zeros(2**layout.n_qubits, dtype=complex)
        for v, c in enumerate(amps):
            if c != 0:
                out[layout.index(**{**fixed, register: v})] = c
        return cls(out, layout)

    @classmethod
    def uniform(cls, layout: RegisterLayout, register: str, **fixed) -> "Statevector":
        size = layout.size(register)
        return cls.from_register_amplitudes(layout, register, np.full(2**size, 2 ** (-size / 2)), **fixed)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.layout)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def marginal(self, qubits: Sequence[int]) -> np.ndarray:
        """Distribution over the integer spelled by ``qubits`` (MSB first)."""
        p = self.probabilities().reshape((2,) * self.n_qubits)
        qubits = list(qubits)
        rest = tuple(q for q in range(self.n_qubits) if q not in qubits)
        m = p.sum(axis=rest) if rest else p
        return _reorder(m, qubits).reshape(-1)

    def register_marginal(self, name: str) -> np.ndarray:
        return self.marginal(self._layout()[name])

    def conditional(self, given: str, read: str) -> np.ndarray:
        """Rows: values of register ``given``; columns: distribution of ``read``.

        Rows with zero weight stay zero.
        """
        lay = self._layout()
        g, r = list(lay[given]), list(lay[read])
        joint = self.marginal(g + r).reshape(2 ** len(g), 2 ** len(r))
        w = joint.sum(axis=1, keepdims=True)
        return np.divide(joint, w, out=np.zeros_like(joint), where=w > 0)

    def _layout(self) -> RegisterLayout:
        if self.layout is None:
            raise ValueError("state has no register layout")
        return self.layout

    def to_csv(self, tol: float = 0.0) -> str:
        """basis label columns per register, then real and imag parts."""
        lay = self.layout or RegisterLayout.of(q=self.n_qubits)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = [n for n, s in lay.registers if s]
        w.writerow(names + ["real", "imag"])
        for i, c in enumerate(self.amplitudes):
            if abs(c) > tol:
                vals = lay.decode(i)
                w.writerow([format(vals[n], f"0{lay.size(n)}b") for n in names] + [f"{c.real:.12e}", f"{c.imag:.12e}"])
        return buf.getvalue()


def _reorder(arr: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Reduced axes come out in ascending qubit order; permute to ``qubits`` order."""
    if len(qubits) < 2:
        return arr
    return np.transpose(arr, np.argsort(np.argsort(qubits)))


def apply(state: Statevector, circuit: Circuit, check_every: bool = False) -> Statevector:
    """Simulate ``circuit`` on a copy of ``state``.

    The norm is checked at the end, or after every gate with ``check_every``.
    """
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, circuit {circuit.n_qubits}")
    psi = state.amplitudes.copy().reshape((2,) * state.n_qubits)
    for g in circuit.gates:
        _apply_gate(psi, g, circuit.n_qubits)
        if check_every:
            _norm_or_raise(psi, g.kind)
    _norm_or_raise(psi, "circuit")
    return Statevector(psi.reshape(-1), state.layout or circuit.layout)


def _norm_or_raise(psi: np.ndarray, where: str) -> None:
    total = float(np.vdot(psi, psi).real)
    if abs(total - 1) > NORM_TOL:
        raise FloatingPointError(f"norm drift after {where}: |psi|^2 = {total}")


def apply_batch(columns: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Apply to each column of a (2^n, B) array; returns a new array."""
    n = circuit.n_qubits
    cols = np.array(columns, dtype=complex)
    if cols.shape[0] != 2**n:
        raise ValueError("row count must be 2^n")
    psi = cols.reshape((2,) * n + (cols.shape[1],))
    for g in circuit.gates:
        _apply_gate(psi, g, n)
    return psi.reshape(2**n, -1)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the circuit (intended for n <= 12)."""
    return apply_batch(np.eye(2**circuit.n_qubits, dtype=complex), circuit)


def qpe_circuit(
    n_qubits: int,
    f_qubits: Sequence[int],
    controlled_power: Callable[[int, int], Circuit],
    layout: RegisterLayout | None = None,
) -> Circuit:
    """QFT on F, controlled U^(2^k) from qubit F[-1-k], inverse QFT on F.

    ``controlled_power(k, control)`` returns the circuit of U^(2^k) controlled
    by ``control``. Starting F at |0> the forward QFT equals a layer of
    Hadamards; starting at |b> the readout is shifted by b, which is how the
    QFT adder reuses this routine.
    """
    f_qubits = tuple(f_qubits)
    if not f_qubits:
        raise ValueError("F register must have at least one qubit")
    gates = [Gate("QFT", f_qubits)]
    nf = len(f_qubits)
    for k in range(nf):
        gates.extend(controlled_power(k, f_qubits[nf - 1 - k]).gates)
    gates.append(Gate("IQFT", f_qubits))
    return Circuit(n_qubits, tuple(gates), layout)


def qpe_read(state: Statevector, circuit: Circuit, f_qubits: Sequence[int]) -> np.ndarray:
    """Exact outcome distribution of the F register after ``circuit``."""
    out = apply(state, circuit)
    return out.marginal(f_qubits)


def qpe_kernel(phase, n_bits: int) -> np.ndarray:
    """Closed-form QPE outcome distribution for eigenphase(s) in turns.

    ``phase`` may be a scalar or an array of equally weighted phases.
    """
    m = 2**n_bits
    phases = np.atleast_1d(np.asarray(phase, dtype=float))
    j = np.arange(m)
    k = np.arange(m)
    out = np.zeros(m)
    for ph in phases:
        d = ph - j / m
        amp = np.exp(2j * np.pi * np.outer(d, k)).sum(axis=1) / m
        out += np.abs(amp) ** 2
    return out / len(phases)


def hadamard_test(circuit: Circuit, state: Statevector, register: Sequence[int]) -> np.ndarray:
    """Re <psi| (|a><a| x I) U |psi> for every value a of ``register``.

    The interference readout is computed from the two statevectors directly,
    so for a product input |a>|0>_A this is Re <a,0|U|a,0> weighted by the
    input amplitude of a.
    """
    out = apply(state, circuit)
    prod = (np.conj(state.amplitudes) * out.amplitudes).reshape((2,) * state.n_qubits)
    register = list(register)
    rest = tuple(q for q in range(state.n_qubits) if q not in register)
    vals = prod.sum(axis=rest) if rest else prod
    return _reorder(vals, register).reshape(-1).real


def ancilla_block(circuit: Circuit, layout: RegisterLayout, ancilla: str, **fixed) -> np.ndarray:
    """2x2 action on a one-qubit register with other registers fixed.

    Checks that the circuit leaves the fixed registers unchanged on those
    inputs and returns the matrix <fixed, i|U|fixed, j>.
    """
    if layout.size(ancilla) != 1:
        raise ValueError("ancilla register must have one qubit")
    cols = np.zeros((2**layout.n_qubits, 2), dtype=complex)
    rows = [layout.index(**fixed, **{ancilla: b}) for b in (0, 1)]
    cols[rows[0], 0] = 1
    cols[rows[1], 1] = 1
    out = apply_batch(cols, circuit)
    block = out[rows, :]
    leak = np.max(np.abs(np.sum(np.abs(block) ** 2, axis=0) - 1))
    if leak > 1e-9:
        raise ValueError(f"circuit does not preserve the fixed registers (leak {leak:.3g})")
    return block


def distribution_csv(dist: np.ndarray, n_bits: int, header: str = "outcome") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([header, "probability"])
    for i, p in enumerate(dist):
        w.writerow([format(i, f"0{n_bits}b"), f"{p:.12e}"])
    return buf.getvalue()
