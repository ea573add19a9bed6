"""Closed-form gate/qubit/depth counts and an auditor for emitted circuits.

Depth is the ASAP layer count on a fully connected device with every gate,
one- or two-qubit, one layer deep. QFT blocks are excluded from depth (they
act as a barrier on their wires but add no layers) and counted in their own
column.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable

from .simulator import Circuit

__all__ = ["COLUMNS", "KINDS", "ResourceCount", "estimate", "audit", "table_csv"]

COLUMNS = ("QFT_F", "R_Z", "R_Y", "CZ", "CR_Y")
KINDS = ("Wy", "QSO", "CWy", "CQSP", "QSE")
_AUDIT_MAP = {"R_Z": "R_Z", "R_Y": "R_Y", "CZ": "CZ", "CR_Y": "CR_Y", "QFT": "QFT_F", "IQFT": "QFT_F"}


@dataclass(frozen=True)
class ResourceCount:
    """Qubits, depth and per-kind gate counts.

    ``extras`` holds tagged helper gates kept out of the headline columns;
    ``unknown`` holds gate kinds the table has no column for.
    """

    qubits: int
    depth: int
    counts: dict
    extras: dict = field(default_factory=dict)
    unknown: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = {c: int(self.counts.get(c, 0)) for c in COLUMNS}
        bad = set(self.counts) - set(COLUMNS)
        if bad:
            raise ValueError(f"unknown count columns {sorted(bad)}")
        if self.qubits < 0 or self.depth < 0 or any(v < 0 for v in counts.values()):
            raise ValueError("resource counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    def headline(self) -> tuple:
        return (self.qubits, self.depth) + tuple(self.counts[c] for c in COLUMNS)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResourceCount):
            return NotImplemented
        return self.headline() == other.headline()

    def __hash__(self):
        return hash(self.headline())


def _check(**params):
    for k, v in params.items():
        if not isinstance(v, int) or v < 1:
            raise ValueError(f"{k} must be a positive integer, got {v!r}")


def estimate(kind: str, N: int, F: int = 1, degree: int = 1, construction: str = "sequential") -> ResourceCount:
    """Closed-form counts for one circuit family.

    Parameters
    ----------
    kind : {"Wy", "QSO", "CWy", "CQSP", "QSE"}
    construction : {"sequential", "printed"}
        Only affects QSE. ``"printed"`` returns the tabulated 2^(F+1)
        prefactor of controlled-QSP blocks; ``"sequential"`` counts the
        2^F - 1 copies that phase estimation with repeated controlled powers
        actually emits.
    """
    _check(N=N, F=F, degree=degree)
    m = degree
    cqsp_depth = m * (2 * (N + 2) + 1) + 1
    if kind == "Wy":
        return ResourceCount(N + 1, N + 1, {"R_Y": 1, "CR_Y": N})
    if kind == "QSO":
        return ResourceCount(N + 1, m * (N + 2) + 1, {"R_Z": m + 1, "R_Y": m, "CR_Y": m * N})
    if kind == "CWy":
        return ResourceCount(N + 2, 2 * (N + 2), {"R_Y": 2, "CZ": 2, "CR_Y": 2 * N})
    if kind == "CQSP":
        return ResourceCount(N + 2, cqsp_depth, {"R_Z": m + 1, "R_Y": 2 * m, "CZ": 2 * m, "CR_Y": 2 * m * N})
    if kind == "QSE":
        if construction == "printed":
            return ResourceCount(
                F + N + 1, 2 ** (F + 1) * cqsp_depth,
                {"QFT_F": 2, "R_Z": 2 ** (F + 1) * (m + 1), "R_Y": 2 ** (F + 2) * m,
                 "CZ": 2 ** (F + 2) * m, "CR_Y": 2 ** (F + 2) * m * N},
            )
        if construction != "sequential":
            raise ValueError(f"construction must be 'sequential' or 'printed', got {construction!r}")
        c = 2**F - 1
        return ResourceCount(
            F + N + 1, c * cqsp_depth,
            {"QFT_F": 2, "R_Z": c * (m + 1), "R_Y": 2 * c * m, "CZ": 2 * c * m, "CR_Y": 2 * c * m * N},
        )
    raise ValueError(f"unknown circuit kind {kind!r}; expected one of {KINDS}")


def audit(circuit: Circuit) -> ResourceCount:
    """Count the gates a builder emitted and compute their ASAP depth."""
    counts = {c: 0 for c in COLUMNS}
    extras: dict = {}
    unknown: dict = {}
    level = [0] * circuit.n_qubits
    for g in circuit.gates:
        name = g.audit_name()
        if g.tag:
            extras[f"{name}[{g.tag}]"] = extras.get(f"{name}[{g.tag}]", 0) + 1
        elif name in _AUDIT_MAP:
            counts[_AUDIT_MAP[name]] += 1
        else:
            unknown[name] = unknown.get(name, 0) + 1
        wires = g.qubits
        top = max(level[q] for q in wires)
        new = top if g.kind in ("QFT", "IQFT") else top + 1
        for q in wires:
            level[q] = new
    return ResourceCount(circuit.n_qubits, max(level, default=0), counts, extras, unknown)


def table_csv(rows: Iterable[tuple]) -> str:
    """CSV of (kind, N, F, degree, construction) sweeps in table layout.

    Each input row yields one line with qubits, depth and the five columns.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "N", "F", "degree", "construction", "qubits", "depth", *COLUMNS])
    for kind, N, F, m, cons in rows:
        r = estimate(kind, N, F, m, cons)
        w.writerow([kind, N, F, m, cons, *r.headline()])
    return buf.getvalue()
