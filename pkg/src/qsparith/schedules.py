"""Line-oriented phase-schedule files and the bundled golden schedules.

File layout::

    name=p2a_2x3
    degree=5
    parity=odd
    end_offset=1
    antisymmetric=1
    target=p2a
    domain=-1,1
    1.22067713447342907e+00
    ...

Header lines are ``key=value``; every other non-blank, non-``#`` line is one
angle in radians. ``degree`` is required and must match the angle count.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .functions import TargetFunction, get_target
from .qsp import PhaseSchedule

__all__ = ["ScheduleFormatError", "parse_schedule", "format_schedule", "read_schedule", "write_schedule",
           "list_bundled", "load_bundled", "target_for_schedule"]

_KNOWN = ("name", "degree", "parity", "end_offset", "antisymmetric")


class ScheduleFormatError(ValueError):
    """Malformed phase-schedule text."""


def _flag(value: str, key: str) -> bool:
    if value not in ("0", "1"):
        raise ScheduleFormatError(f"{key} must be 0 or 1, got {value!r}")
    return value == "1"


def parse_schedule(text: str) -> PhaseSchedule:
    header: dict[str, str] = {}
    angles: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            if angles:
                raise ScheduleFormatError(f"line {lineno}: header after angle data")
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
            continue
        try:
            angles.append(float(line))
        except ValueError:
            raise ScheduleFormatError(f"line {lineno}: not an angle: {line!r}") from None
    if "degree" not in header:
        raise ScheduleFormatError("missing degree= header")
    try:
        degree = int(header["degree"])
    except ValueError:
        raise ScheduleFormatError(f"degree must be an integer, got {header['degree']!r}") from None
    if len(angles) != degree + 1:
        raise ScheduleFormatError(f"degree={degree} needs {degree + 1} angles, found {len(angles)}")
    meta = {k: v for k, v in header.items() if k not in _KNOWN}
    try:
        return PhaseSchedule(
            tuple(angles),
            end_offset=_flag(header.get("end_offset", "0"), "end_offset"),
            parity=header.get("parity"),
            antisymmetric=_flag(header["antisymmetric"], "antisymmetric") if "antisymmetric" in header else None,
            name=header.get("name", ""),
            meta=meta,
        )
    except ScheduleFormatError:
        raise
    except ValueError as exc:
        raise ScheduleFormatError(str(exc)) from None


def format_schedule(phases: PhaseSchedule, **extra) -> str:
    lines = []
    if phases.name:
        lines.append(f"name={phases.name}")
    lines += [
        f"degree={phases.degree}",
        f"parity={phases.parity}",
        f"end_offset={int(phases.end_offset)}",
        f"antisymmetric={int(bool(phases.antisymmetric))}",
    ]
    meta = {**phases.meta, **extra}
    lines += [f"{k}={v}" for k, v in meta.items()]
    lines += [f"{a:.17e}" for a in phases.angles]
    return "\n".join(lines) + "\n"


def read_schedule(path: str | os.PathLike) -> PhaseSchedule:
    return parse_schedule(Path(path).read_text())


def write_schedule(phases: PhaseSchedule, path: str | os.PathLike, **extra) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(format_schedule(phases, **extra))
    return path


def _data_dir():
    return resources.files("qsparith") / "data"


def list_bundled() -> list[str]:
    """Names of the bundled golden schedules."""
    return sorted(p.name[:-4] for p in _data_dir().iterdir() if p.name.endswith(".txt"))


def load_bundled(name: str) -> PhaseSchedule:
    """Load a bundled schedule, e.g. ``load_bundled("p2a_2x10")``."""
    entry = _data_dir() / f"{name}.txt"
    if not entry.is_file():
        raise KeyError(f"no bundled schedule {name!r}; available: {', '.join(list_bundled())}")
    return parse_schedule(entry.read_text())


def target_for_schedule(phases: PhaseSchedule) -> TargetFunction:
    """TargetFunction described by a schedule's ``target``/``domain``/``band`` headers."""
    name = phases.meta.get("target")
    if not name:
        raise ValueError(f"schedule {phases.name or '<unnamed>'} has no target= header")
    t = get_target(name)
    if "domain" in phases.meta:
        lo, hi = (float(v) for v in phases.meta["domain"].split(","))
        t = t.with_domain(lo, hi)
    if "band" in phases.meta:
        bands = []
        for item in phases.meta["band"].split(","):
            c, h = item.split(":")
            bands.append((float(c), float(h)))
        t = t.with_bands(bands)
    return t
