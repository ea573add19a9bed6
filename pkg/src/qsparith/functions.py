"""Scalar target functions and the subspace window of the kickback encoding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .qsp import DOMAIN_SLACK, DomainError

__all__ = [
    "p2a",
    "a2p",
    "sgn",
    "step",
    "example_f",
    "original_f",
    "chebyshev",
    "SubspaceWindow",
    "STANDARD_WINDOWS",
    "window_map",
    "kickback_angle",
    "kickback_signal",
    "TargetFunction",
    "get_target",
    "TARGETS",
]


def _unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1 + DOMAIN_SLACK):
        raise DomainError(f"{name} must lie in [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def p2a(x):
    """Phase-to-amplitude map, (2/pi) acos(x) - 1.

    Linearizes a cosine: p2a(cos t) = 2t/pi - 1 for t in [0, pi].
    """
    arr = _unit(x)
    return _out(-(2 / math.pi) * np.arcsin(arr), x)


def a2p(x):
    """Amplitude-to-phase map, sin(pi x / 2).

    Composes with :func:`p2a` to minus the identity in both orders.
    """
    arr = _unit(x)
    return _out(np.sin(math.pi * arr / 2), x)


def sgn(x):
    """Sign function with sgn(0) = +1."""
    arr = np.asarray(x, dtype=float)
    return _out(np.where(arr < 0, -1.0, 1.0), x)


def step(x, delta_s: float):
    """-1 inside the open band |x| < delta_s, +1 elsewhere."""
    if not delta_s > 0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    arr = np.asarray(x, dtype=float)
    return _out(np.where(np.abs(arr) < delta_s, -1.0, 1.0), x)


def example_f(x):
    """Worked example prepared for a doubled interval: sin(30x) e^{-(1+x)}."""
    arr = _unit(x)
    return _out(np.sin(30 * arr) * np.exp(-(1 + arr)), x)


def original_f(x):
    """The example before rescaling, -cos(15x) e^{-x}; kept for plotting."""
    arr = np.asarray(x, dtype=float)
    return _out(-np.cos(15 * arr) * np.exp(-arr), x)


def chebyshev(n: int):
    """T_n(x) = cos(n acos x) as a callable."""
    if n < 0:
        raise ValueError("Chebyshev order must be non-negative")

    def t(x):
        arr = _unit(x)
        return _out(np.cos(n * np.arccos(arr)), x)

    t.__name__ = f"T{n}"
    return t


@dataclass(frozen=True)
class SubspaceWindow:
    """Shift/scale pair selecting the working signal interval.

    Parameters
    ----------
    delta : float
        Shift; enters the kickback as the constant rotation 2 pi delta / alpha.
    alpha : float
        Scaling coefficient, >= 1; the register spans 2 pi / alpha of rotation.
    """

    delta: float = 0.0
    alpha: float = 2.0

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    @property
    def shift_angle(self) -> float:
        return 2 * math.pi * self.delta / self.alpha

    def bit_angle(self, i: int, n: int) -> float:
        """Rotation carried by register bit i (LSB = 0)."""
        return 2 * math.pi * 2**i / (self.alpha * 2**n)

    def interval(self, n: int) -> tuple[float, float]:
        """Image of window_map over a = 0 .. 2^n - 1 (closed)."""
        return window_map(0, n, self), window_map(2**n - 1, n, self)


STANDARD_WINDOWS = {
    "[-1;1]": SubspaceWindow(0.0, 1.0),
    "[-1;0]": SubspaceWindow(0.0, 2.0),
    "[0;1]": SubspaceWindow(1.0, 2.0),
    "[-1/2;1/2]": SubspaceWindow(0.5, 2.0),
    "[1/4;3/4]": SubspaceWindow(1.5, 4.0),
}


def kickback_angle(a, n: int, w: SubspaceWindow):
    """Total R_Y angle theta_a + Delta seen by the ancilla for input a."""
    a = np.asarray(a)
    if np.any(a < 0) or np.any(a >= 2**n):
        raise ValueError(f"register value must lie in [0, 2^{n})")
    val = 2 * math.pi * a / (w.alpha * 2**n) + w.shift_angle
    return _out(val, a)


def kickback_signal(a, n: int, w: SubspaceWindow):
    """Signal amplitude <0|R_Y(theta_a + Delta)|0> = cos((theta_a + Delta)/2)."""
    return _out(np.cos(np.asarray(kickback_angle(a, n, w)) / 2), a)


def window_map(a, n: int, w: SubspaceWindow):
    """Linearized signal p2a(kickback_signal(a)) for basis state |a>.

    Equals 2a/(alpha 2^n) + 2 delta/alpha - 1 while the half rotation stays in
    [0, pi], which reproduces the standard windows: (0, 2) gives [-1, 0),
    (1, 2) gives [0, 1), (1/2, 2) gives [-1/2, 1/2).
    """
    a = np.asarray(a)
    if np.any(a < 0) or np.any(a >= 2**n):
        raise ValueError(f"register value must lie in [0, 2^{n})")
    half = (2 * math.pi * a / (w.alpha * 2**n) + w.shift_angle) / 2
    val = np.clip(-(2 / math.pi) * np.arcsin(np.clip(np.cos(half), -1, 1)), -1, 1)
    return _out(val, a)


@dataclass(frozen=True)
class TargetFunction:
    """A real target on a closed sub-interval of [-1, 1].

    ``parity`` is ``"odd"``, ``"even"`` or ``None``. ``bands`` lists
    ``(center, halfwidth)`` pairs excluded from fitting and certification
    (discontinuities).
    """

    evaluator: Callable
    domain: tuple = (-1.0, 1.0)
    parity: str | None = None
    name: str = ""
    bands: tuple = ()

    def __post_init__(self):
        lo, hi = (float(v) for v in self.domain)
        if not (-1 - DOMAIN_SLACK <= lo < hi <= 1 + DOMAIN_SLACK):
            raise ValueError(f"domain must be a non-empty interval in [-1, 1], got {self.domain}")
        object.__setattr__(self, "domain", (max(lo, -1.0), min(hi, 1.0)))
        if self.parity not in (None, "odd", "even"):
            raise ValueError(f"parity must be 'odd', 'even' or None, got {self.parity!r}")
        object.__setattr__(self, "bands", tuple((float(c), float(h)) for c, h in self.bands))

    def __call__(self, x):
        return self.evaluator(x)

    def negate(self) -> "TargetFunction":
        ev = self.evaluator
        name = self.name[1:] if self.name.startswith("-") else f"-{self.name}"
        return TargetFunction(lambda x: -np.asarray(ev(x)), self.domain, self.parity, name, self.bands)

    def with_domain(self, lo: float, hi: float) -> "TargetFunction":
        return TargetFunction(self.evaluator, (lo, hi), self.parity, self.name, self.bands)

    def with_bands(self, bands) -> "TargetFunction":
        return TargetFunction(self.evaluator, self.domain, self.parity, self.name, tuple(bands))

    def grid(self, d: int, exclude_bands: bool = True) -> np.ndarray:
        """x_j = lo + (hi - lo) j / d for j = 0..d, minus excluded bands."""
        if d < 1:
            raise ValueError("grid size must be >= 1")
        lo, hi = self.domain
        x = lo + (hi - lo) * np.arange(d + 1) / d
        return self.mask_bands(x) if exclude_bands else x

    def mask_bands(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        keep = np.ones(x.shape, dtype=bool)
        for c, h in self.bands:
            keep &= np.abs(x - c) > h
        return x[keep]

    def check_normalized(self, d: int = 1000) -> float:
        """Largest |f| on a grid; raises if it exceeds 1."""
        peak = float(np.max(np.abs(self(self.grid(d, exclude_bands=False)))))
        if peak > 1 + 1e-12:
            raise ValueError(f"{self.name or 'target'} is not normalized: max |f| = {peak:.6g}")
        return peak


def _step_target(delta_s: float) -> TargetFunction:
    return TargetFunction(lambda x: step(x, delta_s), (-1.0, 1.0), "even", f"step:{delta_s:g}",
                          ((delta_s, 0.01), (-delta_s, 0.01)))


TARGETS = {
    "p2a": lambda: TargetFunction(p2a, (-1.0, 1.0), "odd", "p2a"),
    "a2p": lambda: TargetFunction(a2p, (-1.0, 1.0), "odd", "a2p"),
    "sgn": lambda: TargetFunction(sgn, (-1.0, 1.0), "odd", "sgn", ((0.0, 0.1),)),
    "example_f": lambda: TargetFunction(example_f, (-1.0, 0.0), None, "example_f"),
    "identity": lambda: TargetFunction(lambda x: np.asarray(x, dtype=float) * 1.0, (-1.0, 1.0), "odd", "identity"),
}


def get_target(text: str) -> TargetFunction:
    """Resolve a target by name.

    Accepts the names in ``TARGETS``, ``step:<delta>``, ``chebyshev:<n>`` and a
    leading ``-`` for the negated function (e.g. ``-step:0.1``).
    """
    text = text.strip()
    if text.startswith("-"):
        return get_target(text[1:]).negate()
    name, _, arg = text.partition(":")
    if name == "step":
        try:
            return _step_target(float(arg))
        except ValueError:
            raise ValueError(f"step target needs a positive width, got {text!r}") from None
    if name == "chebyshev":
        try:
            n = int(arg)
        except ValueError:
            raise ValueError(f"chebyshev target needs an integer order, got {text!r}") from None
        return TargetFunction(chebyshev(n), (-1.0, 1.0), "odd" if n % 2 else "even", f"chebyshev:{n}")
    if name in TARGETS and not arg:
        return TARGETS[name]()
    raise ValueError(f"unknown target {text!r}; known: {', '.join(sorted(TARGETS))}, step:<d>, chebyshev:<n>")
