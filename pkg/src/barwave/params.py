"""Parameter validation, damper-position rationalization and regime classification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import DomainError

#: absolute tolerance used for every "h equals a special value" test
CRITICAL_TOL = 1e-12

DEFAULT_MAX_DENOMINATOR = 100


@dataclass(frozen=True)
class Params:
    """Physical and dimensionless inputs of the damped bar.

    ``h1``, ``h2`` are the end dashpots, ``h3`` the internal one located at
    ``a``; ``L`` is the bar length and ``c`` the wave speed.  Negative
    ``h_i`` describe active dashpots that feed energy into the bar.
    """

    h1: float
    h2: float
    h3: float
    a: float
    L: float
    c: float

    @property
    def rigid_denominator(self) -> float:
        """Value of the characteristic function at s = 0, ``h1 + h2 + 2 h3``."""
        return self.h1 + self.h2 + 2.0 * self.h3

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Params":
        missing = [k for k in ("h1", "h2", "h3", "a", "L", "c") if k not in data]
        if missing:
            raise DomainError(f"params: missing key(s) {', '.join(missing)}")
        return make_params(*(data[k] for k in ("h1", "h2", "h3", "a", "L", "c")))


@dataclass(frozen=True)
class RationalPosition:
    q: int
    p: int
    residual: float

    @property
    def ratio(self) -> float:
        return self.q / self.p


@dataclass(frozen=True)
class Classification:
    critical_flags: frozenset
    rigid_double_zero: bool
    no_internal: bool
    midpoint: bool
    zero_damping_case: str
    regime: str
    double_pole_family: bool

    @property
    def is_critical(self) -> bool:
        return bool(self.critical_flags)

    def to_dict(self) -> dict:
        return {
            "critical": sorted(self.critical_flags),
            "rigid": self.rigid_double_zero,
            "no_internal": self.no_internal,
            "midpoint": self.midpoint,
            "zero_damping": self.zero_damping_case,
            "regime": self.regime,
            "double_pole_family": self.double_pole_family,
        }


def make_params(h1, h2, h3, a, L, c) -> Params:
    """Validate raw inputs and build a :class:`Params`.

    Raises
    ------
    DomainError
        If any input is non-finite or not a number, ``L <= 0``, ``c <= 0``
        or ``a`` is not strictly inside ``(0, L)``.
    """
    values = {"h1": h1, "h2": h2, "h3": h3, "a": a, "L": L, "c": c}
    for name, v in values.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DomainError(f"{name} must be a real number, got {v!r}")
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")
    if L <= 0:
        raise DomainError(f"bar length L must be positive, got {L}")
    if c <= 0:
        raise DomainError(f"wave speed c must be positive, got {c}")
    if not 0 < a < L:
        raise DomainError(f"damper position a={a} must lie strictly inside (0, L={L})")
    return Params(float(h1), float(h2), float(h3), float(a), float(L), float(c))


def rationalize_position(a: float, L: float,
                         max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> RationalPosition:
    """Best rational approximation ``q/p`` of ``a/L`` with ``p <= max_denominator``.

    Continued-fraction convergents (and semiconvergents) are taken from
    :meth:`fractions.Fraction.limit_denominator`.  The result always keeps
    ``0 < q < p`` so that the damper stays strictly inside the bar.
    """
    if max_denominator < 1:
        raise DomainError("max_denominator must be >= 1")
    x = a / L
    frac = Fraction(x).limit_denominator(max_denominator)
    q, p = frac.numerator, frac.denominator
    if q <= 0 or q >= p:
        # endpoints are not admissible; use the closest interior fraction
        p = max(max_denominator, 2)
        q = 1 if x < 0.5 else p - 1
    return RationalPosition(q, p, abs(x - q / p))


def snap_position(params: Params, position: RationalPosition) -> Params:
    """Return ``params`` with ``a`` moved exactly onto ``L*q/p``."""
    return replace(params, a=params.L * position.q / position.p)


def _near(x: float, target: float, tol: float = CRITICAL_TOL) -> bool:
    return abs(x - target) < tol


def _zero_damping_case(params: Params, position: RationalPosition,
                       no_internal: bool, midpoint: bool, tol: float) -> str:
    h1, h2, h3 = params.h1, params.h2, params.h3
    if no_internal:
        if _near(h1 * h2, -1.0, tol):
            return "case1"
        if _near(h1 + h2, 0.0, tol):
            return "case2"
        return "none"
    if not midpoint:
        return "unknown"
    if _near(h3, -(h1 + h2) / 2, tol) and _near(h1 * h2, 1.0, tol):
        return "case3"
    A = (1 + h1) * (1 + h2) * (1 + h3)
    B = 2 * h3 * (1 - h1 * h2)
    if _near(h1 * h2 + h1 * h3 + h2 * h3 + 1.0, 0.0, tol) and abs(B) <= 2 * abs(A) + tol:
        return "case4"
    return "none"


def _regime(h1: float, h2: float, h3: float, flags: frozenset) -> str:
    if not flags:
        return "modal"
    if flags & {"h1=-1", "h2=-1", "h3=-1"}:
        return "super_unstable"
    if "h1=+1" in flags and "h2=+1" in flags:
        return "both_transparent"
    if "h2=+1" in flags and _near(h3, 0.0):
        return "right_transparent"
    if "h1=+1" in flags and _near(h3, 0.0):
        return "left_transparent"
    return "intermediate"


def classify(params: Params, position: Optional[RationalPosition] = None,
             tol: float = CRITICAL_TOL) -> Classification:
    """Flag critical, rigid and zero-damping regimes of a parameter set.

    ``zero_damping_case`` is one of ``case1`` .. ``case4``, ``none``, or
    ``unknown`` when the damper is internal and off-centre (no criterion
    is available there).
    """
    if position is None:
        position = rationalize_position(params.a, params.L)
    h = {"h1": params.h1, "h2": params.h2, "h3": params.h3}
    flags = set()
    for name, v in h.items():
        if _near(v, 1.0, tol):
            flags.add(f"{name}=+1")
        if _near(v, -1.0, tol):
            flags.add(f"{name}=-1")
    flags = frozenset(flags)
    no_internal = _near(params.h3, 0.0, tol)
    midpoint = (position.q, position.p) == (1, 2)
    rigid = _near(params.rigid_denominator, 0.0, tol)
    zcase = _zero_damping_case(params, position, no_internal, midpoint, tol)
    family = rigid and _near(params.h1 * params.h2, 1.0, tol)
    return Classification(
        critical_flags=flags,
        rigid_double_zero=rigid,
        no_internal=no_internal,
        midpoint=midpoint,
        zero_damping_case=zcase,
        regime=_regime(params.h1, params.h2, params.h3, flags),
        double_pole_family=family,
    )
