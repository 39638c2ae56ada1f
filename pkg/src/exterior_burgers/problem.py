"""Problem parameters and asymptotic regime classification.

The radial reduction of the exterior Burgers problem is

    v_t + (v^2/2)_r = mu (v_rr + (n-1) (v/r)_r),   r > r0,
    v(t, r0) = v_minus,   v(t, inf) = v_plus.

Everything downstream is keyed on two derived constants: the shifted boundary
value ``V_minus = v_minus - mu (n-1)/r0`` and ``c0 = mu (n-1)(n-3)/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ParameterError


class RegimeTag(str, enum.Enum):
    STATIONARY_WAVE = "StationaryWave"
    SUPERPOSITION_SW_RAREFACTION = "SuperpositionSwRarefaction"
    UNSOLVED_INCREASING = "UnsolvedIncreasing"
    UNSOLVED_SHOCK = "UnsolvedShock"


@dataclass(frozen=True)
class ProblemParams:
    n: int
    mu: float
    r0: float
    v_minus: float
    v_plus: float
    V_minus: float = field(init=False)
    c0: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ParameterError(f"dimension n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 3:
            raise ParameterError(f"dimension n must be >= 3, got {self.n}")
        for name in ("mu", "r0", "v_minus", "v_plus"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.mu <= 0:
            raise ParameterError(f"viscosity mu must be > 0, got {self.mu}")
        if self.r0 <= 0:
            raise ParameterError(f"ball radius r0 must be > 0, got {self.r0}")
        object.__setattr__(self, "V_minus", shifted_boundary_value(
            self.n, self.mu, self.r0, self.v_minus))
        object.__setattr__(self, "c0", riccati_constant(self.n, self.mu))

    def to_dict(self) -> dict:
        return {"n": self.n, "mu": self.mu, "r0": self.r0,
                "v_minus": self.v_minus, "v_plus": self.v_plus}

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemParams":
        try:
            return cls(n=data["n"], mu=data["mu"], r0=data["r0"],
                       v_minus=data["v_minus"], v_plus=data["v_plus"])
        except KeyError as exc:
            raise ParameterError(f"missing problem parameter {exc.args[0]!r}") from None


def shifted_boundary_value(n: int, mu: float, r0: float, v_minus: float) -> float:
    return v_minus - mu * (n - 1) / r0


def riccati_constant(n: int, mu: float) -> float:
    return mu * (n - 1) * (n - 3) / 2


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    admissible: bool
    # "b": V_minus <= v_plus < 0, "d": v_plus < V_minus <= |v_plus|; None otherwise
    subcase: str | None = None
    # informational only: the extra smallness window on v_minus known for the
    # superposition regime; never enforced
    superposition_window: bool | None = None


def validate_admissible(params: ProblemParams) -> bool:
    """True iff ``v_plus < 0`` and ``V_minus <= |v_plus|``."""
    return params.v_plus < 0 and params.V_minus <= -params.v_plus


def hashimoto_subcase(params: ProblemParams) -> bool:
    """Both end states negative and ``V_minus <= v_plus``.

    Under this stronger condition the stationary wave is known to be
    negative and ``phi - mu (n-1)^2 / (2r)`` is non-decreasing.
    """
    return params.v_minus < 0 and params.v_plus < 0 and params.V_minus <= params.v_plus


def _superposition_window(params: ProblemParams) -> bool:
    n, mu, r0 = params.n, params.mu, params.r0
    upper = 2 * mu / (r0 * (1 + math.sqrt((n - 3) / (n - 1))))
    return 0 < params.v_minus < upper


def classify_regime(params: ProblemParams) -> Regime:
    V, vp = params.V_minus, params.v_plus
    if validate_admissible(params):
        return Regime(RegimeTag.STATIONARY_WAVE, True, subcase="b" if V <= vp else "d")
    # ties: V == 0 <= v_plus goes with the superposition row,
    # 0 < V == v_plus with the increasing row
    if vp >= 0 and V <= 0:
        return Regime(RegimeTag.SUPERPOSITION_SW_RAREFACTION, False,
                      superposition_window=_superposition_window(params))
    if vp > 0 and 0 < V <= vp:
        return Regime(RegimeTag.UNSOLVED_INCREASING, False)
    return Regime(RegimeTag.UNSOLVED_SHOCK, False)
