"""Entanglement witness statistics for two-qubit states.

Three families of witnesses share the correlator machinery:

- The four-setting statistic S built from two Alice and two Bob
  directions, with separable bound sqrt(2) for the anticommuting
  default settings and quantum maximum 2 sqrt(2).
- The two-axis statistic T = E(xx) + E(zz) with separable bound 1.
- Three value-assignment functionals U1, U2, U3 built from E(xx),
  E(yy), E(zz), each bounded by 2 under noncontextual sign
  assignments and reaching 4 on one Bell state apiece.

Each U equals four times the fidelity to one Bell state, so violations
certify distillability.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .qstate import (
    ATOL_DERIVED,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    BellLabel,
    SpinSetting,
    TwoQubitState,
    bell_state,
    correlator,
    density_from_pure,
)

EKERT_BOUND = float(np.sqrt(2.0))  # separable bound for S at the default settings
TSIRELSON_BOUND = 2.0 * float(np.sqrt(2.0))
BBM_BOUND = 1.0  # separable bound for T
KS_BOUND = 2.0  # noncontextual value-assignment bound for U1, U2, U3
VERDICT_SLACK = 1e-10  # non-strict comparison: the boundary is not a violation
DISTILL_THRESHOLD = 0.5  # a Bell fidelity above 1/2 certifies distillability


class KSCase(Enum):
    """Sign patterns (s_xx, s_yy, s_zz) of the three assignment functionals.

    Each functional is 1 + s_xx E(xx) + s_yy E(yy) + s_zz E(zz); the pattern
    determines which Bell state saturates it at 4.
    """

    CASE_I = (1.0, 1.0, -1.0)
    CASE_II = (-1.0, -1.0, -1.0)
    CASE_III = (1.0, -1.0, 1.0)

    @property
    def signs(self) -> tuple[float, float, float]:
        return self.value

    @property
    def bell_label(self) -> BellLabel:
        return _KS_WITNESSED[self]


_KS_WITNESSED = {
    KSCase.CASE_I: BellLabel.PSI_PLUS,
    KSCase.CASE_II: BellLabel.PSI_MINUS,
    KSCase.CASE_III: BellLabel.PHI_PLUS,
}


@dataclass(frozen=True)
class EkertSettings:
    """The two Alice and two Bob directions entering the statistic S."""

    a1: SpinSetting
    a3: SpinSetting
    b1: SpinSetting
    b3: SpinSetting

    def __post_init__(self) -> None:
        for name in ("a1", "a3"):
            if getattr(self, name).party.value != "alice":
                raise ValueError(f"setting {name} must belong to Alice")
        for name in ("b1", "b3"):
            if getattr(self, name).party.value != "bob":
                raise ValueError(f"setting {name} must belong to Bob")


def default_ekert_settings() -> EkertSettings:
    """Alice along x and y; Bob along (x+y)/sqrt(2) and (y-x)/sqrt(2)."""
    inv = 1.0 / np.sqrt(2.0)
    return EkertSettings(
        a1=SpinSetting.alice(X_AXIS),
        a3=SpinSetting.alice(Y_AXIS),
        b1=SpinSetting.bob(inv * (X_AXIS + Y_AXIS)),
        b3=SpinSetting.bob(inv * (Y_AXIS - X_AXIS)),
    )


@dataclass(frozen=True)
class WitnessVerdict:
    """Outcome of comparing |statistic| against a separability bound."""

    statistic: float
    bound: float
    violated: bool
    margin: float

    def __post_init__(self) -> None:
        expected = abs(self.statistic) > self.bound + VERDICT_SLACK
        if self.violated != expected:
            raise ValueError("verdict flag inconsistent with statistic and bound")
        if abs(self.margin - (abs(self.statistic) - self.bound)) > ATOL_DERIVED:
            raise ValueError("verdict margin inconsistent with statistic and bound")


def _verdict(statistic: float, bound: float) -> WitnessVerdict:
    return WitnessVerdict(
        statistic=statistic,
        bound=bound,
        violated=abs(statistic) > bound + VERDICT_SLACK,
        margin=abs(statistic) - bound,
    )


@dataclass(frozen=True)
class BellFidelities:
    """Overlaps of a state with the four Bell states; they sum to 1."""

    phi_plus: float
    phi_minus: float
    psi_plus: float
    psi_minus: float

    def __post_init__(self) -> None:
        values = self.as_tuple()
        for v in values:
            if not -ATOL_DERIVED <= v <= 1.0 + ATOL_DERIVED:
                raise ValueError(f"fidelity {v!r} outside [0, 1]")
        if abs(sum(values) - 1.0) > ATOL_DERIVED:
            raise ValueError(f"fidelities sum to {sum(values)!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.phi_plus, self.phi_minus, self.psi_plus, self.psi_minus)

    def by_label(self) -> dict[BellLabel, float]:
        return {
            BellLabel.PHI_PLUS: self.phi_plus,
            BellLabel.PHI_MINUS: self.phi_minus,
            BellLabel.PSI_PLUS: self.psi_plus,
            BellLabel.PSI_MINUS: self.psi_minus,
        }


@dataclass(frozen=True)
class DistillabilityVerdict:
    """Whether some Bell fidelity exceeds 1/2, and which one."""

    distillable: bool
    bell_label: Optional[BellLabel]
    fidelity: float  # the largest Bell fidelity


class CorrelatorAxes(Enum):
    """Axis pairs for two-term correlator sums."""

    XX_YY = "xx+yy"
    XX_ZZ = "xx+zz"


_AXIS_PAIRS = {
    CorrelatorAxes.XX_YY: ((X_AXIS, X_AXIS), (Y_AXIS, Y_AXIS)),
    CorrelatorAxes.XX_ZZ: ((X_AXIS, X_AXIS), (Z_AXIS, Z_AXIS)),
}


def pair_correlator_sum(state: TwoQubitState, axes: CorrelatorAxes) -> float:
    """Sum of two same-axis correlators, e.g. E(xx) + E(zz)."""
    total = 0.0
    for axis_a, axis_b in _AXIS_PAIRS[axes]:
        total += correlator(state, SpinSetting.alice(axis_a), SpinSetting.bob(axis_b))
    return total


def ekert_statistic(state: TwoQubitState, settings: Optional[EkertSettings] = None) -> float:
    """S = E(a1,b1) - E(a1,b3) + E(a3,b1) + E(a3,b3)."""
    s = settings if settings is not None else default_ekert_settings()
    value = (
        correlator(state, s.a1, s.b1)
        - correlator(state, s.a1, s.b3)
        + correlator(state, s.a3, s.b1)
        + correlator(state, s.a3, s.b3)
    )
    if abs(value) > TSIRELSON_BOUND + 1e-9:
        raise RuntimeError(f"statistic {value!r} exceeds the quantum maximum; state corrupted")
    return value


def ekert_verdict(state: TwoQubitState, settings: Optional[EkertSettings] = None) -> WitnessVerdict:
    """Compare |S| at the default settings against the separable bound sqrt(2)."""
    return _verdict(ekert_statistic(state, settings), EKERT_BOUND)


def bbm_statistic(state: TwoQubitState) -> float:
    """T = E(xx) + E(zz)."""
    return pair_correlator_sum(state, CorrelatorAxes.XX_ZZ)


def bbm_verdict(state: TwoQubitState) -> WitnessVerdict:
    """Compare |T| against the separable bound 1."""
    return _verdict(bbm_statistic(state), BBM_BOUND)


def _same_axis_correlators(state: TwoQubitState) -> tuple[float, float, float]:
    exx = correlator(state, SpinSetting.alice(X_AXIS), SpinSetting.bob(X_AXIS))
    eyy = correlator(state, SpinSetting.alice(Y_AXIS), SpinSetting.bob(Y_AXIS))
    ezz = correlator(state, SpinSetting.alice(Z_AXIS), SpinSetting.bob(Z_AXIS))
    return exx, eyy, ezz


def ks_functional(state: TwoQubitState, case: KSCase) -> float:
    """Value of 1 + s_xx E(xx) + s_yy E(yy) + s_zz E(zz) for the case's signs."""
    exx, eyy, ezz = _same_axis_correlators(state)
    sxx, syy, szz = case.signs
    return 1.0 + sxx * exx + syy * eyy + szz * ezz


def ks_verdict(state: TwoQubitState, case: KSCase) -> WitnessVerdict:
    """One-sided comparison of the functional against the assignment bound 2.

    The functional is nonnegative by construction, so the absolute-value
    verdict coincides with the one-sided one.
    """
    value = ks_functional(state, case)
    if value < -ATOL_DERIVED:
        raise RuntimeError(f"assignment functional {value!r} negative; state corrupted")
    return _verdict(value, KS_BOUND)


def bell_fidelities(state: TwoQubitState) -> BellFidelities:
    """All four Bell fidelities from the three same-axis correlators.

    f(Phi+-) = (1 +- E(xx) -+ E(yy) + E(zz)) / 4
    f(Psi+-) = (1 +- E(xx) +- E(yy) - E(zz)) / 4
    """
    exx, eyy, ezz = _same_axis_correlators(state)
    return BellFidelities(
        phi_plus=(1.0 + exx - eyy + ezz) / 4.0,
        phi_minus=(1.0 - exx + eyy + ezz) / 4.0,
        psi_plus=(1.0 + exx + eyy - ezz) / 4.0,
        psi_minus=(1.0 - exx - eyy - ezz) / 4.0,
    )


def fidelity_identities_check(state: TwoQubitState) -> tuple[float, float]:
    """Residuals of two routes to the Bell fidelities.

    Route one takes overlaps tr(rho |bell><bell|) directly; route two uses
    the correlator expressions above.  Returns (max residual, fidelity sum
    deviation from 1) and raises if either exceeds ATOL_DERIVED.
    """
    from_correlators = bell_fidelities(state)
    max_residual = 0.0
    for label, value in from_correlators.by_label().items():
        projector = density_from_pure(bell_state(label)).matrix
        overlap = float(np.trace(state.matrix @ projector).real)
        max_residual = max(max_residual, abs(overlap - value))
    sum_deviation = abs(sum(from_correlators.as_tuple()) - 1.0)
    if max_residual > ATOL_DERIVED or sum_deviation > ATOL_DERIVED:
        raise RuntimeError(
            f"fidelity routes disagree (residual {max_residual:.3e}, "
            f"sum deviation {sum_deviation:.3e})"
        )
    return max_residual, sum_deviation


def distillable_witness(state: TwoQubitState) -> DistillabilityVerdict:
    """Check whether some Bell fidelity exceeds 1/2.

    A fidelity above 1/2 certifies distillable entanglement; at most one
    fidelity can exceed 1/2 since all four sum to 1.
    """
    fidelities = bell_fidelities(state)
    best_label, best_value = max(
        fidelities.by_label().items(), key=lambda item: (item[1], item[0].value)
    )
    distillable = best_value > DISTILL_THRESHOLD + VERDICT_SLACK
    return DistillabilityVerdict(
        distillable=distillable,
        bell_label=best_label if distillable else None,
        fidelity=best_value,
    )
