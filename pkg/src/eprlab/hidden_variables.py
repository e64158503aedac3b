"""Classical models for two-qubit correlations, and where they break.

Three classical constructions live here:

- Noncontextual sign assignments to the six single-spin observables
  sx, sy, sz per party, with product observables valued multiplicatively
  on commuting factors.  All 64 assignments keep each assignment
  functional at or below 2, while entangled states reach up to 4.
- Local deterministic strategies for a two-setting, two-outcome
  experiment.  A convex mixture of the 16 strategies reproducing a given
  correlator quad exists exactly when the eight CHSH combinations stay
  at or below 2 (for vanishing marginals); existence is decided by a
  linear-programming feasibility check.
- Product (separable) states.  The suprema of the witness statistics
  over product states are verified against their analytic bounds by a
  coarse grid search plus coordinate ascent on the two Bloch spheres.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from .qstate import (
    ATOL_ALARM,
    X_AXIS,
    Z_AXIS,
    ProductEnsemble,
    TwoQubitState,
    outcome_distribution,
    product_mixture,
)
from .witnesses import (
    BBM_BOUND,
    EKERT_BOUND,
    KS_BOUND,
    EkertSettings,
    KSCase,
    bbm_statistic,
    default_ekert_settings,
    ekert_statistic,
)
from .simplex import INFEASIBLE, OPTIMAL, solve_lp

SINGLE_KEYS = ("ax", "ay", "az", "bx", "by", "bz")
PRODUCT_KEYS = ("xx", "yy", "xy", "yx", "zz")

CHSH_BOUND = 2.0
LP_FEAS_TOL = 1e-8   # weight nonnegativity and normalization slack
MODEL_ATOL = 1e-8    # reproduction tolerance for local models
BOUND_SLACK = 1e-6   # allowed numerical overshoot of an analytic bound

# All sign patterns (s1, s2, s3, s4) with an odd number of minus signs,
# in lexicographic order with +1 first.
CHSH_SIGN_PATTERNS = tuple(
    p for p in itertools.product((1, -1), repeat=4) if p.count(-1) % 2 == 1
)

# Deterministic strategies (alpha_a1, alpha_a3, alpha_b1, alpha_b3),
# lexicographic with +1 first; LocalModel weights follow this order.
STRATEGIES = tuple(itertools.product((1, -1), repeat=4))


@dataclass(frozen=True)
class KSAssignment:
    """One noncontextual valuation of the single and product spin observables.

    Product observables factor over commuting single-party pieces, so the
    x and y products are fixed by the singles; the zz product is fixed by
    the commuting decompositions zz = xx * yy = xy * yx rather than by the
    z singles.
    """

    singles: Mapping[str, int]
    products: Mapping[str, int]

    def __post_init__(self) -> None:
        if set(self.singles) != set(SINGLE_KEYS):
            raise ValueError(f"singles must have keys {SINGLE_KEYS}")
        if set(self.products) != set(PRODUCT_KEYS):
            raise ValueError(f"products must have keys {PRODUCT_KEYS}")
        for mapping in (self.singles, self.products):
            for key, value in mapping.items():
                if value not in (1, -1):
                    raise ValueError(f"assignment value {key}={value!r} must be +1 or -1")
        s, p = self.singles, self.products
        rules = (
            ("xx", s["ax"] * s["bx"]),
            ("yy", s["ay"] * s["by"]),
            ("xy", s["ax"] * s["by"]),
            ("yx", s["ay"] * s["bx"]),
            ("zz", p["xx"] * p["yy"]),
        )
        for key, expected in rules:
            if p[key] != expected:
                raise ValueError(f"product {key}={p[key]} breaks the product rule")
        if p["zz"] != p["xy"] * p["yx"]:
            raise ValueError("zz value differs between its two commuting decompositions")
        object.__setattr__(self, "singles", MappingProxyType(dict(self.singles)))
        object.__setattr__(self, "products", MappingProxyType(dict(self.products)))


def enumerate_ks_assignments() -> tuple[KSAssignment, ...]:
    """All 64 assignments, one per sign choice on the six singles."""
    assignments = []
    for values in itertools.product((1, -1), repeat=6):
        singles = dict(zip(SINGLE_KEYS, values))
        xx = singles["ax"] * singles["bx"]
        yy = singles["ay"] * singles["by"]
        products = {
            "xx": xx,
            "yy": yy,
            "xy": singles["ax"] * singles["by"],
            "yx": singles["ay"] * singles["bx"],
            "zz": xx * yy,
        }
        assignments.append(KSAssignment(singles=singles, products=products))
    return tuple(assignments)


def ks_functional_value(assignment: KSAssignment, case: KSCase) -> float:
    """Value of 1 + s_xx f(xx) + s_yy f(yy) + s_zz f(zz) under the assignment."""
    sxx, syy, szz = case.signs
    p = assignment.products
    return 1.0 + sxx * p["xx"] + syy * p["yy"] + szz * p["zz"]


def ks_classical_bound(case: KSCase) -> float:
    """Largest functional value over all assignments (equals 2 for each case)."""
    return max(ks_functional_value(a, case) for a in enumerate_ks_assignments())


@dataclass(frozen=True)
class CorrelatorQuad:
    """Joint correlators for two Alice and two Bob settings, plus marginals."""

    c11: float
    c13: float
    c31: float
    c33: float
    m_a1: float = 0.0
    m_a3: float = 0.0
    m_b1: float = 0.0
    m_b3: float = 0.0

    def __post_init__(self) -> None:
        for name in ("c11", "c13", "c31", "c33", "m_a1", "m_a3", "m_b1", "m_b3"):
            value = getattr(self, name)
            if abs(value) > 1.0 + 1e-12:
                raise ValueError(f"{name}={value!r} outside [-1, 1]")

    def correlators(self) -> tuple[float, float, float, float]:
        return (self.c11, self.c13, self.c31, self.c33)

    def marginals(self) -> tuple[float, float, float, float]:
        return (self.m_a1, self.m_a3, self.m_b1, self.m_b3)


def quad_from_state(state: TwoQubitState, settings: EkertSettings) -> CorrelatorQuad:
    """Measure all four correlators and the four marginals of a state."""
    dists = {
        (i, j): outcome_distribution(state, a, b)
        for i, a in (("1", settings.a1), ("3", settings.a3))
        for j, b in (("1", settings.b1), ("3", settings.b3))
    }
    return CorrelatorQuad(
        c11=dists[("1", "1")].correlator,
        c13=dists[("1", "3")].correlator,
        c31=dists[("3", "1")].correlator,
        c33=dists[("3", "3")].correlator,
        m_a1=dists[("1", "1")].marginal_a,
        m_a3=dists[("3", "3")].marginal_a,
        m_b1=dists[("1", "1")].marginal_b,
        m_b3=dists[("3", "3")].marginal_b,
    )


@dataclass(frozen=True)
class ChshPanel:
    """The eight CHSH combinations of a correlator quad."""

    values: tuple[float, ...]
    max_value: float
    passes: bool

    def __post_init__(self) -> None:
        if len(self.values) != 8:
            raise ValueError(f"panel needs 8 values, got {len(self.values)}")


def chsh_panel(quad: CorrelatorQuad) -> ChshPanel:
    """Evaluate s1 c11 + s2 c13 + s3 c31 + s4 c33 over the odd sign patterns."""
    c = quad.correlators()
    values = tuple(
        float(s1 * c[0] + s2 * c[1] + s3 * c[2] + s4 * c[3])
        for s1, s2, s3, s4 in CHSH_SIGN_PATTERNS
    )
    max_value = max(values)
    return ChshPanel(values=values, max_value=max_value, passes=max_value <= CHSH_BOUND + LP_FEAS_TOL)


@dataclass(frozen=True)
class LocalModel:
    """Convex weights over the 16 deterministic strategies in STRATEGIES order."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != 16:
            raise ValueError(f"need 16 weights, got {len(self.weights)}")
        w = np.asarray(self.weights, dtype=float)
        if w.min() < -LP_FEAS_TOL:
            raise ValueError(f"negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > LP_FEAS_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")

    def predicted_quad(self) -> CorrelatorQuad:
        """Correlators and marginals generated by the strategy mixture."""
        w = np.asarray(self.weights)
        s = np.asarray(STRATEGIES, dtype=float)  # columns a1, a3, b1, b3
        return CorrelatorQuad(
            c11=float(w @ (s[:, 0] * s[:, 2])),
            c13=float(w @ (s[:, 0] * s[:, 3])),
            c31=float(w @ (s[:, 1] * s[:, 2])),
            c33=float(w @ (s[:, 1] * s[:, 3])),
            m_a1=float(w @ s[:, 0]),
            m_a3=float(w @ s[:, 1]),
            m_b1=float(w @ s[:, 2]),
            m_b3=float(w @ s[:, 3]),
        )

    def reproduces(self, quad: CorrelatorQuad, atol: float = MODEL_ATOL) -> bool:
        predicted = self.predicted_quad()
        pairs = zip(
            predicted.correlators() + predicted.marginals(),
            quad.correlators() + quad.marginals(),
        )
        return all(abs(p - q) <= atol for p, q in pairs)


def fine_local_model(quad: CorrelatorQuad) -> Optional[LocalModel]:
    """Find a strategy mixture reproducing the quad, or None if none exists.

    Feasibility is decided by a two-phase simplex over weights w_s >= 0
    matching the normalization, the four correlators, and the four
    marginals.  Among feasible mixtures the one maximizing the minimum
    weight is returned (substituting w_s = v_s + t makes that a linear
    objective), which pins a canonical, deterministic representative;
    the all-zero quad yields exactly the uniform mixture.
    """
    s = np.asarray(STRATEGIES, dtype=float)
    columns = [
        np.ones(16),
        s[:, 0] * s[:, 2],
        s[:, 0] * s[:, 3],
        s[:, 1] * s[:, 2],
        s[:, 1] * s[:, 3],
        s[:, 0],
        s[:, 1],
        s[:, 2],
        s[:, 3],
    ]
    rhs = np.array([1.0, *quad.correlators(), *quad.marginals()])
    a_eq = np.zeros((9, 17))
    for row, column in enumerate(columns):
        a_eq[row, :16] = column
        # Coefficient of t in w_s = v_s + t: the row sum of the column.
        a_eq[row, 16] = column.sum()
    cost = np.zeros(17)
    cost[16] = -1.0  # maximize the minimum weight t
    result = solve_lp(cost, a_eq, rhs)
    if result.status == INFEASIBLE:
        return None
    if result.status != OPTIMAL:
        raise RuntimeError(f"unexpected solver status {result.status!r}")
    v, t = result.x[:16], result.x[16]
    model = LocalModel(weights=tuple(float(x) for x in np.clip(v + t, 0.0, None)))
    if not model.reproduces(quad):
        raise RuntimeError("local model fails to reproduce its target quad")
    return model


class SeparableFunctional(Enum):
    """Witness statistics whose product-state suprema are verified numerically."""

    EKERT_S = "ekert-s"
    BBM_T = "bbm-t"
    KS_I = "ks-i"
    KS_II = "ks-ii"
    KS_III = "ks-iii"


ANALYTIC_BOUNDS = {
    SeparableFunctional.EKERT_S: EKERT_BOUND,
    SeparableFunctional.BBM_T: BBM_BOUND,
    SeparableFunctional.KS_I: KS_BOUND,
    SeparableFunctional.KS_II: KS_BOUND,
    SeparableFunctional.KS_III: KS_BOUND,
}

_KS_CASE_OF_FUNCTIONAL = {
    SeparableFunctional.KS_I: KSCase.CASE_I,
    SeparableFunctional.KS_II: KSCase.CASE_II,
    SeparableFunctional.KS_III: KSCase.CASE_III,
}


@dataclass(frozen=True)
class SearchOptions:
    """Knobs for the product-state supremum search."""

    coarse_points: int = 8          # azimuthal and polar samples per sphere
    max_evaluations: int = 100_000  # hard cap on objective evaluations
    refine_step_tol: float = 1e-6   # stop once the ascent step shrinks below this

    def __post_init__(self) -> None:
        if self.coarse_points < 2:
            raise ValueError("need at least 2 coarse points per angle")
        if self.max_evaluations < self.coarse_points**4:
            raise ValueError("evaluation cap below the coarse grid size")
        if not 0.0 < self.refine_step_tol < 1.0:
            raise ValueError("refine_step_tol must lie in (0, 1)")


@dataclass(frozen=True)
class BoundReport:
    """Result of a product-state supremum search for one functional."""

    functional: SeparableFunctional
    supremum: float
    argmax_bloch_a: tuple[float, float, float]
    argmax_bloch_b: tuple[float, float, float]
    evaluations: int
    analytic_bound: float

    def __post_init__(self) -> None:
        if self.supremum > self.analytic_bound + BOUND_SLACK:
            raise RuntimeError(
                f"search found {self.supremum!r} above the analytic bound "
                f"{self.analytic_bound!r}; functional or bound is wrong"
            )
        if self.evaluations < 1:
            raise ValueError("search must evaluate at least one point")


def _unit_vector(theta: float, phi: float) -> np.ndarray:
    sin_t = np.sin(theta)
    return np.array([sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)])


def _product_objective(functional: SeparableFunctional):
    """Scalar objective on a pair of Bloch unit vectors.

    For a product state, E(a, b) = (a . u)(b . v), so every witness
    statistic reduces to a bilinear form in the two Bloch vectors.
    """
    if functional is SeparableFunctional.EKERT_S:
        s = default_ekert_settings()
        a1, a3 = s.a1.direction, s.a3.direction
        b1, b3 = s.b1.direction, s.b3.direction

        def objective(u: np.ndarray, v: np.ndarray) -> float:
            return abs((a1 @ u) * ((b1 - b3) @ v) + (a3 @ u) * ((b1 + b3) @ v))

    elif functional is SeparableFunctional.BBM_T:

        def objective(u: np.ndarray, v: np.ndarray) -> float:
            return abs(u[0] * v[0] + u[2] * v[2])

    else:
        sxx, syy, szz = _KS_CASE_OF_FUNCTIONAL[functional].signs

        def objective(u: np.ndarray, v: np.ndarray) -> float:
            return 1.0 + sxx * u[0] * v[0] + syy * u[1] * v[1] + szz * u[2] * v[2]

    return objective


_AXIS_SEED_ANGLES = (
    (np.pi / 2, 0.0),            # +x
    (np.pi / 2, np.pi),          # -x
    (np.pi / 2, np.pi / 2),      # +y
    (np.pi / 2, 3 * np.pi / 2),  # -y
    (0.0, 0.0),                  # +z
    (np.pi, 0.0),                # -z
)


def separable_bound(
    functional: SeparableFunctional, options: Optional[SearchOptions] = None
) -> BoundReport:
    """Numerically maximize a witness statistic over pure product states.

    A coarse angular grid over both Bloch spheres plus the axis pairs
    seeds a coordinate ascent with step halving.  The report records the
    supremum found, which must not exceed the analytic bound.
    """
    opts = options if options is not None else SearchOptions()
    objective = _product_objective(functional)
    points = opts.coarse_points
    thetas = np.linspace(0.0, np.pi, points)
    phis = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    grid_angles = [(t, p) for t in thetas for p in phis]
    seed_angles = grid_angles + list(_AXIS_SEED_ANGLES)

    evaluations = 0
    best_value = -np.inf
    best_angles: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    for theta_a, phi_a in seed_angles:
        if evaluations >= opts.max_evaluations:
            break
        u = _unit_vector(theta_a, phi_a)
        for theta_b, phi_b in seed_angles:
            if evaluations >= opts.max_evaluations:
                break
            value = objective(u, _unit_vector(theta_b, phi_b))
            evaluations += 1
            if value > best_value:
                best_value = value
                best_angles = (theta_a, phi_a, theta_b, phi_b)

    angles = list(best_angles)
    step = np.pi / points
    while step > opts.refine_step_tol and evaluations < opts.max_evaluations:
        improved = False
        for index in range(4):
            for delta in (step, -step):
                if evaluations >= opts.max_evaluations:
                    break
                trial = list(angles)
                trial[index] += delta
                value = objective(
                    _unit_vector(trial[0], trial[1]), _unit_vector(trial[2], trial[3])
                )
                evaluations += 1
                if value > best_value + 1e-15:
                    best_value = value
                    angles = trial
                    improved = True
        if not improved:
            step *= 0.5

    u = _unit_vector(angles[0], angles[1])
    v = _unit_vector(angles[2], angles[3])
    return BoundReport(
        functional=functional,
        supremum=float(best_value),
        argmax_bloch_a=tuple(float(x) for x in u),
        argmax_bloch_b=tuple(float(x) for x in v),
        evaluations=evaluations,
        analytic_bound=ANALYTIC_BOUNDS[functional],
    )


@dataclass(frozen=True)
class ExpansionResiduals:
    """Disagreement between trace and Bloch-expansion routes to S and T."""

    ekert: float
    bbm: float


def separable_expansion_check(
    ensemble: ProductEnsemble, settings: Optional[EkertSettings] = None
) -> ExpansionResiduals:
    """Compare two routes to S and T on a product mixture.

    Route one forms the density matrix and takes traces; route two expands
    each correlator as a weighted sum of (a . nA)(b . nB) terms.  Raises
    if the routes disagree beyond ATOL_ALARM.
    """
    s = settings if settings is not None else default_ekert_settings()
    state = product_mixture(ensemble)
    trace_ekert = ekert_statistic(state, s)
    trace_bbm = bbm_statistic(state)

    a1, a3 = s.a1.direction, s.a3.direction
    b1, b3 = s.b1.direction, s.b3.direction
    bloch_ekert = 0.0
    bloch_bbm = 0.0
    for weight, bloch_a, bloch_b in ensemble:
        bloch_ekert += weight * (
            (a1 @ bloch_a) * (b1 @ bloch_b)
            - (a1 @ bloch_a) * (b3 @ bloch_b)
            + (a3 @ bloch_a) * (b1 @ bloch_b)
            + (a3 @ bloch_a) * (b3 @ bloch_b)
        )
        bloch_bbm += weight * (
            (X_AXIS @ bloch_a) * (X_AXIS @ bloch_b)
            + (Z_AXIS @ bloch_a) * (Z_AXIS @ bloch_b)
        )
    residuals = ExpansionResiduals(
        ekert=abs(trace_ekert - bloch_ekert), bbm=abs(trace_bbm - bloch_bbm)
    )
    if residuals.ekert > ATOL_ALARM or residuals.bbm > ATOL_ALARM:
        raise RuntimeError(
            f"expansion routes disagree (S residual {residuals.ekert:.3e}, "
            f"T residual {residuals.bbm:.3e})"
        )
    return residuals
