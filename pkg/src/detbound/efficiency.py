"""Critical detection efficiencies and certified lower bounds on them.

Detection losses scale Alice's singles by ``eta_a``, Bob's by ``eta_b`` and the
joints by both, so for a fixed ideal behavior the value of an inequality is a
polynomial in the efficiencies.  The lower bounds come from a bracketing search
over ``eta``: at each trial efficiency an oracle maximizes the loss-scaled
inequality over a model class (classical, nonsignalling or an NPA level) and
compares the optimum with the required value ``q``.

In one-sided mode Alice holds the unknown detector and Bob the detector of
known efficiency; transpose the inequality to swap them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NeverViolated, NoThreshold, NotViolated
from .npa import NPARelaxation, nonsignalling_optimize
from .scenario import (
    BehaviorVector,
    BellInequality,
    validate_inequality,
    vertex_matrix,
)
from .separation import find_violated_inequality
from .solvers import VALUE_TOL

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-3
DENOMINATOR_TOL = 1e-12


# -- closed forms ----------------------------------------------------------------

def _clamp_threshold(eta: float) -> float:
    if eta > 1 + 1e-9:
        raise NoThreshold(f"threshold {eta:.6g} exceeds 1: no violation at any efficiency")
    return min(max(eta, 0.0), 1.0)


def eta_crit_symmetric(ineq: BellInequality, behavior: BehaviorVector) -> float:
    """Efficiency at which equal losses on both sides bring the value to zero."""
    s_a, s_b, joint = ineq.parts(behavior)
    if joint <= DENOMINATOR_TOL:
        raise NoThreshold("joint part is not positive; losses cannot create a violation")
    return _clamp_threshold(-(s_a + s_b) / joint)


def eta_crit_one_sided(ineq: BellInequality, behavior: BehaviorVector, q: float = 0.0) -> float:
    """Alice's critical efficiency with Bob's detector perfect and target value ``q``."""
    s_a, s_b, joint = ineq.parts(behavior)
    denom = joint + s_a
    if denom <= DENOMINATOR_TOL:
        raise NoThreshold("denominator is not positive; no efficiency reaches the target")
    return _clamp_threshold((q - s_b) / denom)


# -- model classes and oracles -----------------------------------------------------

@dataclass(frozen=True)
class ModelClass:
    kind: str           # "classical", "nonsignalling" or "npa"
    level: int | str | None = None

    def __post_init__(self):
        if self.kind not in ("classical", "nonsignalling", "npa"):
            raise ValueError(f"unknown model class {self.kind!r}")
        if self.kind == "npa" and self.level in (None, 0):
            raise ValueError("the NPA model class needs a level >= 1")

    @classmethod
    def classical(cls):
        return cls("classical")

    @classmethod
    def nonsignalling(cls):
        return cls("nonsignalling", 0)

    @classmethod
    def npa(cls, level):
        return cls("npa", level)

    @classmethod
    def parse(cls, name: str, level=None) -> "ModelClass":
        name = name.lower()
        if name in ("classical", "local"):
            return cls.classical()
        if name in ("ns", "nonsignalling", "no-signalling"):
            return cls.nonsignalling()
        if name in ("npa", "quantum"):
            return cls.npa(2 if level is None else level)
        raise ValueError(f"unknown model class {name!r}")

    def __str__(self):
        if self.kind == "npa":
            return f"QuantumNPA({self.level})"
        return {"classical": "Classical", "nonsignalling": "Nonsignalling"}[self.kind]


class Oracle:
    """Maximizes linear functionals over the behaviors of one model class."""

    def __init__(self, model: ModelClass, scenario):
        self.model = model
        self.scenario = scenario
        self.calls = 0
        self._relaxation = NPARelaxation(scenario, model.level) if model.kind == "npa" else None

    def maximize(self, ineq: BellInequality) -> tuple[float, BehaviorVector]:
        self.calls += 1
        if self.model.kind == "classical":
            V = vertex_matrix(self.scenario)
            values = V @ ineq.flat
            k = int(np.argmax(values))
            return float(values[k]), BehaviorVector.from_flat(self.scenario, V[k])
        if self.model.kind == "nonsignalling":
            res = nonsignalling_optimize(ineq)
        else:
            res = self._relaxation.optimize(ineq)
        return res.value, res.behavior


# -- bracketing search -------------------------------------------------------------

@dataclass
class EfficiencyBound:
    """Certified lower bound ``eta_lower``: every efficiency at or below it fails."""

    eta_lower: float
    model_class: ModelClass
    tolerance: float
    q: float = 0.0
    known_eta: float | None = None
    eta_upper: float = 1.0
    oracle_calls: int = 0
    witness: BehaviorVector | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "etaLower": self.eta_lower,
            "etaUpper": self.eta_upper,
            "modelClass": str(self.model_class),
            "q": self.q,
            "knownEta": self.known_eta,
            "tolerance": self.tolerance,
            "oracleCalls": self.oracle_calls,
        }


def scaled_inequality(ineq: BellInequality, eta: float, known_eta: float | None) -> BellInequality:
    if known_eta is None:
        return ineq.scaled(eta, eta)
    return ineq.scaled(eta, known_eta)


def _value_polynomial(ineq, behavior, known_eta):
    """Coefficients (a, b, c) with value(eta) = a eta^2 + b eta + c for this behavior."""
    s_a, s_b, joint = ineq.parts(behavior)
    if known_eta is None:
        return joint, s_a + s_b, 0.0
    return 0.0, known_eta * joint + s_a, known_eta * s_b


def _witness_threshold(poly, target: float, lo: float, t: float) -> float:
    """Smallest efficiency in (lo, t] at which the witness still reaches ``target``."""
    a, b, c = poly

    def value(x):
        return (a * x + b) * x + c

    if value(t) < target:
        return t
    if abs(a) > 1e-15:
        roots = np.roots([a, b, c - target])
    elif abs(b) > 1e-15:
        roots = np.array([(target - c) / b])
    else:
        return t
    best = t
    for r in roots:
        if abs(r.imag) > 1e-12:
            continue
        r = float(r.real) + 1e-9  # step off the root onto the feasible side
        if lo < r < best and value(r) >= target:
            best = r
    return best


def bound_via_bisection(
    ineq: BellInequality,
    model: ModelClass,
    q: float = 0.0,
    tolerance: float = DEFAULT_TOLERANCE,
    known_eta: float | None = None,
    accelerate: bool = True,
    threshold: float = VALUE_TOL,
    oracle: Oracle | None = None,
) -> EfficiencyBound:
    """Lower bound on the unknown detector efficiency needed to reach value ``q``.

    Maintains a bracket ``[lo, hi]`` with ``lo`` failing the oracle and ``hi``
    passing it (value above ``q + threshold``) and returns ``lo`` once the
    bracket is narrower than ``tolerance``.  Every passing oracle call comes
    with an optimal behavior; with ``accelerate`` the upper end drops straight
    to where that behavior alone stops reaching ``q``, and the next test sits a
    step below it (one tolerance, doubling while the tests keep passing).
    Failed tests fall back to bisection.  Without ``accelerate`` this is plain
    bisection.
    """
    if tolerance < 1e-4:
        raise ValueError("tolerance must be at least 1e-4")
    if q < 0:
        raise ValueError("the required value q must be non-negative")
    if known_eta is not None and not 0 < known_eta <= 1:
        raise ValueError("known_eta must lie in (0, 1]")
    if not validate_inequality(ineq):
        raise ValueError("inequality is not valid: some vertex gives a positive value")
    oracle = oracle or Oracle(model, ineq.scenario)
    target = q + threshold
    calls_before = oracle.calls

    def test(eta):
        value, behavior = oracle.maximize(scaled_inequality(ineq, eta, known_eta))
        return value > target, behavior

    ok, witness = test(1.0)
    if not ok:
        raise NeverViolated(
            f"{model} cannot reach value {q:g} even with perfect detectors"
        )
    lo, hi = 0.0, 1.0
    if known_eta is not None:
        ok0, w0 = test(0.0)
        if ok0:
            return EfficiencyBound(0.0, model, tolerance, q, known_eta, 0.0,
                                   oracle.calls - calls_before, w0)

    fresh = True   # the witness has not been used to lower ``hi`` yet
    step = tolerance
    while hi - lo > tolerance:
        t = (lo + hi) / 2
        probe = False
        if accelerate and fresh:
            hi = _witness_threshold(_value_polynomial(ineq, witness, known_eta), target, lo, hi)
            fresh = False
            if hi - lo <= tolerance:
                break
            if hi - step > lo:
                t, probe = hi - step, True
        ok, behavior = test(t)
        log.debug("eta=%.6f feasible=%s", t, ok)
        if ok:
            hi, witness, fresh = t, behavior, True
            # consecutive successful probes widen the step, as in a galloping search
            step = 2 * step if probe else step
        else:
            lo, step = t, tolerance
    return EfficiencyBound(lo, model, tolerance, q, known_eta, hi,
                           oracle.calls - calls_before, witness)


def check_bracket(ineq: BellInequality, bound: EfficiencyBound, oracle: Oracle | None = None,
                  threshold: float = VALUE_TOL) -> bool:
    """Re-run the oracle at both ends of the final bracket."""
    oracle = oracle or Oracle(bound.model_class, ineq.scenario)
    target = bound.q + threshold
    lo_val, _ = oracle.maximize(scaled_inequality(ineq, bound.eta_lower, bound.known_eta))
    hi_eta = min(1.0, bound.eta_lower + bound.tolerance)
    hi_val, _ = oracle.maximize(scaled_inequality(ineq, hi_eta, bound.known_eta))
    return lo_val <= target and hi_val > target


@dataclass
class Certification:
    bound: EfficiencyBound
    inequality: BellInequality
    quantum_value: float


def certify_from_observation(
    observed: BehaviorVector,
    model: ModelClass,
    tolerance: float = DEFAULT_TOLERANCE,
    known_eta: float | None = None,
    oracle: Oracle | None = None,
) -> Certification:
    """Synthesize the most violated inequality and bound the efficiency behind it."""
    sep = find_violated_inequality(observed)
    if not sep.violated:
        raise NotViolated("the observed behavior violates no inequality with bound zero")
    bound = bound_via_bisection(
        sep.inequality, model, q=sep.quantum_value, tolerance=tolerance,
        known_eta=known_eta, oracle=oracle,
    )
    return Certification(bound, sep.inequality, sep.quantum_value)


@dataclass(frozen=True)
class CurvePoint:
    known_eta: float
    bound: float | None   # None: not reachable even with a perfect unknown detector
    q: float


def unknown_vs_known_curve(
    ineq: BellInequality,
    known_etas,
    q: float,
    model: ModelClass,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[CurvePoint]:
    """Lower bound on the unknown detector against the known detector's efficiency."""
    if q <= 0:
        raise ValueError("the curve needs a positive quantum value q")
    oracle = Oracle(model, ineq.scenario)
    points = []
    for k in known_etas:
        try:
            b = bound_via_bisection(ineq, model, q=q, tolerance=tolerance,
                                    known_eta=float(k), oracle=oracle)
            points.append(CurvePoint(float(k), b.eta_lower, q))
        except NeverViolated:
            points.append(CurvePoint(float(k), None, q))
    return points
