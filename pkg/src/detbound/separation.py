"""Bell inequality synthesis by LP separation from the vertices.

The separating LP is

    maximize  h.P   subject to  h.v_k <= 0 for every vertex,  -1 <= h_l <= 1.

Because every constraint passes through the origin, a non-positive optimum
means ``P`` lies in the cone spanned by the vertices, i.e. it is classical up
to an unknown base rate.  The matching decomposition LP finds that cone
certificate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure
from .scenario import (
    DEFAULT_VERTEX_CAP,
    BehaviorVector,
    BellInequality,
    ClassicalityCertificate,
    evaluate_inequality,
    vertex_matrix,
)
from .solvers import LinearProgram, Status, solve_lp

VIOLATION_TOL = 1e-7
CERTIFICATE_TOL = 1e-7


class SeparationStatus(enum.Enum):
    VIOLATED = "Violated"
    CLASSICAL = "Classical"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SeparationResult:
    status: SeparationStatus
    inequality: BellInequality | None = None
    quantum_value: float | None = None
    certificate: ClassicalityCertificate | None = None

    @property
    def violated(self) -> bool:
        return self.status is SeparationStatus.VIOLATED


def _sound(h: np.ndarray, V: np.ndarray, n_singles: int) -> np.ndarray:
    """Push a nearly valid normal vector onto the valid side.

    Every nonzero vertex has at least one single equal to one, so lowering the
    singles coefficients by the worst excess restores ``h.v <= 0`` exactly;
    dividing by ``1 + eps`` keeps the coefficients inside [-1, 1].
    """
    eps = float(np.max(V @ h, initial=0.0))
    if eps <= 0:
        return h
    h = h.copy()
    h[:n_singles] -= eps
    return h / (1 + eps)


def find_violated_inequality(
    behavior: BehaviorVector,
    tolerance: float = VIOLATION_TOL,
    cap: int = DEFAULT_VERTEX_CAP,
) -> SeparationResult:
    """Find the bound-zero Bell inequality most violated by ``behavior``."""
    sc = behavior.scenario
    V = vertex_matrix(sc, cap)[1:]  # the zero vertex gives the trivial row
    P = behavior.flat
    rep = solve_lp(
        LinearProgram(P, A_ub=V, b_ub=np.zeros(len(V)), bounds=(-1.0, 1.0))
    )
    if not rep.optimal:
        raise SolverFailure(f"separation LP failed: {rep.status.value} {rep.message}")
    if rep.value > tolerance:
        h = _sound(rep.x, V, sc.n + sc.m)
        ineq = BellInequality.from_flat(sc, h)
        q = evaluate_inequality(ineq, behavior)
        if q > tolerance:
            return SeparationResult(SeparationStatus.VIOLATED, ineq, q)
    cert = _cone_certificate(behavior, cap)
    if cert is None:
        return SeparationResult(SeparationStatus.INCONCLUSIVE)
    return SeparationResult(SeparationStatus.CLASSICAL, certificate=cert)


def _cone_certificate(behavior: BehaviorVector, cap: int) -> ClassicalityCertificate | None:
    sc = behavior.scenario
    V = vertex_matrix(sc, cap)
    nz = V[1:]
    P = behavior.flat
    # smallest total weight on the nonzero vertices that reproduces P
    rep = solve_lp(
        LinearProgram(-np.ones(len(nz)), A_eq=nz.T, b_eq=P, bounds=(0.0, None))
    )
    if rep.status is Status.INFEASIBLE:
        return None
    if not rep.optimal:
        raise SolverFailure(f"decomposition LP failed: {rep.status.value} {rep.message}")
    mu = np.clip(rep.x, 0.0, None)
    total = float(mu.sum())
    if total <= 1.0:
        scale = 1.0
        weights = [(0, 1.0 - total)] if total < 1.0 else []
        weights += [(k + 1, float(w)) for k, w in enumerate(mu) if w > 0]
    else:
        scale = total
        weights = [(k + 1, float(w / total)) for k, w in enumerate(mu) if w > 0]
    cert = ClassicalityCertificate(sc, tuple(weights), scale)
    residual = float(np.max(np.abs(cert.reconstruct() - P), initial=0.0))
    if residual > CERTIFICATE_TOL:
        return None
    return ClassicalityCertificate(sc, tuple(weights), scale, residual)


def is_classical(
    behavior: BehaviorVector,
    rescale: bool = True,
    cap: int = DEFAULT_VERTEX_CAP,
) -> ClassicalityCertificate | None:
    """Return a vertex decomposition of ``behavior`` or None if none exists.

    With ``rescale`` (the default) the decomposition may carry a scale above
    one, which is the notion of classicality that matters when the base rate
    of the counts is unknown; this always agrees with
    :func:`find_violated_inequality`.  ``rescale=False`` asks for an ordinary
    convex decomposition (membership in the local polytope).
    """
    cert = _cone_certificate(behavior, cap)
    if cert is None or (not rescale and not cert.is_convex):
        return None
    return cert
