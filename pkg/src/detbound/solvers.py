"""Uniform LP/SDP interface.

LPs go to HiGHS through :func:`scipy.optimize.linprog`; SDPs are modelled with
cvxpy and solved by Clarabel (SCS as fallback).  Every problem is a
maximization.  Tolerances live here so callers share one set of thresholds.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

log = logging.getLogger(__name__)

LP_TOL = 1e-8
SDP_FEAS_TOL = 1e-8
SDP_PSD_TOL = 1e-7
VALUE_TOL = 1e-6
SCS_EPS = 1e-6


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolveReport:
    status: Status
    value: float | None = None
    x: np.ndarray | None = None
    matrix: np.ndarray | None = None
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class LinearProgram:
    """maximize ``objective . x`` s.t. ``A_ub x <= b_ub``, ``A_eq x == b_eq``, bounds.

    ``bounds`` is one ``(lo, hi)`` pair per variable (``None`` = infinite) or a
    single pair applied to all; the default leaves every variable free.
    """

    objective: np.ndarray
    A_ub: np.ndarray | sp.spmatrix | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | sp.spmatrix | None = None
    b_eq: np.ndarray | None = None
    bounds: Sequence[tuple[float | None, float | None]] | tuple = (None, None)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective coefficients must be finite")
        nvar = self.objective.shape[0]
        for A, b in ((self.A_ub, self.b_ub), (self.A_eq, self.b_eq)):
            if A is None:
                continue
            if A.shape[1] != nvar or b is None or A.shape[0] != len(b):
                raise ValueError("constraint matrix and rhs dimensions are inconsistent")

    @classmethod
    def from_constraints(cls, objective, constraints, bounds=(None, None)) -> "LinearProgram":
        """Build from ``(coefficients, relation, rhs)`` triples, relation in <=, =, >=."""
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for coeffs, rel, rhs in constraints:
            coeffs = np.asarray(coeffs, dtype=float)
            if rel in ("<=", "≤"):
                ub_rows.append(coeffs)
                ub_rhs.append(rhs)
            elif rel in (">=", "≥"):
                ub_rows.append(-coeffs)
                ub_rhs.append(-rhs)
            elif rel in ("=", "=="):
                eq_rows.append(coeffs)
                eq_rhs.append(rhs)
            else:
                raise ValueError(f"unknown relation {rel!r}")
        return cls(
            objective,
            np.array(ub_rows) if ub_rows else None,
            np.array(ub_rhs, dtype=float) if ub_rows else None,
            np.array(eq_rows) if eq_rows else None,
            np.array(eq_rhs, dtype=float) if eq_rows else None,
            bounds,
        )


def _primal_residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    if lp.A_ub is not None:
        worst = max(worst, float(np.max(lp.A_ub @ x - lp.b_ub, initial=0.0)))
    if lp.A_eq is not None:
        worst = max(worst, float(np.max(np.abs(lp.A_eq @ x - lp.b_eq), initial=0.0)))
    return worst


def solve_lp(lp: LinearProgram) -> SolveReport:
    res = linprog(
        -lp.objective,
        A_ub=lp.A_ub,
        b_ub=lp.b_ub,
        A_eq=lp.A_eq,
        b_eq=lp.b_eq,
        bounds=lp.bounds,
        method="highs",
        options={"primal_feasibility_tolerance": LP_TOL, "dual_feasibility_tolerance": LP_TOL},
    )
    if res.status == 0:
        return SolveReport(
            Status.OPTIMAL,
            value=float(-res.fun),
            x=res.x,
            primal_residual=_primal_residual(lp, res.x),
            dual_residual=0.0,
            message=res.message,
        )
    if res.status == 2:
        return SolveReport(Status.INFEASIBLE, message=res.message)
    if res.status == 3:
        return SolveReport(Status.UNBOUNDED, message=res.message)
    log.warning("linprog failed: %s", res.message)
    return SolveReport(Status.NUMERICAL_FAILURE, message=res.message)


@dataclass
class SemidefiniteProgram:
    """A symmetric matrix whose entries are shared scalar variables.

    ``labels[r, c]`` names the scalar variable sitting at entry (r, c); entries
    with equal labels are equal.  ``fixed`` pins variables to constants and
    ``objective`` maps variables to coefficients (maximized).  With
    ``maximize_min_eigenvalue`` the objective is replaced by the largest ``t``
    such that ``matrix - t I`` stays PSD, which turns a feasibility question
    into a well-posed optimization.
    """

    labels: np.ndarray
    fixed: Mapping[int, float] = field(default_factory=dict)
    objective: Mapping[int, float] = field(default_factory=dict)
    maximize_min_eigenvalue: bool = False

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        d = self.labels.shape[0]
        if self.labels.shape != (d, d) or not np.array_equal(self.labels, self.labels.T):
            raise ValueError("labels must be a square symmetric integer matrix")
        used = set(np.unique(self.labels).tolist())
        for var in list(self.fixed) + list(self.objective):
            if var not in used:
                raise ValueError(f"variable {var} does not appear in the matrix")

    @property
    def dim(self) -> int:
        return self.labels.shape[0]

    @property
    def num_vars(self) -> int:
        return int(self.labels.max()) + 1


def _sdp_solve(problem):
    import cvxpy as cp

    # SCS stalls for minutes on degenerate NPA optima; it is only a fallback
    order = ("CLARABEL", "SCS")
    last = None
    for name in order:
        if name not in cp.installed_solvers():
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                if name == "SCS":
                    problem.solve(solver=name, eps_abs=SCS_EPS, eps_rel=SCS_EPS, max_iters=100_000)
                else:
                    problem.solve(solver=name)
        except cp.error.SolverError as exc:
            last = exc
            continue
        if problem.status == "optimal_inaccurate":
            log.info("%s returned an inaccurate optimum", name)
        if problem.status in ("optimal", "optimal_inaccurate", "infeasible", "unbounded"):
            return problem.status
        last = problem.status
    log.warning("SDP solvers failed: %s", last)
    return "failure"


class SDPSession:
    """A compiled SDP whose objective can be changed between solves.

    Consecutive solves warm-start from the previous optimum, which makes a
    bisection over a family of objectives far cheaper than cold solves.
    """

    def __init__(self, labels, fixed: Mapping[int, float] | None = None,
                 maximize_min_eigenvalue: bool = False):
        import cvxpy as cp

        base = SemidefiniteProgram(labels, dict(fixed or {}), {}, maximize_min_eigenvalue)
        self.labels = base.labels
        self.fixed = dict(base.fixed)
        self.maximize_min_eigenvalue = maximize_min_eigenvalue
        d, K = base.dim, base.num_vars
        self.dim, self.num_vars = d, K
        self._F = sp.csr_matrix((np.ones(d * d), (np.arange(d * d), self.labels.ravel())),
                                shape=(d * d, K))
        self._x = cp.Variable(K)
        gamma = cp.reshape(self._F @ self._x, (d, d), order="C")
        # labels are symmetric, so this only tells cvxpy what is already true
        gamma = (gamma + gamma.T) / 2
        constraints = []
        if self.fixed:
            idx = np.array(list(self.fixed), dtype=int)
            constraints.append(self._x[idx] == np.array([self.fixed[i] for i in idx]))
        self._c = cp.Parameter(K)
        if maximize_min_eigenvalue:
            t = cp.Variable()
            constraints += [gamma - t * np.eye(d) >> 0, t <= 1.0]
            objective = t
        else:
            constraints.append(gamma >> 0)
            objective = self._c @ self._x
        self._problem = cp.Problem(cp.Maximize(objective), constraints)

    def solve(self, objective: Mapping[int, float] | None = None) -> SolveReport:
        c = np.zeros(self.num_vars)
        for var, coeff in (objective or {}).items():
            if not 0 <= var < self.num_vars:
                raise ValueError(f"objective references unknown variable {var}")
            c[var] += coeff
        self._c.value = c
        status = _sdp_solve(self._problem)
        if status == "infeasible":
            return SolveReport(Status.INFEASIBLE)
        if status == "unbounded":
            return SolveReport(Status.UNBOUNDED)
        x = self._x.value
        if status == "failure" or x is None:
            return SolveReport(Status.NUMERICAL_FAILURE, message=str(self._problem.status))
        xv = np.asarray(x, dtype=float)
        G = (self._F @ xv).reshape(self.dim, self.dim)
        G = (G + G.T) / 2
        pinned = max((abs(xv[i] - v) for i, v in self.fixed.items()), default=0.0)
        min_eig = float(np.linalg.eigvalsh(G)[0])
        return SolveReport(
            Status.OPTIMAL,
            value=float(self._problem.value),
            x=xv,
            matrix=G,
            primal_residual=pinned if self.maximize_min_eigenvalue else max(pinned, -min_eig, 0.0),
            dual_residual=0.0,
            message=str(self._problem.status),
        )


def solve_sdp(sdp: SemidefiniteProgram) -> SolveReport:
    session = SDPSession(sdp.labels, sdp.fixed, sdp.maximize_min_eigenvalue)
    return session.solve(sdp.objective)
