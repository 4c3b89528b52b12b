"""NPA relaxations of the quantum set for dichotomic two-party scenarios.

Only the +1 projectors ``A_i`` and ``B_j`` act as generators.  A word is a tuple
of ``(party, setting)`` symbols with party 0 for Alice and 1 for Bob.  Words are
reduced by moving Alice's symbols in front of Bob's (the parties commute) and
collapsing repeated neighbours (projectors are idempotent).  Because the
relaxation is real symmetric, a word and its adjoint label the same moment.

Level 0 is the nonsignalling polytope and is solved as an LP over full
four-outcome tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, SizeExceeded, SolverFailure, Unbounded
from .scenario import BehaviorVector, BellInequality, Scenario
from .solvers import (
    SDP_PSD_TOL,
    LinearProgram,
    SDPSession,
    SemidefiniteProgram,
    Status,
    solve_lp,
    solve_sdp,
)

DEFAULT_SIZE_CAP = 2000
FEASIBILITY_TOL = 1e-7

Word = tuple[tuple[int, int], ...]
IDENTITY: Word = ()


def _collapse(symbols) -> list:
    out = []
    for s in symbols:
        if not out or out[-1] != s:
            out.append(s)
    return out


def reduce_word(word) -> Word:
    """Normal form under party commutation and projector idempotence."""
    a = _collapse(s for s in word if s[0] == 0)
    b = _collapse(s for s in word if s[0] == 1)
    return tuple(a + b)


def adjoint(word: Word) -> Word:
    w = reduce_word(word)
    a = [s for s in w if s[0] == 0]
    b = [s for s in w if s[0] == 1]
    return tuple(a[::-1] + b[::-1])


def canonical(word) -> Word:
    """Representative shared by a word and its adjoint (moments are real)."""
    w = reduce_word(word)
    return min(w, adjoint(w))


def _party_words(party: int, count: int, length: int):
    for seq in itertools.product(range(count), repeat=length):
        if all(x != y for x, y in zip(seq, seq[1:])):
            yield tuple((party, s) for s in seq)


def _words_of_length(scenario: Scenario, length: int) -> list[Word]:
    words = []
    for la in range(length, -1, -1):
        for wa in _party_words(0, scenario.n, la):
            for wb in _party_words(1, scenario.m, length - la):
                words.append(wa + wb)
    return sorted(words)


def generating_words(scenario: Scenario, level) -> list[Word]:
    """Words indexing the moment matrix, shortest first then lexicographic.

    ``level`` is an integer k (all reduced words up to length k) or the
    string ``"1+AB"`` (level 1 plus the products ``A_i B_j``).
    """
    if level == "1+AB":
        base = generating_words(scenario, 1)
        return base + [((0, i), (1, j)) for i in range(scenario.n) for j in range(scenario.m)]
    k = int(level)
    if k < 1:
        raise ValueError("moment-matrix levels start at 1; level 0 is the nonsignalling LP")
    out: list[Word] = []
    for length in range(k + 1):
        out.extend(_words_of_length(scenario, length))
    return out


@dataclass(frozen=True, eq=False)
class MomentStructure:
    scenario: Scenario
    level: object
    words: tuple[Word, ...]
    labels: np.ndarray            # (d, d) index into ``moments``
    moments: tuple[Word, ...]     # canonical word of each scalar variable
    behavior_vars: np.ndarray     # variable index of each flattened behavior entry
    identity_var: int

    @property
    def dim(self) -> int:
        return len(self.words)

    def word_at(self, row: int, col: int) -> Word:
        return self.moments[self.labels[row, col]]


@lru_cache(maxsize=64)
def _build(n: int, m: int, level, cap: int) -> MomentStructure:
    scenario = Scenario(n, m)
    words = generating_words(scenario, level)
    d = len(words)
    if d > cap:
        raise SizeExceeded(f"moment matrix of dimension {d} exceeds the cap of {cap}")
    index: dict[Word, int] = {}
    labels = np.empty((d, d), dtype=np.int64)
    adj = [adjoint(w) for w in words]
    for r in range(d):
        for c in range(r, d):
            w = canonical(adj[r] + words[c])
            labels[r, c] = labels[c, r] = index.setdefault(w, len(index))
    moments = tuple(sorted(index, key=index.get))

    def var(word):
        try:
            return index[canonical(word)]
        except KeyError:
            raise ValueError(f"level {level} does not contain the moment {word}") from None

    bvars = [var(((0, i),)) for i in range(n)]
    bvars += [var(((1, j),)) for j in range(m)]
    bvars += [var(((0, i), (1, j))) for i in range(n) for j in range(m)]
    labels.setflags(write=False)
    bvars = np.array(bvars)
    bvars.setflags(write=False)
    return MomentStructure(scenario, level, tuple(words), labels, moments, bvars, var(IDENTITY))


def build_moment_structure(scenario: Scenario, level, cap: int = DEFAULT_SIZE_CAP) -> MomentStructure:
    if level != "1+AB":
        level = int(level)
    return _build(scenario.n, scenario.m, level, cap)


def _objective(structure: MomentStructure, coeffs: np.ndarray) -> dict[int, float]:
    obj: dict[int, float] = {}
    for var, c in zip(structure.behavior_vars, coeffs):
        if c != 0:
            obj[int(var)] = obj.get(int(var), 0.0) + float(c)
    return obj


@dataclass
class NPAResult:
    value: float
    behavior: BehaviorVector
    moment_matrix: np.ndarray | None = None


class NPARelaxation:
    """Level-k relaxation that can be maximized for many inequalities in turn.

    Holds one compiled SDP; successive :meth:`optimize` calls warm-start.  Not
    safe to share between threads.
    """

    def __init__(self, scenario: Scenario, level, cap: int = DEFAULT_SIZE_CAP):
        self.structure = build_moment_structure(scenario, level, cap)
        self.scenario = scenario
        self.level = level
        self._session = SDPSession(self.structure.labels, {self.structure.identity_var: 1.0})

    def optimize(self, ineq: BellInequality) -> NPAResult:
        if ineq.scenario != self.scenario:
            raise DimensionMismatch(f"relaxation is for {self.scenario}, got {ineq.scenario}")
        st = self.structure
        rep = self._session.solve(_objective(st, ineq.flat))
        if rep.status is Status.UNBOUNDED:
            raise Unbounded("NPA relaxation reported unbounded; the feasible set is compact")
        if not rep.optimal:
            raise SolverFailure(
                f"NPA level {self.level} solve failed: {rep.status.value} {rep.message}"
            )
        behavior = BehaviorVector.from_flat(self.scenario, rep.x[st.behavior_vars], clip=True)
        return NPAResult(rep.value, behavior, rep.matrix)


def npa_optimize(ineq: BellInequality, level, cap: int = DEFAULT_SIZE_CAP) -> NPAResult:
    """Maximize the inequality over behaviors with a level-``level`` certificate."""
    if level == 0:
        return nonsignalling_optimize(ineq)
    return NPARelaxation(ineq.scenario, level, cap).optimize(ineq)


def npa_max_value(ineq: BellInequality, level, cap: int = DEFAULT_SIZE_CAP) -> float:
    """Upper bound on the quantum maximum of ``ineq`` (level 0 = nonsignalling)."""
    return npa_optimize(ineq, level, cap).value


def npa_certificate(behavior: BehaviorVector, level, cap: int = DEFAULT_SIZE_CAP):
    """Moment matrix for ``behavior`` maximizing its smallest eigenvalue.

    Returns ``(min_eigenvalue, matrix)``; the behavior passes level ``level``
    iff ``min_eigenvalue >= -1e-7``.
    """
    st = build_moment_structure(behavior.scenario, level, cap)
    fixed = {st.identity_var: 1.0}
    for var, p in zip(st.behavior_vars, behavior.flat):
        fixed[int(var)] = float(p)
    rep = solve_sdp(SemidefiniteProgram(st.labels, fixed=fixed, maximize_min_eigenvalue=True))
    if not rep.optimal:
        raise SolverFailure(f"NPA feasibility solve failed: {rep.status.value}")
    return float(np.linalg.eigvalsh(rep.matrix)[0]), rep.matrix


def npa_feasible(behavior: BehaviorVector, level, tol: float = FEASIBILITY_TOL) -> bool:
    if level == 0:
        return nonsignalling_feasible(behavior, tol)
    min_eig, _ = npa_certificate(behavior, level)
    return min_eig >= -max(tol, SDP_PSD_TOL)


# -- level 0: nonsignalling tables ---------------------------------------------

def _table_index(m: int, i: int, j: int, a: int, b: int) -> int:
    # outcome 0 is +1, outcome 1 is -1
    return ((i * m + j) * 4) + 2 * a + b


@lru_cache(maxsize=64)
def _ns_model(n: int, m: int):
    """Equality constraints of the nonsignalling polytope and the map tables -> behavior."""
    nvar = 4 * n * m
    rows, rhs = [], []
    for i, j in itertools.product(range(n), range(m)):
        row = np.zeros(nvar)
        row[[_table_index(m, i, j, a, b) for a in (0, 1) for b in (0, 1)]] = 1
        rows.append(row)
        rhs.append(1.0)
    for i, j in itertools.product(range(n), range(1, m)):
        row = np.zeros(nvar)
        row[[_table_index(m, i, j, 0, b) for b in (0, 1)]] = 1
        row[[_table_index(m, i, 0, 0, b) for b in (0, 1)]] -= 1
        rows.append(row)
        rhs.append(0.0)
    for j, i in itertools.product(range(m), range(1, n)):
        row = np.zeros(nvar)
        row[[_table_index(m, i, j, a, 0) for a in (0, 1)]] = 1
        row[[_table_index(m, 0, j, a, 0) for a in (0, 1)]] -= 1
        rows.append(row)
        rhs.append(0.0)
    T = np.zeros((n + m + n * m, nvar))
    for i in range(n):
        T[i, [_table_index(m, i, 0, 0, b) for b in (0, 1)]] = 1
    for j in range(m):
        T[n + j, [_table_index(m, 0, j, a, 0) for a in (0, 1)]] = 1
    for i, j in itertools.product(range(n), range(m)):
        T[n + m + i * m + j, _table_index(m, i, j, 0, 0)] = 1
    return np.array(rows), np.array(rhs), T


def nonsignalling_optimize(ineq: BellInequality) -> NPAResult:
    sc = ineq.scenario
    A_eq, b_eq, T = _ns_model(sc.n, sc.m)
    rep = solve_lp(LinearProgram(ineq.flat @ T, A_eq=A_eq, b_eq=b_eq, bounds=(0, None)))
    if not rep.optimal:
        raise SolverFailure(f"nonsignalling LP failed: {rep.status.value} {rep.message}")
    return NPAResult(rep.value, BehaviorVector.from_flat(sc, T @ rep.x, clip=True))


def nonsignalling_max_value(ineq: BellInequality) -> float:
    return nonsignalling_optimize(ineq).value


def nonsignalling_feasible(behavior: BehaviorVector, tol: float = FEASIBILITY_TOL) -> bool:
    """Whether nonnegative nonsignalling tables reproduce ``behavior``.

    The tables are solved for with nonnegativity relaxed to ``-tol``.
    """
    sc = behavior.scenario
    A_eq, b_eq, T = _ns_model(sc.n, sc.m)
    lp = LinearProgram(
        np.zeros(T.shape[1]),
        A_eq=np.vstack([A_eq, T]),
        b_eq=np.concatenate([b_eq, behavior.flat]),
        bounds=(-tol, None),
    )
    rep = solve_lp(lp)
    if rep.status is Status.INFEASIBLE:
        return False
    if not rep.optimal:
        raise SolverFailure(f"nonsignalling feasibility LP failed: {rep.message}")
    return True
