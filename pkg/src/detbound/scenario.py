"""Measurement scenarios, behaviors, Bell inequalities and polytope vertices.

Every vector quantity uses one flattening order::

    (pA_1..pA_n, pB_1..pB_m, pAB_11, pAB_12, ..., pAB_1m, pAB_21, ..., pAB_nm)

i.e. Alice's singles, Bob's singles, then the joint grid row-major over (i, j).
Bell inequalities always have classical bound 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapExceeded, DimensionMismatch, InvalidBaseRate

GEOMETRY_TOL = 1e-9
DEFAULT_VERTEX_CAP = 20  # log2 of the maximum number of vertices


def _frozen(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if shape is not None and arr.shape != shape:
        raise DimensionMismatch(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    """Two parties with ``n`` and ``m`` dichotomic observables."""

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m or self.n < 1 or self.m < 1:
            raise ValueError(f"scenario needs n, m >= 1 (got {self.n}, {self.m})")

    def dimension(self) -> int:
        return self.n + self.m + self.n * self.m

    def split(self, flat):
        """Split a flat vector into its (A, B, AB) blocks."""
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.dimension(),):
            raise DimensionMismatch(
                f"vector of length {flat.shape} does not fit Scenario({self.n}, {self.m})"
            )
        n, m = self.n, self.m
        return flat[:n], flat[n:n + m], flat[n + m:].reshape(n, m)


@dataclass(frozen=True, eq=False)
class BehaviorVector:
    """Probabilities of the +1 outcomes: singles ``pA``, ``pB`` and joints ``pAB``."""

    pA: np.ndarray
    pB: np.ndarray
    pAB: np.ndarray

    def __post_init__(self):
        pA = np.atleast_1d(np.array(self.pA, dtype=float))
        pB = np.atleast_1d(np.array(self.pB, dtype=float))
        pAB = np.array(self.pAB, dtype=float).reshape(len(pA), len(pB))
        for name, arr in (("pA", pA), ("pB", pB), ("pAB", pAB)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            if arr.min(initial=0.0) < -GEOMETRY_TOL or arr.max(initial=0.0) > 1 + GEOMETRY_TOL:
                raise ValueError(f"{name} has entries outside [0, 1]")
            object.__setattr__(self, name, _frozen(np.clip(arr, 0.0, 1.0)))

    @classmethod
    def from_flat(cls, scenario: Scenario, flat, clip: bool = False) -> "BehaviorVector":
        """Build from the flat vector; ``clip`` forces solver round-off back into [0, 1]."""
        flat = np.asarray(flat, dtype=float)
        if clip:
            flat = np.clip(flat, 0.0, 1.0)
        pA, pB, pAB = scenario.split(flat)
        return cls(pA, pB, pAB)

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.pA), len(self.pB))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.pA, self.pB, self.pAB.ravel()])

    def mix(self, other: "BehaviorVector", alpha: float) -> "BehaviorVector":
        """Convex mixture ``alpha * self + (1 - alpha) * other``."""
        if other.scenario != self.scenario:
            raise DimensionMismatch("cannot mix behaviors of different scenarios")
        return BehaviorVector.from_flat(
            self.scenario, alpha * self.flat + (1 - alpha) * other.flat, clip=True
        )


@dataclass(frozen=True, eq=False)
class BellInequality:
    """Linear functional ``hA.pA + hB.pB + sum(hAB * pAB) <= 0``."""

    hA: np.ndarray
    hB: np.ndarray
    hAB: np.ndarray

    def __post_init__(self):
        hA = np.atleast_1d(np.array(self.hA, dtype=float))
        hB = np.atleast_1d(np.array(self.hB, dtype=float))
        hAB = np.array(self.hAB, dtype=float)
        if hAB.shape != (len(hA), len(hB)):
            raise DimensionMismatch(
                f"hAB must be {len(hA)}x{len(hB)}, got shape {hAB.shape}"
            )
        for name, arr in (("hA", hA), ("hB", hB), ("hAB", hAB)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite coefficients")
            object.__setattr__(self, name, _frozen(arr))

    @classmethod
    def from_flat(cls, scenario: Scenario, flat) -> "BellInequality":
        hA, hB, hAB = scenario.split(flat)
        return cls(hA, hB, hAB)

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.hA), len(self.hB))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.hA, self.hB, self.hAB.ravel()])

    def parts(self, behavior: BehaviorVector) -> tuple[float, float, float]:
        """Return the (Alice singles, Bob singles, joint) contributions to the value."""
        if behavior.scenario != self.scenario:
            raise DimensionMismatch(
                f"inequality is for {self.scenario}, behavior is for {behavior.scenario}"
            )
        return (
            float(self.hA @ behavior.pA),
            float(self.hB @ behavior.pB),
            float(np.sum(self.hAB * behavior.pAB)),
        )

    def scaled(self, eta_a: float, eta_b: float) -> "BellInequality":
        """The functional seen through detectors of efficiency ``eta_a``, ``eta_b``.

        Evaluating the result on an ideal behavior equals evaluating ``self`` on the
        lossy behavior.
        """
        return BellInequality(self.hA * eta_a, self.hB * eta_b, self.hAB * (eta_a * eta_b))

    def transpose(self) -> "BellInequality":
        """Swap the roles of Alice and Bob."""
        return BellInequality(self.hB, self.hA, self.hAB.T)


@dataclass(frozen=True)
class CountRecord:
    """Observed +1 counts with ``trials_per_context`` trials in every context."""

    nA: tuple[int, ...]
    nB: tuple[int, ...]
    nAB: tuple[tuple[int, ...], ...]
    trials_per_context: int

    def __post_init__(self):
        nA = tuple(int(x) for x in self.nA)
        nB = tuple(int(x) for x in self.nB)
        nAB = tuple(tuple(int(x) for x in row) for row in self.nAB)
        if len(nAB) != len(nA) or any(len(row) != len(nB) for row in nAB):
            raise DimensionMismatch("nAB must be an n x m grid")
        if self.trials_per_context < 1:
            raise ValueError("trials_per_context must be >= 1")
        everything = nA + nB + sum(nAB, ())
        if any(x < 0 for x in everything):
            raise ValueError("counts must be non-negative")
        if any(x > self.trials_per_context for x in everything):
            raise ValueError("a count exceeds trials_per_context")
        object.__setattr__(self, "nA", nA)
        object.__setattr__(self, "nB", nB)
        object.__setattr__(self, "nAB", nAB)

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.nA), len(self.nB))

    def scaled(self, k: int) -> "CountRecord":
        return CountRecord(
            tuple(k * x for x in self.nA),
            tuple(k * x for x in self.nB),
            tuple(tuple(k * x for x in row) for row in self.nAB),
            k * self.trials_per_context,
        )


@dataclass(frozen=True)
class ClassicalityCertificate:
    """Vertex weights reproducing a behavior: ``P = scale * sum_k w_k v_k``.

    ``scale == 1`` is an ordinary convex decomposition.  ``scale > 1`` means the
    behavior is only classical up to the unknown base rate (it lies in the cone
    spanned by the vertices); no inequality with bound 0 separates it.
    """

    scenario: Scenario
    weights: tuple[tuple[int, float], ...]
    scale: float = 1.0
    residual: float = field(default=0.0, compare=False)

    def reconstruct(self) -> np.ndarray:
        V = vertex_matrix(self.scenario)
        out = np.zeros(self.scenario.dimension())
        for k, w in self.weights:
            out += w * V[k]
        return self.scale * out

    @property
    def is_convex(self) -> bool:
        return self.scale <= 1 + 1e-9


def _check_cap(scenario: Scenario, cap: int):
    if scenario.n + scenario.m > cap:
        raise CapExceeded(
            f"2^{scenario.n + scenario.m} vertices exceeds the cap of 2^{cap}"
        )


@lru_cache(maxsize=32)
def _vertex_matrix(n: int, m: int) -> np.ndarray:
    k = np.arange(2 ** (n + m))
    shifts = np.arange(n + m - 1, -1, -1)
    bits = (k[:, None] >> shifts[None, :]) & 1
    a, b = bits[:, :n], bits[:, n:]
    joint = (a[:, :, None] * b[:, None, :]).reshape(len(k), n * m)
    V = np.hstack([a, b, joint]).astype(float)
    V.setflags(write=False)
    return V


def vertex_matrix(scenario: Scenario, cap: int = DEFAULT_VERTEX_CAP) -> np.ndarray:
    """All deterministic vertices as rows, ordered by binary index.

    Alice's bits form the high-order block, with ``a_1`` the most significant bit.
    """
    _check_cap(scenario, cap)
    return _vertex_matrix(scenario.n, scenario.m)


def enumerate_vertices(scenario: Scenario, cap: int = DEFAULT_VERTEX_CAP) -> list[BehaviorVector]:
    V = vertex_matrix(scenario, cap)
    return [BehaviorVector.from_flat(scenario, row) for row in V]


def behavior_from_counts(counts: CountRecord, base_rate: int) -> BehaviorVector:
    """Divide every count by ``base_rate``.

    The result is not clamped: an entry above one means the base rate was too
    small and raises :class:`InvalidBaseRate`.
    """
    if base_rate <= 0:
        raise InvalidBaseRate(f"base rate must be positive, got {base_rate}")
    pA = [x / base_rate for x in counts.nA]
    pB = [x / base_rate for x in counts.nB]
    pAB = [[x / base_rate for x in row] for row in counts.nAB]
    worst = max(pA + pB + sum(pAB, []))
    if worst > 1 + GEOMETRY_TOL:
        raise InvalidBaseRate(
            f"base rate {base_rate} yields a probability of {worst:.6g} > 1"
        )
    return BehaviorVector(pA, pB, pAB)


def evaluate_inequality(ineq: BellInequality, behavior: BehaviorVector) -> float:
    """Quantum value ``Q = h.P``; the behavior violates the inequality iff Q > 0."""
    return float(sum(ineq.parts(behavior)))


def validate_inequality(ineq: BellInequality, cap: int = DEFAULT_VERTEX_CAP) -> bool:
    """Check ``h.v <= 1e-9`` on every vertex of the inequality's scenario."""
    V = vertex_matrix(ineq.scenario, cap)
    return bool(np.max(V @ ineq.flat) <= GEOMETRY_TOL)


def ch_inequality() -> BellInequality:
    """The Clauser-Horne inequality, normal vector (-1, 0, -1, 0, 1, 1, 1, -1)."""
    return BellInequality([-1, 0], [-1, 0], [[1, 1], [1, -1]])


def i6522_inequality() -> BellInequality:
    """A 6x5 inequality found from random measurements on a maximally entangled pair."""
    return BellInequality(
        [-4, -6, -6, -4, -6, 0],
        [-2, -6, -4, -6, -6],
        [
            [6, 0, 2, 2, -2],
            [-6, 6, 6, 2, 4],
            [0, 3, -2, 5, 5],
            [0, -3, -2, 6, 6],
            [6, 6, 0, -6, 6],
            [-2, 0, 4, 4, -6],
        ],
    )
