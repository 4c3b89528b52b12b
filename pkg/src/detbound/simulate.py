"""Two-qubit behaviors from projective dichotomic measurements, with losses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidBehavior
from .scenario import BehaviorVector, CountRecord

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator so that seeds give reproducible, independent streams."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("a two-qubit density matrix is 4x4")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def reduced(self, party: int) -> np.ndarray:
        r = self.rho.reshape(2, 2, 2, 2)
        return np.einsum("ijkj->ik", r) if party == 0 else np.einsum("ijil->jl", r)


def maximally_entangled_state() -> TwoQubitState:
    """|Phi+> = (|00> + |11>)/sqrt(2)."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return TwoQubitState(np.outer(psi, psi.conj()))


def depolarized_state(visibility: float) -> TwoQubitState:
    """Mixture ``v |Phi+><Phi+| + (1 - v) I/4``."""
    if not 0 <= visibility <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    return TwoQubitState(
        visibility * maximally_entangled_state().rho + (1 - visibility) * np.eye(4) / 4
    )


def product_state(a: np.ndarray, b: np.ndarray) -> TwoQubitState:
    """Tensor product of two single-qubit pure states given as 2-vectors."""
    a = np.asarray(a, dtype=complex) / np.linalg.norm(a)
    b = np.asarray(b, dtype=complex) / np.linalg.norm(b)
    psi = np.kron(a, b)
    return TwoQubitState(np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class MeasurementDirection:
    bloch: np.ndarray

    def __post_init__(self):
        v = np.array(self.bloch, dtype=float)
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
            raise ValueError("a measurement direction is a unit 3-vector")
        v.setflags(write=False)
        object.__setattr__(self, "bloch", v)

    @classmethod
    def normalized(cls, v) -> "MeasurementDirection":
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    def projector(self) -> np.ndarray:
        """Projector onto the +1 eigenspace of ``n . sigma``."""
        return (I2 + np.einsum("k,kij->ij", self.bloch, PAULI)) / 2


def random_directions(count: int, seed) -> list[MeasurementDirection]:
    """``count`` directions drawn uniformly from the unit sphere."""
    rng = make_rng(seed)
    out = []
    while len(out) < count:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            out.append(MeasurementDirection(v / norm))
    return out


def random_direction(seed) -> MeasurementDirection:
    return random_directions(1, seed)[0]


def quantum_behavior(
    state: TwoQubitState,
    a_dirs: list[MeasurementDirection],
    b_dirs: list[MeasurementDirection],
) -> BehaviorVector:
    """Ideal (lossless) +1 probabilities for the given measurement directions."""
    PA = np.array([d.projector() for d in a_dirs])
    PB = np.array([d.projector() for d in b_dirs])
    rho = state.rho.reshape(2, 2, 2, 2)  # (a, b, a', b')
    pA = np.einsum("xij,jbib->x", PA, rho).real
    pB = np.einsum("yij,ajai->y", PB, rho).real
    pAB = np.einsum("xij,ykl,jlik->xy", PA, PB, rho).real
    return BehaviorVector(
        np.clip(pA, 0, 1), np.clip(pB, 0, 1), np.clip(pAB, 0, 1)
    )


@dataclass(frozen=True)
class DetectionModel:
    eta_a: float
    eta_b: float

    def __post_init__(self):
        if not (0 <= self.eta_a <= 1 and 0 <= self.eta_b <= 1):
            raise ValueError("detection efficiencies must lie in [0, 1]")

    @classmethod
    def symmetric(cls, eta: float) -> "DetectionModel":
        return cls(eta, eta)


def apply_detection_efficiency(behavior: BehaviorVector, model: DetectionModel) -> BehaviorVector:
    """Losses remove +1 events: singles scale by one efficiency, joints by both."""
    return BehaviorVector(
        model.eta_a * behavior.pA,
        model.eta_b * behavior.pB,
        model.eta_a * model.eta_b * behavior.pAB,
    )


def sample_counts(
    behavior: BehaviorVector,
    trials_per_context: int,
    seed,
    singles_context: tuple[int, int] = (0, 0),
) -> CountRecord:
    """Simulate ``trials_per_context`` runs of every setting pair.

    Each run of context (i, j) yields one of ++, +-, -+, -- with probabilities
    pAB, pA - pAB, pB - pAB and the remainder.  Singles for ``A_i`` are read off
    the context ``(i, singles_context[1])`` and for ``B_j`` off
    ``(singles_context[0], j)`` so that no event is counted twice.
    """
    if trials_per_context < 1:
        raise ValueError("trials_per_context must be >= 1")
    n, m = behavior.scenario.n, behavior.scenario.m
    jA, iB = singles_context
    if not (0 <= jA < m and 0 <= iB < n):
        raise ValueError("singles_context is outside the scenario")
    rng = make_rng(seed)
    nA, nB = [0] * n, [0] * m
    nAB = [[0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            pa, pb, pab = behavior.pA[i], behavior.pB[j], behavior.pAB[i, j]
            if pab > min(pa, pb) + 1e-9 or pa + pb - pab > 1 + 1e-9:
                raise InvalidBehavior(
                    f"context ({i}, {j}) has no valid outcome distribution"
                )
            probs = np.clip([pab, pa - pab, pb - pab, 1 - pa - pb + pab], 0, None)
            pp, pm, mp, _ = rng.multinomial(trials_per_context, probs / probs.sum())
            nAB[i][j] = int(pp)
            if j == jA:
                nA[i] = int(pp + pm)
            if i == iB:
                nB[j] = int(pp + mp)
    return CountRecord(tuple(nA), tuple(nB), tuple(map(tuple, nAB)), trials_per_context)
