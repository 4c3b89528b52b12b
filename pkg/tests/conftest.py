import numpy as np
import pytest

from detbound.scenario import BehaviorVector, Scenario, vertex_matrix
from detbound.simulate import MeasurementDirection, maximally_entangled_state, quantum_behavior

SQRT2 = np.sqrt(2.0)
CH_TSIRELSON = (SQRT2 - 1) / 2
ETA_TSIRELSON = 2 * (SQRT2 - 1)


def xz(theta):
    return MeasurementDirection([np.sin(theta), 0.0, np.cos(theta)])


def tsirelson_behavior() -> BehaviorVector:
    """|Phi+> at the CHSH-optimal angles: singles 1/2, joints (1 + cos(a - b))/4."""
    a = [xz(0.0), xz(np.pi / 2)]
    b = [xz(np.pi / 4), xz(-np.pi / 4)]
    return quantum_behavior(maximally_entangled_state(), a, b)


def pr_box() -> BehaviorVector:
    return BehaviorVector([0.5, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.0]])


def uniform_behavior(n=2, m=2) -> BehaviorVector:
    return BehaviorVector([0.5] * n, [0.5] * m, [[0.25] * m for _ in range(n)])


def random_mixture(scenario: Scenario, rng, support=None) -> BehaviorVector:
    V = vertex_matrix(scenario)
    k = len(V) if support is None else support
    idx = rng.choice(len(V), size=min(k, len(V)), replace=False)
    w = rng.dirichlet(np.ones(len(idx)))
    return BehaviorVector.from_flat(scenario, w @ V[idx], clip=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tsirelson():
    return tsirelson_behavior()
