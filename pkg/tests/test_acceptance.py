"""Acceptance criteria, one printed PASS/FAIL line each.

The heavy criteria (level-2 SDPs on the 6x5 scenario, 10^4 random trials)
take tens of minutes on one core.  Run just this file with

    pytest tests/test_acceptance.py -v -s
"""

import time

import numpy as np
import pytest

from detbound.efficiency import eta_crit_symmetric
from detbound.errors import NoThreshold
from detbound.npa import NPARelaxation, npa_max_value
from detbound.reproduce import run_case
from detbound.scenario import (
    BehaviorVector,
    BellInequality,
    Scenario,
    evaluate_inequality,
    i6522_inequality,
    vertex_matrix,
)
from detbound.separation import find_violated_inequality, is_classical
from detbound.simulate import (
    DetectionModel,
    apply_detection_efficiency,
    make_rng,
    maximally_entangled_state,
    quantum_behavior,
    random_directions,
)

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}: {detail}")
        return passed

    return emit


@pytest.fixture(scope="module")
def onesided():
    return run_case("i6522-onesided")


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_1_ch_nonsignalling(report):
    rep, secs = _timed(lambda: run_case("ch-eta", level=0))
    eta = rep.checks[0].observed
    ok = abs(eta - 0.6667) <= 0.002 and secs < 10
    assert report(1, "CH nonsignalling bound", ok,
                  f"etaLower={eta:.5f} (0.6667 +- 0.002), {secs:.1f} s (< 10 s)")


def test_2_ch_quantum(report):
    rep, secs = _timed(lambda: run_case("ch-eta", level=2))
    eta = rep.checks[0].observed
    ok = abs(eta - 0.6667) <= 0.01 and secs < 120
    assert report(2, "CH bound at NPA level 2", ok,
                  f"etaLower={eta:.5f} (0.6667 +- 0.01), {secs:.1f} s (< 120 s)")


def test_3_i6522_level2_maximum(report):
    value, secs = _timed(lambda: npa_max_value(i6522_inequality(), 2))
    ok = abs(value - 3.6791) <= 0.005 and secs < 300
    assert report(3, "I6522 level-2 maximum", ok,
                  f"Q2={value:.5f} (3.6791 +- 0.005), {secs:.1f} s (< 300 s), dim 92")


def test_4_i6522_symmetric_bound(report):
    rep, secs = _timed(lambda: run_case("i6522-eta", level=2))
    eta = rep.checks[0].observed
    ok = 0.86 < eta < 0.95
    assert report(4, "I6522 symmetric bound at level 2", ok,
                  f"etaLower={eta:.5f} (in (0.86, 0.95)), {secs:.1f} s")


def test_5_i6522_one_sided(report, onesided):
    eta = onesided.checks[0].observed
    ok = eta > 0.751 - 0.005
    assert report(5, "I6522 one-sided bound (etaB = 1, q = 0)", ok,
                  f"etaLower={eta:.5f} (> 0.746)")


def test_6_i6522_one_sided_observed_q(report, onesided):
    eta = onesided.checks[1].observed
    formula = onesided.checks[2]
    ok = eta > 0.886 - 0.005 and formula.passed
    assert report(6, "I6522 one-sided bound with Q = 1.971", ok,
                  f"etaLower={eta:.5f} (> 0.881); closed form at witness "
                  f"{formula.observed:.5f} inside the final bracket: {formula.passed}")


def test_7_random_success(report):
    rep, secs = _timed(lambda: run_case("random-success", trials=10_000, seed=2016))
    f3, f6 = rep.artifacts["fraction_n3"], rep.artifacts["fraction_n6"]
    ok = f3 > 0.5 and f6 > 0.97 and secs < 1800
    assert report(7, "random-measurement success rates", ok,
                  f"n=m=3: {f3:.4f} (> 0.5), n=m=6: {f6:.4f} (> 0.97), "
                  f"10^4 trials each, {secs:.0f} s (< 1800 s)")


def test_8_reconstruction_quantum(report):
    rep, secs = _timed(lambda: run_case("eta-recon-quantum", trials=100, seed=7))
    mean, sem = rep.artifacts["mean"], rep.artifacts["sem"]
    ok = 0.765 <= mean <= 0.805 and rep.passed
    assert report(8, "efficiency reconstruction, NPA level 2", ok,
                  f"mean={mean:.4f} +- {sem:.4f} (in [0.765, 0.805]), max bound "
                  f"{max(rep.artifacts['bounds']):.4f} <= 0.9, {secs:.0f} s")


def test_9_reconstruction_nonsignalling(report):
    rep, secs = _timed(lambda: run_case("eta-recon-ns", trials=100, seed=7))
    mean, sem = rep.artifacts["mean"], rep.artifacts["sem"]
    ok = 0.663 <= mean <= 0.703 and rep.passed
    assert report(9, "efficiency reconstruction, nonsignalling", ok,
                  f"mean={mean:.4f} +- {sem:.4f} (in [0.663, 0.703]), {secs:.0f} s")


# -- criterion 10: property suite ----------------------------------------------

def _mixture(sc, rng, support):
    V = vertex_matrix(sc)
    idx = rng.choice(len(V), size=support, replace=False)
    return BehaviorVector.from_flat(sc, rng.dirichlet(np.ones(support)) @ V[idx], clip=True)


def test_10a_vertex_mixtures_never_violated(report):
    rng = make_rng(101)
    bad = 0
    for k in range(1000):
        sc = Scenario(2 + k % 3, 2 + (k // 3) % 3)
        P = _mixture(sc, rng, int(rng.integers(1, 2 ** (sc.n + sc.m))))
        bad += find_violated_inequality(P).violated
    assert report("10a", "10^3 vertex mixtures never Violated", bad == 0, f"{bad} violated")


def test_10b_separation_decomposition_agreement(report):
    rng = make_rng(102)
    disagree = 0
    for k in range(1000):
        sc = Scenario(2 + k % 2, 2 + (k // 2) % 2)
        if k % 2:
            P = _mixture(sc, rng, 3)
        else:
            P = quantum_behavior(maximally_entangled_state(),
                                 random_directions(sc.n, rng), random_directions(sc.m, rng))
        if rng.random() < 0.5:
            P = P.mix(_mixture(sc, rng, 4), float(rng.random()))
        disagree += find_violated_inequality(P).violated == (is_classical(P) is not None)
    assert report("10b", "separation/decomposition LP agreement on 10^3 inputs",
                  disagree == 0, f"{disagree} disagreements")


def test_10c_zero_crossing_identity(report):
    rng = make_rng(103)
    worst, count = 0.0, 0
    while count < 100:
        P = quantum_behavior(maximally_entangled_state(), random_directions(3, rng), random_directions(3, rng))
        res = find_violated_inequality(P)
        if not res.violated:
            continue
        try:
            eta = eta_crit_symmetric(res.inequality, P)
        except NoThreshold:
            continue
        at = apply_detection_efficiency(P, DetectionModel.symmetric(eta))
        worst = max(worst, abs(evaluate_inequality(res.inequality, at)))
        count += 1
    assert report("10c", "zero crossing at eta_crit on 100 violated instances",
                  worst <= 1e-9, f"max |value| = {worst:.2e} (<= 1e-9)")


def test_10d_npa_monotone(report):
    rng = make_rng(104)
    sc = Scenario(2, 2)
    r1, r2 = NPARelaxation(sc, 1), NPARelaxation(sc, 2)
    worst = -np.inf
    for _ in range(20):
        ineq = BellInequality.from_flat(sc, rng.uniform(-1, 1, sc.dimension()))
        worst = max(worst, r2.optimize(ineq).value - r1.optimize(ineq).value)
    assert report("10d", "level 1 >= level 2 on 20 random inequalities", worst <= 1e-6,
                  f"max(level2 - level1) = {worst:.2e} (<= 1e-6)")


def test_10e_known_detector_curves(report):
    rep, secs = _timed(lambda: run_case("known-detector-curve"))
    detail = ", ".join(f"{c.label}: {c.observed}" for c in rep.checks)
    assert report("10e", "known-detector curves (q = 0.04 .. 0.2, NPA level 2)", rep.passed,
                  f"{detail}, {secs:.0f} s")
