import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from doobpoly import models
from doobpoly.simkit import SimConfig, sde_paths
from doobpoly.stats import (
    ComparisonReport,
    energy_distance,
    energy_permutation_test,
    ks_two_sample,
    moment_report,
)

scipy_stats = pytest.importorskip("scipy.stats")

samples = arrays(np.float64, st.integers(1, 60), elements=st.floats(-50, 50))


@settings(max_examples=200)
@given(samples, samples)
@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_ks_matches_scipy(a, b):
    assert ks_two_sample(a, b) == pytest.approx(scipy_stats.ks_2samp(a, b).statistic, abs=1e-12)


@given(samples, samples)
def test_ks_symmetric_and_monotone_invariant(a, b):
    v = ks_two_sample(a, b)
    assert 0 <= v <= 1
    assert ks_two_sample(b, a) == v
    assert ks_two_sample(np.arctan(a), np.arctan(b)) == pytest.approx(v, abs=1e-12)


def test_ks_examples():
    a = np.arange(10.0)
    assert ks_two_sample(a, a) == 0
    assert ks_two_sample(a, a + 100) == 1
    rng = np.random.default_rng(0)
    assert ks_two_sample(rng.uniform(size=10_000), rng.uniform(size=10_000)) < 0.03
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


def test_energy_examples():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(300, 2))
    assert energy_distance(a, a) == pytest.approx(0, abs=1e-12)
    assert energy_distance(np.zeros((5, 2)), np.tile([1.0, 0.0], (7, 1))) == pytest.approx(2)
    with pytest.raises(ValueError):
        energy_distance(np.zeros((0, 2)), a)


def test_energy_matches_scipy_in_one_dimension():
    # scipy's energy_distance is the square root of the statistic used here
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=500), rng.normal(0.3, 1.2, size=400)
    assert np.sqrt(energy_distance(a, b)) == pytest.approx(scipy_stats.energy_distance(a, b), rel=1e-9)


def test_energy_permutation_same_law():
    rng = np.random.default_rng(3)
    rep = energy_permutation_test(rng.normal(size=(2000, 2)), rng.normal(size=(2000, 2)), n_perm=300)
    assert rep.kind == "energy" and rep.passed
    assert rep.value >= 0 and rep.details["n_perm"] == 300


def test_energy_permutation_null_matches_direct_recomputation():
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=(40, 2)), rng.normal(size=(30, 2))
    rep = energy_permutation_test(a, b, n_perm=50, seed=11)
    assert rep.value == pytest.approx(energy_distance(a, b), abs=1e-12)
    # rebuild the null by brute force with the same permutation draws
    g = np.random.default_rng(11)
    z = np.vstack([a, b])
    null = []
    for _ in range(50):
        idx = g.permutation(70)[:40]
        mask = np.zeros(70, dtype=bool)
        mask[idx] = True
        null.append(energy_distance(z[mask], z[~mask]))
    assert rep.threshold == pytest.approx(np.quantile(null, 0.99), abs=1e-9)


def test_energy_permutation_detects_shift():
    rng = np.random.default_rng(5)
    rep = energy_permutation_test(rng.normal(size=(500, 2)), rng.normal(0.5, 1, size=(500, 2)), n_perm=200)
    assert not rep.passed


def test_moment_report_examples():
    rng = np.random.default_rng(6)
    a = rng.normal(size=5000)
    assert moment_report(a, a).value == 0
    shifted = moment_report(a, a + 0.5)
    assert not shifted.passed and 1 in shifted.details["flagged_orders"]
    with pytest.raises(ValueError):
        moment_report(a, a, orders=5)


def test_moment_report_ou_stationary():
    m = models.ou(1)
    s = sde_paths(m, [0.0], SimConfig(6.0, 0.01, 20_000, 12))
    ref = np.random.default_rng(13).normal(size=20_000)
    rep = moment_report(s.points[:, 0], ref)
    assert rep.passed, rep.details


def test_report_to_dict():
    r = ComparisonReport("ks", 0.1, 3, 4, 0.2, True, "x")
    assert r.to_dict()["label"] == "x"
