import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scvn.errors import InfeasiblePreference, InvalidRank
from scvn.knowledge import (
    KbLibrary,
    arrival_rate_per_kb,
    PreferenceProfile,
    VueProfile,
    capacity_used,
    preference_first_kbc,
    preference_order,
    preference_satisfaction,
    zipf_popularity,
)

from .conftest import PROPERTY


def _profile(ranks, skew=1.0, capacity=10.0):
    n = len(ranks)
    return VueProfile(0, capacity, 100.0, np.full(n, 150.0), PreferenceProfile(np.array(ranks), skew))


def test_zipf_three_kbs():
    assert zipf_popularity(1, 1.0, 3) == pytest.approx(6 / 11)
    assert zipf_popularity(2, 1.0, 3) == pytest.approx(3 / 11)
    assert zipf_popularity(3, 1.0, 3) == pytest.approx(2 / 11)


def test_zipf_uniform_at_zero_skew():
    assert np.allclose(zipf_popularity(np.arange(1, 6), 0.0, 5), 0.2)


def test_zipf_bad_rank():
    for r in (0, 4, 1.5):
        with pytest.raises(InvalidRank):
            zipf_popularity(r, 1.0, 3)


@PROPERTY
@given(st.integers(1, 30), st.floats(0.0, 3.0))
def test_zipf_normalized_and_decreasing(n, skew):
    p = zipf_popularity(np.arange(1, n + 1), skew, n)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(p) <= 1e-15)


def test_preference_satisfaction_and_capacity():
    prof = _profile([1, 2, 3])
    lib = KbLibrary(np.array([2.0, 3.0, 4.0]))
    assert preference_satisfaction([1, 1, 0], prof) == pytest.approx(9 / 11)
    assert capacity_used([1, 0, 1], lib) == 6.0


def test_preference_order_ties_by_index():
    assert preference_order(np.array([0.2, 0.4, 0.2, 0.2])).tolist() == [1, 0, 2, 3]


def test_preference_first_takes_top_then_fills():
    prof = _profile([3, 1, 2], capacity=5.0)
    lib = KbLibrary(np.array([1.0, 2.0, 2.0]))
    alpha = preference_first_kbc(prof, lib, 0.5, seed=0)
    assert alpha[1] == 1  # rank-1 KB alone gives 6/11 >= 0.5
    assert capacity_used(alpha, lib) <= 5.0
    assert alpha.sum() == 3  # everything fits, so the fill takes it all


def test_preference_first_skips_oversized():
    prof = _profile([1, 2, 3], capacity=3.0)
    lib = KbLibrary(np.array([5.0, 1.0, 1.0]))
    alpha = preference_first_kbc(prof, lib, 0.4, seed=0)
    assert alpha.tolist() == [0, 1, 1]


def test_preference_first_infeasible():
    prof = _profile([1, 2, 3], capacity=1.0)
    lib = KbLibrary(np.array([2.0, 2.0, 2.0]))
    with pytest.raises(InfeasiblePreference):
        preference_first_kbc(prof, lib, 0.1, seed=0)


@PROPERTY
@given(st.integers(1, 20), st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_preference_first_feasible_whenever_returned(n, skew, eta0, seed):
    rng = np.random.default_rng(seed)
    lib = KbLibrary.random(n, 1, 5, rng)
    prof = VueProfile(0, float(rng.uniform(1, 30)), 100.0, np.full(n, 150.0),
                      PreferenceProfile.random(n, skew, rng))
    try:
        alpha = preference_first_kbc(prof, lib, eta0, rng)
    except InfeasiblePreference:
        return
    assert capacity_used(alpha, lib) <= prof.capacity
    assert preference_satisfaction(alpha, prof) >= eta0 - 1e-12


def test_profile_validation():
    with pytest.raises(ValueError):
        PreferenceProfile(np.array([1, 1, 2]), 1.0)
    with pytest.raises(ValueError):
        KbLibrary(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        VueProfile(0, 1.0, 100.0, np.array([1.0]), PreferenceProfile(np.array([1, 2]), 1.0))


def test_arrival_rate_per_kb():
    prof = _profile([1, 2, 3])
    assert arrival_rate_per_kb(prof, 0) == pytest.approx(100 * 6 / 11)
    assert sum(arrival_rate_per_kb(prof, n) for n in range(3)) == pytest.approx(100.0, rel=1e-9)
