import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftdyn.errors import InvalidParameter
from shiftdyn.furstenberg import FamilyVariant, FurstenbergFamily, ReturnSet, lower_density

N = 1000


def test_lower_density_examples():
    evens = ReturnSet.from_predicate(lambda n: n % 2 == 0, N)
    assert lower_density(evens) == pytest.approx(0.5, abs=0.01)
    assert lower_density(ReturnSet(tuple(range(N + 1)), N)) == 1.0
    squares = ReturnSet(tuple(k * k for k in range(32)), N)
    assert lower_density(squares) <= 0.05


def test_family_membership_examples():
    evens = ReturnSet.from_predicate(lambda n: n % 2 == 0, N)
    assert FurstenbergFamily.inf().contains(evens)
    assert not FurstenbergFamily.cof().contains(evens)
    assert FurstenbergFamily.lower_density(0.4).contains(evens)
    assert not FurstenbergFamily.lower_density(0.6).contains(evens)
    tail = ReturnSet(tuple(range(900, N + 1)), N)
    assert FurstenbergFamily.cof().contains(tail)
    assert not FurstenbergFamily.inf().contains(ReturnSet((), N))
    assert not FurstenbergFamily.inf().contains(ReturnSet(tuple(range(10)), N))


def test_parameter_validation():
    with pytest.raises(InvalidParameter):
        FurstenbergFamily.lower_density(0.0)
    with pytest.raises(InvalidParameter):
        FurstenbergFamily(FamilyVariant.COF, delta=0.5)
    with pytest.raises(InvalidParameter):
        ReturnSet((5,), 4)
    with pytest.raises(InvalidParameter):
        FurstenbergFamily.inf(k_inf=40, k_tail=10)


def test_label():
    assert FurstenbergFamily.lower_density(0.25).label == "LowerDensity(0.25)"
    assert FurstenbergFamily.cof().label == "Cof"


FAMILIES = [
    FurstenbergFamily.inf(),
    FurstenbergFamily.cof(),
    FurstenbergFamily.lower_density(0.1),
    FurstenbergFamily.lower_density(0.5),
    FurstenbergFamily.lower_density(1.0),
]


@st.composite
def return_sets(draw, horizon=200):
    """Mixtures of sparse, periodic, tail-heavy and dense sets."""
    kind = draw(st.sampled_from(["bernoulli", "tail", "periodic", "sparse"]))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = np.arange(horizon + 1)
    if kind == "bernoulli":
        mask = rng.random(horizon + 1) < draw(st.floats(0, 1))
    elif kind == "tail":
        mask = n >= draw(st.integers(0, horizon))
        mask |= rng.random(horizon + 1) < 0.2
    elif kind == "periodic":
        mask = n % draw(st.integers(1, 6)) == 0
    else:
        mask = np.zeros(horizon + 1, dtype=bool)
        mask[rng.integers(0, horizon + 1, size=draw(st.integers(0, 40)))] = True
    return ReturnSet.from_mask(mask)


@settings(max_examples=200, deadline=None)
@given(return_sets(), st.integers(0, 2**32 - 1))
def test_hereditary_upward(rs, seed):
    extra = np.random.default_rng(seed).random(rs.horizon + 1) < 0.3
    bigger = ReturnSet.from_mask(rs.mask | extra)
    for fam in FAMILIES:
        if fam.contains(rs):
            assert fam.contains(bigger)


@settings(max_examples=200, deadline=None)
@given(return_sets(), st.floats(0.01, 1.0))
def test_inclusion_chain(rs, delta):
    ld = FurstenbergFamily.lower_density(delta)
    if FurstenbergFamily.cof().contains(rs):
        assert ld.contains(rs)
    if ld.contains(rs):
        assert FurstenbergFamily.inf().contains(rs)


@settings(max_examples=200, deadline=None)
@given(return_sets(), st.data())
def test_finite_invariance(rs, data):
    for fam in FAMILIES:
        s = fam.witness_start(rs)
        if s is None or s == 0:
            continue
        n = data.draw(st.integers(0, s - 1))
        assert fam.contains(rs.without_prefix(n))


def test_set_operations():
    a = ReturnSet((1, 2, 3), 10)
    b = ReturnSet((3, 4), 10)
    assert a.union(b).members == (1, 2, 3, 4)
    assert a.intersection(b).members == (3,)
    assert a.without_prefix(1).members == (2, 3)
    assert 2 in a and 5 not in a


def brute_density_start(mask, delta, k_tail):
    """Largest s whose every window [s, n] with n >= s + k_tail has density >= delta."""
    N = len(mask) - 1
    best = None
    for s in range(0, N - k_tail + 1):
        if all(sum(mask[s : n + 1]) >= delta * (n - s + 1) - 1e-9 for n in range(s + k_tail, N + 1)):
            best = s
    return best


@settings(max_examples=150, deadline=None)
@given(return_sets(horizon=80), st.sampled_from([0.1, 0.25, 1 / 3, 0.5, 0.8, 1.0]), st.integers(0, 10))
def test_density_start_matches_brute_force(rs, delta, k_tail):
    from shiftdyn.furstenberg import _density_start

    mask = rs.mask
    assert _density_start(mask, delta, k_tail) == brute_density_start(list(mask), delta, k_tail)
