import itertools

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from errors import PartitionMismatch, PreconditionError, SupportOverflow
from rearrangement import (
    CommonPartition,
    SimpleFunction,
    StepProfile,
    disjoint_sum,
    distribution_function,
    distribution_map,
    rearrangement,
    rearrangement_point_oracle,
    subadditivity_check
)
from rng import make_rng

SUBADDITIVITY_INSTANCES = 200
ORACLE_INSTANCES = 500

pieces_strategy = st.lists(
    st.tuples(
        st.one_of(st.integers(0, 5).map(float), st.floats(0.0, 100.0)),
        st.floats(1e-3, 1.0)
    ),
    min_size=1,
    max_size=8
)


def _random_simple_function(rng, max_pieces=8, total_mass=1.0):
    count = int(rng.integers(1, max_pieces + 1))
    masses = rng.uniform(0.05, 1.0, size=count)
    masses = masses / masses.sum() * total_mass * rng.uniform(0.3, 1.0)
    # few distinct values so that ties and zero pieces occur
    values = rng.integers(0, 5, size=count).astype(float) * rng.choice((1.0, 0.37))
    return SimpleFunction(tuple(zip(values.tolist(), masses.tolist())), total_mass)


def test_rearrangement_example():
    f = SimpleFunction(((3.0, 0.25), (1.0, 0.5), (3.0, 0.125)), 1.0)
    steps = rearrangement(f)

    assert steps.breakpoints == (0.375, 0.875)
    assert steps.values == (3.0, 1.0)
    assert steps(0.25) == 3.0
    assert steps(0.375) == 1.0  # right-continuous
    assert steps(0.875) == 0.0
    assert steps(0.9) == 0.0


def test_distribution_function_example():
    f = SimpleFunction(((3.0, 0.25), (1.0, 0.5), (3.0, 0.125)), 1.0)

    assert distribution_function(f, 0.5) == 0.875
    assert distribution_function(f, 1.0) == 0.375
    assert distribution_function(f, 3.0) == 0.0

    dist = distribution_map(f)
    assert dist(0.0) == 0.875
    assert dist(2.0) == 0.375
    assert dist(10.0) == 0.0

    with pytest.raises(PreconditionError):
        distribution_function(f, 0.0)


def test_zero_function_has_empty_rearrangement():
    steps = rearrangement(SimpleFunction.zero(2.0))
    assert steps.values == ()
    assert steps(0.5) == 0.0
    assert steps.support_mass == 0.0


def test_simple_function_validation():
    with pytest.raises(PreconditionError):
        SimpleFunction(((-1.0, 0.5),), 1.0)
    with pytest.raises(PreconditionError):
        SimpleFunction(((1.0, 0.0),), 1.0)
    with pytest.raises(SupportOverflow):
        SimpleFunction(((1.0, 0.75), (2.0, 0.5)), 1.0)


def test_step_profile_validation():
    with pytest.raises(PreconditionError):
        StepProfile((0.5, 0.25), (2.0, 1.0), 1.0)
    with pytest.raises(PreconditionError):
        StepProfile((0.25, 0.5), (1.0, 2.0), 1.0)
    with pytest.raises(SupportOverflow):
        StepProfile((0.5, 1.5), (2.0, 1.0), 1.0)


def test_restricted_keeps_largest_values():
    f = SimpleFunction(((1.0, 0.5), (3.0, 0.25)), 1.0)

    top = f.restricted(0.5)
    assert sorted(top.pieces, reverse=True) == [(3.0, 0.25), (1.0, 0.25)]
    assert f.restricted(0.0).pieces == ()


@seed(7)
@given(pieces=pieces_strategy, frac=st.floats(1e-6, 1.0))
def test_sorted_rearrangement_matches_oracle(pieces, frac):
    f = SimpleFunction.from_pieces(pieces)
    steps = rearrangement(f)
    t = frac * f.total_mass

    assert steps(t) == rearrangement_point_oracle(f, t)
    for b in steps.breakpoints:
        assert steps(b) == rearrangement_point_oracle(f, b)


def test_oracle_equivalence_on_random_functions():
    rng = make_rng(11)
    for _ in range(ORACLE_INSTANCES):
        f = _random_simple_function(rng)
        steps = rearrangement(f)
        samples = list(rng.uniform(0, f.total_mass, size=8)) + list(steps.breakpoints)
        for t in samples:
            if t > 0:
                assert steps(t) == rearrangement_point_oracle(f, t)


@seed(3)
@given(pieces=pieces_strategy)
def test_rearrangement_is_equimeasurable(pieces):
    f = SimpleFunction.from_pieces(pieces)
    steps = rearrangement(f)
    levels = f.distinct_values()
    samples = levels + [v / 2 for v in levels] + [max(levels, default=1.0) + 1]
    for lam in samples:
        if lam > 0:
            assert steps.distribution(lam) == distribution_function(f, lam)


@seed(5)
@given(pieces=pieces_strategy)
def test_rearrangement_is_nonincreasing_and_keeps_support(pieces):
    f = SimpleFunction.from_pieces(pieces)
    steps = rearrangement(f)

    assert list(steps.values) == sorted(steps.values, reverse=True)
    assert steps.support_mass == pytest.approx(f.support_mass, rel=1e-12, abs=1e-15)


def test_disjoint_sum_example():
    a = StepProfile.characteristic(0.25, 1.0, 2.0)
    b = StepProfile.characteristic(0.5, 1.0, 1.0)

    combined = disjoint_sum([a, b])
    assert combined.breakpoints == (0.25, 0.75)
    assert combined.values == (2.0, 1.0)


def test_disjoint_sum_overflow():
    with pytest.raises(SupportOverflow):
        disjoint_sum([StepProfile.characteristic(0.75, 1.0), StepProfile.characteristic(0.5, 1.0)])
    with pytest.raises(PreconditionError):
        disjoint_sum([])


def test_disjoint_sum_is_associative_on_dyadic_masses():
    a = StepProfile((0.125, 0.25), (4.0, 1.0), 1.0)
    b = StepProfile((0.0625,), (2.0,), 1.0)
    c = StepProfile((0.25, 0.5), (3.0, 1.0), 1.0)

    left = disjoint_sum([a, disjoint_sum([b, c])])
    right = disjoint_sum([disjoint_sum([a, b]), c])
    assert left == right
    assert left == disjoint_sum([a, b, c])


def test_disjoint_sum_ignores_the_order_of_its_terms():
    rng = make_rng(77)
    for _ in range(50):
        members = int(rng.integers(2, 5))
        profiles = [rearrangement(_random_simple_function(rng).restricted(0.2)) for _ in range(members)]
        combined = disjoint_sum(profiles)
        for order in itertools.permutations(profiles):
            assert disjoint_sum(list(order)) == combined


def test_disjoint_sum_distribution_adds():
    a = StepProfile((0.125, 0.25), (4.0, 1.0), 1.0)
    c = StepProfile((0.25, 0.5), (3.0, 1.0), 1.0)
    combined = disjoint_sum([a, c])
    for lam in (0.5, 1.0, 2.0, 3.5):
        assert combined.distribution(lam) == a.distribution(lam) + c.distribution(lam)


def test_common_partition_cancellation():
    partition = CommonPartition(((1.0, -1.0, 0.25), (2.0, 0.0, 0.25)), 1.0)

    assert partition.f().support_mass == 0.5
    assert partition.g().pieces == ((1.0, 0.25),)
    assert partition.sum().pieces == ((2.0, 0.25),)


def test_subadditivity_example():
    f = SimpleFunction(((2.0, 0.25),), 1.0)
    g = SimpleFunction(((1.0, 0.5),), 1.0)
    partition = CommonPartition.disjoint(f, g)

    assert subadditivity_check(f, g, 0.125, 0.25, partition)
    with pytest.raises(PreconditionError):
        subadditivity_check(f, g, 0.0, 0.25, partition)


def test_subadditivity_rejects_mismatched_partition():
    f = SimpleFunction(((2.0, 0.25),), 1.0)
    g = SimpleFunction(((1.0, 0.5),), 1.0)
    other = CommonPartition.disjoint(g, f)

    with pytest.raises(PartitionMismatch):
        subadditivity_check(f, g, 0.1, 0.1, other)


def test_subadditivity_on_random_partitions():
    rng = make_rng(2024)
    for trial in range(SUBADDITIVITY_INSTANCES):
        cells = int(rng.integers(1, 9))
        masses = rng.uniform(0.05, 1.0, size=cells)
        masses = masses / masses.sum() * rng.uniform(0.5, 1.0)
        f_values = rng.normal(size=cells) * (rng.uniform(size=cells) < 0.8)
        if trial % 2:
            # near-cancelling overlays
            g_values = -f_values + rng.normal(scale=1e-3, size=cells)
        else:
            g_values = rng.normal(size=cells) * (rng.uniform(size=cells) < 0.8)
        partition = CommonPartition(tuple(zip(f_values.tolist(), g_values.tolist(), masses.tolist())), 1.0)
        s, t = rng.uniform(1e-3, 0.6, size=2)

        assert subadditivity_check(partition.f(), partition.g(), float(s), float(t), partition)


def test_dict_round_trip_preserves_profile():
    steps = StepProfile((0.25, 0.75), (2.0, 1.0), 1.0)
    assert StepProfile.from_dict(steps.to_dict()) == steps
    with pytest.raises(PreconditionError):
        SimpleFunction.from_dict({'pieces': [[1.0, 0.5]]})


@settings(max_examples=50)
@seed(13)
@given(pieces=pieces_strategy, c=st.floats(0.01, 100.0))
def test_scaling_commutes_with_rearrangement(pieces, c):
    f = SimpleFunction.from_pieces(pieces)
    scaled = rearrangement(f.scaled(c))
    expected = rearrangement(f)
    # scaling can merge values only if it rounds two of them together
    if len(scaled.values) == len(expected.values):
        assert scaled.breakpoints == expected.breakpoints
        for a, b in zip(scaled.values, expected.values):
            assert a == pytest.approx(c * b, rel=1e-15)
