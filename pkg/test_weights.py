import itertools
import math

import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from errors import PreconditionError
from quadrature import QuadratureConfig, integrate_interval
from rearrangement import CommonPartition, SimpleFunction, StepProfile, rearrangement
from rng import make_rng
from weights import (
    LambdaParams,
    PowerLogWeight,
    TabulatedWeight,
    absolute_continuity_trace,
    constant_weight,
    lambda_quasinorm,
    lambda_quasinorm_distributional,
    lz_alpha_norm_exponent,
    lz_normable_classify,
    lz_quasi_kothe_classify,
    lz_quasinorm,
    primitive_W,
    weight_admissibility_report,
    weight_from_dict
)

INF = math.inf
DISTRIBUTIONAL_PAIRS = 200
# (p, q, α) with finite primitives; the last three have no closed form
LZ_PARAMETERS = [
    (2.0, 2.0, 0.0), (1.0, 1.0, 0.0), (4.0, 2.0, 0.0), (2.0, 1.0, 0.0),
    (INF, 2.0, -1.0), (INF, 1.0, -2.0), (INF, 3.0, -1.0),
    (2.0, 2.0, 0.5), (3.0, 2.0, -0.5), (1.0, 2.0, 1.0),
]


def test_primitive_closed_forms():
    flat = PowerLogWeight(2, 2, 0.0)
    assert flat.closed_form
    assert primitive_W(flat, 0.25).value == pytest.approx(0.25, rel=1e-15)
    assert primitive_W(flat, 0.25).method == 'closed_form'

    brezis_wainger = PowerLogWeight('INF', 2, -1.0)
    assert primitive_W(brezis_wainger, 1.0).value == pytest.approx(1 / math.log(2), rel=1e-14)

    divergent = PowerLogWeight(INF, 2, -0.25)
    assert math.isinf(primitive_W(divergent, 0.5).value)


def test_primitive_by_quadrature():
    weight = PowerLogWeight(2, 2, 0.5)
    assert not weight.closed_form

    result = primitive_W(weight, 0.5)
    assert result.method == 'quadrature'
    # ∫_0^t log(2/s) ds = t log(2/t) + t
    assert result.value == pytest.approx(0.5 * math.log(4) + 0.5, rel=1e-9)


def test_primitive_rejects_points_outside_the_space():
    with pytest.raises(PreconditionError):
        primitive_W(PowerLogWeight(2, 2, 0.0), 0.0)
    with pytest.raises(PreconditionError):
        primitive_W(PowerLogWeight(2, 2, 0.0), 1.5)


def test_tabulated_weight_primitive_is_exact():
    weight = TabulatedWeight((0.5, 1.0), (0.5, 1.0), 1.0)  # w(t) = t

    assert weight.first_slope == pytest.approx(1.0, rel=1e-15)
    assert primitive_W(weight, 0.25).value == pytest.approx(0.03125, rel=1e-12)
    assert weight.mass_integral(0.25, 0.75).value == pytest.approx(0.25, rel=1e-12)
    assert weight(0.3) == pytest.approx(0.3, rel=1e-12)


def test_tabulated_weight_with_steep_head_has_infinite_primitive():
    weight = TabulatedWeight((0.25, 0.5), (4.0, 2.0), 1.0)  # w ~ 1/t near 0
    assert math.isinf(primitive_W(weight, 0.1).value)


def test_tabulated_weight_validation():
    with pytest.raises(PreconditionError):
        TabulatedWeight((0.5, 0.25), (1.0, 1.0), 1.0)
    with pytest.raises(PreconditionError):
        TabulatedWeight((0.5,), (0.0,), 1.0)
    with pytest.raises(PreconditionError):
        TabulatedWeight((2.0,), (1.0,), 1.0)


def test_weight_json_round_trip():
    for weight in (PowerLogWeight(INF, 2.0, -1.0, 2.0), TabulatedWeight((0.5, 1.0), (0.5, 1.0), 1.0)):
        assert weight_from_dict(weight.to_dict()) == weight
    with pytest.raises(PreconditionError):
        weight_from_dict({'kind': 'gaussian'})
    with pytest.raises(PreconditionError):
        weight_from_dict({'kind': 'powerlog', 'p': 2})


def test_lambda_params_validation():
    with pytest.raises(PreconditionError):
        LambdaParams(INF, constant_weight())
    with pytest.raises(PreconditionError):
        LambdaParams(1.0, PowerLogWeight(2, 2, 0.0))


def test_characteristic_function_quasinorm():
    # ‖χ_(0,t)‖_{p,q} = t^{1/p} (p/q)^{1/q}
    chi = StepProfile.characteristic(0.25, 1.0)
    assert lz_quasinorm(chi, 2, 2, 0.0).value == pytest.approx(0.5, rel=1e-14)

    chi = StepProfile.characteristic(0.5, 1.0)
    expected = 0.5 ** 0.25 * 2 ** 0.5
    assert lz_quasinorm(chi, 4, 2, 0.0).value == pytest.approx(expected, rel=1e-13)


def test_quasinorm_with_constant_weight_is_l1_norm_for_q_one():
    f = SimpleFunction(((2.0, 0.25), (1.0, 0.5)), 1.0)
    params = LambdaParams(1.0, constant_weight())
    assert lambda_quasinorm(rearrangement(f), params).value == pytest.approx(1.0, rel=1e-14)


def test_supremum_quasinorms():
    chi = StepProfile.characteristic(0.5, 1.0)
    assert lz_quasinorm(chi, INF, INF, -1.0).value == pytest.approx(1 / math.log(4), rel=1e-12)

    chi = StepProfile.characteristic(0.25, 1.0)
    assert lz_quasinorm(chi, 2, 'INF', 0.0).value == pytest.approx(0.5, rel=1e-12)

    # interior critical point u* = αp
    chi = StepProfile.characteristic(1.0, 1.0)
    assert lz_quasinorm(chi, 1, INF, 1.0).value == pytest.approx(2 / math.e, rel=1e-12)


def test_distributional_formula_matches_rearrangement_side():
    rng = make_rng(99)
    for trial in range(DISTRIBUTIONAL_PAIRS):
        p, q, alpha = LZ_PARAMETERS[trial % len(LZ_PARAMETERS)]
        params = LambdaParams(q, PowerLogWeight(p, q, alpha))
        count = int(rng.integers(1, 9))
        masses = rng.uniform(0.05, 1.0, size=count)
        masses = masses / masses.sum() * rng.uniform(0.2, 1.0)
        values = rng.uniform(0.0, 5.0, size=count)
        f = SimpleFunction(tuple(zip(values.tolist(), masses.tolist())), 1.0)

        direct = lambda_quasinorm(rearrangement(f), params).value
        distributional = lambda_quasinorm_distributional(f, params).value
        assert distributional == pytest.approx(direct, rel=1e-8)


@seed(17)
@given(
    pieces=st.lists(
        st.tuples(st.one_of(st.just(0.0), st.floats(1e-3, 10.0)), st.floats(1e-3, 0.1)),
        min_size=1,
        max_size=8
    ),
    c=st.floats(1e-3, 1e3)
)
def test_quasinorm_is_homogeneous(pieces, c):
    f = SimpleFunction(tuple(pieces), 1.0)
    params = LambdaParams(2.0, PowerLogWeight(INF, 2.0, -1.0))
    base = lambda_quasinorm(rearrangement(f), params).value
    scaled = lambda_quasinorm(rearrangement(f.scaled(c)), params).value
    assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-300)


def test_delta2_index_of_constant_weight():
    report = weight_admissibility_report(LambdaParams(2.0, PowerLogWeight(2, 2, 0.0)))
    assert report.nontrivial
    assert report.quasi_kothe
    assert report.delta2_index == pytest.approx(2.0, rel=1e-12)


def test_admissibility_of_divergent_weight():
    report = weight_admissibility_report(LambdaParams(2.0, PowerLogWeight(INF, 2.0, 0.0)))
    assert not report.nontrivial
    assert not report.quasi_kothe
    assert math.isinf(report.delta2_index)
    assert report.to_dict()['delta2_index'] == 'INF'


@pytest.mark.parametrize(
    'p, q, alpha',
    list(itertools.product((0.5, 1.0, 2.0, 4.0, INF), (0.5, 2.0), (-3.0, -1.0, 0.0, 1.5, 3.0)))
)
def test_quasi_kothe_numeric_verdict_matches_parameter_rule(p, q, alpha):
    report = weight_admissibility_report(LambdaParams(q, PowerLogWeight(p, q, alpha)))
    assert report.quasi_kothe == lz_quasi_kothe_classify(p, q, alpha)


def test_quasi_kothe_rule_examples():
    assert lz_quasi_kothe_classify(1, 1, 0.0)
    assert not lz_quasi_kothe_classify(1, 1, -0.5)
    assert lz_quasi_kothe_classify(INF, 2, -1.0)
    assert not lz_quasi_kothe_classify(INF, 2, -0.5)
    assert lz_quasi_kothe_classify(INF, INF, 0.0)
    assert not lz_quasi_kothe_classify(0.5, 2, 5.0)


def test_normable_rule_examples():
    assert lz_normable_classify(1, 1, 0.0)
    assert not lz_normable_classify(1, 1, -1.0)
    assert lz_normable_classify(2, 2, -3.0)
    assert lz_normable_classify(INF, 2, -1.0)
    assert not lz_normable_classify(INF, 2, 0.0)
    assert not lz_normable_classify(0.5, 2, 0.0)
    assert not lz_normable_classify(2, 0.5, 0.0)


def test_absolute_continuity_trace_tends_to_zero():
    f = SimpleFunction(((1.0, 0.5),), 1.0)
    params = LambdaParams(2.0, PowerLogWeight(2, 2, 0.0))

    trace = absolute_continuity_trace(f, params, [0.5, 0.125, 0.0078125, 0.0])
    expected = [math.sqrt(0.5), math.sqrt(0.125), math.sqrt(0.0078125), 0.0]
    assert trace == pytest.approx(expected, rel=1e-12)
    with pytest.raises(PreconditionError):
        absolute_continuity_trace(f, params, [0.1, 0.2])


def test_alpha_norm_exponent_cases():
    assert lz_alpha_norm_exponent(1, 0.5, 0.0) == 0.5
    assert lz_alpha_norm_exponent(0.5, 0.5, 0.0) == 0.5
    assert lz_alpha_norm_exponent(2, 2, 0.0) == 1.0
    assert lz_alpha_norm_exponent(4, 2, 0.0) == 1.0
    assert lz_alpha_norm_exponent(2, 3, 0.0) is None
    assert lz_alpha_norm_exponent(INF, 2, -1.0) is None
    assert lz_alpha_norm_exponent(2, 2, 0.5) is None


@pytest.mark.parametrize('p, q', [(1.0, 0.5), (0.5, 0.5), (1.0, 0.25), (2.0, 2.0)])
def test_quasinorm_satisfies_its_alpha_triangle_inequality(p, q):
    a = lz_alpha_norm_exponent(p, q, 0.0)
    rng = make_rng(2024)
    for _ in range(100):
        count = int(rng.integers(1, 7))
        masses = rng.uniform(0.05, 1.0, size=count)
        masses = masses / masses.sum() * rng.uniform(0.3, 1.0)
        f_values = rng.uniform(-3.0, 3.0, size=count) * (rng.uniform(size=count) < 0.8)
        g_values = rng.uniform(-3.0, 3.0, size=count) * (rng.uniform(size=count) < 0.8)
        partition = CommonPartition(tuple(zip(f_values.tolist(), g_values.tolist(), masses.tolist())), 1.0)

        def norm(h):
            return lz_quasinorm(rearrangement(h), p, q, 0.0).value

        lhs = norm(partition.sum()) ** a
        rhs = norm(partition.f()) ** a + norm(partition.g()) ** a
        assert lhs <= rhs * (1 + 1e-10) + 1e-300


@seed(23)
@given(
    cells=st.lists(
        st.tuples(st.floats(0.0, 10.0), st.floats(0.0, 5.0), st.floats(1e-3, 0.1)),
        min_size=1,
        max_size=8
    ),
    index=st.integers(0, 6)
)
def test_quasinorm_is_monotone_in_the_lattice_order(cells, index):
    p, q, alpha = LZ_PARAMETERS[index]
    params = LambdaParams(q, PowerLogWeight(p, q, alpha))
    smaller = SimpleFunction(tuple((a, m) for a, _, m in cells), 1.0)
    larger = SimpleFunction(tuple((a + d, m) for a, d, m in cells), 1.0)

    low = lambda_quasinorm(rearrangement(smaller), params).value
    high = lambda_quasinorm(rearrangement(larger), params).value
    assert low <= high * (1 + 1e-12)


@pytest.mark.parametrize('alpha', [-1.0, -0.75, -2.0])
@pytest.mark.parametrize('t', [1e-6, 0.1, 0.5, 1.0])
def test_limiting_primitive_matches_quadrature(alpha, t):
    weight = PowerLogWeight(INF, 2.0, alpha)
    # with u = log(2M/s), W(t) = ∫_{log(2M/t)}^∞ u^{αq} du
    expected, _ = integrate_interval(
        lambda u: u ** (alpha * 2.0), math.log(2 / t), math.inf, QuadratureConfig(rel_tol=1e-12)
    )
    result = primitive_W(weight, t)
    assert result.method == 'closed_form'
    assert result.value == pytest.approx(expected, rel=1e-10)
