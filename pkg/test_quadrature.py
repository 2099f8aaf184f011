import logging
import math

import numpy as np
import pytest

from errors import NonConvergenceError, PreconditionError
from quadrature import (
    QuadResult,
    QuadratureConfig,
    golden_section_max,
    grid_seeded_max,
    integrate_interval,
    halving_shift,
    integrate_piecewise,
    running_max
)
from rng import log_uniform, make_rng


def test_semi_infinite_integral():
    value, err = integrate_interval(lambda u: math.exp(-u), 0.0, math.inf, QuadratureConfig())
    assert value == pytest.approx(1.0, rel=1e-10)
    assert err < 1e-8


def test_endpoint_singularity():
    value, _ = integrate_interval(lambda x: x ** -0.5, 0.0, 1.0, QuadratureConfig())
    assert value == pytest.approx(2.0, rel=1e-8)


def test_piecewise_sums_pieces():
    value, _ = integrate_piecewise(lambda x: abs(x - 0.5), [0.0, 0.5, 1.0], QuadratureConfig())
    assert value == pytest.approx(0.25, rel=1e-12)

    tail, _ = integrate_piecewise(lambda u: math.exp(-u), [0.0, 1.0, 10.0, math.inf], QuadratureConfig())
    assert tail == pytest.approx(1.0, rel=1e-10)


def test_nonconvergence_raises_with_estimate():
    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-14, max_depth=2)
    with pytest.raises(NonConvergenceError) as info:
        integrate_interval(lambda x: math.sin(1 / x), 1e-6, 1.0, cfg)
    assert info.value.error_estimate > 0
    assert info.value.exit_code == 3


def test_config_validation():
    with pytest.raises(PreconditionError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(PreconditionError):
        QuadratureConfig(max_depth=0)
    halved = QuadratureConfig().halved()
    assert halved.rel_tol == 5e-11
    assert halved.abs_tol == 5e-15


def test_golden_section_finds_interior_maximum():
    x, y = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert y == pytest.approx(0.0, abs=1e-12)


def test_golden_section_endpoint_maximum():
    x, y = golden_section_max(lambda x: x, 0.0, 2.0)
    assert x == 2.0
    assert y == 2.0


def test_grid_seeded_max_on_multimodal_function():
    x, y = grid_seeded_max(math.sin, np.linspace(0.0, 3.0 * math.pi, 50))
    assert y == pytest.approx(1.0, abs=1e-12)
    assert math.sin(x) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(PreconditionError):
        grid_seeded_max(math.sin, [])


def test_running_max():
    assert running_max([1.0, 3.0, 2.0, 5.0]) == [1.0, 3.0, 3.0, 5.0]
    assert running_max([-math.inf, -1.0, -2.0]) == [-math.inf, -1.0, -1.0]


def test_halving_the_tolerance_stays_within_the_error_estimates():
    seen = []

    def evaluate(cfg):
        seen.append(cfg.rel_tol)
        return QuadResult(*integrate_interval(lambda x: x ** -0.5, 0.0, 1.0, cfg), 'quadrature')

    cfg = QuadratureConfig()
    fine, shift = halving_shift(evaluate, cfg)
    assert seen == [cfg.rel_tol, cfg.rel_tol / 2]
    assert fine.value == pytest.approx(2.0, rel=1e-8)
    assert shift <= 2 * fine.abs_err_estimate + cfg.rel_tol * fine.value


def test_halving_reports_an_unstable_value(caplog):
    caplog.set_level(logging.WARNING, logger='quadrature')
    values = iter([1.0, 1.5])
    fine, shift = halving_shift(lambda cfg: QuadResult(next(values), 1e-12, 'quadrature'), QuadratureConfig())
    assert fine.value == 1.5
    assert shift == 0.5
    assert 'halving the tolerance' in caplog.text


def test_streams_are_reproducible_and_distinct():
    a = make_rng(42, 0).uniform(size=4)
    b = make_rng(42, 0).uniform(size=4)
    c = make_rng(42, 1).uniform(size=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)

    samples = log_uniform(make_rng(1), 1e-3, 1e3, size=1000)
    assert samples.min() >= 1e-3 and samples.max() <= 1e3
