import math

import pytest

from errors import PreconditionError, SupportOverflow
from radial_profile import (
    BallGeometry,
    LinearProfile,
    RadialProfile,
    Segment,
    gradient_n_norm,
    moser_normalizing_length,
    moser_profile,
    normalized,
    profile_from_dict,
    radial_gradient_norm_quadrature,
    spherical_rearrangement,
    tent_profile,
    unit_ball_volume
)
from rearrangement import SimpleFunction

DIMENSIONS = (2, 3, 4)
QUADRATURE_TOLERANCE = 1e-8


def test_unit_ball_volumes():
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2, rel=1e-15)


def test_ball_geometry():
    geom = BallGeometry(3, 2.0)
    assert geom.ball_measure == pytest.approx(4 * math.pi / 3 * 8, rel=1e-14)
    assert geom.radius_of_mass(geom.ball_measure) == pytest.approx(2.0, rel=1e-14)
    assert geom.to_dict()['n'] == 3
    with pytest.raises(PreconditionError):
        BallGeometry(1)
    with pytest.raises(PreconditionError):
        BallGeometry(2, 0.0)


@pytest.mark.parametrize('n', DIMENSIONS)
def test_tent_gradient_norm(n):
    geom = BallGeometry(n)
    expected = (n ** (n - 1) * unit_ball_volume(n)) ** (1 / n)
    for fraction in (0.1, 0.5, 0.9):
        assert gradient_n_norm(tent_profile(geom, fraction), geom) == pytest.approx(expected, rel=1e-13)


def test_tent_gradient_norm_in_the_plane():
    geom = BallGeometry(2)
    assert gradient_n_norm(tent_profile(geom), geom) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)


@pytest.mark.parametrize('n', DIMENSIONS)
def test_moser_profile_has_unit_gradient(n):
    geom = BallGeometry(n)
    profile = moser_profile(geom)

    assert gradient_n_norm(profile, geom) == pytest.approx(1.0, rel=1e-13)
    assert profile.peak == 1.0
    assert profile(profile.support_mass * 2) == 0.0
    knee = profile.support_mass * math.exp(-moser_normalizing_length(n))
    assert profile(knee / 2) == 1.0


@pytest.mark.parametrize('n', DIMENSIONS)
def test_quadrature_gradient_agrees_with_closed_form(n):
    geom = BallGeometry(n)
    for profile in (tent_profile(geom), moser_profile(geom), tent_profile(geom, 0.2, 3.0)):
        closed = gradient_n_norm(profile, geom)
        numeric = radial_gradient_norm_quadrature(profile, geom).value
        assert numeric == pytest.approx(closed, rel=QUADRATURE_TOLERANCE)


def test_normalized_profile():
    geom = BallGeometry(3)
    profile = normalized(tent_profile(geom, 0.5, 7.0), geom)
    assert gradient_n_norm(profile, geom) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(PreconditionError):
        normalized(tent_profile(geom).scaled(0.0), geom)


def test_spherical_rearrangement_of_simple_function():
    geom = BallGeometry(2)
    f = SimpleFunction(((2.0, 0.25), (1.0, 0.5)), 1.0)
    profile = spherical_rearrangement(f, geom)

    assert profile.from_steps
    assert profile(0.1) == 2.0
    assert profile(0.5) == 1.0
    assert profile(0.8) == 0.0
    assert profile.support_mass == 0.75


def test_spherical_rearrangement_preconditions():
    geom = BallGeometry(2)
    with pytest.raises(SupportOverflow):
        spherical_rearrangement(SimpleFunction(((1.0, 3.5),), 4.0), geom)
    empty = spherical_rearrangement(SimpleFunction.zero(1.0), geom)
    assert empty.support_mass == 0.0


def test_segment_validation():
    with pytest.raises(PreconditionError):
        Segment(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        Segment(0.0, 1.0, 1.0, 0.0, 'log')
    with pytest.raises(PreconditionError):
        Segment(0.0, 1.0, 1.0, 0.0, 'cubic')


def test_linear_profile_validation():
    with pytest.raises(PreconditionError):
        LinearProfile((Segment(0.0, 0.5, 2.0, 1.0), Segment(0.5, 1.0, 0.5, 0.0)))
    with pytest.raises(PreconditionError):
        LinearProfile((Segment(0.0, 0.5, 2.0, 1.0),))
    with pytest.raises(SupportOverflow):
        RadialProfile(LinearProfile((Segment(0.0, 4.0, 1.0, 0.0),)), math.pi)


def test_profile_json():
    geom = BallGeometry(2)
    tent = tent_profile(geom, 0.25, 2.0)

    assert profile_from_dict({'kind': 'tent', 'support_fraction': 0.25, 'height': 2.0}, geom) == tent
    assert profile_from_dict(tent.to_dict(), geom) == tent
    assert profile_from_dict({'kind': 'moser'}, geom) == moser_profile(geom)
    simple = profile_from_dict({'kind': 'simple', 'pieces': [[1.0, 0.5]], 'total_mass': 1.0}, geom)
    assert simple.from_steps
    with pytest.raises(PreconditionError):
        profile_from_dict({'kind': 'gaussian'}, geom)
    with pytest.raises(PreconditionError):
        profile_from_dict({'kind': 'segments'}, geom)
