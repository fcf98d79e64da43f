import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylend import profile as pr
from cylend.errors import DomainError, ProfileError

FLAT = (2 * math.pi) ** 2


@pytest.fixture(scope="module")
def prof():
    return pr.make_profile(1.0, 3.0, 1.0)


def test_default_examples(prof):
    # direct evaluation of cosh^2(0.5)
    assert prof.F(0.5) == pytest.approx(math.cosh(0.5) ** 2, abs=0)
    assert prof.F(0.5) == pytest.approx(1.2715403, abs=1e-7)
    assert prof.F(3.0) == pytest.approx(39.4784176, abs=1e-7)
    assert prof.F(1.0) == pytest.approx(2.3810978, abs=1e-7)


def test_exact_regions(prof):
    r = np.linspace(0, 1.0, 101)
    assert np.array_equal(prof.F(r), np.cosh(r) ** 2)
    r = np.linspace(3.0, 50.0, 101)
    assert np.all(prof.F(r) == FLAT)


@pytest.mark.parametrize("knot", ["r0", "R"])
def test_c2_at_knots(prof, knot):
    r = getattr(prof, knot)
    if knot == "r0":
        left = (math.cosh(r) ** 2, math.sinh(2 * r), 2 * math.cosh(2 * r))
    else:
        left = (FLAT, 0.0, 0.0)
    right = (prof._blend(r, 0), prof._blend(r, 1), prof._blend(r, 2))
    for a, b in zip(left, right):
        assert abs(a - b) < 1e-10 * max(1, abs(a))


def test_derivative_vs_finite_differences(prof):
    r = np.linspace(0.01, 2.99, 400)
    s = 1e-6
    fd = (prof.F(r + s) - prof.F(r - s)) / (2 * s)
    assert np.max(np.abs(fd - prof.F_prime(r))) < 1e-7 * FLAT


def test_monotone_default(prof):
    assert prof.check_monotone() > 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 1.5), st.floats(1.0, 4.0))
def test_monotone_random_pairs(r0, width):
    assert pr.make_profile(r0, r0 + width, 1.0).check_monotone() > 0


def test_validation():
    with pytest.raises(ProfileError):
        pr.make_profile(2.0, 1.0, 1.0)
    with pytest.raises(ProfileError):
        pr.make_profile(2.6, 4.0, 1.0)  # cosh^2(r0) >= (2 pi)^2
    with pytest.raises(ProfileError):
        pr.make_profile(2.2, 4.2, 1.0)  # admissible r0 but the blend overshoots
    with pytest.raises(DomainError):
        pr.make_profile(1.0, 3.0, 0.0)
    with pytest.raises(DomainError):
        pr.make_profile().F(-1.0)


def test_mode_threshold_examples():
    ell = 4 * math.acosh(3)
    assert pr.mode_threshold(0, ell) == 0.0
    assert pr.mode_threshold(1, ell) == pytest.approx(1 / 7.0509887**2, rel=1e-7)
    assert pr.mode_threshold(2, ell) == pytest.approx(4 * pr.mode_threshold(1, ell), rel=1e-15)
    with pytest.raises(DomainError):
        pr.mode_threshold(-1, ell)


def test_decay_rate_examples():
    ell = 2.0
    thr = pr.mode_threshold(1, ell)
    assert pr.decay_rate(0.0, 1, ell) == pytest.approx(1 / ell)
    assert pr.decay_rate(thr / 2, 1, ell) == pytest.approx(1 / ell / math.sqrt(2))
    with pytest.raises(DomainError):
        pr.decay_rate(thr, 1, ell)
    with pytest.warns(RuntimeWarning):
        pr.decay_rate(thr - 1e-4, 1, ell)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pr.decay_rate(0.0, 1, ell)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.0, 0.9))
def test_truncation_length_meets_tolerance(ell, frac):
    thr = pr.mode_threshold(1, ell)
    lam = frac * thr
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        L = pr.truncation_length(lam, ell, 3.0, 1e-8)
        rate = pr.decay_rate(lam, 1, ell)
    assert math.exp(-2 * rate * (L - 3.0)) == pytest.approx(1e-8, rel=1e-9)
