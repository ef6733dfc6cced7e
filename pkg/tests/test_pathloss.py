import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahdcov.pathloss import Link, gain, gain_from_r2, make_model, segment_index
from ahdcov.special import DomainError


def test_single_slope_constants():
    m = make_model([4.0])
    assert m.kind == "sspm"
    assert m.constants == (1.0,)


def test_dual_slope_continuity_constant():
    m = make_model([1.5, 4.0], [10.0])
    assert m.kind == "dspm"
    assert m.constants[1] == pytest.approx(10**2.5, rel=1e-14)
    assert m.constants[1] == pytest.approx(316.2278, abs=5e-5)


def test_three_slope_constants_chain():
    m = make_model([1.5, 3.0, 4.5], [10.0, 50.0])
    assert m.kind == "mspm"
    assert m.constants[2] == pytest.approx(10**1.5 * 50**1.5, rel=1e-14)


@pytest.mark.parametrize(
    "alphas, breaks",
    [
        ([2.0, 4.0], []),  # count mismatch
        ([4.0], [10.0]),
        ([], []),
        ([4.0, 3.0], [10.0]),  # exponents must not decrease
        ([1.5, 2.0], [10.0]),  # last exponent must exceed 2
        ([2.0], []),
        ([1.5, 3.0, 4.0], [20.0, 10.0]),  # breakpoints must increase
        ([1.5, 4.0], [0.0]),
        ([1.5, 4.0], [math.nan]),
        ([-1.0, 4.0], [10.0]),
    ],
)
def test_invalid_models_rejected(alphas, breaks):
    with pytest.raises(DomainError):
        make_model(alphas, breaks)


def test_last_exponent_message_names_constraint():
    with pytest.raises(DomainError, match="> 2"):
        make_model([2.0])


def test_segment_index_examples():
    d = make_model([1.5, 4.0], [10.0])
    assert segment_index(d, 5.0) == 0
    assert segment_index(d, 10.0) == 1
    assert segment_index(make_model([4.0]), 1e6) == 0
    with pytest.raises(DomainError):
        segment_index(d, -1.0)


def test_gain_examples():
    assert gain(make_model([4.0]), Link(10.0, 0.0)) == pytest.approx(1e-4, rel=1e-15)
    d = make_model([1.5, 4.0], [10.0])
    below = d.constants[0] * 10.0**-1.5
    above = d.constants[1] * 10.0**-4.0
    assert below == pytest.approx(10**-1.5, rel=1e-14)
    assert above == pytest.approx(10**-1.5, rel=1e-14)
    assert gain(d, Link(10.0, 0.0)) == pytest.approx(10**-1.5, rel=1e-14)
    assert gain(make_model([4.0]), Link(0.0, 8.5)) == pytest.approx(8.5**-4, rel=1e-15)
    assert 8.5**-4 == pytest.approx(1.91569e-4, rel=1e-5)


def test_gain_saturates_instead_of_overflowing():
    assert gain(make_model([4.0]), Link(0.0, 1e-288)) == math.inf


def test_gain_rejects_zero_distance():
    with pytest.raises(DomainError):
        gain(make_model([4.0]), Link(0.0, 0.0))


def test_link_validation():
    with pytest.raises(DomainError):
        Link(-1.0, 0.0)
    with pytest.raises(DomainError):
        Link(1.0, -2.0)


def test_lifted_edges():
    m = make_model([1.5, 3.0, 4.5], [10.0, 50.0])
    assert m.lifted_edges(4.0)[:2] == pytest.approx([4.0, math.hypot(10.0, 4.0)])


def test_jump_at_breakpoint_when_lifted():
    # constants give continuity at R, not at sqrt(R^2 + ahd^2)
    d = make_model([1.5, 4.0], [10.0])
    left = gain(d, Link(10.0 - 1e-9, 5.0))
    right = gain(d, Link(10.0, 5.0))
    assert right < left


MODELS = [
    make_model([4.0]),
    make_model([1.5, 4.0], [10.0]),
    make_model([1.5, 3.0, 4.5], [10.0, 50.0]),
    make_model([0.0, 2.0, 2.5, 6.0], [1.0, 30.0, 300.0]),
]


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(MODELS), st.floats(0.0, 1e4), st.floats(0.0, 1e3), st.floats(0.0, 50.0))
def test_gain_non_increasing_in_distance(model, r, dr, ahd):
    if r == 0.0 and ahd == 0.0:
        r = 1e-3
    assert gain(model, Link(r + dr, ahd)) <= gain(model, Link(r, ahd))


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(MODELS), st.floats(1e-3, 1e4), st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_gain_non_increasing_in_height(model, r, h, dh):
    assert gain(model, Link(r, h + dh)) <= gain(model, Link(r, h))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(MODELS[1:]), st.integers(0, 2))
def test_continuous_at_breakpoints_without_height(model, k):
    k = min(k, len(model.breakpoints) - 1)
    r = model.breakpoints[k]
    left = gain(model, Link(r * (1 - 1e-12), 0.0))
    right = gain(model, Link(r, 0.0))
    assert left == pytest.approx(right, rel=1e-9)


@pytest.mark.parametrize("model", MODELS)
def test_vector_path_matches_scalar(model):
    rng = np.random.default_rng(3)
    r = np.concatenate([rng.uniform(0.0, 500.0, 400), np.asarray(model.breakpoints)])
    for ahd in (0.0, 4.5):
        r_ok = r[(r > 0) | (ahd > 0)]
        vec = gain_from_r2(model, r_ok * r_ok, ahd)
        ref = np.array([gain(model, Link(float(x), ahd)) for x in r_ok])
        np.testing.assert_allclose(vec, ref, rtol=1e-12)


def test_single_slope_vector_path_is_plain_power():
    m = make_model([4.0])
    r2 = np.array([1.0, 4.0, 100.0])
    np.testing.assert_array_equal(gain_from_r2(m, r2, 0.0), np.power(r2, -2.0))


@pytest.mark.parametrize("r", [0.5, 3.0, 10.0, 77.0, 1e4])
@pytest.mark.parametrize("ahd", [0.0, 4.5])
def test_general_gain_equals_closed_forms_bitwise(r, ahd):
    d = math.hypot(r, ahd)
    assert gain(make_model([4.0]), Link(r, ahd)) == d**-4.0
    k1 = 10.0 ** (4.0 - 1.5)
    expect = d**-1.5 if r < 10.0 else k1 * d**-4.0
    assert gain(make_model([1.5, 4.0], [10.0]), Link(r, ahd)) == expect
