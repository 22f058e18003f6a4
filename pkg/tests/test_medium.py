import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from guided_spectra.errors import MediumError, NonMonotoneProfile, OutOfDomain
from guided_spectra.medium import (FORM_A, FORM_B, LayeredMedium, SmoothMedium, StripRegion, default_medium,
                                   layer_of, linear_profile, validate, validate_region, validate_smooth)


def test_valid_one_jump():
    m = validate(LayeredMedium(1, 1, [0.5], [1, 2], FORM_A))
    assert m.n_jumps == 1
    assert m.interfaces == (0.5,)
    np.testing.assert_array_equal(m.bounds, [0, 0.5, 1])


def test_non_monotone_speeds():
    with pytest.raises(MediumError) as e:
        validate(LayeredMedium(1, 1, [0.5], [2, 1]))
    assert e.value.code == "NON_MONOTONE_SPEEDS"


def test_bad_interface_order():
    with pytest.raises(MediumError) as e:
        validate(LayeredMedium(1, 1, [0.7, 0.3], [1, 2, 3]))
    assert e.value.code == "BAD_INTERFACE_ORDER"


@pytest.mark.parametrize("doc", [
    {"L": 0, "H": 1, "interfaces": [], "speeds": [1]},
    {"L": 1, "H": 1, "interfaces": [0.5], "speeds": [1]},
    {"L": 1, "H": 1, "interfaces": [1.0], "speeds": [1, 2]},
    {"L": 1, "H": 1, "interfaces": [], "speeds": [-1]},
    {"L": 1, "H": 1, "interfaces": [], "speeds": [1], "form": "C"},
    {"L": 1, "speeds": [1]},
])
def test_invalid_documents(doc):
    with pytest.raises(MediumError):
        LayeredMedium.from_dict(doc)


def test_homogeneous_admitted():
    m = LayeredMedium.from_dict({"L": 2, "H": 1, "interfaces": [], "speeds": [3]})
    assert m.n_jumps == 0 and m.c_min == m.c_max == 3.0


def test_round_trip_json(tmp_path):
    m = default_medium(FORM_B)
    p = tmp_path / "m.json"
    import json

    p.write_text(json.dumps(m.to_dict()))
    assert LayeredMedium.from_json(p) == m


def test_weights_by_form():
    np.testing.assert_array_equal(default_medium(FORM_A).weights, [1, 1])
    np.testing.assert_array_equal(default_medium(FORM_B).weights, [1, 2])


def test_kappa():
    assert LayeredMedium(2, 1, [], [1]).kappa(4) == pytest.approx(4 * math.pi ** 2)


def test_layer_of_examples():
    m = default_medium()
    assert layer_of(m, 0.25) == (0, False)
    assert layer_of(m, 0.75) == (1, False)
    m2 = LayeredMedium(1, 1, [0.3, 0.6], [1, 2, 3])
    assert layer_of(m2, 0.6) == (1, True)
    with pytest.raises(OutOfDomain):
        layer_of(m, 1.5)


layered = st.integers(0, 5).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n, unique=True).map(sorted),
    st.lists(st.floats(0.1, 10.0), min_size=n + 1, max_size=n + 1, unique=True).map(sorted)))


@given(layered)
@settings(max_examples=60, deadline=None)
def test_layer_of_monotone_and_covering(hc):
    h, c = hc
    if any(b - a < 1e-9 for a, b in zip(h, h[1:])) or any(b - a < 1e-9 for a, b in zip(c, c[1:])):
        return
    m = validate(LayeredMedium(1, 1, h, c))
    bnd = [0.0, *h, 1.0]
    # layer midpoints keep thin layers from slipping between grid points
    xs = np.sort(np.concatenate([np.linspace(0, 1, 401), np.add(bnd[1:], bnd[:-1]) / 2]))
    idx = [layer_of(m, x)[0] for x in xs]
    assert all(a <= b for a, b in zip(idx, idx[1:]))
    assert set(idx) == set(range(len(c)))
    # speeds through layer_of reproduce the step function off the interfaces
    for x in xs:
        i, on = layer_of(m, x)
        if not on:
            assert m.speeds[i] == float(m.speed_at(x))


def test_smooth_profile():
    m = validate_smooth(linear_profile(1.0))
    assert m.c_min == 1.0 and m.c_max == 2.0
    with pytest.raises(NonMonotoneProfile):
        validate_smooth(SmoothMedium(1, 1, lambda x: 2 - np.asarray(x), lambda x: -1 + 0 * np.asarray(x)))


def test_strip_region():
    r = StripRegion.parse("0,1,0.7,0.9")
    assert r == StripRegion(0, 1, 0.7, 0.9)
    assert r.volume == pytest.approx(0.2)
    validate_region(r, 1, 1)
    with pytest.raises(OutOfDomain):
        validate_region(StripRegion(0, 1, 0.9, 0.7), 1, 1)
    with pytest.raises(OutOfDomain):
        StripRegion.parse("0,1,2")
