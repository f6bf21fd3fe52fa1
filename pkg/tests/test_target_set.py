import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prescribed_spectrum.errors import EmptyInput, MalformedSet, ZeroNotIncluded
from prescribed_spectrum.target_set import (TargetSet, accumulation_distance, sample_sequence,
                                            validate)


def raw(points=(), intervals=(), lambda_max=10.0, includes_zero=True):
    return {"includes_zero": includes_zero, "points": list(points),
            "intervals": [list(iv) for iv in intervals], "lambda_max": lambda_max}


def test_canonical_set():
    S = validate(raw([1.0], [(2.0, 3.0)]))
    assert S.points == (1.0,)
    assert S.intervals == ((2.0, 3.0),)


def test_negative_point_rejected():
    with pytest.raises(MalformedSet):
        validate(raw([-1.0]))


def test_missing_zero_rejected():
    with pytest.raises(ZeroNotIncluded):
        validate(raw([1.0], includes_zero=False))


@pytest.mark.parametrize("bad", [
    {"includes_zero": True, "points": [], "intervals": [], "lambda_max": 1.0, "extra": 1},
    {"includes_zero": True, "points": [], "lambda_max": 1.0},
    raw([float("nan")]),
    raw([], [(3.0, 2.0)]),
    raw([20.0]),
])
def test_malformed_inputs(bad):
    with pytest.raises(MalformedSet):
        validate(bad)


def test_normalisation_merges_and_drops():
    S = validate(raw([0.0, 2.5, 5.0], [(2.0, 3.0), (3.0, 4.0), (6.0, 6.0)]))
    assert S.intervals == ((2.0, 4.0),)
    assert S.points == (5.0, 6.0)


def test_round_trip_dict():
    S = validate(raw([1.0], [(2.0, 3.0)]))
    assert TargetSet.from_dict(S.to_dict()) == S


def test_constant_sequence_for_isolated_point():
    seq = sample_sequence(validate(raw([1.0])), 4)
    assert list(seq.values) == [1.0] * 4


def test_zero_only_diverges():
    seq = sample_sequence(validate(raw()), 3)
    assert list(seq.values) == [1.0, 2.0, 3.0]
    assert seq.diverges


def test_dyadic_sweep_covers_interval():
    seq = sample_sequence(validate(raw([], [(1.0, 2.0)])), 64)
    vals = np.asarray(seq.values)
    assert np.all((vals >= 1.0) & (vals <= 2.0))
    grid = np.linspace(1.0, 2.0, 2001)
    gaps = np.min(np.abs(grid[:, None] - vals[None, :]), axis=1)
    assert gaps.max() <= 2 / 64


def test_interval_touching_zero_samples_toward_zero():
    S = validate(raw([], [(0.0, 1.0)]))
    assert not S.zero_isolated
    vals = sample_sequence(S, 40).values
    assert min(vals) < 1e-3
    assert all(v > 0 for v in vals)


def test_eps_cover_stays_close():
    S = validate(raw([1.0], [(2.0, 3.0)]))
    seq = sample_sequence(S, 50, eps_cover=1e-3)
    assert all(S.distance(v) <= 1e-3 + 1e-15 for v in seq.values)


def test_accumulation_distance_near_exact_cover():
    cover, spurious = accumulation_distance(validate(raw([1.0])), [0.0, 1.0, 1.0001], 2.0)
    assert cover <= 1e-4
    assert spurious <= 1e-4 + 1e-15


def test_accumulation_distance_single_gap():
    cover, spurious = accumulation_distance(validate(raw([5.0])), [0.0, 3.0], 6.0)
    assert cover == pytest.approx(2.0, abs=1e-15)
    assert spurious == pytest.approx(2.0, abs=1e-15)


def test_accumulation_distance_grid():
    values = [0.0] + list(np.arange(1.0, 2.0 + 1e-12, 0.01))
    cover, spurious = accumulation_distance(validate(raw([], [(1.0, 2.0)])), values, 2.0)
    assert cover <= 0.005 + 1e-12
    assert spurious == 0.0


def test_accumulation_distance_empty():
    with pytest.raises(EmptyInput):
        accumulation_distance(validate(raw()), [], 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 9.0), min_size=1, max_size=6),
       st.lists(st.floats(0.0, 12.0), min_size=1, max_size=20))
def test_cover_matches_brute_force(points, values):
    S = validate(raw(points))
    cover, spurious = accumulation_distance(S, values, 10.0)
    v = np.asarray(values)
    brute = max(np.min(np.abs(v - p)) for p in (0.0, *S.points))
    assert math.isclose(cover, brute, abs_tol=1e-12)
    below = v[v <= 10.0]
    brute_sp = max((S.distance(x) for x in below), default=0.0)
    assert math.isclose(spurious, brute_sp, abs_tol=1e-12)
