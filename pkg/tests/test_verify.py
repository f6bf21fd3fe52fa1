import pytest

from prescribed_spectrum.operator_assembly import design
from prescribed_spectrum.target_set import validate
from prescribed_spectrum.verify import verify


def target(points=(), intervals=()):
    return validate({"includes_zero": True, "points": list(points),
                     "intervals": [list(iv) for iv in intervals], "lambda_max": 10.0})


@pytest.fixture(scope="module")
def schedule():
    return design(target([1.0]), 24)[0]


def test_pass_and_report_fields(schedule):
    rep = verify(schedule, target([1.0]), 24, 5.0, 0.05, skip_head=8)
    assert rep.passed
    assert len(rep.distances) == 24
    assert all(d >= 0 for d in rep.distances)
    assert rep.max_distance == max(rep.distances[7:])


def test_wrong_set_fails(schedule):
    assert not verify(schedule, target([2.0]), 24, 5.0, 0.05, skip_head=8).passed


def test_decoupled_hits_samples(schedule):
    rep = verify(schedule, target([1.0]), 24, 5.0, 1e-10, decouple=True)
    assert rep.passed and rep.max_distance <= 1e-10


def test_empty_window_reports_infinite_distance(schedule):
    rep = verify(schedule, target([1.0]), 4, 0.0, 0.05)
    assert not rep.passed
    assert rep.max_distance == float("inf")
