from fractions import Fraction

import pytest

from prescribed_spectrum import rooms_passages as rp
from prescribed_spectrum.errors import IndexOutOfRange
from prescribed_spectrum.rooms_passages import test_function_norms as norms_of


def test_default_sequences_small():
    seq = rp.default_sequences(3, alpha=3)
    assert seq.d == [1, Fraction(1, 9), Fraction(1, 25)]
    assert seq.dhat == [Fraction(1, 4), Fraction(1, 16), Fraction(1, 36)]
    assert seq.C2 == Fraction(64, 9)


def test_ddd_equality_at_first_room():
    seq = rp.default_sequences(3)
    assert seq.dhat[0] == seq.C1 * min(seq.d[0], seq.d[1])


@pytest.mark.parametrize("alpha", [3, 4, 5])
def test_invariants_exact(alpha):
    seq = rp.default_sequences(60, alpha=alpha)
    assert all(seq.invariant_report().values())


def test_positions():
    seq = rp.default_sequences(6)
    x = seq.x
    for k in range(1, 6):
        # the passage before room k+1 ends where that room starts
        assert x[k - 1] + seq.dhat[k - 1] == x[k] - seq.d[k]


def test_zero_passages_collapse():
    seq = rp.default_sequences(5)
    flat = rp.RPSequences(seq.d, seq.dhat, [Fraction(0)] * 5, seq.C1, seq.C2, seq.alpha)
    n = norms_of(flat, 3)
    assert n.l2_sq == 1.0 and n.grad_sq == 0.0


def test_index_range():
    seq = rp.default_sequences(5)
    for k in (1, 5):
        with pytest.raises(IndexOutOfRange):
            norms_of(seq, k)


@pytest.mark.parametrize("k", range(2, 11))
def test_quadrature_oracle(k):
    seq = rp.default_sequences(12)
    l2, grad = rp.quadrature_norms(seq, k)
    n = norms_of(seq, k)
    assert l2 == pytest.approx(n.l2_sq, abs=1e-8)
    assert grad == pytest.approx(n.grad_sq, abs=1e-8)


def test_gradient_bounds():
    seq = rp.default_sequences(80)
    for k in range(2, 80):
        assert norms_of(seq, k).grad_sq <= rp.gradient_bound(seq, k) * (1 + 1e-12)
    # the printed bound holds from the third room on, not at k = 2
    assert norms_of(seq, 2).grad_sq > rp.nominal_gradient_bound(seq, 2)
    for k in range(3, 80):
        assert norms_of(seq, k).grad_sq <= rp.nominal_gradient_bound(seq, k)


def test_ratio_at_fifty():
    seq = rp.default_sequences(51)
    assert norms_of(seq, 50).ratio >= 0.99


def test_ratios_approach_one():
    ratios = rp.gamma_lower_bound_scan(rp.default_sequences(201))
    assert rp.ratios_approach_one(ratios)
    assert ratios[-1] >= 0.999


def test_cubic_exponent_stalls():
    # with alpha = 3 the gradient norms tend to 2 C2, so the ratio floor stays small
    seq = rp.default_sequences(201, alpha=3)
    ratios = rp.gamma_lower_bound_scan(seq)
    limit = 1 / (1 + 2 * float(seq.C2))
    assert ratios[-1] == pytest.approx(limit, rel=0.05)


def test_scan_needs_four_rooms():
    with pytest.raises(IndexOutOfRange):
        rp.gamma_lower_bound_scan(rp.default_sequences(3))
