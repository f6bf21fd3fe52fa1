import math

import numpy as np
import pytest

from prescribed_spectrum import fd_oracle

PI2 = math.pi ** 2


def test_matrix_is_symmetric_tridiagonal_with_zero_mode():
    T = fd_oracle.assemble([0.5, 0.5], [0.3], [20, 20])
    A = T.dense()
    assert np.allclose(A, A.T)
    assert np.linalg.eigvalsh(A)[0] == pytest.approx(0.0, abs=1e-10)


def test_sturm_count_matches_dense_eigenvalues():
    rng = np.random.default_rng(3)
    T = fd_oracle.assemble([0.4, 0.7, 0.2], [0.1, 2.0], [15, 30, 9])
    ev = np.linalg.eigvalsh(T.dense())
    for x in rng.uniform(0, ev[-1], 25):
        assert fd_oracle.sturm_count(T, x) == int(np.sum(ev < x))


def test_neumann_interval_converges_quadratically():
    res = fd_oracle.chain_eigenvalues([1.0], [], 50.0, h=0.02)
    err_fine = abs(res.fine[1] - PI2)
    err_coarse = abs(res.coarse[1] - PI2)
    assert err_coarse / err_fine == pytest.approx(4.0, rel=0.05)
    assert abs(res.values[1] - PI2) < 1e-6


def test_zero_beta_merges_segments():
    merged = fd_oracle.chain_eigenvalues([0.5, 0.5], [0.0], 50.0, h=0.01).values
    single = fd_oracle.chain_eigenvalues([1.0], [], 50.0, h=0.01).values
    assert np.allclose(merged, single, atol=1e-12)


def test_infinite_beta_decouples():
    ev = fd_oracle.chain_eigenvalues([0.5, 0.5], [math.inf], 45.0, h=0.005).values
    assert np.allclose(ev[:2], 0.0, atol=1e-10)
    assert np.allclose(ev[2:], 4 * PI2, rtol=1e-6)


def test_segment_counts_floor():
    assert fd_oracle.segment_counts([1e-9, 1.0], 0.1) == [2, 10]


def test_assemble_argument_check():
    with pytest.raises(ValueError):
        fd_oracle.assemble([1.0, 1.0], [], [4, 4])
