import numpy as np
import pytest

from prescribed_spectrum import extension_lab as el
from prescribed_spectrum.errors import InvalidModel, SingularRmu
from prescribed_spectrum.jacobi import jacobi_eigh


def hand_model(mu=0.0):
    return el.ExtensionModel(np.diag([1.0, 2.0]), np.array([[5.0]]), mu)


def test_hand_example():
    res = el.build_extension(hand_model())
    assert np.allclose(res.R_mu, np.diag([6 / 5, 1 / 2]), atol=1e-15)
    assert np.max(np.abs(res.A - np.diag([5 / 6, 2.0]))) <= 1e-14
    assert res.diagnostics["weyl_defect"] <= 1e-14


def test_hand_boundary_condition():
    model = hand_model()
    res = el.build_extension(model)
    out = el.boundary_condition_check(model, res, vectors=np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert out["bc"] == 0.0


def test_vanishing_parameter_resolvent_recovers_A0():
    A0 = np.diag([1.0, 2.0, 3.0])
    for scale in (1e3, 1e6):
        res = el.build_extension(el.ExtensionModel(A0, np.array([[scale]]), 0.0))
        assert np.allclose(res.A, A0, atol=10 / scale)


def test_empty_boundary_space_is_exact():
    A0 = np.diag([1.0, 2.0, 3.0])
    res = el.build_extension(el.ExtensionModel(A0, np.zeros((0, 0)), 0.5))
    assert np.array_equal(res.A, A0)


def test_random_models():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 41))
        m = int(rng.integers(0, n + 1))
        model = el.random_model(n, m, rng)
        res = el.build_extension(model)
        scale = max(np.linalg.norm(model.A0, 2), np.linalg.norm(model.Xi, 2) if m else 0, 1)
        assert res.diagnostics["weyl_defect"] <= 1e-11 * scale
        assert res.diagnostics["symmetry_defect"] <= 1e-11 * np.linalg.norm(res.A, 2)
        bc = el.boundary_condition_check(model, res, trials=20, rng=rng)
        assert bc["bc"] <= 1e-12


def test_identity_at_second_anchor():
    rng = np.random.default_rng(2)
    model = el.random_model(12, 5, rng, mu=0.0)
    other = el.ExtensionModel(model.A0, model.Xi, -0.7)
    assert el.build_extension(other).diagnostics["weyl_defect"] <= 1e-12


def test_zero_vector_defect():
    model = hand_model()
    out = el.boundary_condition_check(model, el.build_extension(model), vectors=np.zeros((1, 2)))
    assert out == {"bc": 0.0, "range": 0.0}


def test_singular_resolvent_detected():
    with pytest.raises(SingularRmu):
        el.build_extension(el.ExtensionModel([[1.0]], [[0.0]], 0.5))


@pytest.mark.parametrize("kwargs", [
    dict(A0=[[1.0, 2.0], [0.0, 1.0]], Xi=[[3.0]], mu=0.0),
    dict(A0=np.diag([1.0, 2.0]), Xi=[[3.0]], mu=1.0),
    dict(A0=np.diag([1.0, 2.0]), Xi=[[3.0]], mu=3.0 + 1e-9),
    dict(A0=np.diag([1.0]), Xi=np.eye(2), mu=0.0),
])
def test_invalid_models(kwargs):
    with pytest.raises(InvalidModel):
        el.ExtensionModel(**kwargs)


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(0)
    for n in (1, 2, 7, 40):
        B = rng.standard_normal((n, n))
        A = B + B.T
        assert np.allclose(jacobi_eigh(A), np.linalg.eigvalsh(A), atol=1e-12 * max(1, n))


def test_jacobi_vectors():
    rng = np.random.default_rng(1)
    B = rng.standard_normal((10, 10))
    A = B + B.T
    w, V = jacobi_eigh(A, vectors=True)
    assert np.allclose(A @ V, V * w, atol=1e-11)
    assert np.allclose(V.T @ V, np.eye(10), atol=1e-12)


def test_clustering_single_cluster_small():
    table = el.clustering_experiment([1.0], [(20, 10), (40, 20), (80, 40)])
    d = table.distances()
    assert d[0] > d[1] > d[2]
    assert "no essential spectrum" in table.header


def test_clustering_is_seeded():
    a = el.clustering_experiment([1.0, 4.0], [(30, 12)], seed=4).distances()
    b = el.clustering_experiment([1.0, 4.0], [(30, 12)], seed=4).distances()
    assert a == b
