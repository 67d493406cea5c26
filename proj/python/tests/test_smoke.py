import math

import numpy as np
import pytest

import arpapprox as arp


def test_problem_catalogue():
    names = arp.problem_names()
    for name in ("quadratic", "quartic", "rosenbrock", "trig"):
        assert name in names


def test_gradient_matches_central_differences():
    x = np.array([0.3, -0.7])
    g = arp.derivative("rosenbrock", x, 1)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (arp.value("rosenbrock", x + e) - arp.value("rosenbrock", x - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_hessian_shape_and_symmetry():
    hess = arp.derivative("trig", np.linspace(-1.0, 1.0, 4), 2)
    assert hess.shape == (4, 4)
    np.testing.assert_allclose(hess, hess.T)


def psb(b, s, y):
    r = y - b @ s
    ss = s @ s
    return b + (np.outer(r, s) + np.outer(s, r)) / ss - (r @ s) * np.outer(s, s) / ss**2


def dfp(b, s, y):
    ys = y @ s
    left = np.eye(len(s)) - np.outer(y, s) / ys
    return left @ b @ left.T + np.outer(y, y) / ys


def test_identity_weight_gives_psb_and_dfp_weight_gives_dfp():
    rng = np.random.default_rng(5)
    for n in range(2, 6):
        b = rng.normal(size=(n, n))
        b = 0.5 * (b + b.T)
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        a = q @ np.diag(rng.uniform(0.5, 2.0, n)) @ q.T
        s = rng.normal(size=n)
        y = a @ s
        np.testing.assert_allclose(arp.hosu_update(b, s, y, np.eye(n)), psb(b, s, y), atol=1e-10)
        np.testing.assert_allclose(arp.dfp_update(b, s, y, y), dfp(b, s, y), atol=1e-9)


def test_secant_equation_for_third_order_tensors():
    rng = np.random.default_rng(6)
    n = 3
    t = rng.normal(size=(n, n, n))
    t = sum(np.transpose(t, p) for p in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]) / 6
    y = rng.normal(size=(n, n))
    y = 0.5 * (y + y.T)
    s = rng.normal(size=n)
    out = arp.hosu_update(t, s, y, np.eye(n))
    np.testing.assert_allclose(np.einsum("ijk,k->ij", out, s), y, atol=1e-10)
    np.testing.assert_allclose(out, np.transpose(out, (1, 0, 2)), atol=1e-12)


def test_dfp_weight_certificate():
    rng = np.random.default_rng(7)
    s = rng.normal(size=4)
    y = 2.0 * s + 0.1 * rng.normal(size=4)
    w = arp.build_dfp_weight(s, y)
    winv = np.linalg.inv(w["w"])
    np.testing.assert_allclose(winv @ winv @ w["s_used"], y, atol=1e-8)
    assert w["kappa"] <= w["kappa_bound"] * (1 + 1e-8)


def test_weighted_norm_scales_with_identity_multiple():
    rng = np.random.default_rng(8)
    m = rng.normal(size=(3, 3))
    m = 0.5 * (m + m.T)
    assert arp.op_norm(m, 2.0 * np.eye(3)) == pytest.approx(4.0 * arp.op_norm(m), rel=1e-8)


@pytest.mark.parametrize("strategy", arp.STRATEGIES)
def test_solve_rosenbrock(strategy):
    result = arp.solve("rosenbrock", 2, p=2, strategy=strategy, m=5, sigma0=100.0, max_iters=5000)
    assert result.converged, result.summary
    assert result.header["schema_version"] == arp.TRACE_SCHEMA_VERSION
    assert result.rows[-1]["grad_norm"] <= 1e-5
    sigmas = result.column("sigma")
    assert all(b >= a for a, b in zip(sigmas, sigmas[1:]))
    assert np.allclose(result.x_final, [1.0, 1.0], atol=1e-4)


def test_third_order_run_and_rates():
    result = arp.solve("quartic", 4, p=3, strategy="psb-fd", m=5, sigma0=100.0, eps1=1e-4, eps2=1e-3)
    assert result.converged
    rates = arp.fit_rates(result, min_length=2)
    assert rates["points"] == len(result.rows)
    assert math.isfinite(rates["grad_bound"]["sup"])


def test_bad_configuration_is_rejected():
    with pytest.raises(TypeError):
        arp.solve("rosenbrock", 2, not_a_key=1)
    with pytest.raises(ValueError):
        arp.solve("rosenbrock", 2, theta1=0.5)


def test_mann_kendall_sign():
    s, _ = arp.mann_kendall([5.0, 4.0, 3.0, 2.0, 1.0])
    assert s == -10
