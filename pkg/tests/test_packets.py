import math

import numpy as np
import pytest
from scipy import integrate

from sidewall.cutoffs import diagonal_window
from sidewall.elliptic import MeridionalVelocity
from sidewall.grid import EVEN, ODD, ScalarField, make_grid
from sidewall.kernels import k0
from sidewall.packets import (ClusterParams, ConicPacket, DiagonalWindow, DyadicPacket,
                              PacketAmplitudes, PacketError, _boxes, anisotropy_and_shear,
                              campanato_defect, coherence_matrix, coherent_component, conic_mass,
                              exhaustive_cluster, hyperbolic_mass, maximal_score,
                              projected_amplitudes, select_cluster, smooth_diag_mass,
                              tail_masses)


@pytest.fixture(scope="module")
def g():
    return make_grid(256, 512, 1.0)


@pytest.fixture(scope="module")
def linear(g):
    _, Y = g.flat_mesh()
    return ScalarField(g, Y, ODD)


def test_hyperbolic_mass_of_linear_profile(g, linear):
    # int_{(0,1)^2} x y^2 / (x^2 + y^2)^2 = pi / 8, scaled by lam for G = y
    oracle, _ = integrate.dblquad(lambda y, x: x * y * y / (x * x + y * y) ** 2, 0, 1, 0, 1,
                                  epsabs=1e-12)
    assert abs(oracle - math.pi / 8) < 1e-9
    assert math.isclose(hyperbolic_mass(linear, 0.1), 0.1 * math.pi / 8, rel_tol=1e-6)
    assert hyperbolic_mass(ScalarField.zeros(g), 0.1) == 0.0


def test_hyperbolic_mass_under_resolved(g, linear):
    with pytest.raises(PacketError, match="under-resolved"):
        hyperbolic_mass(linear, 2 * g.hz)


def test_conic_mass_scales_with_lambda(g):
    _, Y = g.flat_mesh()
    G = ScalarField(g, 3.0 * Y, ODD)
    unit, _ = integrate.quad(lambda s: s * s / (1 + s * s) ** 2, 0.9, 1.1)
    for lam in (0.05, 0.025):
        val = conic_mass(G, ConicPacket(lam, 0.9, 1.1)) / (lam * 3.0)
        assert math.isclose(val, unit, rel_tol=0.05)
    X, _ = g.flat_mesh()
    far = ScalarField(g, np.where(X > 0.2, 1.0, 0.0))
    assert conic_mass(far, ConicPacket(0.05, 0.9, 1.1)) == 0.0


def test_smooth_diag_mass_oracle(g, linear):
    lam, dc = 0.05, 0.1
    val = smooth_diag_mass(linear, DiagonalWindow(lam, dc))
    oracle, _ = integrate.dblquad(
        lambda y, x: diagonal_window(x, y, lam, dc) * k0(x, y) * y,
        0, lam, lambda x: (1 - dc) * x, lambda x: (1 + dc) * x, epsabs=1e-12)
    assert math.isclose(val, oracle, rel_tol=0.02)
    assert smooth_diag_mass(ScalarField(g, np.abs(linear.values)), DiagonalWindow(lam, dc)) >= 0


def test_maximal_score(g):
    assert maximal_score(ScalarField.zeros(g), 0.1, 0.1) == (0.0, 0.1)
    X, Y = g.flat_mesh()
    lam_star = 0.03
    G = ScalarField(g, diagonal_window(X, np.abs(Y), lam_star, 0.2) * np.sign(Y), ODD)
    score, lam = maximal_score(G, 0.1, 0.1)
    assert score > 0 and lam_star / math.sqrt(2) <= lam <= lam_star * math.sqrt(2)


def test_tail_masses(g, linear):
    X, Y = g.flat_mesh()
    local = ScalarField(g, np.where((X < 0.02) & (np.abs(Y) < 0.02), Y, 0.0), ODD)
    assert all(h == 0.0 for h in tail_masses(local, 0.025, 2).shells)
    # G = y: without the r^3 weight each shell doubles (kernel degree -2, area x4,
    # profile x2); the weight (1 - x)^3 only slows the growth
    sh = tail_masses(linear, 0.025, 3).shells
    assert all(1.0 < b / a < 2.0 for a, b in zip(sh, sh[1:]))


def test_projected_amplitudes(g):
    X, Y = g.flat_mesh()
    P = DyadicPacket(0, 1.0, 0.05, 0.1)
    amp = projected_amplitudes(ScalarField(g, 0.4 * Y, ODD), ScalarField(g, 2.0 * Y, ODD), P)
    assert abs(amp.b - 0.4) < 1e-12 and abs(amp.a - 2.0) < 1e-12
    assert math.isclose(amp.A, 0.05 * amp.a) and math.isclose(amp.B, math.sqrt(0.05) * amp.b)
    zero = projected_amplitudes(ScalarField.zeros(g), ScalarField(g, Y, ODD), P)
    assert zero.b == 0.0 and zero.B == 0.0
    cubic = ScalarField(g, 1.5 * Y + Y**3, ODD)
    e1 = projected_amplitudes(cubic, cubic, DyadicPacket(0, 1.0, 0.04, 0.1)).a - 1.5
    e2 = projected_amplitudes(cubic, cubic, DyadicPacket(0, 1.0, 0.02, 0.1)).a - 1.5
    assert 3.5 < e1 / e2 < 4.5
    with pytest.raises(PacketError, match="under-resolved"):
        projected_amplitudes(cubic, cubic, DyadicPacket(0, 1.0, 0.2 * g.hz, 0.1))


def _amps(packets, A=None):
    A = A or [1.0] * len(packets)
    return [PacketAmplitudes(P, 1, 1, 1, a, 0.5) for P, a in zip(packets, A)]


def test_select_cluster_examples():
    P = [DyadicPacket(0, 1.0, 0.01, 0.05), DyadicPacket(3, 1.0, 0.08, 0.05)]
    boxes = _boxes(P)
    assert select_cluster([0.3], boxes[:1], 2)[:2] == (0.3, (0,))
    assert math.isclose(select_cluster([0.3, 0.5], boxes, 1)[0], 0.8)
    rng = np.random.default_rng(4)
    for _ in range(5):
        packets = [DyadicPacket(int(j), float(m), 0.01 * 2.0**j, 0.1)
                   for j, m in zip(rng.integers(0, 3, 12), rng.uniform(0.5, 1.5, 12))]
        b = _boxes(packets)
        sc = rng.uniform(0, 1, 12)
        greedy, _, exact = select_cluster(sc, b, 2, exhaustive_max=0)
        opt, _ = exhaustive_cluster(sc, b, 2)
        assert greedy >= 0.6 * opt
        exact_v, _, flag = select_cluster(sc, b, 2)
        assert flag and math.isclose(exact_v, opt)
    disjoint = [DyadicPacket(3 * j, 1.0, 0.01 * 8.0**j, 0.1) for j in range(4)]
    sc = rng.uniform(0.1, 1, 4)
    assert math.isclose(select_cluster(sc, _boxes(disjoint), 1, exhaustive_max=0)[0], sc.sum())


def test_coherence_matrix():
    P = DyadicPacket(0, 1.0, 0.01, 0.1)
    assert coherence_matrix([P])[0, 0] > 0
    shells = [DyadicPacket(j, 1.0, 0.01 * 2.0**j, 0.1) for j in range(4)]
    K = coherence_matrix(shells)
    # compression at an outer packet from the innermost one decays with shell distance
    col = np.abs(K[1:, 0])
    assert col[0] > col[1] > col[2]
    scaled = [DyadicPacket(j, 1.0, 0.003 * 2.0**j, 0.1) for j in range(4)]
    assert np.allclose(coherence_matrix(scaled), K, rtol=1e-10)


def test_coherent_component_examples():
    P = [DyadicPacket(0, 1.0, 0.01, 0.1), DyadicPacket(0, 1.5, 0.01, 0.1)]
    one = coherent_component(_amps(P[:1]), np.array([[0.5]]), 0.1)
    assert one.subset == (0,)
    K = np.array([[0.5, 0.05], [0.05, 0.5]])
    two = coherent_component(_amps(P, [2.0, 0.1]), K, 0.1)
    assert two.subset == (0,)
    empty = coherent_component(_amps(P), np.zeros((2, 2)), 0.1)
    assert empty.subset == () and empty.A_star == 0.0


def test_campanato_and_anisotropy(g):
    X, Y = g.flat_mesh()
    P = [DyadicPacket(0, 1.0, 0.05, 0.1)]
    sigma, eps = 0.5, 0.1
    rho = np.hypot(X, Y)
    aff = MeridionalVelocity(ScalarField(g, -sigma * X, EVEN), ScalarField(g, -sigma * Y, ODD))
    assert campanato_defect(aff, sigma, P) == 0.0
    pert = MeridionalVelocity(aff.u_r, ScalarField(g, -sigma * Y + eps * sigma * rho))
    assert abs(campanato_defect(pert, sigma, P) - eps) < 1e-12
    with pytest.raises(PacketError, match="affine model degenerate"):
        campanato_defect(aff, 0.0, P)
    R, Z = g.mesh()
    an = anisotropy_and_shear(ScalarField(g, 0.3 * Z, ODD), aff, 0.05, 0.5)
    assert an.R_max < 1e-12
    with pytest.raises(PacketError):
        anisotropy_and_shear(ScalarField.zeros(g), aff, 0.05, 0.5)


def test_cluster_params_validation():
    with pytest.raises(PacketError):
        ClusterParams(lam0=0.01, delta0=0.1, mu=0.2, nu=0.3, kappa=0.5, j_star=1)
    with pytest.raises(PacketError):
        ClusterParams(lam0=0.01, delta0=0.1, mu=0.5, nu=0.3, kappa=1.6, j_star=1)
    C = ClusterParams(lam0=0.01, delta0=0.1, mu=0.5, nu=0.25, kappa=0.5, j_star=1).state(2.0)
    assert C.j_window == 1 + int(0.5 * 2.0 / math.log(2))
    assert math.isclose(C.lam_mu, 0.01 * math.exp(-3.0))
