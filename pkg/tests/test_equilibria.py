import cmath
import math

import numpy as np
import pytest

from hetpace.equilibria import (StabilityClass, classify_eigenvalues, critical_couplings,
                                delta_c1, enumerate_reachable_labels, forced_equilibria,
                                gamma_crit_three, gamma_g_linear, jacobian_reduced,
                                one_s_eigenvalues, proliferation_count, reduced_rhs,
                                saddle_and_coexistence_points, scan_critical_couplings,
                                transition_allowed, write_scan_csv)
from hetpace.model import GlvKinetics, build_rate_matrix, rhs


def sa_by_roots(gP, gD, d, rho=1.0):
    # rho s - gD s^2 + d (rho/gP - s) = 0
    r = np.roots([-gD, rho - d, d * rho / gP])
    return float(r.real.max())


def test_gamma_crit():
    assert gamma_crit_three(2.0, 0.2) == pytest.approx(1.1)
    assert gamma_crit_three(0.7, 0.7) == 0.7
    assert gamma_crit_three(0.3, 1.9) == gamma_crit_three(1.9, 0.3)


def test_saddle_and_coexistence():
    p = saddle_and_coexistence_points(GlvKinetics.three(), 1.11)
    assert p["coexistence"] == pytest.approx(1 / 3.31, rel=1e-15)
    assert saddle_and_coexistence_points(GlvKinetics.three(), 1.0)["saddle"] == 1.0
    A = build_rate_matrix(GlvKinetics.three())
    d = rhs(np.full((1, 3), p["coexistence"]), [1.11], A)
    assert np.abs(d).max() < 1e-15


def test_one_s_closed_form():
    fe = forced_equilibria(0.6, 1.11, 0.8)
    sa = fe.oneS.point[0]
    assert sa == pytest.approx(1.18978, abs=1e-5)
    assert sa == pytest.approx(sa_by_roots(0.6, 1.11, 0.8), rel=1e-13)
    assert np.abs(reduced_rhs(fe.oneS.point, 0.6, 1.11, 0.8)).max() < 1e-12
    assert fe.oneS.stability is StabilityClass.STABLE_NODE
    assert forced_equilibria(0.6, 1.11, 0.0).oneS.point[0] == pytest.approx(1 / 1.11, rel=1e-15)


def test_one_s_eigen_triple():
    for d in (0.05, 0.3, 0.8):
        fe = forced_equilibria(0.6, 1.11, d)
        _, ev = jacobian_reduced(fe.oneS.point, 0.6, 1.11, d)
        tri = sorted(one_s_eigenvalues(0.6, 1.11, d))
        assert np.allclose(sorted(ev.real), tri, atol=1e-10)
        assert np.all(np.abs(ev.imag) < 1e-12)


def test_jacobian_against_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.random(3)
        gP, gD, d = rng.uniform(0.5, 1), rng.uniform(1.1, 2.5), rng.random()
        J, ev = jacobian_reduced(p, gP, gD, d)
        h = 1e-6
        num = np.column_stack([(reduced_rhs(p + h * e, gP, gD, d) - reduced_rhs(p - h * e, gP, gD, d))
                               / (2 * h) for e in np.eye(3)])
        assert np.allclose(J, num, atol=1e-8)
        assert abs(np.trace(J) - ev.sum().real) < 1e-10


def test_residual_property():
    rng = np.random.default_rng(7)
    seen = {"1S": 0, "2S": 0, "3S": 0}
    for _ in range(1000):
        gP, gD, d = rng.uniform(0.5, 1.05), rng.uniform(1.11, 2.5), rng.uniform(0, 1)
        for eq in forced_equilibria(gP, gD, d):
            if eq.exists:
                seen[eq.label] += 1
                p = np.array(eq.point)
                assert np.abs(reduced_rhs(p, gP, gD, d)).max() < 1e-10 * (1 + np.abs(p).max())
                assert min(eq.point) >= 0
    assert all(v > 0 for v in seen.values())


def test_delta_c1_against_eigenvalue_bisection():
    gP, gD = 0.6, 1.11
    f = lambda d: -sa_by_roots(gP, gD, d) * 0.2 - d + 1.0
    lo, hi = 0.0, 1.0
    assert f(lo) > 0 > f(hi)
    for _ in range(80):
        m = 0.5 * (lo + hi)
        lo, hi = (m, hi) if f(m) > 0 else (lo, m)
    assert delta_c1(gP, gD) == pytest.approx(0.5 * (lo + hi), abs=1e-8)


def test_stability_flip_at_delta_c1():
    d1 = delta_c1(0.6, 1.11)
    assert forced_equilibria(0.6, 1.11, d1 - 1e-4).oneS.stability is StabilityClass.SADDLE
    assert forced_equilibria(0.6, 1.11, d1 + 1e-4).oneS.stability is StabilityClass.STABLE_NODE


def test_ordering_and_ce_delta_c4():
    cc = critical_couplings(0.6, 1.11)
    assert cc.delta_c4 < cc.delta_c3 < cc.delta_c2 < cc.delta_c1
    assert cc.unique_region
    assert critical_couplings(0.6, 1.8).delta_c4 == 0.0


def test_delta_c4_positive_for_oscillating_driven_unit():
    cc = critical_couplings(0.6, 1.0)
    assert cc.delta_c4 > 0
    above = forced_equilibria(0.6, 1.0, cc.delta_c4 + 1e-4).threeS
    below = forced_equilibria(0.6, 1.0, cc.delta_c4 - 1e-4).threeS
    assert above.stability is StabilityClass.STABLE_FOCUS_NODE
    assert below.stability is StabilityClass.UNSTABLE_FOCUS_NODE


def test_delta_c3_is_discriminant_change():
    cc = critical_couplings(0.7, 1.4)
    a = forced_equilibria(0.7, 1.4, cc.delta_c3 + 1e-6).threeS
    b = forced_equilibria(0.7, 1.4, cc.delta_c3 - 1e-6).threeS
    assert a.stability is StabilityClass.STABLE_NODE
    assert b.stability is StabilityClass.STABLE_FOCUS_NODE


def test_classify_eigenvalues():
    assert classify_eigenvalues([-1, -2, -3]) is StabilityClass.STABLE_NODE
    assert classify_eigenvalues([-1, -0.1 + 1j, -0.1 - 1j]) is StabilityClass.STABLE_FOCUS_NODE
    assert classify_eigenvalues([1, -2, -3]) is StabilityClass.SADDLE
    assert classify_eigenvalues([-1, 0.1 + 1j, 0.1 - 1j]) is StabilityClass.UNSTABLE_FOCUS_NODE


def test_scan_csv(tmp_path):
    rows = scan_critical_couplings([0.6, 0.9], [1.2, 1.5])
    assert len(rows) == 4
    p = tmp_path / "scan.csv"
    write_scan_csv(p, rows)
    lines = p.read_text().splitlines()
    assert lines[0] == "gamma_P,gamma_D,delta_c1,delta_c2,delta_c3,delta_c4"
    assert len(lines) == 5


def fourier_gamma_g(c, e, d, f, r):
    """-min Re of the double-circulant spectrum, from its Fourier symbol."""
    w = cmath.exp(2j * math.pi / 3)
    lams = []
    for j in range(3):
        for k in range(3):
            lams.append((c * w ** j + e * w ** (2 * j))
                        + w ** k * (d + r * w ** j + r * w ** (2 * j))
                        + w ** (2 * k) * (f + r * w ** j + r * w ** (2 * j)))
    return -min(l.real for l in lams)


@pytest.mark.parametrize("f, expect", [(0.3, 1.45), (0.4, 1.5)])
def test_gamma_g_linear(f, expect):
    kin = GlvKinetics.nine(f=f)
    assert gamma_g_linear(kin) == pytest.approx(expect, abs=1e-12)
    assert gamma_g_linear(kin) == pytest.approx(fourier_gamma_g(2, 0.2, 2, f, 1.25), abs=1e-12)


@pytest.mark.parametrize("n, expect", [(1, (1, 3)), (2, (3, 9)), (5, (15, 45))])
def test_proliferation(n, expect):
    assert proliferation_count(n) == expect


def test_labels():
    lv = enumerate_reachable_labels(8)
    assert lv[1] == ["1S", "2S", "3S"]
    assert lv[3] == ["1S", "2S", "3S", "2S", "3S", "3S", "2S", "3S", "3S", "3S"]
    assert len(lv[7]) == 36
    for n in range(1, 9):
        assert len(enumerate_reachable_labels(n)[-1]) == proliferation_count(n)[0]
    assert not transition_allowed("2S", "1S")
    assert transition_allowed("1S", "3S") and transition_allowed("3S", "3S")
