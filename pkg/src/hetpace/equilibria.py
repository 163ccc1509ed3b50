"""Equilibria of single units and of the forced driven unit, critical couplings,
9-item Hopf points and the label-proliferation combinatorics of chains."""

from __future__ import annotations

import cmath
import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import GlvKinetics, Nine, build_rate_matrix

EPS_EIG = 1e-9
ORTHANT_TOL = 1e-12
RESIDUAL_TOL = 1e-10
BISECT_TOL = 1e-8


def gamma_crit_three(c, e):
    """Hopf point of the isolated 3-item unit."""
    return (c + e) / 2


def saddle_and_coexistence_points(kinetics: GlvKinetics, gamma):
    """Axis saddle height and the all-equal coexistence value for one unit."""
    A = build_rate_matrix(kinetics)
    row = A.sum(axis=1)
    rho = kinetics.rho
    # row sums are equal for both layouts, so all items share one value
    return {"saddle": rho / gamma, "coexistence": rho / (row[0] + gamma)}


# --- reduced forced system -------------------------------------------------

def reduced_rhs(s, gamma_P, gamma_D, delta, c=2.0, e=0.2, rho=1.0):
    """Driven 3-item unit with item 1 forced by a pacemaker parked at rho/gamma_P."""
    s1, s2, s3 = s
    sp = rho / gamma_P
    return np.array([
        rho * s1 - gamma_D * s1 * s1 - s1 * (c * s2 + e * s3) + delta * (sp - s1),
        rho * s2 - gamma_D * s2 * s2 - s2 * (c * s3 + e * s1) - delta * s2,
        rho * s3 - gamma_D * s3 * s3 - s3 * (c * s1 + e * s2) - delta * s3,
    ])


def _cubic_roots(a2, a1, a0):
    """Roots of x^3 + a2 x^2 + a1 x + a0 by Cardano, one Newton polish each."""
    p = a1 - a2 * a2 / 3
    q = 2 * a2 ** 3 / 27 - a2 * a1 / 3 + a0
    disc = (q / 2) ** 2 + (p / 3) ** 3
    sq = cmath.sqrt(disc)
    u = (-q / 2 + sq) if abs(-q / 2 + sq) >= abs(-q / 2 - sq) else (-q / 2 - sq)
    w = cmath.exp(2j * math.pi / 3)
    if abs(u) == 0:
        ts = [0.0, 0.0, 0.0]
    else:
        u = u ** (1 / 3)
        ts = [u * w ** k - p / (3 * u * w ** k) for k in range(3)]
    roots = []
    for t in ts:
        x = t - a2 / 3
        d = 3 * x * x + 2 * a2 * x + a1
        if abs(d) > 1e-14:
            x = x - (((x + a2) * x + a1) * x + a0) / d
        if abs(x.imag) < 1e-13 * max(1.0, abs(x)):
            x = complex(x.real, 0.0)
        roots.append(x)
    return np.array(roots, dtype=complex)


def _sort_eigs(ev):
    return ev[np.lexsort((ev.imag, ev.real))]


def _jacobian(point, gamma_P, gamma_D, delta, c, e, rho):
    s1, s2, s3 = point
    g = gamma_D
    return np.array([
        [rho - 2 * g * s1 - c * s2 - e * s3 - delta, -c * s1, -e * s1],
        [-e * s2, rho - 2 * g * s2 - c * s3 - e * s1 - delta, -c * s2],
        [-c * s3, -e * s3, rho - 2 * g * s3 - c * s1 - e * s2 - delta],
    ])


def _char_coeffs(J):
    """(trace, sum of principal 2x2 minors, determinant) of a 3x3 matrix."""
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    m2 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0] + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return tr, m2, det


def jacobian_reduced(point, gamma_P, gamma_D, delta, c=2.0, e=0.2, rho=1.0):
    """Analytic Jacobian of the reduced system and its eigenvalues.

    Eigenvalues come from the characteristic cubic; if any root leaves a
    polynomial residual above 1e-10 (relative) the LAPACK values are returned.
    """
    J = _jacobian(point, gamma_P, gamma_D, delta, c, e, rho)
    tr, m2, det = _char_coeffs(J)
    ev = _cubic_roots(-tr, m2, -det)
    scale = max(1.0, float(np.abs(ev).max()))
    resid = np.abs(((ev - tr) * ev + m2) * ev - det).max()
    if not np.isfinite(resid) or resid > 1e-10 * scale ** 3:
        ev = np.linalg.eigvals(J).astype(complex)
    return J, _sort_eigs(ev)


class StabilityClass(enum.Enum):
    STABLE_NODE = "stable node"
    STABLE_FOCUS_NODE = "stable focus-node"
    SADDLE = "saddle"
    UNSTABLE_FOCUS_NODE = "unstable focus-node"
    UNSTABLE_NODE = "unstable node"


def classify_eigenvalues(ev, eps=EPS_EIG) -> StabilityClass:
    ev = np.asarray(ev, dtype=complex)
    cplx = np.abs(ev.imag) > eps
    re = ev.real
    if cplx.any():
        pair = re[cplx].max()
        rest = re[~cplx]
        if pair > 0:
            return StabilityClass.UNSTABLE_FOCUS_NODE
        if (rest > 0).any():
            return StabilityClass.SADDLE
        return StabilityClass.STABLE_FOCUS_NODE
    if (re < 0).all():
        return StabilityClass.STABLE_NODE
    if (re > 0).all():
        return StabilityClass.UNSTABLE_NODE
    return StabilityClass.SADDLE


@dataclass(frozen=True)
class Equilibrium:
    label: str
    point: tuple | None
    eigenvalues: np.ndarray | None = None
    stability: StabilityClass | None = None
    residual: float = math.nan

    @property
    def exists(self) -> bool:
        return self.point is not None


@dataclass(frozen=True)
class ForcedEquilibria:
    oneS: Equilibrium
    twoS: Equilibrium
    threeS: Equilibrium
    unique_region: bool  # gamma_D > gamma_P; ordering claims hold only here

    def __iter__(self):
        return iter((self.oneS, self.twoS, self.threeS))


def _sqrt(x):
    return math.sqrt(x) if x >= 0 else None


def _point_1s(gP, gD, d, c, e, rho):
    sa = (-d + rho + math.sqrt(4 * d * rho * gD / gP + (d - rho) ** 2)) / (2 * gD)
    return [(sa, 0.0, 0.0)]


def _points_2s(gP, gD, d, c, e, rho):
    den = -c * e + gD * gD
    if den == 0:
        return []
    r = _sqrt((c - gD) ** 2 * (d - rho) ** 2 + 4 * (gD / gP) * den * d * rho)
    if r is None:
        return []
    out = []
    for sgn in (1.0, -1.0):
        G1 = sgn * r / (2 * den)
        sb = (c - gD) * (d - rho) / (2 * den) + G1
        sc = (c * e + (e - 2 * gD) * gD) * (d - rho) / (2 * gD * den) - (e / gD) * G1
        out.append((sb, sc, 0.0))
    return out


def _points_3s(gP, gD, d, c, e, rho):
    q = c * c + e * e + gD * gD - e * gD - c * e - c * gD
    m1 = q * (d - rho) * gP
    m2 = 2 * gP * (c ** 3 + e ** 3 + gD ** 3 - 3 * c * e * gD) * (c * e - gD * gD)
    if m2 == 0:
        return []
    r = _sqrt(m1 * m1 - 2 * d * rho * m2)
    if r is None:
        return []
    k = gD * gD - c * e
    out = []
    for sgn in (1.0, -1.0):
        root = sgn * r
        sd = (c * e - gD * gD) * (-m1 + root) / m2
        se = -(m1 * ((c * c - e * gD) - 2 * k) + (c * c - e * gD) * root) / m2
        sf = -(m1 * ((e * e - c * gD) - 2 * k) + (e * e - c * gD) * root) / m2
        out.append((sd, se, sf))
    return out


def _select(label, cands, gP, gD, d, c, e, rho, need):
    """First candidate inside the orthant with a small residual, or nonexistent.

    ``need`` lists the coordinates that must be strictly positive for the
    point to count as a genuine 1S/2S/3S point rather than a degenerate one.
    """
    for p in cands:
        if any(not math.isfinite(x) for x in p):
            continue
        if min(p) < -ORTHANT_TOL or any(p[i] <= 0 for i in need):
            continue
        p = tuple(max(x, 0.0) for x in p)
        res = float(np.abs(reduced_rhs(p, gP, gD, d, c, e, rho)).max())
        if res >= RESIDUAL_TOL * (1 + max(p)):
            continue
        _, ev = jacobian_reduced(p, gP, gD, d, c, e, rho)
        return Equilibrium(label, p, ev, classify_eigenvalues(ev), res)
    return Equilibrium(label, None)


def forced_equilibria(gamma_P, gamma_D, delta, c=2.0, e=0.2, rho=1.0) -> ForcedEquilibria:
    """Closed-form 1S, 2S and 3S points of the forced driven unit.

    The square-root branch of the 2S and 3S forms is picked by the orthant and
    residual filter; the conventional (+) branch is tried first.
    """
    a = (gamma_P, gamma_D, delta, c, e, rho)
    return ForcedEquilibria(
        _select("1S", _point_1s(*a), *a, need=(0,)),
        _select("2S", _points_2s(*a), *a, need=(0, 1)),
        _select("3S", _points_3s(*a), *a, need=(0, 1, 2)),
        gamma_D > gamma_P,
    )


def one_s_eigenvalues(gamma_P, gamma_D, delta, c=2.0, e=0.2, rho=1.0):
    """Radial, contracting and expanding eigenvalues at the 1S point."""
    sa = _point_1s(gamma_P, gamma_D, delta, c, e, rho)[0][0]
    return (-2 * sa * gamma_D - delta + rho, -sa * c - delta + rho, -sa * e - delta + rho)


# --- critical couplings ----------------------------------------------------

@dataclass(frozen=True)
class CriticalCouplings:
    delta_c1: float
    delta_c2: float
    delta_c3: float
    delta_c4: float
    valid: dict
    unique_region: bool

    def as_row(self):
        return [self.delta_c1, self.delta_c2, self.delta_c3, self.delta_c4]


def delta_c1(gamma_P, gamma_D, c=2.0, e=0.2, rho=1.0):
    k = e - gamma_D
    return rho * (1 - e / (2 * gamma_P * k) * (e - math.sqrt(e * e - 4 * gamma_P * k)))


def delta_c2(gamma_P, gamma_D, c=2.0, e=0.2, rho=1.0):
    q = c * c + e * e + gamma_D ** 2 - e * gamma_D - c * e - c * gamma_D
    G2 = 2 * (e - gamma_D) * q * gamma_P / (e * e - c * gamma_D) ** 2
    return rho * (1 - (1 - math.sqrt(1 - 2 * G2)) / G2)


def _three_s_spectrum(gP, gD, d, c, e, rho):
    """(discriminant sign proxy, max real part of complex pair) at 3S, or None."""
    eq = _select("3S", _points_3s(gP, gD, d, c, e, rho), gP, gD, d, c, e, rho, need=(0, 1, 2))
    if not eq.exists:
        return None
    tr, m2, det = _char_coeffs(_jacobian(eq.point, gP, gD, d, c, e, rho))
    # discriminant of l^3 + a l^2 + b l + c0; negative means a complex pair
    a, b, c0 = -tr, m2, -det
    disc = 18 * a * b * c0 - 4 * a ** 3 * c0 + a * a * b * b - 4 * b ** 3 - 27 * c0 * c0
    ev = eq.eigenvalues
    cplx = np.abs(ev.imag) > EPS_EIG
    pair = float(ev.real[cplx].max()) if cplx.any() else math.nan
    return disc, pair


def _bisect(f, lo, hi, tol=BISECT_TOL):
    """Bisection on a boolean predicate with f(lo) != f(hi)."""
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_couplings(gamma_P, gamma_D, c=2.0, e=0.2, rho=1.0, n_scan=50) -> CriticalCouplings:
    """delta_c1 and delta_c2 in closed form; delta_c3 and delta_c4 by bisection.

    delta_c3 is the largest delta below delta_c2 where the 3S spectrum turns
    complex; delta_c4 the largest delta below delta_c3 where the complex pair
    crosses into the right half plane. When no crossing exists down to
    delta = 0 (driven unit at rest), delta_c4 is reported as 0.
    """
    d1 = delta_c1(gamma_P, gamma_D, c, e, rho)
    d2 = delta_c2(gamma_P, gamma_D, c, e, rho)
    valid = {"delta_c1": math.isfinite(d1), "delta_c2": math.isfinite(d2),
             "delta_c3": False, "delta_c4": False}
    d3 = d4 = math.nan
    if valid["delta_c2"] and d2 > 0:
        spec = lambda d: _three_s_spectrum(gamma_P, gamma_D, d, c, e, rho)
        grid = np.linspace(d2, 0.0, n_scan + 1)[1:]
        prev = None
        for d in grid:
            sp = spec(d)
            is_cplx = sp is not None and sp[0] < 0
            if prev is not None and is_cplx and sp is not None:
                d3 = _bisect(lambda x: (spec(x) or (1.0,))[0] < 0, d, prev)
                valid["delta_c3"] = True
                break
            prev = d
        if valid["delta_c3"]:
            unstable = lambda x: (lambda s: s is not None and s[1] > 0)(spec(x))
            lo_grid = np.linspace(d3, 0.0, n_scan + 1)[1:]
            hi = d3
            d4 = 0.0
            for d in lo_grid:
                if unstable(d):
                    d4 = _bisect(unstable, d, hi)
                    break
                hi = d
            valid["delta_c4"] = True
    return CriticalCouplings(d1, d2, d3, d4, valid, gamma_D > gamma_P)


def scan_critical_couplings(gamma_P_values, gamma_D_values, c=2.0, e=0.2, rho=1.0):
    rows = []
    for gP in gamma_P_values:
        for gD in gamma_D_values:
            cc = critical_couplings(gP, gD, c, e, rho)
            rows.append([gP, gD, *cc.as_row()])
    return rows


def write_scan_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma_P", "gamma_D", "delta_c1", "delta_c2", "delta_c3", "delta_c4"])
        for r in rows:
            w.writerow([repr(float(x)) for x in r])


# --- 9-item Hopf points ----------------------------------------------------

def gamma_g_linear(kinetics: GlvKinetics):
    """Decay rate above which the 9-item coexistence point is linearly stable."""
    lam = np.linalg.eigvals(build_rate_matrix(kinetics))
    return float(-lam.real.min())


def _nine_order_params(kinetics, gamma, sigma, t_end, dt, seed):
    from .analysis import group_measures
    from .integrate import IntegratorConfig, simulate
    from .topology import ParameterField

    stride = max(1, int(round(0.5 / dt)))
    cfg = IntegratorConfig(dt=dt, t_end=t_end, record_stride=stride, seed=seed,
                           record_from=t_end / 2)
    tr = simulate(None, ParameterField([gamma], [sigma]), kinetics, cfg)
    m = group_measures(tr.frames[tr.window(), 0, :])
    return m["within_spread"], m["amplitude"]


def find_hopf_gamma_nine(kinetics: GlvKinetics, sigma_probe=1e-12, lo=0.8, hi=1.6,
                         t_end=3000.0, dt=0.005, tol=1e-2, seed=1,
                         theta_flat=0.02, theta_amp=None):
    """Bisect gamma on two simulated order parameters of a single 9-item unit.

    gamma_c: within-group oscillation (max item spread inside a group) drops
    below ``theta_flat``. gamma_g: total oscillation amplitude drops below
    ``theta_amp`` (default 0.05 rho/gamma). Returns a dict with both values,
    flags for unresolved brackets and the linear-stability reference for gamma_g.
    """
    if not isinstance(kinetics.variant, Nine):
        raise ValueError("find_hopf_gamma_nine needs 9-item kinetics")
    cache = {}

    def probe(g):
        if g not in cache:
            cache[g] = _nine_order_params(kinetics, g, sigma_probe, t_end, dt, seed)
        return cache[g]

    def flat(g):
        return probe(g)[0] < theta_flat

    def still(g):
        th = theta_amp if theta_amp is not None else 0.05 * kinetics.rho / g
        return probe(g)[1] < th

    out = {"gamma_g_linear": gamma_g_linear(kinetics),
           "gamma_c_linear": gamma_crit_three(kinetics.variant.c, kinetics.variant.e)}
    for name, pred in (("gamma_c", flat), ("gamma_g", still)):
        a, b = lo, hi
        ok = not pred(a) and pred(b)
        if not ok:
            a, b = max(1e-3, lo - 0.2), hi + 0.2
            ok = not pred(a) and pred(b)
        if ok:
            while b - a > tol:
                m = 0.5 * (a + b)
                if pred(m):
                    b = m
                else:
                    a = m
            out[name] = 0.5 * (a + b)
        else:
            out[name] = math.nan
        out[name + "_resolved"] = ok
    return out


# --- proliferation in chains -----------------------------------------------

_RANK = {"1S": 1, "2S": 2, "3S": 3}


def proliferation_count(n):
    """(labels while the driver dwells at one saddle, labels over a full cycle)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * (n + 1) // 2, 3 * n * (n + 1) // 2


def transition_allowed(a, b) -> bool:
    """A driven unit's label can stay or move to a label with more dominant items."""
    return _RANK[b] >= _RANK[a]


def enumerate_reachable_labels(n):
    """Label tree by depth: entry k lists the labels of unit k+1, depth-first.

    Unit 1 (the pacemaker) sits at a 1S point; each label spawns every label
    it may transition to at the next unit down the chain.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    levels = [["1S"]]
    for _ in range(n - 1):
        levels.append([b for a in levels[-1] for b in _RANK if transition_allowed(a, b)])
    return levels
