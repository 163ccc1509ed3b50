"""Observables computed from trajectories: symbols, paths, hierarchy, regimes,
entrainment and spatial profiles."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

# default thresholds; all are overridable per call
THETA_HI = 0.5      # fraction of the window maximum
THETA_LO = 0.05     # fraction of the window maximum (0.1 * THETA_HI)
THETA_DOM = 1e-3
THETA_VAR = 1e-8
THETA_HC = 1e-6
THETA_FLAT = 0.02
THETA_QP = 0.05
THETA_MONO = 0.10
AMP_FRAC = 0.05     # theta_amp = AMP_FRAC * rho / gamma
PATH_PURITY = 0.9

# 1-indexed as usually written
PATH1 = (1, 2, 3, 6, 4, 5, 8, 9, 7)
PATH2 = (1, 4, 7, 8, 2, 5, 6, 9, 3)


def theta_amp(gamma, rho=1.0):
    return AMP_FRAC * rho / gamma


def _frames(traj):
    return traj.frames if hasattr(traj, "frames") else np.asarray(traj)


def _times(traj, n):
    return traj.times if hasattr(traj, "times") else np.arange(n, dtype=float)


def _win(traj, window):
    if window is None:
        return traj.window() if hasattr(traj, "window") else slice(None)
    if isinstance(window, float):
        return traj.window(window)
    return window


# --- dominance -------------------------------------------------------------

def dominant_item(frame, unit=None, theta_dom=THETA_DOM, diagnostic=False):
    """Index of the largest item (lowest index on ties).

    With ``diagnostic=True`` returns ``(item, degenerate)`` where degenerate
    marks frames whose item spread is below ``theta_dom``.
    """
    x = np.asarray(frame, dtype=float)
    if unit is not None:
        x = x[unit]
    i = int(np.argmax(x))
    if diagnostic:
        return i, bool(x.max() - x.min() < theta_dom)
    return i


def spatiotemporal_field(traj, theta_dom=THETA_DOM, shape=None):
    """Per-frame dominant item, its concentration and the degenerate mask.

    Arrays have shape (frames, N) or (frames, *shape) for grid fields.
    """
    F = _frames(traj)
    item = F.argmax(axis=2)
    conc = np.take_along_axis(F, item[..., None], axis=2)[..., 0]
    degen = (F.max(axis=2) - F.min(axis=2)) < theta_dom
    if shape is None and getattr(traj, "field", None) is not None:
        shape = traj.field.shape
    if shape is not None:
        item = item.reshape(len(F), *shape)
        conc = conc.reshape(len(F), *shape)
        degen = degen.reshape(len(F), *shape)
    return item, conc, degen


# --- symbol sequences ------------------------------------------------------

@dataclass(frozen=True)
class SymbolSequence:
    """Completed dwells: item (0-based), entry time and dwell duration."""

    items: np.ndarray
    entries: np.ndarray
    dwells: np.ndarray
    theta_hi: float = float("nan")
    theta_lo: float = float("nan")

    def __len__(self):
        return len(self.items)

    def transitions(self):
        return list(zip(self.items[:-1].tolist(), self.items[1:].tolist()))


def symbols_from_series(x, times, theta_hi=THETA_HI, theta_lo=THETA_LO):
    """Hysteresis symbolisation of one unit's (T, n) series.

    Item j is emitted when it is the argmax, has reached ``theta_hi * max``
    and the current symbol has decayed below ``theta_lo * max``. Only dwells
    closed by a later emission are kept.
    """
    if not theta_hi > theta_lo > 0:
        raise ValueError("need theta_hi > theta_lo > 0")
    x = np.asarray(x, dtype=float)
    top = float(x.max()) if x.size else 0.0
    hi, lo = theta_hi * top, theta_lo * top
    if top <= 0:
        return SymbolSequence(np.zeros(0, int), np.zeros(0), np.zeros(0), hi, lo)
    am = x.argmax(axis=1)
    peak = x[np.arange(len(x)), am]
    cur = -1
    items, entries = [], []
    for t in range(len(x)):
        j = am[t]
        if j == cur or peak[t] < hi:
            continue
        if cur < 0 or x[t, cur] < lo:
            cur = j
            items.append(j)
            entries.append(times[t])
    items = np.array(items[:-1], dtype=int)
    ent = np.array(entries, dtype=float)
    dw = np.diff(ent)
    return SymbolSequence(items, ent[:-1], dw, hi, lo)


def symbol_sequence(traj, unit, theta_hi=THETA_HI, theta_lo=THETA_LO, window=None):
    """Symbol sequence of ``unit`` over ``window`` (default: final half)."""
    F = _frames(traj)
    w = _win(traj, window)
    return symbols_from_series(F[w, unit, :], _times(traj, len(F))[w], theta_hi, theta_lo)


def _items_of(seq):
    return np.asarray(seq.items if isinstance(seq, SymbolSequence) else seq, dtype=int)


def edge_purity(seq, edges):
    """Fraction of observed transitions that lie in ``edges``."""
    it = _items_of(seq)
    if len(it) < 2:
        return 0.0
    hits = sum((a, b) in edges for a, b in zip(it[:-1].tolist(), it[1:].tolist()))
    return hits / (len(it) - 1)


def cycle_edges(cycle):
    """Directed edges of a closed cycle (0-based items)."""
    c = list(cycle)
    return {(c[i], c[(i + 1) % len(c)]) for i in range(len(c))}


def path_edges(path):
    """Allowed transitions of a 9-item path: the 9-cycle plus each triple's closing edge.

    Within a triple the unit may loop several times before moving on.
    """
    p = [i - 1 for i in path]
    e = cycle_edges(p)
    for b in range(3):
        e.add((p[3 * b + 2], p[3 * b]))
    return e


_PATH_EDGES = {"Path1": path_edges(PATH1), "Path2": path_edges(PATH2)}


class Path(enum.Enum):
    PATH1 = "Path1"
    PATH2 = "Path2"
    UNKNOWN = "Unknown"


def detect_path(seq, min_purity=PATH_PURITY):
    """Classify a 9-item symbol sequence (0-based items) by heteroclinic path.

    A path matches when all nine items occur and at least ``min_purity`` of
    the observed transitions are among the path's allowed transitions.
    """
    it = _items_of(seq)
    if len(it) < 9 or len(set(it.tolist())) < 9:
        return Path.UNKNOWN
    best, score = Path.UNKNOWN, min_purity
    for p in (Path.PATH1, Path.PATH2):
        s = edge_purity(it, _PATH_EDGES[p.value])
        if s >= score:
            best, score = p, s
    return best


# --- hierarchy and regimes -------------------------------------------------

GROUPS = ((0, 1, 2), (3, 4, 5), (6, 7, 8))


class Hierarchy(enum.IntEnum):
    UNKNOWN = -1
    COEXISTENCE = 0
    ONE_LEVEL = 1
    TWO_LEVEL = 2


@dataclass(frozen=True)
class HierarchyLevel:
    level: Hierarchy
    amplitude: float
    within_spread: float
    groups_dominating: int
    diagnostics: dict = field(default_factory=dict)


def group_measures(x):
    """Amplitude, within-group spread and between-group switching of a (T, 9) series."""
    x = np.asarray(x, dtype=float)
    amp = float((x.max(axis=0) - x.min(axis=0)).max())
    spread = max(float((x[:, g].max(axis=1) - x[:, g].min(axis=1)).max()) for g in GROUPS)
    gs = np.stack([x[:, g].sum(axis=1) for g in GROUPS], axis=1)
    dom = np.unique(gs.argmax(axis=1))
    return {"amplitude": amp, "within_spread": spread, "groups_dominating": int(dom.size)}


def hierarchy_level(traj, unit, window=None, gamma=None, rho=1.0,
                    theta_amp_=None, theta_flat=THETA_FLAT):
    """Two-level, one-level or coexistence motion of a 9-item unit.

    ``theta_amp_`` defaults to 0.05 rho/gamma, with gamma taken from the
    trajectory's parameter field when not given.
    """
    F = _frames(traj)
    x = F[_win(traj, window), unit, :]
    if gamma is None:
        gamma = float(traj.field.gamma[unit])
    th = theta_amp_ if theta_amp_ is not None else theta_amp(gamma, rho)
    m = group_measures(x)
    if len(x) < 3:
        lvl = Hierarchy.UNKNOWN
    elif m["amplitude"] < th:
        lvl = Hierarchy.COEXISTENCE
    elif m["groups_dominating"] >= 2 and m["within_spread"] > th:
        lvl = Hierarchy.TWO_LEVEL
    elif m["groups_dominating"] >= 2 and m["within_spread"] <= theta_flat:
        lvl = Hierarchy.ONE_LEVEL
    else:
        lvl = Hierarchy.UNKNOWN
    return HierarchyLevel(lvl, m["amplitude"], m["within_spread"], m["groups_dominating"],
                          {"theta_amp": th, "theta_flat": theta_flat})


class Regime(enum.Enum):
    HC = "HC"
    LC = "LC"
    CE = "CE"
    QP = "QP"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class RegimeLabel:
    label: Regime
    diagnostics: dict


def local_maxima(y):
    y = np.asarray(y)
    if len(y) < 3:
        return np.zeros(0)
    m = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    return y[1:-1][m]


def local_minima(y):
    return -local_maxima(-np.asarray(y))


def maxima_spread(x):
    """Largest relative spread (max - min) / mean of successive maxima over items."""
    worst = 0.0
    for i in range(x.shape[1]):
        pk = local_maxima(x[:, i])
        if len(pk) >= 2 and pk.mean() > 0:
            worst = max(worst, float((pk.max() - pk.min()) / pk.mean()))
    return worst


def dwell_growth(x, factor=10.0, min_count=4):
    """True when the successive minima of every item are still falling.

    The minima in the later half of the window must sit at least ``factor``
    below those in the earlier half (geometric means). A limit cycle close to
    the heteroclinic contour has tiny but converged minima and fails this.
    """
    for i in range(x.shape[1]):
        mn = local_minima(x[:, i])
        if len(mn) < min_count:
            return False
        lg = np.log10(np.maximum(mn, 1e-300))
        h = len(lg) // 2
        if lg[:h].mean() - lg[h:].mean() < np.log10(factor):
            return False
    return True


def classify_regime(traj, unit, window=None, noiseless=None, theta_var=THETA_VAR,
                    theta_hc=THETA_HC, theta_qp=THETA_QP):
    """CE, HC, QP or LC for one unit over a post-transient window.

    Without noise HC means the minima are still decaying; with noise the
    descent stalls at the noise floor, so HC means the minimum is below
    ``theta_hc``.
    """
    F = _frames(traj)
    x = F[_win(traj, window), unit, :]
    if noiseless is None:
        fld = getattr(traj, "field", None)
        noiseless = fld is None or not (fld.sigma > 0).any()
    var = float(x.var(axis=0).max())
    mn = float(x.min())
    spread = maxima_spread(x)
    growth = bool(dwell_growth(x)) if noiseless else False
    diag = {"variance": var, "min": mn, "maxima_spread": spread, "dwell_growth": growth,
            "amplitude": float((x.max(axis=0) - x.min(axis=0)).max())}
    if len(x) < 3:
        return RegimeLabel(Regime.UNKNOWN, diag)
    if var < theta_var:
        # a static state near an absent item is a saddle dwell, not coexistence
        lab = Regime.CE if mn >= theta_hc else Regime.HC
    elif growth or (not noiseless and mn < theta_hc):
        lab = Regime.HC
    elif spread > theta_qp:
        lab = Regime.QP
    else:
        lab = Regime.LC
    return RegimeLabel(lab, diag)


# --- entrainment -----------------------------------------------------------

def matches_cycle(seq, ref_edges, min_purity=PATH_PURITY, min_transitions=None):
    """Does ``seq`` run the cycle whose transitions are ``ref_edges``?"""
    it = _items_of(seq)
    need = min_transitions if min_transitions is not None else 2 * len(ref_edges)
    if len(it) - 1 < max(need, 1):
        return False
    seen = set(zip(it[:-1].tolist(), it[1:].tolist()))
    return ref_edges <= seen and edge_purity(it, ref_edges) >= min_purity


def _median_lag(lead, follow):
    lags = []
    for item, t in zip(lead.items, lead.entries):
        later = follow.entries[(follow.items == item) & (follow.entries >= t)]
        if len(later):
            lags.append(later[0] - t)
    return float(np.median(lags)) if lags else float("inf")


def entrainment_length(traj, window=None, theta_amp_=None, max_lag=None, gamma_D=None,
                       rho=1.0):
    """Number of consecutive driven units (1, 2, ...) locked to the pacemaker's cycle.

    Unit 0 is the pacemaker. A unit counts when its amplitude exceeds
    ``theta_amp_`` (default 0.05 rho/gamma_D) and its observed transitions
    reproduce the pacemaker's. With ``max_lag`` (time units) the median delay
    behind the preceding unit must also stay within ``max_lag``.
    """
    F = _frames(traj)
    w = _win(traj, window)
    x = F[w]
    times = _times(traj, len(F))[w]
    N = x.shape[1]
    if gamma_D is None:
        gamma_D = float(traj.field.gamma[1 if N > 1 else 0])
    th = theta_amp_ if theta_amp_ is not None else theta_amp(gamma_D, rho)
    amp = (x.max(axis=0) - x.min(axis=0)).max(axis=1)
    pace = symbols_from_series(x[:, 0, :], times)
    if amp[0] <= th or len(pace) < 2:
        return 0
    ref = set(pace.transitions())
    prev = pace
    m = 0
    for k in range(1, N):
        if amp[k] <= th:
            break
        sk = symbols_from_series(x[:, k, :], times)
        if not matches_cycle(sk, ref):
            break
        if max_lag is not None and _median_lag(prev, sk) > max_lag:
            break
        prev = sk
        m = k
    return m


# --- spatial profiles ------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    edges: np.ndarray
    centers: np.ndarray
    amplitude: np.ndarray
    counts: np.ndarray


def unit_amplitudes(traj, window=None):
    x = _frames(traj)[_win(traj, window)]
    return (x.max(axis=0) - x.min(axis=0)).max(axis=1)


def radial_amplitude_profile(traj, center=None, n_bins=8, window=None, shape=None,
                             r_max=None):
    """Mean oscillation amplitude in radial bins around ``center`` on an L x L grid."""
    if shape is None:
        shape = traj.field.shape
    L0, L1 = shape
    if center is None:
        center = ((L0 - 1) / 2, (L1 - 1) / 2)
    amp = unit_amplitudes(traj, window).reshape(shape)
    x, y = np.meshgrid(np.arange(L0), np.arange(L1), indexing="ij")
    r = np.hypot(x - center[0], y - center[1])
    r_max = r_max if r_max is not None else min(L0, L1) / 2
    edges = np.linspace(0.0, r_max, n_bins + 1)
    idx = np.digitize(r, edges) - 1
    mean = np.full(n_bins, np.nan)
    counts = np.zeros(n_bins, dtype=int)
    for b in range(n_bins):
        sel = idx == b
        counts[b] = int(sel.sum())
        if counts[b]:
            mean[b] = float(amp[sel].mean())
    return RadialProfile(edges, 0.5 * (edges[1:] + edges[:-1]), mean, counts)


def monotone_within(values, tol=THETA_MONO):
    """Each value is at most (1 + tol) times its predecessor."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] * (1 + tol)))


# --- CSV emitters ----------------------------------------------------------

def write_symbols_csv(path, sequences):
    """``sequences`` maps unit index to SymbolSequence; items are written 1-indexed."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["unit", "item", "entry_time", "dwell"])
        for unit, seq in sequences.items():
            for i, t, d in zip(seq.items, seq.entries, seq.dwells):
                w.writerow([unit, int(i) + 1, repr(float(t)), repr(float(d))])


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in r])


def write_profile_csv(path, prof: RadialProfile):
    write_rows_csv(path, ["r_lo", "r_hi", "amplitude", "count"],
                   [(float(a), float(b), float(m), int(c)) for a, b, m, c in
                    zip(prof.edges[:-1], prof.edges[1:], prof.amplitude, prof.counts)])
