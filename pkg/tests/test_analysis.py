import numpy as np
import pytest

from hetpace import analysis as an
from hetpace.analysis import Hierarchy, Path, Regime
from hetpace.integrate import IntegratorConfig, simulate
from hetpace.model import GlvKinetics
from hetpace.topology import ParameterField, chain_unidirectional, grid_diffusive


class Fake:
    """Minimal trajectory stand-in built from arrays."""

    def __init__(self, frames, times=None, field=None):
        self.frames = np.asarray(frames, dtype=float)
        self.times = np.arange(len(self.frames), dtype=float) if times is None else times
        self.field = field

    def window(self, frac=0.5):
        return slice(0, len(self.frames))


def square_wave(n_items=3, dwell=20, cycles=10, low=1e-9):
    x = []
    for c in range(cycles):
        for i in range(n_items):
            row = np.full(n_items, low)
            row[i] = 1.0
            x.extend([row] * dwell)
    return np.array(x)


def test_dominant_item():
    assert an.dominant_item([0.9, 0.05, 0.05]) == 0
    assert an.dominant_item([0.5, 0.5, 0.0]) == 0
    xs = 1 / 3.31
    assert an.dominant_item([xs] * 3, diagnostic=True) == (0, True)
    assert an.dominant_item(np.array([[0.1, 0.7, 0.2]]), 0, diagnostic=True) == (1, False)


def test_symbols_square_wave():
    x = square_wave()
    seq = an.symbols_from_series(x, np.arange(len(x), dtype=float))
    assert seq.items[:6].tolist() == [0, 1, 2, 0, 1, 2]
    assert np.all(np.diff(seq.items) != 0)
    assert np.all(seq.dwells == 20)


def test_symbols_scale_invariant():
    x = square_wave() * 0.3 + 0.01 * np.sin(np.arange(600))[:, None] ** 2
    t = np.arange(len(x), dtype=float)
    a = an.symbols_from_series(x, t)
    b = an.symbols_from_series(x * 17.0, t)
    assert np.array_equal(a.items, b.items) and np.array_equal(a.entries, b.entries)


def test_symbols_ce_empty():
    x = np.full((500, 3), 1 / 3.3)
    assert len(an.symbols_from_series(x, np.arange(500.0))) == 0


def test_symbols_thresholds_checked():
    with pytest.raises(ValueError):
        an.symbols_from_series(square_wave(), np.arange(600.0), 0.1, 0.5)


def test_hc_unit_cycle_direction():
    fld = ParameterField([0.6], [1e-8])
    cfg = IntegratorConfig(dt=0.01, t_end=1500, record_stride=10, seed=3,
                           scheme="euler_maruyama")
    tr = simulate(None, fld, GlvKinetics.three(), cfg)
    seq = an.symbol_sequence(tr, 0)
    assert len(seq) >= 6
    # item i is hit hardest (rate c) by item i+1, so dominance passes i -> i+1
    assert set(seq.transitions()) == {(0, 1), (1, 2), (2, 0)}


def zero_based(p):
    return [i - 1 for i in p]


def test_detect_path_literals():
    p1 = zero_based(an.PATH1)
    p2 = zero_based(an.PATH2)
    assert an.detect_path(p1) is Path.PATH1
    assert an.detect_path(p2[3:] + p2[:3]) is Path.PATH2
    assert an.detect_path(list(range(9))) is Path.UNKNOWN
    assert an.detect_path(p1[:8]) is Path.UNKNOWN


def test_detect_path_rotation_and_repeats():
    p1 = zero_based(an.PATH1)
    for r in range(9):
        rot = p1[r:] + p1[:r]
        assert an.detect_path(rot * 3) is Path.PATH1
    # two-level motion loops inside each triple before moving on
    grouped = [0, 1, 2] * 3 + [5, 3, 4] * 3 + [7, 8, 6] * 3
    assert an.detect_path(grouped * 2) is Path.PATH1


def test_hierarchy_fixtures():
    t = np.linspace(0, 60, 3000)
    base = np.zeros((len(t), 9))
    g = (np.floor(t / 20).astype(int)) % 3
    for k in range(len(t)):
        base[k, 3 * g[k]:3 * g[k] + 3] = 0.4
    two = base.copy()
    two[:, 0] += 0.2 * (np.sin(t) > 0)
    flat = base.copy()
    ce = np.full((len(t), 9), 0.09) + 1e-4 * np.sin(t)[:, None]
    assert an.hierarchy_level(Fake(two[:, None]), 0, gamma=1.0).level is Hierarchy.TWO_LEVEL
    assert an.hierarchy_level(Fake(flat[:, None]), 0, gamma=1.0).level is Hierarchy.ONE_LEVEL
    assert an.hierarchy_level(Fake(ce[:, None]), 0, gamma=1.0).level is Hierarchy.COEXISTENCE


def test_classify_fixtures():
    ce = np.full((400, 3), 1 / 3.3)
    assert an.classify_regime(Fake(ce[:, None, :]), 0, noiseless=True).label is Regime.CE
    t = np.linspace(0, 200, 4000)
    ph = np.stack([t, t - 2 * np.pi / 3, t - 4 * np.pi / 3], 1)
    hc = 10.0 ** (-(1 + t / 10)[:, None] * (1 - np.cos(ph)) / 2)
    assert an.classify_regime(Fake(hc[:, None, :]), 0, noiseless=True).label is Regime.HC
    # near-contour cycle: minima tiny but converged
    deep = 10.0 ** (-12 * (1 - np.cos(ph)) / 2)
    assert an.classify_regime(Fake(deep[:, None, :]), 0, noiseless=True).label is not Regime.HC
    floor = square_wave(low=1e-9)
    assert an.classify_regime(Fake(floor[:, None, :]), 0, noiseless=False).label is Regime.HC
    lc = 0.3 + 0.1 * np.stack([np.sin(t), np.sin(t + 2), np.sin(t + 4)], 1)
    assert an.classify_regime(Fake(lc[:, None, :]), 0, noiseless=True).label is Regime.LC
    qp = lc * (1 + 0.3 * np.sin(0.1 * np.sqrt(2) * t))[:, None]
    assert an.classify_regime(Fake(qp[:, None, :]), 0, noiseless=True).label is Regime.QP


def test_single_unit_ce():
    fld = ParameterField([1.2], [0.0])
    tr = simulate(None, fld, GlvKinetics.three(),
                  IntegratorConfig(dt=0.01, t_end=500, record_stride=10, seed=1))
    assert an.classify_regime(tr, 0).label is Regime.CE


def test_entrainment_zero_coupling_and_identical_units():
    fld = ParameterField.pacemaker_chain(3, 0.6, 1.11, 1e-8, 0.0)
    cfg = IntegratorConfig(dt=0.01, t_end=1200, record_stride=10, seed=2,
                           scheme="euler_maruyama")
    tr = simulate(chain_unidirectional(3, 0.0), fld, GlvKinetics.three(), cfg)
    assert an.entrainment_length(tr) == 0
    # four identical HC units diffusively coupled lock together
    L = 4
    from hetpace.topology import chain_bidirectional
    fld = ParameterField(np.full(L, 0.6), np.full(L, 1e-8), (0,))
    tr = simulate(chain_bidirectional(L, 0.5, 0.5), fld, GlvKinetics.three(), cfg)
    assert an.entrainment_length(tr) == L - 1


def test_entrainment_monotone_in_theta():
    fld = ParameterField.pacemaker_chain(6, 0.6, 1.11, 1e-8, 0.0)
    cfg = IntegratorConfig(dt=0.01, t_end=1500, record_stride=10, seed=2,
                           scheme="euler_maruyama")
    tr = simulate(chain_unidirectional(6, 0.8), fld, GlvKinetics.three(), cfg)
    lens = [an.entrainment_length(tr, theta_amp_=th) for th in (0.01, 0.1, 0.5, 0.9, 2.0)]
    assert all(a >= b for a, b in zip(lens, lens[1:]))
    assert lens[-1] == 0


def test_radial_profile_flat_for_ce():
    L = 8
    frames = np.full((20, L * L, 9), 0.09)
    prof = an.radial_amplitude_profile(Fake(frames), n_bins=4, shape=(L, L))
    assert np.all(prof.amplitude == 0) and prof.counts.sum() <= L * L


def test_radial_profile_decay_fixture():
    L = 16
    c = (L - 1) / 2
    x, y = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    r = np.hypot(x - c, y - c).ravel()
    t = np.linspace(0, 10, 50)
    frames = 0.1 + np.exp(-r)[None, :, None] * np.sin(t)[:, None, None] * np.ones(3)
    prof = an.radial_amplitude_profile(Fake(frames), n_bins=4, shape=(L, L))
    assert an.monotone_within(prof.amplitude)
    assert not an.monotone_within([1.0, 0.5, 0.6])


def test_spatiotemporal_field():
    frames = np.full((3, 4, 9), 0.09)
    item, conc, degen = an.spatiotemporal_field(Fake(frames), shape=(2, 2))
    assert item.shape == (3, 2, 2) and np.all(item == 0) and degen.all()
    x = square_wave(cycles=2)
    item, _, degen = an.spatiotemporal_field(Fake(x[:, None, :]))
    assert item.min() >= 0 and item.max() < 3 and not degen.any()
    changes = item[1:, 0][item[1:, 0] != item[:-1, 0]]
    assert changes.tolist()[:3] == [1, 2, 0]


def test_csv_emitters(tmp_path):
    seq = an.symbols_from_series(square_wave(), np.arange(600.0))
    an.write_symbols_csv(tmp_path / "s.csv", {0: seq})
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "unit,item,entry_time,dwell" and lines[1].startswith("0,1,")
    prof = an.radial_amplitude_profile(Fake(np.zeros((3, 16, 3))), n_bins=2, shape=(4, 4))
    an.write_profile_csv(tmp_path / "p.csv", prof)
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "r_lo,r_hi,amplitude,count"
