"""Named experiment setups built from a parsed config, and their analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis as an
from .config import ExperimentConfig
from .equilibria import scan_critical_couplings
from .errors import ConfigError
from .integrate import IntegratorConfig, QuenchSchedule, Trajectory, simulate
from .model import GlvKinetics
from .topology import (ParameterField, chain_bidirectional, disc_mask, disc_pacemaker_field,
                       grid_diffusive, random_defect_field, ring_directed,
                       ring_distance_dependent)


@dataclass
class Setup:
    K: object
    field: ParameterField
    kinetics: GlvKinetics
    integ: IntegratorConfig
    quench: QuenchSchedule | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class Result:
    """Tables are ``name -> (header, rows)``; ``summary`` feeds sweep aggregation."""

    trajectory: Trajectory | None
    tables: dict
    summary: dict
    setup: Setup | None = None


def kinetics_from(cfg: ExperimentConfig) -> GlvKinetics:
    k = cfg.sections.get("kinetics", {})
    variant = k.get("variant", "three")
    rho = k.get("rho", 1.0)
    if variant == "three":
        extra = set(k) & {"d", "f", "r"}
        if extra:
            raise ConfigError("only valid for variant = nine", key=f"kinetics.{sorted(extra)[0]}")
        return GlvKinetics.three(k.get("c", 2.0), k.get("e", 0.2), rho)
    if variant == "nine":
        return GlvKinetics.nine(k.get("c", 2.0), k.get("e", 0.2), k.get("d", 2.0),
                                k.get("f", 0.3), k.get("r", 1.25), rho)
    raise ConfigError(f"unknown variant {variant!r}", key="kinetics.variant")


def integrator_from(cfg, kin, seed) -> IntegratorConfig:
    s = cfg.sections.get("integrator", {})
    dt = s.get("dt", 0.01 if kin.n == 3 else 0.005)
    stride_default = max(1, int(round(0.1 / dt)))
    return IntegratorConfig(dt=dt, t_end=s.get("t_end", 1000.0),
                            record_stride=s.get("record_stride", stride_default),
                            scheme=s.get("scheme", "rk4"), clamp_floor=s.get("clamp_floor", 0.0),
                            seed=seed, record_from=s.get("record_from", 0.0))


def _gamma_interval(u):
    return (u.get("gamma_lo", 1.5), u.get("gamma_hi", 1.6))


def build_setup(cfg: ExperimentConfig, seed=None) -> Setup:
    exp = cfg.experiment
    seed = cfg.seed if seed is None else seed
    kin = kinetics_from(cfg)
    integ = integrator_from(cfg, kin, seed)
    u = cfg.sections.get("units", {})
    t = cfg.sections.get("topology", {})
    req = cfg.require
    meta = {"experiment": exp}
    quench = None
    if exp == "single_unit":
        fld = ParameterField([req("units", "gamma")], [u.get("sigma", 0.0)], (0,))
        K = None
    elif exp in ("two_unit", "chain", "ring", "ring_distance"):
        N = 2 if exp == "two_unit" else req("topology", "N")
        gP, gD = req("units", "gamma_P"), req("units", "gamma_D")
        sP = u.get("sigma_P", 0.0)
        fld = ParameterField.pacemaker_chain(N, gP, gD, sP, u.get("sigma_D", 0.0))
        delta = req("topology", "delta")
        if exp in ("two_unit", "chain"):
            K = chain_bidirectional(N, delta, t.get("delta_b", 0.0))
        elif exp == "ring":
            kp = t.get("k_p", 0)
            K = ring_directed(N, delta, req("topology", "delta_P"), kp)
            g = np.full(N, gD)
            g[kp] = gP
            s = np.full(N, u.get("sigma_D", 0.0))
            s[kp] = sP
            fld = ParameterField(g, s, (kp,))
        else:
            K = ring_distance_dependent(N, delta, t.get("delta_b", 0.0))
    elif exp in ("grid_random", "grid_disc", "quench"):
        L = req("topology", "L")
        fseed = u.get("field_seed", seed)
        gpm = u.get("gamma_pacemaker", 0.8)
        if exp == "grid_random":
            fld = random_defect_field(L, req("topology", "p_d"), gpm, _gamma_interval(u), fseed)
        else:
            R = req("topology", "R")
            fld = disc_pacemaker_field(L, R, gpm, _gamma_interval(u), fseed)
            meta["R"] = R
        fld = fld.with_sigma(u.get("sigma", 0.0))
        K = grid_diffusive(L, req("topology", "delta"), t.get("boundary", "periodic"))
        meta["L"] = L
        if exp == "quench":
            tq = req("quench", "t_q")
            quench = QuenchSchedule(((tq, fld.pacemakers, cfg.get("quench", "gamma", 1.55)),))
            meta["t_q"] = tq
            meta["gamma_q"] = cfg.get("quench", "gamma", 1.55)
    else:
        raise ConfigError(f"experiment {exp!r} has no simulation setup", key="run.experiment")
    return Setup(K, fld, kin, integ, quench, meta)


def _window(cfg):
    return cfg.get("analysis", "window", 0.5)


def _symbols(traj, units, cfg):
    hi = cfg.get("analysis", "theta_hi", an.THETA_HI)
    lo = cfg.get("analysis", "theta_lo", an.THETA_LO)
    w = traj.window(_window(cfg))
    return {k: an.symbol_sequence(traj, k, hi, lo, w) for k in units}


def _regime_rows(traj, units, cfg):
    w = traj.window(_window(cfg))
    rows = []
    for k in units:
        r = an.classify_regime(traj, k, w)
        d = r.diagnostics
        rows.append((k, r.label.value, d["min"], d["variance"], d["maxima_spread"],
                     d["amplitude"]))
    return rows


REGIME_HEADER = ["unit", "regime", "min", "variance", "maxima_spread", "amplitude"]
HIER_HEADER = ["unit", "level", "amplitude", "within_spread", "groups_dominating"]


def _hier_row(traj, k, w):
    h = an.hierarchy_level(traj, k, w)
    return (k, h.level.name.lower(), h.amplitude, h.within_spread, h.groups_dominating)


def quench_persistence(traj, t_q, units=None, span=50.0, theta=None, rho=1.0):
    """Time after ``t_q`` during which between-group switching continues.

    Sliding windows of length ``span`` start every recorded frame after the
    quench; a window is active while the median amplitude over ``units``
    exceeds ``theta`` and most of those units change dominant group in it.
    """
    times, F = traj.times, traj.frames
    units = np.arange(F.shape[1]) if units is None else np.asarray(units)
    if theta is None:
        theta = an.theta_amp(float(np.median(traj.field.gamma[units])), rho)
    gs = np.stack([F[:, units][:, :, list(g)].sum(axis=2) for g in an.GROUPS], axis=2)
    dom = gs.argmax(axis=2)
    last = t_q
    i0 = int(np.searchsorted(times, t_q))
    for i in range(i0, len(times)):
        j = int(np.searchsorted(times, times[i] + span))
        if j >= len(times):
            break
        x = F[i:j + 1, units]
        amp = np.median((x.max(axis=0) - x.min(axis=0)).max(axis=1))
        switching = np.mean((dom[i:j + 1] != dom[i]).any(axis=0))
        if amp >= theta and switching >= 0.5:
            last = times[j]
        else:
            break
    return last - t_q


def analyse(setup: Setup, traj: Trajectory, cfg: ExperimentConfig) -> Result:
    exp = setup.meta["experiment"]
    nine = setup.kinetics.n == 9
    w = traj.window(_window(cfg))
    tables, summary = {}, {}
    N = setup.field.N
    if exp in ("single_unit", "two_unit", "chain", "ring", "ring_distance"):
        units = list(range(N))
        seqs = _symbols(traj, units if N <= 64 else units[:64], cfg)
        tables["symbols"] = ("symbols", seqs)
        reg = _regime_rows(traj, units, cfg)
        tables["regimes"] = (REGIME_HEADER, reg)
        summary["regime_pacemaker"] = reg[0][1]
        if N > 1:
            summary["regime_unit1"] = reg[1][1]
            summary["hc_units"] = sum(r[1] == "HC" for r in reg)
            ml = cfg.get("analysis", "max_lag")
            el = an.entrainment_length(traj, w, max_lag=ml)
            summary["entrainment_length"] = el
            tables["entrainment"] = (["entrainment_length"], [(el,)])
        if nine:
            rows = [_hier_row(traj, k, w) for k in units[:min(N, 4)]]
            tables["hierarchy"] = (HIER_HEADER, rows)
            summary["hierarchy_pacemaker"] = rows[0][1]
            p = an.detect_path(seqs[0])
            summary["path_pacemaker"] = p.value
    else:
        L = setup.meta["L"]
        amp = an.unit_amplitudes(traj, w)
        summary["mean_amplitude"] = float(amp.mean())
        if exp == "grid_random":
            rep = representative_defect(setup.field)
            row = _hier_row(traj, rep, w)
            tables["hierarchy"] = (HIER_HEADER, [row])
            summary["representative_unit"] = rep
            summary["hierarchy_representative"] = row[1]
        else:
            prof = an.radial_amplitude_profile(traj, n_bins=cfg.get("analysis", "n_bins", 8),
                                               window=w, shape=(L, L))
            tables["radial_profile"] = ("profile", prof)
            adj = disc_neighbours(L, setup.meta["R"])
            rows = [_hier_row(traj, k, w) for k in adj]
            tables["hierarchy"] = (HIER_HEADER, rows)
            summary["adjacent_two_level"] = float(np.mean([r[1] == "two_level" for r in rows]))
            if exp == "quench":
                tq = setup.meta["t_q"]
                th = an.theta_amp(setup.meta["gamma_q"], setup.kinetics.rho)
                summary["persistence"] = quench_persistence(traj, tq, setup.field.pacemakers,
                                                            theta=th)
    return Result(traj, tables, summary, setup)


def representative_defect(fld: ParameterField, near=(0.25, 0.12)):
    """Defect site closest to a fixed fractional grid position."""
    L0, L1 = fld.shape
    defects = np.setdiff1d(np.arange(fld.N), fld.pacemakers)
    if defects.size == 0:
        defects = np.arange(fld.N)
    x, y = defects // L1, defects % L1
    d2 = (x - near[0] * L0) ** 2 + (y - near[1] * L1) ** 2
    return int(defects[np.argmin(d2)])


def disc_neighbours(L, R, width=1.5):
    """Sites just outside the disc: R < r <= R + width."""
    c = (L - 1) / 2
    x, y = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    r = np.hypot(x - c, y - c).ravel()
    return np.flatnonzero((r > R) & (r <= R + width)).tolist()


def run_setup(setup: Setup, cfg: ExperimentConfig) -> Result:
    traj = simulate(setup.K, setup.field, setup.kinetics, setup.integ, setup.quench)
    return analyse(setup, traj, cfg)


def bifurcation_scan(cfg: ExperimentConfig) -> Result:
    s = cfg.sections["scan"]
    gp = np.linspace(s.get("gamma_P_min", 0.5), s.get("gamma_P_max", 1.05), s.get("gamma_P_n", 20))
    gd = np.linspace(s.get("gamma_D_min", 1.11), s.get("gamma_D_max", 2.5), s.get("gamma_D_n", 20))
    kin = kinetics_from(cfg) if "kinetics" in cfg.sections else GlvKinetics.three()
    v = kin.variant
    rows = scan_critical_couplings(gp, gd, v.c, v.e, kin.rho)
    head = ["gamma_P", "gamma_D", "delta_c1", "delta_c2", "delta_c3", "delta_c4"]
    return Result(None, {"critical_couplings": (head, rows)}, {"points": len(rows)})


# --- sweeps ----------------------------------------------------------------

def sweep_configs(cfg: ExperimentConfig):
    """(run_index, value, config) triples for every grid point."""
    sw = cfg.sections["sweep"]
    param = sw.get("parameter", "")
    if "." not in param:
        raise ConfigError("expected section.key", key="sweep.parameter")
    sec, key = param.split(".", 1)
    from .config import SCHEMA
    if sec not in SCHEMA or key not in SCHEMA[sec] or sec in ("run", "sweep"):
        raise ConfigError(f"cannot sweep {param!r}", key="sweep.parameter")
    base = cfg.with_value("run", "experiment", sw["base"])
    base = ExperimentConfig({s: v for s, v in base.sections.items() if s != "sweep"}, base.text)
    conv = SCHEMA[sec][key]
    out = []
    for i, val in enumerate(sw.get("values", ())):
        v = int(val) if conv is int else val
        out.append((i, v, base.with_value(sec, key, v)))
    return param, out


def run_seed(master_seed, run_index):
    """64-bit seed for run ``run_index`` of a sweep, from SeedSequence((master, index))."""
    ss = np.random.SeedSequence((int(master_seed), int(run_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def sweep_point(args):
    """Worker entry: returns (index, value, summary or fault text)."""
    i, val, cfg, master = args
    from .errors import IntegrationFault
    try:
        setup = build_setup(cfg, seed=run_seed(master, i))
        res = run_setup(setup, cfg)
        return i, val, res.summary, None
    except IntegrationFault as exc:
        return i, val, {}, str(exc)
