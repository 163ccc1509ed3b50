"""Command-line runner: ``hetpace --config run.ini [--seed S] [--out DIR]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis as an
from . import experiments as ex
from . import io as hio
from . import plotting
from .config import load_config, render
from .errors import ConfigError, IntegrationFault

EXIT_OK, EXIT_CONFIG, EXIT_FAULT, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("hetpace")


def _bool_arg(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {s!r}")


def _u64_arg(s):
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="hetpace", description=__doc__)
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--seed", type=_u64_arg, help="overrides run.seed")
    p.add_argument("--out", help="output directory (overrides run.out)")
    p.add_argument("--workers", type=int, help="parallel sweep workers")
    p.add_argument("--export-frames", type=_bool_arg, dest="export_frames",
                   help="write PPM frames of the dominant-item raster")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def write_tables(out, res):
    for name, (header, rows) in res.tables.items():
        path = out / f"{name}.csv"
        if header == "symbols":
            an.write_symbols_csv(path, rows)
        elif header == "profile":
            an.write_profile_csv(path, rows)
        else:
            an.write_rows_csv(path, header, rows)


def write_trajectory_files(out, traj):
    hio.write_trajectory(out / "trajectory.hksnap", traj)
    an.write_rows_csv(out / "times.csv", ["frame", "time"],
                      [(i, float(t)) for i, t in enumerate(traj.times)])


def export_frames(out, traj, every=1):
    item, conc, degen = an.spatiotemporal_field(traj)
    if item.ndim == 2:  # chains and single units: one row per frame
        item, conc, degen = item[:, None, :], conc[:, None, :], degen[:, None, :]
    top = float(conc.max()) or 1.0
    sl = slice(None, None, max(1, every))
    hio.export_ppm(item[sl], out / "frames", traj.frames.shape[2], degenerate=degen[sl],
                   brightness=conc[sl] / top)


def figures(out, res):
    traj, setup = res.trajectory, res.setup
    if traj is None:
        return
    exp = setup.meta["experiment"]
    N = traj.frames.shape[1]
    if exp in ("grid_random", "grid_disc", "quench"):
        item, conc, _ = an.spatiotemporal_field(traj)
        plotting.plot_grid_snapshot(out / "grid_final.png", item[-1], conc[-1],
                                    f"t = {traj.times[-1]:g}")
        if "radial_profile" in res.tables:
            plotting.plot_profile(out / "radial_profile.png", res.tables["radial_profile"][1],
                                  setup.meta.get("R"))
        k = res.summary.get("representative_unit")
        if k is None:
            k = ex.disc_neighbours(setup.meta["L"], setup.meta["R"])[0]
        plotting.plot_timeseries(out / "timeseries.png", traj, [k], f"unit {k}")
    else:
        units = sorted({0, min(1, N - 1), N // 2, N - 1})
        plotting.plot_timeseries(out / "timeseries.png", traj, units)
        if N > 2:
            plotting.plot_spacetime(out / "spacetime.png", traj)


def run_single(cfg, out, seed, frames, frame_every):
    setup = ex.build_setup(cfg, seed)
    try:
        res = ex.run_setup(setup, cfg)
    except IntegrationFault as fault:
        part = getattr(fault, "partial", None)
        if part is not None:
            write_trajectory_files(out, part)
        with open(out / "fault.json", "w") as fh:
            json.dump({"time": fault.time, "unit": fault.unit, "item": fault.item + 1,
                       "step": fault.step, "message": str(fault)}, fh, indent=2)
        raise
    write_trajectory_files(out, res.trajectory)
    write_tables(out, res)
    with open(out / "summary.json", "w") as fh:
        json.dump(res.summary, fh, indent=2, sort_keys=True, default=str)
    figures(out, res)
    if frames:
        export_frames(out, res.trajectory, frame_every)
    return res


def run_sweep(cfg, out, seed, workers):
    param, points = ex.sweep_configs(cfg)
    jobs = [(i, v, c, seed) for i, v, c in points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(ex.sweep_point, jobs))
    else:
        results = [ex.sweep_point(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    cols = sorted({k for _, _, s, _ in results for k in s})
    rows = [(i, v, *(s.get(c, "") for c in cols), fault or "") for i, v, s, fault in results]
    an.write_rows_csv(out / "sweep.csv", ["run", param, *cols, "fault"], rows)
    for c in cols:
        ys = [s.get(c) for _, _, s, _ in results]
        if ys and all(isinstance(y, (int, float)) for y in ys):
            plotting.plot_sweep(out / f"sweep_{c}.png", param, [r[1] for r in results], c, ys)
    return results


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    run = cfg.sections["run"]
    seed = args.seed if args.seed is not None else run["seed"]
    if args.seed is not None:
        cfg = cfg.with_value("run", "seed", seed)
    out = Path(args.out or run.get("out", "out"))
    workers = args.workers if args.workers is not None else run.get("workers", 1)
    frames = args.export_frames if args.export_frames is not None else run.get("export_frames", False)
    code = EXIT_OK
    extra = {}
    try:
        out.mkdir(parents=True, exist_ok=True)
        exp = cfg.experiment
        if exp == "bifurcation_scan":
            res = ex.bifurcation_scan(cfg)
            write_tables(out, res)
            plotting.plot_scan(out / "critical_couplings.png", res.tables["critical_couplings"][1])
        elif exp == "sweep":
            results = run_sweep(cfg, out, seed, max(1, workers))
            faults = [r for r in results if r[3]]
            if faults:
                extra["faults"] = [{"run": r[0], "message": r[3]} for r in faults]
        else:
            run_single(cfg, out, seed, frames, run.get("frame_every", 1))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationFault as exc:
        print(f"integration fault: {exc}", file=sys.stderr)
        extra["fault"] = str(exc)
        code = EXIT_FAULT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        hio.write_manifest(out, render(cfg.sections), seed, extra)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
