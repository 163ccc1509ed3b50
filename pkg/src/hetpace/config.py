"""Flat sectioned run configuration (configparser syntax) with strict keys."""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass

from .errors import ConfigError

EXPERIMENTS = ("single_unit", "two_unit", "chain", "ring", "ring_distance", "grid_random",
               "grid_disc", "quench", "sweep", "bifurcation_scan")


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _u64(s):
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise ValueError("must fit in an unsigned 64-bit integer")
    return v


def _floats(s):
    return tuple(float(x) for x in s.replace(",", " ").split())


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


SCHEMA = {
    "run": {"experiment": str, "seed": _u64, "out": str, "workers": int,
            "export_frames": _bool, "frame_every": int},
    "kinetics": {"variant": str, "rho": _float, "c": _float, "e": _float, "d": _float,
                 "f": _float, "r": _float},
    "units": {"gamma": _float, "sigma": _float, "gamma_P": _float, "gamma_D": _float,
              "sigma_P": _float, "sigma_D": _float, "gamma_pacemaker": _float,
              "gamma_lo": _float, "gamma_hi": _float, "field_seed": _u64},
    "topology": {"N": int, "delta": _float, "delta_b": _float, "delta_P": _float,
                 "k_p": int, "L": int, "R": _float, "p_d": _float, "boundary": str},
    "integrator": {"dt": _float, "t_end": _float, "record_stride": int, "scheme": str,
                   "clamp_floor": _float, "record_from": _float},
    "analysis": {"window": _float, "theta_hi": _float, "theta_lo": _float,
                 "n_bins": int, "max_lag": _float},
    "quench": {"t_q": _float, "gamma": _float},
    "sweep": {"base": str, "parameter": str, "values": _floats},
    "scan": {"gamma_P_min": _float, "gamma_P_max": _float, "gamma_P_n": int,
             "gamma_D_min": _float, "gamma_D_max": _float, "gamma_D_n": int},
}

# blocks that must be present for each experiment
REQUIRED = {
    "bifurcation_scan": ("run", "scan"),
    "sweep": ("run", "kinetics", "units", "integrator", "sweep"),
    "quench": ("run", "kinetics", "units", "topology", "integrator", "quench"),
    "single_unit": ("run", "kinetics", "units", "integrator"),
}
_DEFAULT_REQUIRED = ("run", "kinetics", "units", "topology", "integrator")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed config: ``sections`` maps section -> {key: typed value}."""

    sections: dict
    text: str

    @property
    def experiment(self) -> str:
        return self.sections["run"]["experiment"]

    @property
    def seed(self) -> int:
        return self.sections["run"]["seed"]

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section, key):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError("missing required key", key=f"{section}.{key}") from None

    def with_value(self, section, key, value):
        """Copy with one entry replaced; the text is regenerated canonically."""
        secs = {s: dict(v) for s, v in self.sections.items()}
        secs.setdefault(section, {})[key] = value
        return ExperimentConfig(secs, render(secs))


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def render(sections) -> str:
    buf = io.StringIO()
    for s in SCHEMA:
        if s in sections:
            buf.write(f"[{s}]\n")
            for k in SCHEMA[s]:
                if k in sections[s]:
                    buf.write(f"{k} = {_fmt(sections[s][k])}\n")
            buf.write("\n")
    return buf.getvalue()


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="\0none")
    cp.optionxform = str  # keys are case sensitive (N, L, R)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    sections = {}
    for s in cp.sections():
        if s not in SCHEMA:
            raise ConfigError("unknown section", key=s)
        vals = {}
        for k, raw in cp.items(s):
            if k not in SCHEMA[s]:
                raise ConfigError("unknown key", key=f"{s}.{k}")
            try:
                vals[k] = SCHEMA[s][k](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r} ({exc})", key=f"{s}.{k}") from None
        sections[s] = vals
    if "run" not in sections:
        raise ConfigError("missing section", key="run")
    run = sections["run"]
    if "seed" not in run:
        raise ConfigError("seed is mandatory", key="run.seed")
    exp = run.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}", key="run.experiment")
    need = REQUIRED.get(exp, _DEFAULT_REQUIRED)
    if exp == "sweep":
        base = sections.get("sweep", {}).get("base")
        if base not in EXPERIMENTS or base in ("sweep", "bifurcation_scan"):
            raise ConfigError(f"invalid sweep base {base!r}", key="sweep.base")
        need = tuple(dict.fromkeys(need + REQUIRED.get(base, _DEFAULT_REQUIRED)))
    for s in need:
        if s not in sections:
            raise ConfigError("missing section", key=s)
    return ExperimentConfig(sections, text)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
