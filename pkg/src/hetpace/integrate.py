"""Time stepping: RK4 or Euler-Maruyama with half-normal additive kicks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, IntegrationFault
from .model import GlvKinetics, as_gamma, build_rate_matrix
from .topology import CouplingMatrix, ParameterField, csr_parts

SCHEMES = ("rk4", "euler_maruyama")

# cap on normals drawn per block (keeps the noise buffer near 16 MB)
_NOISE_BUDGET = 1 << 21


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon and recording cadence.

    Frames are kept every ``record_stride`` steps once ``t >= record_from``;
    the initial condition is always the first frame.
    """

    dt: float = 0.01
    t_end: float = 100.0
    record_stride: int = 100
    scheme: str = "rk4"
    clamp_floor: float = 0.0
    seed: int = 0
    record_from: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"must be > 0, got {self.dt!r}", key="dt")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"must be > 0, got {self.t_end!r}", key="t_end")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.record_stride!r}",
                              key="record_stride")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}", key="scheme")
        if not self.clamp_floor >= 0:
            raise ConfigError(f"must be >= 0, got {self.clamp_floor!r}", key="clamp_floor")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative", key="seed")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class QuenchSchedule:
    """``events`` holds (time, unit indices, new gamma), sorted by time."""

    events: tuple = ()

    def __post_init__(self):
        ev = tuple((float(t), tuple(int(u) for u in units), float(g))
                   for t, units, g in self.events)
        if any(b[0] < a[0] for a, b in zip(ev, ev[1:])):
            raise ConfigError("quench events must be sorted by time", key="quench")
        if any(g <= 0 for _, _, g in ev):
            raise ConfigError("quench gamma must be > 0", key="quench")
        object.__setattr__(self, "events", ev)

    def check(self, t_end, N):
        for t, units, _ in self.events:
            if not 0 < t < t_end:
                raise ConfigError(f"quench time {t} outside (0, {t_end})", key="quench")
            if any(not 0 <= u < N for u in units):
                raise ConfigError("quench unit index out of range", key="quench")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    frames: np.ndarray
    config: IntegratorConfig
    topology: str = "custom"
    field: ParameterField | None = None
    kinetics: GlvKinetics | None = None

    @property
    def shape(self):
        return self.frames.shape[1:]

    def window(self, frac=0.5):
        """Index slice covering the final ``frac`` of the recorded span.

        With ``record_from`` the span starts at the first late frame; the
        detached initial frame is never part of a window.
        """
        lead = 1 if self.config.record_from > 0 and len(self.times) > 1 else 0
        t0 = self.times[-1] - frac * (self.times[-1] - self.times[lead])
        t0 = max(t0, self.times[lead])
        return slice(int(np.searchsorted(self.times, t0)), len(self.times))

    def series(self, unit, win=None):
        w = slice(None) if win is None else win
        return self.frames[w, unit, :]


def initial_condition_uniform(N, n, seed) -> np.ndarray:
    """I.i.d. Uniform[0, 1) concentrations."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return rng.random((N, n))


def noise_rng(seed):
    """Noise stream, independent of the initial-condition stream for the same seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1,))))


@dataclass(frozen=True, eq=False)
class RhsContext:
    """Prepared arrays for the kernels: decay rates, rate matrix, CSR coupling."""

    gamma: np.ndarray
    A: np.ndarray
    K: tuple
    rho: float = 1.0

    @classmethod
    def build(cls, params, A, K=None, rho=1.0, N=None):
        N = N if N is not None else (K.N if isinstance(K, CouplingMatrix) else len(params))
        return cls(as_gamma(params, N).copy(), np.ascontiguousarray(A, np.float64),
                   csr_parts(K, N), float(rho))


def _prep_state(state):
    s = np.array(state, dtype=np.float64, order="C")
    if s.ndim != 2:
        raise ConfigError(f"state must be 2-D, got shape {s.shape}", key="state")
    return s


def _raise_fault(status, t0, dt):
    step, unit, item = int(status[1]), int(status[2]), int(status[3])
    raise IntegrationFault(t0 + (step + 1) * dt, unit, item, step)


def step_deterministic(state, dt, ctx: RhsContext, clamp_floor=0.0) -> np.ndarray:
    """One classical RK4 step followed by clamping at ``clamp_floor``."""
    s = _prep_state(state)
    status = np.zeros(4, np.int64)
    empty = np.zeros((1, 0, s.shape[1]))
    _kernels.rk4_block(s, 1, float(dt), ctx.rho, ctx.gamma, ctx.A, *ctx.K,
                       float(clamp_floor), np.zeros(0, np.int64), np.zeros(s.shape[0]),
                       empty, status)
    if status[0]:
        _raise_fault(status, 0.0, dt)
    return s


def step_stochastic(state, dt, rng, ctx: RhsContext, sigmas, clamp_floor=0.0) -> np.ndarray:
    """One Euler-Maruyama step: s + dt f(s) + sigma |eta| sqrt(dt), then clamp."""
    s = _prep_state(state)
    sig = np.broadcast_to(np.asarray(sigmas, np.float64), (s.shape[0],)).copy()
    noisy = np.flatnonzero(sig > 0).astype(np.int64)
    eta = rng.standard_normal((1, noisy.size, s.shape[1]))
    status = np.zeros(4, np.int64)
    _kernels.em_block(s, 1, float(dt), ctx.rho, ctx.gamma, ctx.A, *ctx.K,
                      float(clamp_floor), noisy, sig, eta, status)
    if status[0]:
        _raise_fault(status, 0.0, dt)
    return s


def simulate(K, field: ParameterField, kinetics: GlvKinetics, config: IntegratorConfig,
             quench: QuenchSchedule | None = None, initial=None) -> Trajectory:
    """Integrate the full network and return the recorded trajectory.

    Noisy units (sigma > 0) get half-normal kicks under either scheme; with
    ``rk4`` the kick is added after the deterministic RK4 update. On a fault the
    raised IntegrationFault carries the frames recorded so far as ``partial``.
    """
    N, n = field.N, kinetics.n
    if isinstance(K, CouplingMatrix) and K.N != N:
        raise ConfigError(f"coupling has {K.N} units, field has {N}", key="K")
    s = (initial_condition_uniform(N, n, config.seed) if initial is None
         else _prep_state(initial))
    if s.shape != (N, n):
        raise ConfigError(f"initial state {s.shape} does not match ({N}, {n})", key="initial")
    if not np.all(np.isfinite(s)) or (s < 0).any():
        raise ConfigError("initial state must be finite and >= 0", key="initial")
    quench = quench or QuenchSchedule()
    quench.check(config.t_end, N)

    dt = config.dt
    total = config.n_steps
    stride = int(config.record_stride)
    ctx = RhsContext.build(field.gamma, build_rate_matrix(kinetics), K, kinetics.rho, N)
    gam = ctx.gamma  # mutated by quench events
    sig = np.ascontiguousarray(field.sigma, np.float64)
    noisy = np.flatnonzero(sig > 0).astype(np.int64)
    rng = noise_rng(config.seed)
    kernel = _kernels.rk4_block if config.scheme == "rk4" else _kernels.em_block
    floor = float(config.clamp_floor)
    np.maximum(s, floor, out=s)

    first_rec = max(stride, stride * math.ceil(config.record_from / dt / stride - 1e-9))
    rec_steps = list(range(first_rec, total + 1, stride))
    frames = np.empty((len(rec_steps) + 1, N, n))
    times = np.empty(len(rec_steps) + 1)
    frames[0] = s
    times[0] = 0.0
    nrec = 1

    q_steps = [(max(0, math.ceil(t / dt - 1e-9)), units, g) for t, units, g in quench.events]
    qi = 0
    chunk = max(1, _NOISE_BUDGET // max(1, noisy.size * n)) if noisy.size else total
    empty = np.zeros((1, 0, n))
    status = np.zeros(4, np.int64)
    step = 0
    ri = 0
    while step < total:
        while qi < len(q_steps) and q_steps[qi][0] <= step:
            gam[list(q_steps[qi][1])] = q_steps[qi][2]
            qi += 1
        end = min(total, step + chunk)
        if ri < len(rec_steps):
            end = min(end, rec_steps[ri])
        if qi < len(q_steps):
            end = min(end, q_steps[qi][0])
        b = end - step
        eta = rng.standard_normal((b, noisy.size, n)) if noisy.size else empty
        kernel(s, b, dt, ctx.rho, gam, ctx.A, *ctx.K, floor, noisy, sig, eta, status)
        if status[0]:
            fault_step = step + int(status[1])
            err = IntegrationFault((fault_step + 1) * dt, int(status[2]), int(status[3]),
                                   fault_step)
            err.partial = Trajectory(times[:nrec].copy(), frames[:nrec].copy(), config,
                                     K.tag if isinstance(K, CouplingMatrix) else "custom",
                                     field, kinetics)
            raise err
        step = end
        if ri < len(rec_steps) and step == rec_steps[ri]:
            frames[nrec] = s
            times[nrec] = step * dt
            nrec += 1
            ri += 1

    tag = K.tag if isinstance(K, CouplingMatrix) else ("none" if K is None else "custom")
    return Trajectory(times[:nrec], frames[:nrec], config, tag, field, kinetics)


def with_seed(config: IntegratorConfig, seed) -> IntegratorConfig:
    return replace(config, seed=int(seed))
