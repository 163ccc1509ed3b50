"""GLV kinetics, rate matrices and the deterministic right-hand side."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError


def _check_rates(**rates):
    for name, v in rates.items():
        if not math.isfinite(v) or v < 0:
            raise ConfigError(f"must be finite and >= 0, got {v!r}", key=name)


@dataclass(frozen=True)
class Three:
    c: float = 2.0
    e: float = 0.2

    def __post_init__(self):
        _check_rates(c=self.c, e=self.e)


@dataclass(frozen=True)
class Nine:
    c: float = 2.0
    e: float = 0.2
    d: float = 2.0
    f: float = 0.3
    r: float = 1.25

    def __post_init__(self):
        _check_rates(c=self.c, e=self.e, d=self.d, f=self.f, r=self.r)


@dataclass(frozen=True)
class GlvKinetics:
    """Intrinsic rates of a unit: ``rho`` plus a 3- or 9-item competition set."""

    rho: float = 1.0
    variant: Three | Nine = field(default_factory=Three)

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ConfigError(f"must be finite and > 0, got {self.rho!r}", key="rho")
        if not isinstance(self.variant, (Three, Nine)):
            raise ConfigError("variant must be Three or Nine", key="variant")

    @classmethod
    def three(cls, c=2.0, e=0.2, rho=1.0):
        return cls(rho, Three(c, e))

    @classmethod
    def nine(cls, c=2.0, e=0.2, d=2.0, f=0.3, r=1.25, rho=1.0):
        return cls(rho, Nine(c, e, d, f, r))

    @property
    def n(self) -> int:
        return 3 if isinstance(self.variant, Three) else 9


def _three_block(c, e):
    m = np.zeros((3, 3))
    for i in range(3):
        m[i, (i + 1) % 3] = c
        m[i, (i + 2) % 3] = e
    return m


def build_rate_matrix(kinetics: GlvKinetics) -> np.ndarray:
    """Dense competition matrix; ``A[i, j]`` is the rate of item j acting on i.

    The 9-item matrix is block-circulant over the three groups: block row b
    holds the 3-item pattern at column b, ``m_d`` at b+1 and ``m_f`` at b+2.
    """
    v = kinetics.variant
    m0 = _three_block(v.c, v.e)
    if isinstance(v, Three):
        A = m0
    else:
        off = np.full((3, 3), v.r)
        m_d = off.copy()
        np.fill_diagonal(m_d, v.d)
        m_f = off.copy()
        np.fill_diagonal(m_f, v.f)
        A = np.zeros((9, 9))
        for b in range(3):
            for shift, blk in ((0, m0), (1, m_d), (2, m_f)):
                col = (b + shift) % 3
                A[3 * b:3 * b + 3, 3 * col:3 * col + 3] = blk
    A.setflags(write=False)
    return A


@dataclass(frozen=True)
class UnitParams:
    gamma: float
    sigma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"must be > 0, got {self.gamma!r}", key="gamma")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ConfigError(f"must be >= 0, got {self.sigma!r}", key="sigma")


def as_gamma(params, N: int) -> np.ndarray:
    """Per-unit decay rates from a scalar, an array or a list of UnitParams."""
    if np.isscalar(params):
        g = np.full(N, float(params))
    elif len(params) and isinstance(params[0], UnitParams):
        g = np.array([p.gamma for p in params], dtype=float)
    else:
        g = np.asarray(params, dtype=float).ravel()
    if g.shape != (N,):
        raise ConfigError(f"expected {N} decay rates, got {g.size}", key="gamma")
    return np.ascontiguousarray(g)


def rhs(state, params, A, K=None, rho: float = 1.0) -> np.ndarray:
    """Deterministic time derivative of the coupled system.

    ``state`` has shape (N, n); ``params`` gives the per-unit decay rates;
    ``K`` is a CouplingMatrix, a scipy sparse matrix or None for no coupling.
    """
    from .topology import csr_parts

    s = np.ascontiguousarray(state, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.float64)
    if s.ndim != 2:
        raise ConfigError(f"state must be 2-D, got shape {s.shape}", key="state")
    N, n = s.shape
    if A.shape != (n, n):
        raise ConfigError(f"rate matrix {A.shape} does not match {n} items", key="A")
    gam = as_gamma(params, N)
    indptr, indices, data = csr_parts(K, N)
    out = np.empty_like(s)
    _kernels.rhs_into(s, out, float(rho), gam, A, indptr, indices, data)
    return out
