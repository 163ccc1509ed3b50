"""Coupling matrices and per-unit parameter fields for the supported layouts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Sparse inter-unit coupling; ``K[k, l]`` is the weight from unit l into k.

    Stored as CSR with sorted column indices, so iteration is row-major by
    (k, l) and the kernels see a fixed summation order.
    """

    csr: sp.csr_array
    tag: str = "custom"

    def __post_init__(self):
        m = sp.csr_array(self.csr, dtype=np.float64)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise ConfigError(f"coupling must be square, got {m.shape}", key="K")
        if m.nnz and (m.data < 0).any():
            raise ConfigError("coupling weights must be >= 0", key="K")
        if m.nnz and m.diagonal().any():
            raise ConfigError("coupling diagonal must be zero", key="K")
        object.__setattr__(self, "csr", m)

    @classmethod
    def from_entries(cls, N, entries, tag="custom"):
        rows, cols, vals = [], [], []
        for (k, l), w in entries.items():
            rows.append(k)
            cols.append(l)
            vals.append(w)
        m = sp.coo_array((vals, (rows, cols)), shape=(N, N), dtype=np.float64)
        return cls(m.tocsr(), tag)

    @property
    def N(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def __getitem__(self, kl):
        return float(self.csr[kl])

    def entries(self):
        """Nonzero ``((k, l), w)`` pairs in row-major order."""
        m = self.csr
        for k in range(self.N):
            for p in range(m.indptr[k], m.indptr[k + 1]):
                yield (k, int(m.indices[p])), float(m.data[p])

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def __add__(self, other):
        return CouplingMatrix(self.csr + other.csr, f"{self.tag}+{other.tag}")

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix) or other.N != self.N:
            return NotImplemented
        a, b = self.csr, other.csr
        return (np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices)
                and np.array_equal(a.data, b.data))

    __hash__ = None


def csr_parts(K, N):
    """(indptr, indices, data) arrays for the kernels; None means no coupling."""
    if K is None:
        return (np.zeros(N + 1, np.int64), np.zeros(0, np.int64), np.zeros(0))
    m = K.csr if isinstance(K, CouplingMatrix) else CouplingMatrix(K).csr
    if m.shape != (N, N):
        raise ConfigError(f"coupling is {m.shape}, state has {N} units", key="K")
    return (m.indptr.astype(np.int64), m.indices.astype(np.int64),
            np.ascontiguousarray(m.data, dtype=np.float64))


def _need(cond, msg, key):
    if not cond:
        raise ConfigError(msg, key=key)


def _check_strength(**kw):
    for k, v in kw.items():
        _need(math.isfinite(v) and v >= 0, f"must be >= 0, got {v!r}", k)


def chain_unidirectional(N, delta) -> CouplingMatrix:
    return chain_bidirectional(N, delta, 0.0)


def chain_bidirectional(N, delta, delta_b) -> CouplingMatrix:
    """Forward weight ``delta`` from k-1 into k, backward ``delta_b`` from k+1 into k."""
    _need(N >= 2, f"chain needs N >= 2, got {N}", "N")
    _check_strength(delta=delta, delta_b=delta_b)
    ent = {}
    for k in range(1, N):
        ent[(k, k - 1)] = delta
        ent[(k - 1, k)] = delta_b
    tag = "chain" if delta_b == 0 else "chain_bidirectional"
    return CouplingMatrix.from_entries(N, ent, tag)


def ring_directed(N, delta, delta_P, k_p=0) -> CouplingMatrix:
    """Directed ring; the single link closing onto the pacemaker carries ``delta_P``."""
    _need(N >= 3, f"ring needs N >= 3, got {N}", "N")
    _need(0 <= k_p < N, f"pacemaker index {k_p} out of range", "k_p")
    _check_strength(delta=delta, delta_P=delta_P)
    ent = {}
    for k in range(N):
        ent[(k, (k - 1) % N)] = delta_P if k == k_p else delta
    return CouplingMatrix.from_entries(N, ent, "ring")


def ring_distance(k, l, N):
    d = abs(k - l)
    return min(d, N - d)


def ring_distance_dependent(N, delta, delta_b) -> CouplingMatrix:
    """Pacemaker at unit 0 forces every unit with 1/r decay and receives 1/r back-coupling.

    Driven units are coupled only to their driven nearest neighbours, both ways,
    with weight ``delta``.
    """
    _need(N >= 5, f"ring needs N >= 5, got {N}", "N")
    _check_strength(delta=delta, delta_b=delta_b)
    ent = {}
    for k in range(1, N):
        r = ring_distance(k, 0, N)
        ent[(k, 0)] = delta / r
        ent[(0, k)] = delta_b / r
        for l in (k - 1, k + 1):
            if 1 <= l < N:
                ent[(k, l)] = delta
    return CouplingMatrix.from_entries(N, ent, "ring_distance")


def grid_index(x, y, L):
    return x * L + y


def grid_diffusive(L, delta, boundary="periodic") -> CouplingMatrix:
    """5-point Laplacian as coupling; the -4 delta diagonal comes from the rhs form."""
    _need(L >= 4, f"grid needs L >= 4, got {L}", "L")
    _need(boundary in ("periodic", "no-flux"), f"unknown boundary {boundary!r}", "boundary")
    _check_strength(delta=delta)
    rows, cols = [], []
    for x in range(L):
        for y in range(L):
            for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                u, v = x + dx, y + dy
                if boundary == "periodic":
                    u %= L
                    v %= L
                elif not (0 <= u < L and 0 <= v < L):
                    continue
                rows.append(grid_index(x, y, L))
                cols.append(grid_index(u, v, L))
    m = sp.coo_array((np.full(len(rows), float(delta)), (rows, cols)), shape=(L * L, L * L))
    return CouplingMatrix(m.tocsr(), f"grid_{boundary}")


# --- random fields ---------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed, stream, n):
    """Uniforms in [0, 1) keyed by (seed, stream, index); independent of traversal order."""
    with np.errstate(over="ignore"):
        key = _splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _splitmix64(np.uint64(stream)))
        z = _splitmix64(key + np.arange(n, dtype=np.uint64))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


@dataclass(frozen=True, eq=False)
class ParameterField:
    """Per-unit decay rates and noise strengths plus the pacemaker index set."""

    gamma: np.ndarray
    sigma: np.ndarray
    pacemakers: tuple = ()
    shape: tuple | None = None

    def __post_init__(self):
        g = np.array(self.gamma, dtype=np.float64).ravel()
        s = np.broadcast_to(np.asarray(self.sigma, dtype=np.float64), g.shape).copy()
        _need(np.all(np.isfinite(g)) and np.all(g > 0), "all gammas must be > 0", "gamma")
        _need(np.all(np.isfinite(s)) and np.all(s >= 0), "all sigmas must be >= 0", "sigma")
        pm = tuple(sorted(int(k) for k in self.pacemakers))
        _need(all(0 <= k < g.size for k in pm), "pacemaker index out of range", "pacemakers")
        if self.shape is not None:
            _need(int(np.prod(self.shape)) == g.size, "shape does not match unit count", "shape")
        g.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "pacemakers", pm)

    @property
    def N(self) -> int:
        return self.gamma.size

    @classmethod
    def pacemaker_chain(cls, N, gamma_P, gamma_D, sigma=0.0, sigma_driven=None):
        """Unit 0 is the pacemaker; ``sigma_driven`` defaults to ``sigma``."""
        g = np.full(N, float(gamma_D))
        g[0] = gamma_P
        s = np.full(N, float(sigma if sigma_driven is None else sigma_driven))
        s[0] = sigma
        return cls(g, s, (0,))

    def with_sigma(self, sigma):
        return ParameterField(self.gamma, sigma, self.pacemakers, self.shape)

    def with_gamma(self, idx, value):
        g = self.gamma.copy()
        g[list(idx)] = value
        return ParameterField(g, self.sigma, self.pacemakers, self.shape)


def _check_interval(iv):
    lo, hi = map(float, iv)
    _need(0 < lo <= hi, f"invalid interval {iv!r}", "gamma_interval")
    return lo, hi


def random_defect_field(L, p_d, gamma_pacemaker=0.8, gamma_interval=(1.5, 1.6),
                        seed=0) -> ParameterField:
    """Sites whose base uniform is <= p_d become defects with gamma drawn from the interval.

    The base field and the defect gammas come from separate counter streams, so
    a given seed yields the same sites and values for every p_d.
    """
    _need(0 <= p_d <= 1, f"p_d must be in [0, 1], got {p_d}", "p_d")
    lo, hi = _check_interval(gamma_interval)
    N = L * L
    base = counter_uniform(seed, 0, N)
    g_def = lo + (hi - lo) * counter_uniform(seed, 1, N)
    defect = base <= p_d
    g = np.where(defect, g_def, float(gamma_pacemaker))
    return ParameterField(g, 0.0, tuple(np.flatnonzero(~defect)), (L, L))


def disc_mask(L, R):
    c = (L - 1) / 2
    x, y = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    return ((x - c) ** 2 + (y - c) ** 2 <= R * R).ravel()


def disc_pacemaker_field(L, R, gamma_pacemaker=0.8, gamma_interval=(1.5, 1.6),
                         seed=0) -> ParameterField:
    """Pacemakers fill the disc of radius R (inclusive) about the grid centre."""
    _need(0 < R < L / 2, f"R must be in (0, {L / 2}), got {R}", "R")
    lo, hi = _check_interval(gamma_interval)
    inside = disc_mask(L, R)
    g_def = lo + (hi - lo) * counter_uniform(seed, 1, L * L)
    g = np.where(inside, float(gamma_pacemaker), g_def)
    return ParameterField(g, 0.0, tuple(np.flatnonzero(inside)), (L, L))
