import numpy as np
import pytest

from hetpace.errors import ConfigError
from hetpace.topology import (chain_bidirectional, chain_unidirectional, counter_uniform,
                              disc_pacemaker_field, grid_diffusive, grid_index,
                              random_defect_field, ring_directed, ring_distance,
                              ring_distance_dependent)


def nz(K):
    return dict(K.entries())


def test_chain_uni():
    assert nz(chain_unidirectional(3, 0.2)) == {(1, 0): 0.2, (2, 1): 0.2}
    assert nz(chain_unidirectional(2, 0.4)) == {(1, 0): 0.4}
    assert chain_unidirectional(7, 0.0).nnz == 0
    assert chain_unidirectional(10, 0.3).nnz == 9
    with pytest.raises(ConfigError):
        chain_unidirectional(1, 0.1)


def test_chain_bi():
    assert nz(chain_bidirectional(2, 0.5, 0.05)) == {(1, 0): 0.5, (0, 1): 0.05}
    assert chain_bidirectional(3, 0.75, 0.01).nnz == 4
    assert chain_bidirectional(9, 0.3, 0.0) == chain_unidirectional(9, 0.3)


def test_ring_directed():
    K = ring_directed(50, 0.75, 0.001, 0)
    assert K.nnz == 50 and K[0, 49] == 0.001 and K[1, 0] == 0.75
    D = K.to_dense()
    assert np.allclose(np.delete(D.sum(axis=1), 0), 0.75)
    sym = ring_directed(6, 0.3, 0.3)
    assert set(nz(sym).values()) == {0.3}
    assert ring_directed(6, 0.3, 0.0) == chain_unidirectional(6, 0.3)
    with pytest.raises(ConfigError):
        ring_directed(5, 0.3, 0.1, 5)


def test_ring_distance_dependent():
    assert ring_distance(2, 7, 8) == 3
    K = ring_distance_dependent(31, 0.5, 0.1)
    assert K[11, 0] == pytest.approx(0.5 / 11)
    assert K[0, 11] == pytest.approx(0.1 / 11)
    assert K[20, 0] == pytest.approx(0.5 / 11)
    assert K[5, 6] == 0.5 and K[6, 5] == 0.5
    assert K[5, 9] == 0.0
    assert K[1, 0] == 0.5 and K[30, 0] == 0.5
    for k in range(31):
        for l in range(31):
            assert ring_distance(k, l, 31) == ring_distance(l, k, 31)
    with pytest.raises(ConfigError):
        ring_distance_dependent(4, 0.5, 0.1)


def test_grid_periodic():
    L = 4
    K = grid_diffusive(L, 0.25)
    row = {l for (k, l), _ in K.entries() if k == 0}
    assert row == {grid_index(3, 0, L), grid_index(1, 0, L), grid_index(0, 3, L),
                   grid_index(0, 1, L)}
    assert np.allclose(K.to_dense().sum(axis=1), 4 * 0.25)
    assert np.all(np.diff(K.csr.indptr) == 4)


def test_grid_noflux():
    K = grid_diffusive(5, 1.0, "no-flux")
    deg = np.diff(K.csr.indptr).reshape(5, 5)
    assert deg[0, 0] == 2 and deg[0, 2] == 3 and deg[2, 2] == 4
    assert np.array_equal(K.to_dense(), K.to_dense().T)
    with pytest.raises(ConfigError):
        grid_diffusive(5, 1.0, "open")


def test_canonical_order_and_nonneg():
    for K in (grid_diffusive(6, 0.1), ring_distance_dependent(9, 0.5, 0.1)):
        ent = list(K.entries())
        assert ent == sorted(ent)
        assert all(w >= 0 for _, w in ent)
        assert all(k != l for (k, l), _ in ent)


def test_counter_uniform_order_independent():
    u = counter_uniform(42, 0, 1000)
    assert np.array_equal(u[500:], counter_uniform(42, 0, 1000)[500:])
    assert u.min() >= 0 and u.max() < 1
    assert not np.array_equal(u, counter_uniform(43, 0, 1000))
    assert not np.array_equal(u, counter_uniform(42, 1, 1000))


def test_defect_field_limits():
    f0 = random_defect_field(16, 0.0, 0.8, (1.5, 1.6), 3)
    assert np.all(f0.gamma == 0.8) and len(f0.pacemakers) == 256
    f1 = random_defect_field(16, 1.0, 0.8, (1.5, 1.6), 3)
    assert np.all((f1.gamma >= 1.5) & (f1.gamma <= 1.6)) and f1.pacemakers == ()


def test_defect_fraction_and_stability_across_pd():
    a = random_defect_field(128, 0.1, 0.8, (1.5, 1.6), 11)
    frac = 1 - len(a.pacemakers) / a.N
    assert abs(frac - 0.1) < 0.01
    b = random_defect_field(128, 0.5, 0.8, (1.5, 1.6), 11)
    da = np.setdiff1d(np.arange(a.N), a.pacemakers)
    # defects at p_d=0.1 stay defects with the same gamma at p_d=0.5
    assert np.array_equal(a.gamma[da], b.gamma[da])
    assert np.array_equal(random_defect_field(128, 0.1, 0.8, (1.5, 1.6), 11).gamma, a.gamma)
    with pytest.raises(ConfigError):
        random_defect_field(8, 0.5, 0.8, (1.6, 1.5), 0)
    with pytest.raises(ConfigError):
        random_defect_field(8, 1.5, 0.8, (1.5, 1.6), 0)


def test_disc_field():
    f = disc_pacemaker_field(5, 0.5, 0.8, (1.5, 1.6), 0)
    assert f.pacemakers == (grid_index(2, 2, 5),)
    g = disc_pacemaker_field(128, 8, 0.8, (1.5, 1.6), 1)
    count = sum((x - 63.5) ** 2 + (y - 63.5) ** 2 <= 64 for x in range(128) for y in range(128))
    assert len(g.pacemakers) == count
    out = np.setdiff1d(np.arange(g.N), g.pacemakers)
    assert np.all((g.gamma[out] >= 1.5) & (g.gamma[out] <= 1.6))
    assert np.all(g.gamma[list(g.pacemakers)] == 0.8)
    with pytest.raises(ConfigError):
        disc_pacemaker_field(16, 8, 0.8, (1.5, 1.6), 0)
