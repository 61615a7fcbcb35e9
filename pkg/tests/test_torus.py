import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rp_toolkit.torus import (TorusSpec, all_sites, neighbor_table,
                              reciprocal_grid, to_signed, torus_displacement,
                              wrap)


@given(d=st.integers(1, 3), L=st.sampled_from([2, 4, 6]), seed=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_site_index_roundtrip(d, L, seed):
    torus = TorusSpec(d=d, L=L)
    rng = np.random.default_rng(seed)
    idx = int(rng.integers(torus.N))
    assert torus.site_index(torus.site_coords(idx)) == idx


def test_basic_shape():
    torus = TorusSpec(d=2, L=4)
    assert torus.N == 16
    assert torus.shape == (4, 4)
    assert all_sites(torus).shape == (16, 2)


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        TorusSpec(d=0, L=4)
    with pytest.raises(ValueError):
        TorusSpec(d=2, L=1)
    with pytest.raises(ValueError):
        TorusSpec(d=2, L=3)  # reflection positivity needs even sides


@given(L=st.sampled_from([2, 4, 6, 8]), a=st.integers(0, 10**6), b=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_displacement_antisymmetry(L, a, b):
    torus = TorusSpec(d=2, L=L)
    xa = torus.site_coords(a % torus.N)
    xb = torus.site_coords(b % torus.N)
    dab = np.asarray(torus_displacement(xa, xb, torus))
    dba = np.asarray(torus_displacement(xb, xa, torus))
    assert np.all((dab + dba) % L == 0)


def test_wrap_reduces_mod_l():
    torus = TorusSpec(d=2, L=4)
    assert wrap((-1, 9), torus) == (3, 1)


def test_reciprocal_grid_zero_mode_first():
    torus = TorusSpec(d=2, L=4)
    ks = reciprocal_grid(torus)
    assert np.allclose(ks[0], 0.0)
    assert ks.shape == (torus.N, torus.d)
    signed = to_signed(ks)
    assert signed.min() > -math.pi - 1e-12
    assert signed.max() <= math.pi + 1e-12


def test_neighbor_table_is_symmetric():
    torus = TorusSpec(d=2, L=4)
    disp = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    table = neighbor_table(torus, disp)
    assert table.shape == (torus.N, 4)
    for x in range(torus.N):
        for y in table[x]:
            assert x in table[y]
