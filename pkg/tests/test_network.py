import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decotrans.lattice import LatticeSpec, SelfEnergy, build_hamiltonian, contacts
from decotrans.negf import green_function, transmission, transmission_matrix
from decotrans.network import (
    DecoherenceConfiguration,
    DegenerateNetworkError,
    DisconnectedNetworkError,
    configuration_resistance,
    network_resistance,
    partition_chain,
    probe_potentials,
    realize_probes,
    reservoir_currents,
    serial_resistance,
)


@pytest.mark.parametrize(
    "n,cuts,expected",
    [(5, set(), (5,)), (5, {1, 2, 3, 4}, (1, 1, 1, 1, 1)), (6, {2, 5}, (2, 3, 1))],
)
def test_partition(n, cuts, expected):
    assert partition_chain(n, cuts).lengths == expected


def test_partition_rejects_bad_bond():
    with pytest.raises(ValueError):
        partition_chain(4, {4})
    with pytest.raises(ValueError):
        partition_chain(4, {0})


@given(st.integers(1, 40), st.data())
def test_partition_sums_to_length(n, data):
    cuts = data.draw(st.sets(st.integers(1, max(n - 1, 1)), max_size=n - 1)) if n > 1 else set()
    part = partition_chain(n, cuts)
    assert part.n_sites == n
    assert len(part.lengths) == len(cuts) + 1
    assert min(part.lengths) >= 1


def test_serial_examples():
    assert serial_resistance([1, 1, 1]) == 3
    assert serial_resistance([0.5, 0.25]) == 6
    with pytest.raises(DisconnectedNetworkError):
        serial_resistance([1.0, 0.0])


def test_ballistic_chain_fully_cut():
    lat = LatticeSpec.chain(3)
    cfg = DecoherenceConfiguration("bond_replacing", cut_bonds={1, 2})
    assert configuration_resistance(lat, cfg) == pytest.approx(3.0, abs=1e-12)


def test_network_no_probes():
    assert network_resistance(np.array([[0, 0.5], [0.5, 0]])) == pytest.approx(2.0)


def test_network_one_probe_series():
    t = np.array([[0, 0, 0.5], [0, 0, 0.5], [0.5, 0.5, 0]])
    assert network_resistance(t) == pytest.approx(4.0)


def test_isolated_probe_is_degenerate():
    t = np.zeros((3, 3))
    t[0, 1] = t[1, 0] = 0.5
    with pytest.raises(DegenerateNetworkError):
        network_resistance(t)


def test_disconnected_network():
    with pytest.raises(DisconnectedNetworkError):
        network_resistance(np.zeros((2, 2)))


def test_realize_no_probes():
    lat = LatticeSpec.chain(4, [0.1, 0.2, 0.3, 0.4])
    h, res = realize_probes(lat, DecoherenceConfiguration())
    assert np.array_equal(h, build_hamiltonian(lat))
    assert [r.sites for r in res] == [(0,), (3,)]


def test_realize_cut_bond():
    lat = LatticeSpec.chain(3)
    h, res = realize_probes(lat, DecoherenceConfiguration("bond_replacing", cut_bonds={1}))
    assert h[0, 1] == 0 and h[1, 0] == 0 and h[1, 2] == 1
    assert [r.sites for r in res] == [(0,), (2,), (0, 1)]
    # block {0} sees source and probe, block {1, 2} sees probe and drain
    assert res[2].value == -1j


def test_realize_attached():
    lat = LatticeSpec.chain(3)
    h, res = realize_probes(lat, DecoherenceConfiguration("site_attached", attached_sites={1}))
    assert np.array_equal(h, build_hamiltonian(lat))
    assert res[2].sites == (1,) and res[2].value == -1j


def test_realize_rejects_bad_indices():
    with pytest.raises(IndexError):
        realize_probes(LatticeSpec.chain(3), DecoherenceConfiguration("bond_replacing", cut_bonds={3}))
    with pytest.raises(IndexError):
        realize_probes(LatticeSpec.chain(3), DecoherenceConfiguration("site_attached", attached_sites={3}))


def segment_transmissions(eps, cuts, E):
    """Isolated two-terminal transmission of every coherent segment."""
    out = []
    start = 0
    for length in partition_chain(len(eps), cuts).lengths:
        seg = LatticeSpec.chain(length, eps[start : start + length])
        s, d = contacts(seg)
        g = green_function(build_hamiltonian(seg), [s, d], E)
        out.append(transmission(g, d, s))
        start += length
    return out


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_reduction_to_series(n, seed):
    rng = np.random.default_rng(seed)
    eps = rng.normal(size=n)
    cuts = {int(b) for b in np.flatnonzero(rng.random(n - 1) < 0.4) + 1}
    E = float(rng.uniform(-1.5, 1.5))
    full = configuration_resistance(LatticeSpec.chain(n, eps), DecoherenceConfiguration(cut_bonds=cuts), E)
    series = serial_resistance(segment_transmissions(eps, cuts, E))
    assert abs(full - series) <= 1e-10 * max(1.0, series)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 15), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_probe_currents_vanish(n, m, seed):
    rng = np.random.default_rng(seed)
    lat = LatticeSpec(n, m, rng.normal(size=n * m))
    sites = set(int(s) for s in np.flatnonzero(rng.random(n * m) < 0.5))
    cfg = DecoherenceConfiguration("site_attached", attached_sites=sites, probe=SelfEnergy((0,), 0.0, -0.6))
    h, res = realize_probes(lat, cfg)
    tm = transmission_matrix(h, res, 0.1)
    mu = probe_potentials(tm)
    cur = reservoir_currents(tm, mu)
    assert np.abs(cur[2:]).max(initial=0.0) < 1e-10
    # what leaves the source arrives at the drain
    assert cur[0] == pytest.approx(-cur[1], abs=1e-10)
    assert cur[1] == pytest.approx(1.0 / network_resistance(tm), rel=1e-10)
    assert network_resistance(tm) > 0


def test_ribbon_cut_bond_spans_two_sites():
    lat = LatticeSpec.ribbon(3, 2)
    bonds = lat.bonds()
    cfg = DecoherenceConfiguration("bond_replacing", cut_bonds={1, 4})
    h, res = realize_probes(lat, cfg)
    for r, b in zip(res[2:], (1, 4)):
        i, j = bonds[b - 1]
        assert r.sites == (i, j)
        assert h[i, j] == 0
    assert configuration_resistance(lat, cfg) > 0
