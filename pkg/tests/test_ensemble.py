import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import binom

from decotrans import analytic as an
from decotrans.decoherence import DecoherenceModel, sample_configuration, sample_slot_mask
from decotrans.ensemble import (
    SAMPLED_CONDUCTANCE_NOTE,
    EnsembleSpec,
    _DenseKernel,
    estimate_resistivity,
    length_sweep,
    sample_log_resistances,
    sampled_chain_log_resistance,
    subsystem_histogram,
)
from decotrans.lattice import DisorderSpec, LatticeSpec
from decotrans.network import configuration_resistance, partition_chain


def rng(seed=0):
    return np.random.default_rng(seed)


def test_bernoulli_extremes():
    for n in (0, 1, 9):
        assert sample_configuration(DecoherenceModel.bernoulli(0.0), n, rng()).cut_bonds == frozenset()
    assert sample_configuration(DecoherenceModel.bernoulli(1.0), 7, rng()).cut_bonds == frozenset(range(1, 8))


def test_bernoulli_mean_count():
    counts = sample_slot_mask(DecoherenceModel.bernoulli(0.3), 10_000, 1000, rng(3)).sum(axis=1)
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - 3000) < 3 * se


def test_homogeneous_spacing():
    cfg = sample_configuration(DecoherenceModel.homogeneous(3), 11, rng())
    assert sorted(cfg.cut_bonds) == [3, 6, 9]
    lengths = partition_chain(30, sample_configuration(DecoherenceModel.homogeneous(2.5), 29, rng()).cut_bonds).lengths
    assert set(lengths) == {2, 3}
    assert np.mean(lengths) == pytest.approx(2.5)


def test_attached_placement_uses_sites():
    cfg = sample_configuration(DecoherenceModel.bernoulli(1.0, "site_attached"), 5, rng())
    assert cfg.attached_sites == frozenset(range(5))


def test_cutoff_runs_bounded():
    mask = sample_slot_mask(DecoherenceModel.cutoff(0.05, 4), 200, 200, rng(1))
    for row in mask:
        uncut = 0
        for v in row:
            uncut = 0 if v else uncut + 1
            assert uncut <= 4


def test_power_law_lengths():
    m = DecoherenceModel.power_law(2.0)
    mask = sample_slot_mask(m, 49, 4000, rng(2))
    from decotrans.ensemble import segment_lengths

    _, lengths = segment_lengths(mask)
    assert lengths.min() >= 1 and lengths.max() <= 50
    # ratio of ones to twos ~ 2^gamma (away from the truncated tail)
    assert np.sum(lengths == 1) / np.sum(lengths == 2) == pytest.approx(4.0, rel=0.1)


def test_histogram_examples():
    c = subsystem_histogram(DecoherenceModel.bernoulli(1.0), 6, 100, rng())
    assert np.array_equal(c.mean, [6, 0, 0, 0, 0, 0])
    c = subsystem_histogram(DecoherenceModel.homogeneous(2), 10, 10, rng())
    assert c.mean[1] == 5 and c.mean.sum() == 5
    c = subsystem_histogram(DecoherenceModel.bernoulli(0.5), 4, 100_000, rng(5))
    ref = np.array([1.5, 0.625, 0.25, 0.125])
    assert np.all(np.abs(c.mean - ref) < 3 * c.stderr)


def test_clean_resistance_average():
    for p in (0.2, 0.7):
        spec = EnsembleSpec(40, disorder=DisorderSpec(0.0), model=DecoherenceModel.bernoulli(p), samples=4000, seed=1)
        est = estimate_resistivity(spec)
        assert abs(est.mean - (1 + 39 * p) / 40) < 3 * est.stderr


def test_clean_conductance_binomial_oracle():
    n, p = 30, 0.2
    k = np.arange(n)
    expect_g = float(np.sum(binom.pmf(k, n - 1, p) / (1 + k)))
    spec = EnsembleSpec(
        n, disorder=DisorderSpec(0.0), model=DecoherenceModel.bernoulli(p), samples=5000, seed=2, averaging="conductance_avg"
    )
    est = estimate_resistivity(spec)
    assert est.observable == "resistivity_G"
    assert abs(est.mean - 1 / (n * expect_g)) < 3 * est.stderr


def test_ohmic_example_p09():
    spec = EnsembleSpec(2000, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.9), samples=10_000, seed=7)
    est = estimate_resistivity(spec)
    assert abs(est.mean - an.resistivity_random(0.9, 1.0).value) < 3 * est.stderr


@pytest.mark.parametrize("threads", [2, 4, 8])
def test_thread_count_determinism(threads):
    spec = EnsembleSpec(
        25, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.4), samples=1700, seed=11, disorder_path="sampled"
    )
    a = estimate_resistivity(spec, threads=1)
    b = estimate_resistivity(spec, threads=threads)
    assert a == b


def test_streams_differ():
    spec = EnsembleSpec(25, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.4), samples=600, seed=11)
    assert estimate_resistivity(spec, stream=0) != estimate_resistivity(spec, stream=1)


def test_analytic_sampled_consistency():
    base = EnsembleSpec(30, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.5), samples=20_000, seed=4)
    a = estimate_resistivity(base)
    s = estimate_resistivity(replace(base, disorder_path="sampled", seed=5))
    assert abs(a.mean - s.mean) < 3 * math.hypot(a.stderr, s.stderr)


def test_serial_shortcut_matches_network():
    r = rng(8)
    for _ in range(50):
        n = int(r.integers(2, 16))
        spec = EnsembleSpec(n, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.4), disorder_path="sampled")
        cuts = r.random((1, n - 1)) < 0.4
        eps = r.normal(size=(1, n))
        fast = sampled_chain_log_resistance(cuts, eps, 0.0, -1j)[0]
        dense = _DenseKernel(spec).log_resistance(cuts[0], eps[0])
        assert fast == pytest.approx(dense, rel=1e-10, abs=1e-10)


def test_dense_kernel_matches_configuration_resistance():
    r = rng(9)
    spec = EnsembleSpec(
        8, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.3, "site_attached"), disorder_path="sampled"
    )
    slots = r.random(8) < 0.3
    eps = r.normal(size=8)
    cfg = sample_configuration(DecoherenceModel.bernoulli(0.0, "site_attached"), 8, r)
    cfg = replace(cfg, attached_sites=frozenset(np.flatnonzero(slots).tolist()))
    ref = configuration_resistance(LatticeSpec(8, onsite=tuple(eps)), cfg)
    assert math.exp(_DenseKernel(spec).log_resistance(slots, eps)) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_jensen_ordering(p):
    spec = EnsembleSpec(60, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(p), samples=2000, seed=3)
    r = estimate_resistivity(spec)
    g = estimate_resistivity(replace(spec, averaging="conductance_avg"))
    assert g.mean < r.mean


def test_sampled_conductance_note():
    spec = EnsembleSpec(
        10, disorder=DisorderSpec(1.0), model=DecoherenceModel.bernoulli(0.5), samples=50,
        averaging="conductance_avg", disorder_path="sampled",
    )
    assert estimate_resistivity(spec).note == SAMPLED_CONDUCTANCE_NOTE


def test_clean_sweep():
    tmpl = EnsembleSpec(2, disorder=DisorderSpec(0.0), model=DecoherenceModel.bernoulli(0.5), samples=4000, seed=6)
    rows = length_sweep(tmpl, [5, 20, 80])
    for row in rows:
        n = row.length
        assert abs(row.estimate.mean - (1 + (n - 1) / 2) / n) < 3 * row.estimate.stderr + 1e-12
    means = [r.estimate.mean for r in rows]
    assert means[0] > means[1] > means[2] > 0.5
    with pytest.raises(ValueError):
        length_sweep(tmpl, [])


def test_log_domain_no_saturation():
    spec = EnsembleSpec(3000, disorder=DisorderSpec(1.5), model=DecoherenceModel.bernoulli(0.0), samples=10)
    est = estimate_resistivity(spec)
    assert math.isfinite(est.log_mean) and est.log_mean > 709
    assert est.mean == math.inf


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(10, width=3)
    with pytest.raises(ValueError):
        EnsembleSpec(10, model=DecoherenceModel.bernoulli(0.5, "site_attached"))
    with pytest.raises(ValueError):
        EnsembleSpec(10, samples=0)
    with pytest.raises(ValueError):
        EnsembleSpec(10, energy=0.5)
    blocks = sample_log_resistances(EnsembleSpec(10, samples=1234))
    assert [b.size for b in blocks] == [500, 500, 234]
