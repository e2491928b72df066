"""Monte Carlo ensembles over decoherence configurations and disorder.

Samples are processed in fixed-size blocks. Every block draws from its own
random stream keyed by ``(seed, stream, block index)``, and block statistics
are merged in index order, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .analytic import log_avg_resistance_band_center
from .decoherence import DecoherenceModel, sample_slot_mask
from .lattice import DisorderSpec, LatticeSpec, SelfEnergy, build_hamiltonian, sample_disorder
from .negf import log_chain_resistance_batch, shifted_matrix, transmissions_from_green
from .network import network_resistance
from .stats import LogMoments, merge_all

BLOCK_SIZE = 500

Averaging = Literal["resistance_avg", "conductance_avg"]
DisorderPath = Literal["analytic", "sampled"]

SAMPLED_CONDUCTANCE_NOTE = (
    "conductance_avg with sampled disorder: each configuration's single-realization "
    "resistance stands in for its disorder average"
)


@dataclass(frozen=True)
class EnsembleSpec:
    length: int
    width: int = 1
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    model: DecoherenceModel = field(default_factory=DecoherenceModel)
    samples: int = 1000
    seed: int = 0
    averaging: Averaging = "resistance_avg"
    disorder_path: DisorderPath = "analytic"
    energy: float = 0.0
    contact_gamma: complex = -1j
    probe_gamma: complex = -1j

    def __post_init__(self) -> None:
        if self.length < 1 or self.width < 1:
            raise ValueError("length and width must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.averaging not in ("resistance_avg", "conductance_avg"):
            raise ValueError(f"unknown averaging {self.averaging!r}")
        if self.disorder_path not in ("analytic", "sampled"):
            raise ValueError(f"unknown disorder path {self.disorder_path!r}")
        if complex(self.contact_gamma).imag == 0 or complex(self.probe_gamma).imag == 0:
            raise ValueError("reservoir couplings need a nonzero imaginary part")
        if self.disorder_path == "analytic":
            if self.width != 1 or self.model.placement != "bond_replacing":
                raise ValueError("analytic disorder path needs a bond-replacing chain")
            if self.energy != 0 or complex(self.contact_gamma) != -1j or complex(self.probe_gamma) != -1j:
                raise ValueError("analytic disorder path needs E = 0 and wide-band (-i) reservoirs")

    @property
    def n_slots(self) -> int:
        if self.model.placement == "bond_replacing":
            return self.length * (2 * self.width - 1) - self.width
        return self.length * self.width


@dataclass(frozen=True)
class EnsembleEstimate:
    """Resistivity estimate; ``log_*`` fields are natural logarithms."""

    log_mean: float
    log_stderr: float
    samples_used: int
    observable: Literal["resistivity_R", "resistivity_G"]
    diverged: bool = False
    note: str = ""

    @property
    def mean(self) -> float:
        return math.exp(self.log_mean) if self.log_mean < 709 else math.inf

    @property
    def stderr(self) -> float:
        return math.exp(self.log_stderr) if self.log_stderr < 709 else math.inf


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, block)))


# -- per-configuration log-resistance kernels ----------------------------------


def segment_lengths(cuts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row ids and lengths of coherent segments for a ``(rows, N-1)`` cut mask."""
    rows, nb = cuts.shape
    n = nb + 1
    # boundaries at 0, every cut (after i+1 sites) and n
    bound = np.zeros((rows, n + 1), dtype=bool)
    bound[:, 0] = True
    bound[:, n] = True
    bound[:, 1:n] = cuts
    r, c = np.nonzero(bound)
    lengths = np.diff(c)
    same_row = np.diff(r) == 0
    return r[:-1][same_row], lengths[same_row]


def _sum_logs_by_row(rows: int, row_ids: np.ndarray, logs: np.ndarray) -> np.ndarray:
    peak = np.full(rows, -np.inf)
    np.maximum.at(peak, row_ids, logs)
    acc = np.zeros(rows)
    np.add.at(acc, row_ids, np.exp(logs - peak[row_ids]))
    return peak + np.log(acc)


def analytic_log_resistance(cuts: np.ndarray, log_table: np.ndarray) -> np.ndarray:
    """Sum of disorder-averaged segment resistances; ``log_table[j-1] = log<1/T_j>``."""
    row_ids, lengths = segment_lengths(cuts)
    return _sum_logs_by_row(cuts.shape[0], row_ids, log_table[lengths - 1])


def sampled_chain_log_resistance(cuts: np.ndarray, eps: np.ndarray, E: float, gamma: complex) -> np.ndarray:
    """Series resistance of independent segments, each through the chain recursion."""
    rows, n = eps.shape
    g = complex(gamma)
    ln2 = math.log(2.0)
    log4eta2 = math.log(4.0 * g.imag**2)
    big = 2.0**512
    total = np.full(rows, -np.inf)
    r_prev = np.zeros(rows)
    r = np.ones(rows)
    s_prev = np.zeros(rows)
    s = np.ones(rows)
    scale = np.zeros(rows)
    start = np.ones(rows, dtype=bool)
    for i in range(n):
        if i > 0:
            start = cuts[:, i - 1]
            if start.any():
                r_prev = np.where(start, 0.0, r_prev)
                r = np.where(start, 1.0, r)
                s_prev = np.where(start, 0.0, s_prev)
                s = np.where(start, 1.0, s)
                scale = np.where(start, 0.0, scale)
        a = E - eps[:, i]
        r_prev, r = r, a * r - r_prev
        if i > 0:
            s_new = a * s - s_prev
            s_prev = np.where(start, s_prev, s)
            s = np.where(start, s, s_new)
        m = np.maximum(np.maximum(np.abs(r), np.abs(r_prev)), np.maximum(np.abs(s), np.abs(s_prev)))
        hit = m > big
        if hit.any():
            f = np.where(hit, 2.0**-512, 1.0)
            r, r_prev, s, s_prev = r * f, r_prev * f, s * f, s_prev * f
            scale = scale + 512 * hit
        end = np.ones(rows, dtype=bool) if i == n - 1 else cuts[:, i]
        if end.any():
            amp = r - g * r_prev - g * s + g * g * s_prev
            with np.errstate(divide="ignore"):
                seg = np.log(np.abs(amp) ** 2) - log4eta2 + 2.0 * scale * ln2
            total = np.where(end, np.logaddexp(total, seg), total)
    return total


class _DenseKernel:
    """Full reservoir network through the dense Green's function."""

    def __init__(self, spec: EnsembleSpec) -> None:
        self.spec = spec
        self.lattice = LatticeSpec(spec.length, spec.width)
        self.base = build_hamiltonian(self.lattice)
        self.bonds = self.lattice.bonds()
        self.source = self.lattice.column_sites(0)
        self.drain = self.lattice.column_sites(spec.length - 1)

    def log_resistance(self, slots: np.ndarray, eps: np.ndarray) -> float:
        spec = self.spec
        h = self.base.copy()
        h[np.diag_indices_from(h)] = eps
        reservoirs = [
            SelfEnergy(tuple(self.source), complex(spec.contact_gamma).real, complex(spec.contact_gamma).imag),
            SelfEnergy(tuple(self.drain), complex(spec.contact_gamma).real, complex(spec.contact_gamma).imag),
        ]
        pg = complex(spec.probe_gamma)
        for k in np.flatnonzero(slots):
            if spec.model.placement == "bond_replacing":
                i, j = self.bonds[k]
                h[i, j] = h[j, i] = 0.0
                reservoirs.append(SelfEnergy((i, j), pg.real, pg.imag))
            else:
                reservoirs.append(SelfEnergy((int(k),), pg.real, pg.imag))
        a = shifted_matrix(h, reservoirs, spec.energy)
        g = np.linalg.inv(a)
        t = transmissions_from_green(g, reservoirs)
        return math.log(network_resistance(t))


def _block_log_resistance(spec: EnsembleSpec, rng: np.random.Generator, rows: int, table, kernel) -> np.ndarray:
    slots = sample_slot_mask(spec.model, spec.n_slots, rows, rng)
    if spec.disorder_path == "analytic":
        return analytic_log_resistance(slots, table)
    eps = sample_disorder(spec.disorder, (rows, spec.length * spec.width), rng)
    if kernel is None:
        return sampled_chain_log_resistance(slots, eps, spec.energy, complex(spec.contact_gamma))
    return np.array([kernel.log_resistance(slots[r], eps[r]) for r in range(rows)])


def _uses_chain_recursion(spec: EnsembleSpec) -> bool:
    return (
        spec.width == 1
        and spec.model.placement == "bond_replacing"
        and complex(spec.contact_gamma) == complex(spec.probe_gamma)
    )


def sample_log_resistances(spec: EnsembleSpec, stream: int = 0, threads: int = 1) -> list[np.ndarray]:
    """Per-block arrays of per-configuration ``log R``, in block order."""
    table = None
    kernel = None
    if spec.disorder_path == "analytic":
        table = np.asarray(log_avg_resistance_band_center(np.arange(1, spec.length + 1), spec.disorder.sigma))
        table = np.atleast_1d(table)
    elif not _uses_chain_recursion(spec):
        kernel = _DenseKernel(spec)
    n_blocks = -(-spec.samples // BLOCK_SIZE)

    def work(b: int) -> np.ndarray:
        rows = min(BLOCK_SIZE, spec.samples - b * BLOCK_SIZE)
        return _block_log_resistance(spec, block_rng(spec.seed, stream, b), rows, table, kernel)

    if threads <= 1 or n_blocks == 1:
        return [work(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(n_blocks)))


def estimate_from_log_resistances(spec: EnsembleSpec, blocks: Sequence[np.ndarray]) -> EnsembleEstimate:
    log_n = math.log(spec.length * 1.0)
    if spec.averaging == "resistance_avg":
        mom = merge_all([LogMoments.from_logs(b - log_n) for b in blocks])
        return EnsembleEstimate(mom.log_mean, mom.log_stderr, mom.count, "resistivity_R")
    mom = merge_all([LogMoments.from_logs(-b) for b in blocks])
    note = SAMPLED_CONDUCTANCE_NOTE if spec.disorder_path == "sampled" else ""
    if mom.log_mean == -math.inf:
        return EnsembleEstimate(math.inf, math.inf, mom.count, "resistivity_G", diverged=True, note=note)
    # rho = 1 / (N <G>), stderr by the delta method
    log_rho = -log_n - mom.log_mean
    log_se = mom.log_stderr - log_n - 2.0 * mom.log_mean
    return EnsembleEstimate(log_rho, log_se, mom.count, "resistivity_G", note=note)


def estimate_resistivity(spec: EnsembleSpec, stream: int = 0, threads: int = 1) -> EnsembleEstimate:
    return estimate_from_log_resistances(spec, sample_log_resistances(spec, stream, threads))


@dataclass(frozen=True)
class SweepRow:
    length: int
    estimate: EnsembleEstimate


def length_sweep(template: EnsembleSpec, lengths: Sequence[int], threads: int = 1) -> list[SweepRow]:
    """One estimate per length, each on its own stream of the master seed."""
    if not lengths:
        raise ValueError("need at least one length")
    return [
        SweepRow(int(n), estimate_resistivity(replace(template, length=int(n)), stream=k, threads=threads))
        for k, n in enumerate(lengths)
    ]


@dataclass(frozen=True)
class EmpiricalCensus:
    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def subsystem_histogram(model: DecoherenceModel, length: int, samples: int, rng: np.random.Generator) -> EmpiricalCensus:
    """Mean number of coherent segments per length ``j = 1..length``."""
    if model.placement != "bond_replacing":
        raise ValueError("segment census needs bond-replacing placement")
    s1 = np.zeros(length)
    s2 = np.zeros(length)
    done = 0
    while done < samples:
        rows = min(BLOCK_SIZE, samples - done)
        cuts = sample_slot_mask(model, length - 1, rows, rng)
        row_ids, lengths = segment_lengths(cuts)
        counts = np.zeros((rows, length))
        np.add.at(counts, (row_ids, lengths - 1), 1.0)
        s1 += counts.sum(axis=0)
        s2 += (counts**2).sum(axis=0)
        done += rows
    mean = s1 / samples
    var = np.maximum(s2 / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    return EmpiricalCensus(mean, np.sqrt(var / samples), samples)
