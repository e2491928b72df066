"""Reservoir networks: turning a decoherence configuration into reservoirs and
evaluating the multi-terminal resistance in units of h/e^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .lattice import WIDE_BAND, LatticeSpec, SelfEnergy, build_hamiltonian, contacts
from .negf import TransmissionMatrix, transmission_matrix

Placement = Literal["bond_replacing", "site_attached"]


class DegenerateNetworkError(ArithmeticError):
    """The probe conductance matrix cannot be inverted."""


class DisconnectedNetworkError(ArithmeticError):
    """No current can flow from source to drain."""


@dataclass(frozen=True)
class DecoherenceConfiguration:
    """Placement of virtual reservoirs for a single sample.

    ``cut_bonds`` holds 1-based bond ids (see :class:`LatticeSpec`), used in
    ``bond_replacing`` mode; ``attached_sites`` holds 0-based site indices,
    used in ``site_attached`` mode.
    """

    mode: Placement = "bond_replacing"
    cut_bonds: frozenset[int] = field(default_factory=frozenset)
    attached_sites: frozenset[int] = field(default_factory=frozenset)
    probe: SelfEnergy = WIDE_BAND

    def __post_init__(self) -> None:
        if self.mode not in ("bond_replacing", "site_attached"):
            raise ValueError(f"unknown placement {self.mode!r}")
        object.__setattr__(self, "cut_bonds", frozenset(int(b) for b in self.cut_bonds))
        object.__setattr__(self, "attached_sites", frozenset(int(s) for s in self.attached_sites))

    @property
    def n_probes(self) -> int:
        return len(self.cut_bonds) if self.mode == "bond_replacing" else len(self.attached_sites)


@dataclass(frozen=True)
class SubsystemPartition:
    lengths: tuple[int, ...]

    @property
    def n_sites(self) -> int:
        return sum(self.lengths)


def partition_chain(length: int, cut_bonds: Iterable[int]) -> SubsystemPartition:
    """Lengths of the coherent segments left after cutting ``cut_bonds``.

    >>> partition_chain(6, {2, 5}).lengths
    (2, 3, 1)
    """
    cuts = sorted(set(int(b) for b in cut_bonds))
    if cuts and (cuts[0] < 1 or cuts[-1] > length - 1):
        raise ValueError(f"bond ids must lie in 1..{length - 1}")
    edges = [0, *cuts, length]
    return SubsystemPartition(tuple(b - a for a, b in zip(edges[:-1], edges[1:])))


def serial_resistance(transmissions: Sequence[float]) -> float:
    """Series sum of ``1/T`` over consecutive coherent subsystems."""
    t = np.asarray(transmissions, dtype=float)
    if np.any(t <= 0):
        raise DisconnectedNetworkError("zero or negative subsystem transmission")
    return float(np.sum(1.0 / t))


def _as_array(T) -> np.ndarray:
    return np.asarray(T.T if isinstance(T, TransmissionMatrix) else T, dtype=float)


def probe_conductance_matrix(T) -> np.ndarray:
    """Inverse of the probe resistance matrix (virtual reservoirs only).

    Diagonal entries sum the transmissions out of a probe to every other
    reservoir, source and drain included.
    """
    t = _as_array(T)
    off = t - np.diag(np.diag(t))
    g = -off[2:, 2:].copy()
    np.fill_diagonal(g, off[2:, :].sum(axis=1))
    return g


def probe_potentials(T) -> np.ndarray:
    """Probe chemical potentials for source at 1 and drain at 0."""
    t = _as_array(T)
    if t.shape[0] == 2:
        return np.zeros(0)
    g = probe_conductance_matrix(t)
    rhs = t[2:, 0]
    try:
        mu = np.linalg.solve(g, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateNetworkError(str(exc)) from exc
    resid = np.abs(g @ mu - rhs).max()
    if not np.isfinite(resid) or resid > 1e-8 * max(1.0, np.abs(rhs).max(), np.abs(g).max() * np.abs(mu).max()):
        raise DegenerateNetworkError(f"probe system residual {resid:.3g}")
    return mu


def reservoir_currents(T, mu: np.ndarray) -> np.ndarray:
    """Net linear-response current into every reservoir, given probe potentials."""
    t = _as_array(T)
    v = np.concatenate([[1.0, 0.0], mu])
    off = t - np.diag(np.diag(t))
    return off @ v - off.sum(axis=1) * v


def network_resistance(T) -> float:
    """Two-terminal resistance of a reservoir network with zero-current probes."""
    t = _as_array(T)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
        raise ValueError("need a square transmission matrix with source and drain")
    mu = probe_potentials(t)
    conductance = t[1, 0] + float(t[1, 2:] @ mu)
    if not conductance > 0:
        raise DisconnectedNetworkError("source and drain are not connected")
    return 1.0 / conductance


def realize_probes(
    lattice: LatticeSpec,
    config: DecoherenceConfiguration,
    contact: SelfEnergy = WIDE_BAND,
) -> tuple[np.ndarray, list[SelfEnergy]]:
    """Effective Hamiltonian and reservoir list ``[source, drain, probes...]``.

    A cut bond loses its hopping and gets one virtual reservoir coupled to both
    of its sites, so the two sides only communicate through that reservoir.
    An attached probe leaves the Hamiltonian untouched.
    """
    h = build_hamiltonian(lattice)
    reservoirs = list(contacts(lattice, contact))
    if config.mode == "bond_replacing":
        bonds = lattice.bonds()
        for b in sorted(config.cut_bonds):
            if not 1 <= b <= len(bonds):
                raise IndexError(f"bond id {b} outside 1..{len(bonds)}")
            i, j = bonds[b - 1]
            h[i, j] = h[j, i] = 0.0
            reservoirs.append(config.probe.on((i, j)))
    else:
        for s in sorted(config.attached_sites):
            if not 0 <= s < lattice.n_sites:
                raise IndexError(f"site {s} outside 0..{lattice.n_sites - 1}")
            reservoirs.append(config.probe.on((s,)))
    return h, reservoirs


def configuration_resistance(
    lattice: LatticeSpec,
    config: DecoherenceConfiguration,
    E: float = 0.0,
    contact: SelfEnergy = WIDE_BAND,
) -> float:
    h, reservoirs = realize_probes(lattice, config, contact)
    return network_resistance(transmission_matrix(h, reservoirs, E))
