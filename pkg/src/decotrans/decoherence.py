"""Statistical laws placing virtual reservoirs, and samplers for them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .lattice import WIDE_BAND, SelfEnergy
from .network import DecoherenceConfiguration, Placement

ModelKind = Literal["bernoulli", "homogeneous", "cutoff", "power_law"]


@dataclass(frozen=True)
class DecoherenceModel:
    """How reservoirs are distributed over the candidate slots of a sample.

    Slots are bonds in ``bond_replacing`` placement and sites in
    ``site_attached`` placement.
    """

    kind: ModelKind = "bernoulli"
    p: float = 0.0
    ell_phi: float = 1.0
    j_max: int = 1
    gamma: float = 1.0
    placement: Placement = "bond_replacing"

    def __post_init__(self) -> None:
        if self.kind not in ("bernoulli", "homogeneous", "cutoff", "power_law"):
            raise ValueError(f"unknown decoherence model {self.kind!r}")
        if self.placement not in ("bond_replacing", "site_attached"):
            raise ValueError(f"unknown placement {self.placement!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.ell_phi < 1.0:
            raise ValueError("ell_phi must be >= 1")
        if self.j_max < 1:
            raise ValueError("j_max must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")

    @classmethod
    def bernoulli(cls, p: float, placement: Placement = "bond_replacing") -> DecoherenceModel:
        return cls("bernoulli", p=p, placement=placement)

    @classmethod
    def homogeneous(cls, ell_phi: float, placement: Placement = "bond_replacing") -> DecoherenceModel:
        return cls("homogeneous", ell_phi=ell_phi, placement=placement)

    @classmethod
    def cutoff(cls, p: float, j_max: int, placement: Placement = "bond_replacing") -> DecoherenceModel:
        return cls("cutoff", p=p, j_max=j_max, placement=placement)

    @classmethod
    def power_law(cls, gamma: float, placement: Placement = "bond_replacing") -> DecoherenceModel:
        return cls("power_law", gamma=gamma, placement=placement)

    @property
    def parameter(self) -> float:
        """The model's own sweep parameter."""
        return {"bernoulli": self.p, "homogeneous": self.ell_phi, "cutoff": self.p, "power_law": self.gamma}[
            self.kind
        ]


def _homogeneous_mask(ell_phi: float, n_slots: int) -> np.ndarray:
    # cut after floor(k * ell_phi) sites: segment lengths alternate floor/ceil with mean ell_phi
    mask = np.zeros(n_slots, dtype=bool)
    k = np.arange(1, int(n_slots / ell_phi) + 2)
    pos = np.floor(k * ell_phi + 1e-9).astype(int)
    pos = pos[(pos >= 1) & (pos <= n_slots)]
    mask[pos - 1] = True
    return mask


def _enforce_cutoff(mask: np.ndarray, j_max: int) -> np.ndarray:
    """Force a cut wherever ``j_max`` uncut slots have been seen in a row."""
    out = mask.copy()
    rows, n = out.shape
    run = np.zeros(rows, dtype=int)
    for i in range(n):
        force = run == j_max
        out[:, i] |= force
        run = np.where(out[:, i], 0, run + 1)
    return out


def _power_law_mask(gamma: float, n_sites: int, rows: int, rng: np.random.Generator) -> np.ndarray:
    """Segment lengths i.i.d. with weight ``j**-gamma`` on ``1..n_sites``."""
    j = np.arange(1, n_sites + 1)
    w = j.astype(float) ** -gamma
    cdf = np.cumsum(w / w.sum())
    cdf[-1] = 1.0
    mask = np.zeros((rows, max(n_sites - 1, 0)), dtype=bool)
    for r in range(rows):
        pos = 0
        while True:
            pos += int(np.searchsorted(cdf, rng.random(), side="right")) + 1
            if pos >= n_sites:
                break
            mask[r, pos - 1] = True
    return mask


def sample_slot_mask(model: DecoherenceModel, n_slots: int, rows: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean ``(rows, n_slots)`` array; True marks a virtual reservoir.

    For the segment-based laws (homogeneous, cutoff, power law) slot ``i``
    is read as the boundary after ``i + 1`` sites.
    """
    if model.kind == "bernoulli":
        return rng.random((rows, n_slots)) < model.p
    if model.kind == "homogeneous":
        return np.broadcast_to(_homogeneous_mask(model.ell_phi, n_slots), (rows, n_slots)).copy()
    if model.kind == "cutoff":
        return _enforce_cutoff(rng.random((rows, n_slots)) < model.p, model.j_max)
    return _power_law_mask(model.gamma, n_slots + 1, rows, rng)


def sample_configuration(
    model: DecoherenceModel,
    n_bonds: int,
    rng: np.random.Generator,
    probe: SelfEnergy = WIDE_BAND,
) -> DecoherenceConfiguration:
    """One configuration over ``n_bonds`` candidate slots.

    In ``site_attached`` placement the slots are read as 0-based site indices.
    """
    if n_bonds < 0:
        raise ValueError("n_bonds must be >= 0")
    mask = sample_slot_mask(model, n_bonds, 1, rng)[0]
    chosen = np.flatnonzero(mask)
    if model.placement == "bond_replacing":
        return DecoherenceConfiguration("bond_replacing", cut_bonds=frozenset(chosen + 1), probe=probe)
    return DecoherenceConfiguration("site_attached", attached_sites=frozenset(chosen), probe=probe)
