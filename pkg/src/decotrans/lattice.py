"""Tight-binding geometries, onsite disorder and reservoir self-energies.

Energies are in units of the hopping ``t = 1``. Sites are numbered from 0 in
column-major order: the ``M`` sites of the first column come first, so a chain
is simply a ribbon of width one. Bonds are identified by 1-based ids into
:meth:`LatticeSpec.bonds`; on a chain, bond ``b`` joins sites ``b - 1`` and
``b``, i.e. it sits after the first ``b`` sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

HOPPING = 1.0

Kind = Literal["chain", "ribbon"]
Shape = Literal["gaussian", "uniform"]


@dataclass(frozen=True)
class LatticeSpec:
    """An ``N x M`` strip with homogeneous unit hopping."""

    length: int
    width: int = 1
    onsite: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.length < 1 or self.width < 1:
            raise ValueError("length and width must be positive")
        n = self.length * self.width
        onsite = np.zeros(n) if self.onsite is None else np.asarray(self.onsite, dtype=float)
        if onsite.shape != (n,):
            raise ValueError(f"onsite must have {n} entries, got shape {onsite.shape}")
        object.__setattr__(self, "onsite", onsite)

    @classmethod
    def chain(cls, length: int, onsite=None) -> LatticeSpec:
        return cls(length, 1, onsite)

    @classmethod
    def ribbon(cls, length: int, width: int, onsite=None) -> LatticeSpec:
        return cls(length, width, onsite)

    @property
    def kind(self) -> Kind:
        return "chain" if self.width == 1 else "ribbon"

    @property
    def n_sites(self) -> int:
        return self.length * self.width

    def site(self, column: int, row: int = 0) -> int:
        return column * self.width + row

    def column_sites(self, column: int) -> list[int]:
        return [self.site(column, r) for r in range(self.width)]

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs ``(i, j)`` with ``i < j``, sorted.

        For a chain this is ``[(0, 1), (1, 2), ...]``.
        """
        return lattice_bonds(self.length, self.width)

    @property
    def n_bonds(self) -> int:
        return self.length * (2 * self.width - 1) - self.width


def lattice_bonds(length: int, width: int = 1) -> list[tuple[int, int]]:
    out = []
    for c in range(length):
        for r in range(width):
            i = c * width + r
            if r + 1 < width:
                out.append((i, i + 1))
            if c + 1 < length:
                out.append((i, i + width))
    out.sort()
    return out


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    n = spec.n_sites
    h = np.diag(spec.onsite.astype(float))
    for i, j in spec.bonds():
        h[i, j] = HOPPING
        h[j, i] = HOPPING
    return h


@dataclass(frozen=True)
class DisorderSpec:
    """Independent onsite energies with mean 0 and variance ``sigma**2``."""

    sigma: float = 0.0
    shape: Shape = "gaussian"

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.shape not in ("gaussian", "uniform"):
            raise ValueError(f"unknown disorder shape {self.shape!r}")


def sample_disorder(spec: DisorderSpec, n, rng: np.random.Generator) -> np.ndarray:
    """Draw onsite energies; ``n`` may be an int or an array shape."""
    if spec.shape == "gaussian":
        return rng.normal(0.0, 1.0, size=n) * spec.sigma
    half_width = np.sqrt(3.0) * spec.sigma
    return rng.uniform(-1.0, 1.0, size=n) * half_width


@dataclass(frozen=True)
class SelfEnergy:
    """Reservoir coupling ``nu + i*eta`` added to the diagonal of ``sites``."""

    sites: tuple[int, ...]
    nu: float = 0.0
    eta: float = -1.0

    def __post_init__(self) -> None:
        if self.eta == 0:
            raise ValueError("a reservoir needs eta != 0")
        sites = tuple(int(s) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate sites in self-energy")
        object.__setattr__(self, "sites", sites)

    @property
    def value(self) -> complex:
        return complex(self.nu, self.eta)

    def on(self, sites) -> SelfEnergy:
        """Same coupling, attached to other sites."""
        return SelfEnergy(tuple(sites), self.nu, self.eta)


WIDE_BAND = SelfEnergy((0,), 0.0, -1.0)


def contacts(spec: LatticeSpec, template: SelfEnergy = WIDE_BAND) -> tuple[SelfEnergy, SelfEnergy]:
    """Source on the first column and drain on the last one."""
    return template.on(spec.column_sites(0)), template.on(spec.column_sites(spec.length - 1))
