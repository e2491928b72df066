"""Electron transport through disordered tight-binding chains and ribbons with
randomly placed phase-randomizing virtual reservoirs."""

__version__ = "0.1.0"

from .analytic import (
    avg_resistance_band_center,
    avg_resistance_general,
    classify_distribution,
    critical_decoherence,
    cubic_roots,
    resistivity_homogeneous,
    resistivity_random,
    subsystem_counts,
    xi_inverse,
)
from .decoherence import DecoherenceModel, sample_configuration
from .ensemble import EnsembleEstimate, EnsembleSpec, estimate_resistivity, length_sweep
from .lattice import DisorderSpec, LatticeSpec, SelfEnergy, build_hamiltonian, sample_disorder
from .negf import chain_resistance_recursive, green_function, transmission, transmission_matrix
from .network import DecoherenceConfiguration, network_resistance, partition_chain, realize_probes, serial_resistance
