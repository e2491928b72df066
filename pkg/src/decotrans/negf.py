"""Coherent transport: Green's function, reservoir transmissions and the
two-terminal chain recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import SelfEnergy

NEGATIVE_SLACK = 1e-12
_RESCALE_EXP = 512
_RESCALE_AT = 2.0**_RESCALE_EXP


class SingularMatrixError(np.linalg.LinAlgError):
    """``E - H - sum(Gamma)`` could not be inverted."""


class NegativeTransmissionError(ArithmeticError):
    """A transmission came out negative beyond roundoff."""


@dataclass(frozen=True)
class GreenFunction:
    energy: float
    matrix: np.ndarray


@dataclass(frozen=True)
class TransmissionMatrix:
    """``T[i, j]`` is the transmission from reservoir ``j`` into reservoir ``i``.

    By convention reservoir 0 is the source and reservoir 1 the drain.
    """

    labels: tuple[str, ...]
    T: np.ndarray


def _as_gamma(gamma) -> complex:
    if isinstance(gamma, SelfEnergy):
        return gamma.value
    return complex(gamma)


def shifted_matrix(H: np.ndarray, selfenergies: Sequence[SelfEnergy], E: float) -> np.ndarray:
    n = H.shape[0]
    a = (E * np.eye(n) - H).astype(complex)
    for se in selfenergies:
        sites = np.asarray(se.sites, dtype=int)
        if sites.size and (sites.min() < 0 or sites.max() >= n):
            raise IndexError(f"self-energy sites {se.sites} outside 0..{n - 1}")
        a[sites, sites] -= se.value
    return a


def green_function(H: np.ndarray, selfenergies: Sequence[SelfEnergy], E: float) -> GreenFunction:
    """Retarded Green's function ``[E - H - sum_k Gamma_k]^-1``."""
    if not any(se.eta != 0 for se in selfenergies):
        raise SingularMatrixError("no absorbing reservoir attached")
    a = shifted_matrix(np.asarray(H, dtype=float), selfenergies, E)
    try:
        g = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    residual = np.abs(g @ a - np.eye(a.shape[0])).max() if a.size else 0.0
    if not np.isfinite(residual) or residual > 1e-6:
        raise SingularMatrixError(f"inverse residual {residual:.3g}")
    return GreenFunction(float(E), g)


def _clamp(t: np.ndarray | float):
    t = np.asarray(t, dtype=float)
    if np.any(t < -NEGATIVE_SLACK):
        raise NegativeTransmissionError(f"transmission {t.min():.3g} < 0")
    return np.where(t < 0, 0.0, t)


def transmission(G: GreenFunction, gi: SelfEnergy, gj: SelfEnergy) -> float:
    """``4 Tr[Im(Gamma_i) G Im(Gamma_j) G^+]`` from reservoir ``j`` into ``i``."""
    g = G.matrix
    si = list(gi.sites)
    sj = list(gj.sites)
    block = g[np.ix_(si, sj)]
    t = 4.0 * gi.eta * gj.eta * float(np.sum(block.real**2 + block.imag**2))
    return float(_clamp(t))


def weight_matrix(selfenergies: Sequence[SelfEnergy], n_sites: int) -> np.ndarray:
    """``W[k, x] = eta_k`` if reservoir ``k`` couples to site ``x``."""
    w = np.zeros((len(selfenergies), n_sites))
    for k, se in enumerate(selfenergies):
        w[k, list(se.sites)] = se.eta
    return w


def transmissions_from_green(g: np.ndarray, selfenergies: Sequence[SelfEnergy]) -> np.ndarray:
    w = weight_matrix(selfenergies, g.shape[0])
    t = 4.0 * (w @ (g.real**2 + g.imag**2) @ w.T)
    np.fill_diagonal(t, 0.0)
    return _clamp(t)


def default_labels(n: int) -> tuple[str, ...]:
    return ("S", "D") + tuple(f"P{k}" for k in range(1, n - 1))


def transmission_matrix(
    H: np.ndarray, selfenergies: Sequence[SelfEnergy], E: float, labels: Sequence[str] | None = None
) -> TransmissionMatrix:
    G = green_function(H, selfenergies, E)
    t = transmissions_from_green(G.matrix, selfenergies)
    labels = tuple(labels) if labels is not None else default_labels(len(selfenergies))
    if len(labels) != len(selfenergies):
        raise ValueError("one label per reservoir")
    return TransmissionMatrix(labels, t)


def log_chain_resistance_recursive(onsite: Sequence[float], E: float, gamma) -> float:
    """Natural log of ``1/T_N`` for a chain with identical end couplings.

    Runs the two-term polynomial recursion for ``r_i`` and ``s_i``, carrying a
    shared power-of-two exponent so that long localized chains stay finite.
    """
    g = _as_gamma(gamma)
    if g.imag == 0:
        raise ZeroDivisionError("eta = 0: reservoir does not absorb")
    eps = np.asarray(onsite, dtype=float)
    if eps.size < 1:
        raise ValueError("empty chain")
    r_prev, r = 0.0, 1.0  # r_{-1}, r_0
    s_prev, s = 0.0, 1.0  # s_0, s_1
    scale = 0
    for i, e in enumerate(eps):
        r_prev, r = r, (E - e) * r - r_prev
        if i > 0:
            s_prev, s = s, (E - e) * s - s_prev
        if max(abs(r), abs(r_prev), abs(s), abs(s_prev)) > _RESCALE_AT:
            r, r_prev = math.ldexp(r, -_RESCALE_EXP), math.ldexp(r_prev, -_RESCALE_EXP)
            s, s_prev = math.ldexp(s, -_RESCALE_EXP), math.ldexp(s_prev, -_RESCALE_EXP)
            scale += _RESCALE_EXP
    amp = r - g * r_prev - g * s + g * g * s_prev
    mag2 = amp.real**2 + amp.imag**2
    if mag2 == 0.0:
        return -math.inf
    return math.log(mag2) - math.log(4.0 * g.imag**2) + 2 * scale * math.log(2.0)


def chain_resistance_recursive(onsite: Sequence[float], E: float, gamma) -> float:
    """``1/T_N`` of a chain coupled by ``gamma`` at both ends (inf on overflow)."""
    lv = log_chain_resistance_recursive(onsite, E, gamma)
    return math.exp(lv) if lv < 709.0 else math.inf


def log_chain_resistance_batch(onsite: np.ndarray, E: float, gamma) -> np.ndarray:
    """Vectorised :func:`log_chain_resistance_recursive` over the rows of ``onsite``."""
    g = _as_gamma(gamma)
    if g.imag == 0:
        raise ZeroDivisionError("eta = 0: reservoir does not absorb")
    eps = np.atleast_2d(np.asarray(onsite, dtype=float))
    b, n = eps.shape
    r_prev = np.zeros(b)
    r = np.ones(b)
    s_prev = np.zeros(b)
    s = np.ones(b)
    scale = np.zeros(b)
    for i in range(n):
        a = E - eps[:, i]
        r_prev, r = r, a * r - r_prev
        if i > 0:
            s_prev, s = s, a * s - s_prev
        big = np.maximum(np.maximum(np.abs(r), np.abs(r_prev)), np.maximum(np.abs(s), np.abs(s_prev)))
        hit = big > _RESCALE_AT
        if hit.any():
            f = np.where(hit, 2.0**-_RESCALE_EXP, 1.0)
            r, r_prev, s, s_prev = r * f, r_prev * f, s * f, s_prev * f
            scale += hit * _RESCALE_EXP
    amp = r - g * r_prev - g * s + g * g * s_prev
    with np.errstate(divide="ignore"):
        return np.log(np.abs(amp) ** 2) - math.log(4.0 * g.imag**2) + 2.0 * scale * math.log(2.0)
