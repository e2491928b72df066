"""Closed-form disorder and decoherence averages for tight-binding chains.

Quantities that grow exponentially with the chain length come in pairs: a
plain function returning a float (``inf`` once it overflows) and a ``log_``
variant returning the natural logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from .decoherence import DecoherenceModel
from .lattice import SelfEnergy

DEGENERACY_TOL = 1e-8
CONSISTENCY_RTOL = 1e-8
_LN2 = math.log(2.0)


class ConsistencyError(ArithmeticError):
    """The recursion and root forms of the averaged resistance disagree."""


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _gamma(gamma) -> complex:
    return gamma.value if isinstance(gamma, SelfEnergy) else complex(gamma)


# -- localization scales -----------------------------------------------------


def xi_inverse(sigma: float) -> float:
    """Growth rate of the disorder-averaged resistance at the band centre."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return math.asinh(sigma * sigma / 2.0)


def ell_inverse(p: float) -> float:
    """Inverse mean free path between reservoirs, ``-log(1 - p)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return math.inf if p == 1.0 else -math.log1p(-p)


def phase_coherence_length(p: float, length: int | None = None) -> float:
    if length is None:
        return math.inf if p == 0 else 1.0 / p
    return length / (1.0 + (length - 1) * p)


@dataclass(frozen=True)
class LocalizationScales:
    xi_inv: float
    ell_inv: float
    ell_phi: float

    @classmethod
    def of(cls, sigma: float, p: float, length: int | None = None) -> LocalizationScales:
        return cls(xi_inverse(sigma), ell_inverse(p), phase_coherence_length(p, length))


def alpha_pm(xi_inv: float) -> tuple[float, float]:
    sech = 1.0 / math.cosh(xi_inv)
    return 0.5 * (1.0 + sech), 0.5 * (1.0 - sech)


# -- band centre, wide-band contacts ------------------------------------------


def log_avg_resistance_band_center(length, sigma: float):
    """``log <1/T_N>`` at ``E = 0`` with ``Gamma = -i``; ``length`` may be an array."""
    n = np.asarray(length)
    if np.any(n < 1):
        raise ValueError("length must be >= 1")
    x = xi_inverse(sigma)
    ap, am = alpha_pm(x)
    nx = n * x
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    # <1/T_N> = e^{Nx} (e^{-Nx} + a+ + a- (-1)^N e^{-2Nx}) / 2
    inner = 0.5 * (np.exp(-nx) + ap + am * sign * np.exp(-2.0 * nx))
    out = nx + np.log(inner)
    return float(out) if np.ndim(out) == 0 else out


def avg_resistance_band_center(length: int, sigma: float) -> float:
    return _exp(log_avg_resistance_band_center(length, sigma))


# -- general energy and self-energy --------------------------------------------


@dataclass(frozen=True)
class MomentSequences:
    """``R_n = <r_n^2>``, ``S_n = <r_n r_{n-1}>``, ``U_n = <r_n s_{n-1}>`` for ``n = 1..N``.

    Entry ``n`` equals ``mantissa * 2**exponent[n - 1]``.
    """

    R: np.ndarray
    S: np.ndarray
    U: np.ndarray
    exponent: np.ndarray

    def values(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        f = np.ldexp(1.0, self.exponent)
        with np.errstate(over="ignore"):
            return self.R * f, self.S * f, self.U * f


class _MomentState:
    """Running moments with a shared binary exponent."""

    RESCALE = 512

    def __init__(self, E: float, sigma: float) -> None:
        self.E = float(E)
        self.var = float(sigma) ** 2
        # n = 0: R_0 = 1, R_{-1} = 0, S_0 = 0; U_0 = -1 makes U_1 = 0
        self.R, self.R1, self.R2 = 1.0, 0.0, 0.0
        self.S, self.S1 = 0.0, 0.0
        self.U = -1.0
        self.one = 1.0
        self.exp = 0
        self.n = 0

    def step(self) -> None:
        E = self.E
        R_new = (E * E + self.var) * self.R - 2.0 * E * self.S + self.R1
        S_new = E * self.R - self.S
        U_new = E * self.S - self.U - self.one
        self.R2, self.R1, self.R = self.R1, self.R, R_new
        self.S1, self.S = self.S, S_new
        self.U = U_new
        self.n += 1
        if max(abs(self.R), abs(self.R1), abs(self.S), abs(self.U)) > 2.0**self.RESCALE:
            k = -self.RESCALE
            self.R, self.R1, self.R2 = (math.ldexp(v, k) for v in (self.R, self.R1, self.R2))
            self.S, self.S1, self.U = (math.ldexp(v, k) for v in (self.S, self.S1, self.U))
            self.one = math.ldexp(self.one, k)
            self.exp += self.RESCALE


def moment_recursion(length: int, E: float, sigma: float) -> MomentSequences:
    if length < 1:
        raise ValueError("length must be >= 1")
    st = _MomentState(E, sigma)
    R, S, U = np.empty(length), np.empty(length), np.empty(length)
    ex = np.empty(length, dtype=int)
    for i in range(length):
        st.step()
        R[i], S[i], U[i], ex[i] = st.R, st.S, st.U, st.exp
    return MomentSequences(R, S, U, ex)


def log_avg_resistance_recursion(length: int, E: float, sigma: float, gamma=-1j) -> float:
    """``log <1/T_N>`` assembled from the moment recursion."""
    g = _gamma(gamma)
    nu, eta = g.real, g.imag
    if eta == 0:
        raise ZeroDivisionError("eta = 0: reservoir does not absorb")
    if length < 1:
        raise ValueError("length must be >= 1")
    st = _MomentState(E, sigma)
    for _ in range(length):
        st.step()
    g2 = nu * nu + eta * eta
    total = (
        st.R
        + 2 * g2 * st.R1
        + g2 * g2 * st.R2
        - 4 * nu * st.S
        - 4 * nu * g2 * st.S1
        + 4 * nu * nu * st.U
        + 2 * g2 * st.one
    )
    if total <= 0:
        raise ConsistencyError(f"non-positive averaged resistance {total!r}")
    return math.log(total) - math.log(4 * eta * eta) + st.exp * _LN2


def discriminant(E: float, sigma: float) -> float:
    s4 = sigma**4
    e2 = E * E
    return s4 * s4 - 2.0 * s4 * (e2 * e2 + 10.0 * e2 - 2.0) + e2 * (e2 - 4.0) ** 3


def denominator_poly(E: float, sigma: float) -> tuple[float, float, float, float]:
    """Monic coefficients ``(1, b, c, d)`` of the generating-function denominator."""
    e2, s2 = E * E, sigma * sigma
    return 1.0, -(e2 - s2 - 1.0), e2 + s2 - 1.0, -1.0


def numerator_poly(E: float, sigma: float, gamma=-1j) -> tuple[float, float, float]:
    """Coefficients ``(a2, a1, a0)`` of the generating-function numerator."""
    g = _gamma(gamma)
    nu = g.real
    g2 = abs(g) ** 2
    e2, s2 = E * E, sigma * sigma
    a2 = 1.0 - 2.0 * nu * nu + g2 * g2
    a1 = 1.0 + (2.0 * nu * nu - 1.0) * (e2 - s2) + 2.0 * g2 * (1.0 - 2.0 * nu * E) + g2 * g2
    a0 = e2 + s2 + 2.0 * g2 - 4.0 * nu * E + 2.0 * nu * nu
    return a2, a1, a0


@dataclass(frozen=True)
class CubicRootSet:
    """Roots of the denominator polynomial; ``z1`` is the root in ``(0, 1]``."""

    z: tuple[complex, complex, complex]
    alpha: tuple[complex, complex, complex]
    discriminant: float
    degenerate: bool

    @property
    def z1(self) -> complex:
        return self.z[0]

    @property
    def z2(self) -> complex:
        return self.z[1]

    @property
    def z3(self) -> complex:
        return self.z[2]

    @property
    def all_real(self) -> bool:
        return all(v.imag == 0 for v in self.z)


def _depressed_cubic_roots(b: float, c: float, d: float) -> list[complex]:
    """Roots of ``z^3 + b z^2 + c z + d`` by the trigonometric/hyperbolic method."""
    shift = -b / 3.0
    P = c - b * b / 3.0
    Q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = -(4.0 * P**3 + 27.0 * Q**2)
    if P == 0.0 and Q == 0.0:
        return [complex(shift)] * 3
    if disc > 0:
        m = 2.0 * math.sqrt(-P / 3.0)
        arg = 3.0 * Q / (P * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        return [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift) for k in range(3)]
    if P < 0:
        m = 2.0 * math.sqrt(-P / 3.0)
        arg = -3.0 * abs(Q) / (P * m)
        t0 = -math.copysign(1.0, Q) * m * math.cosh(math.acosh(max(1.0, arg)) / 3.0)
    elif P > 0:
        m = 2.0 * math.sqrt(P / 3.0)
        t0 = -m * math.sinh(math.asinh(3.0 * Q / (P * m)) / 3.0)
    else:
        t0 = -math.copysign(abs(Q) ** (1.0 / 3.0), Q)
    z0 = t0 + shift
    # remaining pair from z^2 + (b + z0) z + (c + (b + z0) z0)
    bb = b + z0
    cc = c + bb * z0
    half = -bb / 2.0
    rad = half * half - cc
    if rad >= 0:
        r = math.sqrt(rad)
        return [complex(z0), complex(half + r), complex(half - r)]
    r = math.sqrt(-rad)
    return [complex(z0), complex(half, r), complex(half, -r)]


def _newton(z: complex, b: float, c: float, d: float) -> complex:
    f = ((z + b) * z + c) * z + d
    df = (3.0 * z + 2.0 * b) * z + c
    if df == 0:
        return z
    zn = z - f / df
    fn = ((zn + b) * zn + c) * zn + d
    return zn if abs(fn) <= abs(f) else z


def cubic_roots(E: float, sigma: float, gamma=-1j) -> CubicRootSet:
    """Roots ``z_k`` and partial-fraction weights ``alpha_k`` for the averaged resistance."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    _, b, c, d = denominator_poly(E, sigma)
    roots = [_newton(z, b, c, d) for z in _depressed_cubic_roots(b, c, d)]
    roots = [complex(z.real, 0.0) if abs(z.imag) < 1e-15 * max(1.0, abs(z)) else z for z in roots]
    # z1: the real root inside (0, 1]; ties broken by distance to the interval
    def key(z: complex) -> float:
        if z.imag != 0:
            return math.inf
        return 0.0 if 0 < z.real <= 1 else min(abs(z.real), abs(z.real - 1.0))

    i1 = min(range(3), key=key)
    z1 = roots[i1]
    rest = [roots[i] for i in range(3) if i != i1]
    rest.sort(key=lambda z: (z.real, -z.imag))
    if rest[0].imag != 0 and rest[0].imag < 0:
        rest.reverse()
    zs = (z1, rest[0], rest[1])
    degenerate = min(abs(zs[0] - zs[1]), abs(zs[0] - zs[2]), abs(zs[1] - zs[2])) < DEGENERACY_TOL
    a2, a1, a0 = numerator_poly(E, sigma, gamma)
    alphas = []
    for z in zs:
        dn = (3.0 * z + 2.0 * b) * z + c
        alphas.append(((a2 * z + a1) * z + a0) / dn if dn != 0 else complex(math.nan, math.nan))
    return CubicRootSet(zs, tuple(alphas), discriminant(E, sigma), degenerate)


def log_avg_resistance_roots(length: int, E: float, sigma: float, gamma=-1j, roots: CubicRootSet | None = None) -> float:
    """``log <1/T_N>`` as a constant plus three exponentials in ``N``."""
    g = _gamma(gamma)
    eta = g.imag
    if eta == 0:
        raise ZeroDivisionError("eta = 0: reservoir does not absorb")
    rs = roots if roots is not None else cubic_roots(E, sigma, g)
    if rs.degenerate:
        raise ConsistencyError("repeated root: partial fractions do not apply")
    logs = [np.log(complex(a)) - length * np.log(complex(z)) for a, z in zip(rs.alpha, rs.z) if a != 0]
    base = math.log(0.5 * 4 * eta * eta)
    m = max(base, *(v.real for v in logs))
    s = math.exp(base - m) + sum(np.exp(v - m) for v in logs)
    val = s.real
    if val <= 0:
        raise ConsistencyError("non-positive averaged resistance from roots")
    return m + math.log(val) - math.log(4 * eta * eta)


def log_avg_resistance_general(length: int, E: float, sigma: float, gamma=-1j) -> float:
    """``log <1/T_N>`` for arbitrary energy and identical end self-energies.

    Both the recursion and the root form are evaluated and must agree to a
    relative ``1e-8``. For repeated roots (clean limit) only the recursion is
    used.
    """
    rec = log_avg_resistance_recursion(length, E, sigma, gamma)
    rs = cubic_roots(E, sigma, gamma)
    if rs.degenerate:
        return rec
    root = log_avg_resistance_roots(length, E, sigma, gamma, rs)
    if abs(math.expm1(root - rec)) > CONSISTENCY_RTOL:
        raise ConsistencyError(f"recursion {rec!r} and root form {root!r} disagree (log values)")
    return rec


def avg_resistance_general(length: int, E: float, sigma: float, gamma=-1j) -> float:
    return _exp(log_avg_resistance_general(length, E, sigma, gamma))


def dominant_growth_rate(E: float, sigma: float) -> float:
    """Asymptotic ``d log<1/T_N> / dN``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return abs(math.log(cubic_roots(E, sigma).z1.real))


# -- decoherence statistics ----------------------------------------------------


@dataclass(frozen=True)
class SubsystemCensus:
    """Expected number ``u[j-1]`` of coherent segments of length ``j``."""

    length: int
    p: float
    u: np.ndarray

    @property
    def total_sites(self) -> float:
        return math.fsum(np.arange(1, self.length + 1) * self.u)

    @property
    def total_segments(self) -> float:
        return math.fsum(self.u)


def subsystem_counts(length: int, p: float) -> SubsystemCensus:
    if length < 1:
        raise ValueError("length must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    j = np.arange(1, length + 1, dtype=float)
    with np.errstate(divide="ignore"):
        # log1p keeps (1 - p)^j accurate for tiny p
        decay = np.exp((j - 1) * np.log1p(-p)) if p < 1 else (j == 1).astype(float)
    u = decay * (2.0 * p + (length - 1 - j) * p * p)
    u[-1] = decay[-1]
    return SubsystemCensus(length, p, u)


def critical_decoherence(sigma: float) -> float:
    """Degree of decoherence separating Ohmic from localized behaviour."""
    return -math.expm1(-xi_inverse(sigma))


def log_resistivity_random_finite(length: int, p: float, sigma: float) -> float:
    """``log rho`` for a finite chain: segment census times segment resistance, per site."""
    u = subsystem_counts(length, p).u
    logs = log_avg_resistance_band_center(np.arange(1, length + 1), sigma)
    keep = u > 0
    return float(logsumexp(np.asarray(logs)[keep], b=u[keep])) - math.log(length)


def resistivity_random_finite(length: int, p: float, sigma: float) -> float:
    return _exp(log_resistivity_random_finite(length, p, sigma))


@dataclass(frozen=True)
class ResistivityResult:
    """Either a finite Ohmic resistivity or an exponential growth rate in ``N``."""

    regime: Literal["ohmic", "localized"]
    value: float | None = None
    growth_rate: float | None = None

    @property
    def ohmic(self) -> bool:
        return self.regime == "ohmic"


def ohmic_denominator(p: float, sigma: float) -> float:
    s2 = sigma * sigma
    return p - s2 * (1.0 - p) / (2.0 - p)


def resistivity_series_form(p: float, sigma: float) -> float:
    """Infinite-chain resistivity from the summed geometric series (Ohmic side only)."""
    x = xi_inverse(sigma)
    ap, am = alpha_pm(x)
    q = 1.0 - p
    ex = math.exp(x)
    return 0.5 * p * p * (1.0 / p + ap * ex / (1.0 - ex * q) - am / ex / (1.0 + q / ex))


def resistivity_random(p: float, sigma: float) -> ResistivityResult:
    """Infinite-chain resistivity under random uncorrelated decoherence."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p <= critical_decoherence(sigma):
        return ResistivityResult("localized", growth_rate=xi_inverse(sigma) - ell_inverse(p))
    s2 = sigma * sigma
    return ResistivityResult("ohmic", value=p + 0.25 * s2 * p / ohmic_denominator(p, sigma))


def resistivity_homogeneous(ell_phi: float, sigma: float) -> float:
    """Resistivity when every coherent segment has length ``ell_phi``.

    A non-integer length is realised as a mix of the two neighbouring integer
    lengths with mean ``ell_phi``.
    """
    if ell_phi < 1:
        raise ValueError("ell_phi must be >= 1")
    lo = math.floor(ell_phi)
    frac = ell_phi - lo
    r = (1.0 - frac) * avg_resistance_band_center(lo, sigma)
    if frac > 0:
        r += frac * avg_resistance_band_center(lo + 1, sigma)
    return r / ell_phi


Classification = Literal["always_ohmic", "threshold", "always_localized"]


def classify_distribution(model: DecoherenceModel) -> Classification:
    return {
        "bernoulli": "threshold",
        "homogeneous": "always_ohmic",
        "cutoff": "always_ohmic",
        "power_law": "always_localized",
    }[model.kind]
