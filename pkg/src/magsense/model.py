"""Physical parameters, thermal occupancies and laboratory calibration.

All frequencies and rates are angular (rad/s). Conversion from the
``/2pi`` values quoted in the literature happens once, at the config
boundary (see :mod:`magsense.config`), via :func:`hz`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J/K
TWO_PI = 2.0 * math.pi

# gamma / 2pi = 28 GHz/T
GYROMAGNETIC_RATIO = TWO_PI * 28e9

# exp(700) is close to the float64 ceiling
_EXPONENT_CUTOFF = 700.0

# g << omega is read as g below this fraction of omega
WEAK_RATIO = 0.1


def hz(value_over_2pi: float) -> float:
    """Convert an ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * float(value_over_2pi)


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein occupancy 1/(exp(hbar*omega/kB*T) - 1)."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature!r}")
    if temperature == 0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > _EXPONENT_CUTOFF:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class NoiseOccupancies:
    n_a: float
    n_m: float

    def __post_init__(self):
        if self.n_a < 0 or self.n_m < 0:
            raise DomainError("occupancies must be non-negative")


@dataclass(frozen=True)
class SystemParams:
    """Cavity, magnon and bath parameters (angular units).

    ``omega_a`` defaults to ``omega_m`` (resonant cavity). It only enters the
    cavity thermal occupancy; the dynamics depend on the detunings.
    """

    omega_m: float
    kappa_a: float
    kappa_m: float
    g: float
    delta_a: float = 0.0
    delta_m: float = 0.0
    temperature: float = 0.0
    omega_a: float | None = None
    omega_a_assumed: bool = field(default=False, init=False, compare=False)

    def __post_init__(self):
        if self.omega_a is None:
            object.__setattr__(self, "omega_a", self.omega_m)
            object.__setattr__(self, "omega_a_assumed", True)
        if not self.kappa_a > 0 or not self.kappa_m > 0:
            raise DomainError("kappa_a and kappa_m must be positive")
        if self.g < 0:
            raise DomainError("g must be non-negative")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")
        if not self.omega_m > 0 or not self.omega_a > 0:
            raise DomainError("mode frequencies must be positive")

    def occupancies(self) -> NoiseOccupancies:
        return NoiseOccupancies(
            n_a=thermal_occupancy(self.omega_a, self.temperature),
            n_m=thermal_occupancy(self.omega_m, self.temperature),
        )

    def replace(self, **changes) -> "SystemParams":
        fields = dict(
            omega_m=self.omega_m,
            kappa_a=self.kappa_a,
            kappa_m=self.kappa_m,
            g=self.g,
            delta_a=self.delta_a,
            delta_m=self.delta_m,
            temperature=self.temperature,
            omega_a=None if self.omega_a_assumed else self.omega_a,
        )
        fields.update(changes)
        return SystemParams(**fields)

    def as_dict(self) -> dict:
        return {
            "omega_m": self.omega_m,
            "omega_a": self.omega_a,
            "omega_a_assumed_equal_omega_m": self.omega_a_assumed,
            "delta_a": self.delta_a,
            "delta_m": self.delta_m,
            "kappa_a": self.kappa_a,
            "kappa_m": self.kappa_m,
            "g": self.g,
            "temperature": self.temperature,
        }


def operating_point(temperature: float = 0.05, omega_a: float | None = None) -> SystemParams:
    """Operating point: omega_m/2pi = 37.5 GHz, g = 0.01 omega_m,
    kappa_m/2pi = 15 MHz, kappa_a/2pi = 33 MHz, zero detunings."""
    omega_m = hz(37.5e9)
    return SystemParams(
        omega_m=omega_m,
        kappa_a=hz(33e6),
        kappa_m=hz(15e6),
        g=1e-2 * omega_m,
        temperature=temperature,
        omega_a=omega_a,
    )


@dataclass(frozen=True)
class ProbeCoupling:
    """Spin-ensemble probe coupling, epsilon = (gamma/2) sqrt(5 N)."""

    gamma: float
    n_spins: float
    B0: float | None = None
    B_d: float | None = None
    P_L: float | None = None
    omega_L: float | None = None

    @property
    def epsilon(self) -> float:
        return 0.5 * self.gamma * math.sqrt(5.0 * self.n_spins)


def calibrate_couplings(gamma, n_spins, B0, B_d, P_L, omega_L, kappa_a):
    """Map laboratory quantities to model rates.

    Returns ``(g, E_d, E_L, epsilon)`` with g = (gamma B0/2) sqrt(5N),
    E_d = (gamma B_d/4) sqrt(5N), E_L = sqrt(2 P_L kappa_a / (hbar omega_L))
    and epsilon = (gamma/2) sqrt(5N).
    """
    for name, value in (("gamma", gamma), ("n_spins", n_spins), ("B0", B0),
                        ("B_d", B_d), ("P_L", P_L), ("omega_L", omega_L),
                        ("kappa_a", kappa_a)):
        if value < 0:
            raise DomainError(f"{name} must be non-negative, got {value!r}")
    root = math.sqrt(5.0 * n_spins)
    epsilon = 0.5 * gamma * root
    g = epsilon * B0
    E_d = 0.5 * epsilon * B_d
    if P_L > 0:
        if not omega_L > 0:
            raise DomainError("omega_L must be positive when P_L > 0")
        E_L = math.sqrt(2.0 * P_L * kappa_a / (HBAR * omega_L))
    else:
        E_L = 0.0
    return g, E_d, E_L, epsilon


def field_for_coupling(g: float, gamma: float, n_spins: float) -> float:
    """Microwave field amplitude B0 that produces coupling ``g``."""
    if g < 0 or gamma <= 0 or n_spins <= 0:
        raise DomainError("need g >= 0 and positive gamma, n_spins")
    return 2.0 * g / (gamma * math.sqrt(5.0 * n_spins))


def validate_params(params: SystemParams) -> list[str]:
    """Advisory regime checks; an empty list means all pass."""
    warnings = []
    if not (params.kappa_a < params.g and params.kappa_m < params.g):
        warnings.append(
            f"not in strong coupling regime: need kappa_a, kappa_m < g "
            f"(kappa_a={params.kappa_a:.4g}, kappa_m={params.kappa_m:.4g}, g={params.g:.4g})"
        )
    if not params.g < WEAK_RATIO * params.omega_m:
        warnings.append(f"g not << omega_m (g/omega_m = {params.g / params.omega_m:.3g})")
    if not params.g < WEAK_RATIO * params.omega_a:
        warnings.append(f"g not << omega_a (g/omega_a = {params.g / params.omega_a:.3g})")
    return warnings
