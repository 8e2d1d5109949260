"""Effective couplings generated by the two-tone bias-field modulation.

Writing the modulated magnon phase with the Jacobi-Anger expansion turns
the bare coupling g(a + a^dag)(m + m^dag) into a comb of sidebands with
weights g J_m1(lambda1) J_m2(lambda2). Choosing omega1 = omega_d - omega_L
and omega2 = omega_L + omega_d makes exactly one term in each of the two
series static: the anti-rotating weight g1 = g J0(l1) J_-1(l2) and the
rotating weight g2 = g J0(l2) J_-1(l1). Everything else oscillates and is
dropped; :func:`rwa_residual` quantifies how safe that is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, PreconditionError

MAX_ARGUMENT = 30.0
MATCH_RTOL = 1e-9
LAMBDA_ADVISORY = 2.0
DEFAULT_TRUNCATION = 3

# below this argument the alternating power series loses < 1 digit
_SERIES_LIMIT = 4.0


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def _miller(n: int, x: float) -> float:
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised with
    # J_0 + 2 sum J_2k = 1
    top = max(n, int(x)) + 20 + int(math.sqrt(40.0 * max(n, x)))
    top += top % 2
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    wanted = 0.0
    for k in range(top, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            wanted *= 1e-250
        if k - 1 == n:
            wanted = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur  # J_0 term
    return wanted / norm


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind J_order(x) for |x| <= 30."""
    order = int(order)
    x = float(x)
    if not abs(x) <= MAX_ARGUMENT:
        raise DomainError(f"|x| must be <= {MAX_ARGUMENT}, got {x!r}")
    n = abs(order)
    sign = -1.0 if (order < 0 and n % 2) else 1.0
    if x < 0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return sign * (1.0 if n == 0 else 0.0)
    value = _series(n, x) if x <= _SERIES_LIMIT else _miller(n, x)
    return sign * value


@dataclass(frozen=True)
class ModulationSettings:
    """Two-tone bias modulation. ``omega1``/``omega2`` default to the
    frequency-matched values omega_d - omega_L and omega_L + omega_d."""

    lambda1: float
    lambda2: float
    omega_L: float
    omega_d: float
    omega1: float | None = None
    omega2: float | None = None
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise DomainError("modulation indices must be non-negative")
        if self.omega1 is None:
            object.__setattr__(self, "omega1", self.omega_d - self.omega_L)
        if self.omega2 is None:
            object.__setattr__(self, "omega2", self.omega_L + self.omega_d)

    def residuals(self) -> tuple[float, float]:
        return (self.omega1 - (self.omega_d - self.omega_L),
                self.omega2 - (self.omega_L + self.omega_d))

    def matched(self) -> bool:
        scale = abs(self.omega_L) + abs(self.omega_d)
        return all(abs(r) <= MATCH_RTOL * scale for r in self.residuals())

    def advisories(self) -> list[str]:
        out = []
        for name, lam in (("lambda1", self.lambda1), ("lambda2", self.lambda2)):
            if lam > LAMBDA_ADVISORY:
                out.append(f"{name}={lam:g} exceeds the practical range (<= {LAMBDA_ADVISORY:g})")
        if self.phi1 != 0.0 or self.phi2 != 0.0:
            out.append("nonzero modulation phases are not carried into the drift matrix")
        return out

    def as_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "omega_L": self.omega_L,
            "omega_d": self.omega_d,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "phi1": self.phi1,
            "phi2": self.phi2,
        }


def operating_modulation(system=None, lambda2_ratio: float = 0.95, lambda1: float = 0.16):
    """Modulation at lambda1 = 0.16, lambda2 = ratio * lambda1.

    Drive frequencies follow the system: omega_L = omega_a - delta_a and
    omega_d = omega_m - delta_m. With the resonant-cavity default
    (omega_a = omega_m, zero detunings) the two drives coincide, so omega1 = 0
    and :func:`rwa_residual` reports static spurious sidebands; pass a system
    with a distinct ``omega_a`` for a usable frequency plan.
    """
    if system is None:
        from .model import operating_point

        system = operating_point()
    return ModulationSettings(
        lambda1=lambda1,
        lambda2=lambda2_ratio * lambda1,
        omega_L=system.omega_a - system.delta_a,
        omega_d=system.omega_m - system.delta_m,
    )


@dataclass(frozen=True)
class EffectiveCouplings:
    """Signed anti-rotating (g1) and rotating (g2) couplings in rad/s."""

    g1: float
    g2: float

    def scaled(self, factor: float) -> "EffectiveCouplings":
        return EffectiveCouplings(self.g1 * factor, self.g2 * factor)


def effective_couplings(g: float, settings: ModulationSettings) -> EffectiveCouplings:
    if not settings.matched():
        r1, r2 = settings.residuals()
        raise PreconditionError(
            "modulation frequencies are not matched to the drives: "
            f"omega1 residual {r1:.6g} rad/s, omega2 residual {r2:.6g} rad/s"
        )
    if settings.phi1 != 0.0 or settings.phi2 != 0.0:
        raise PreconditionError(
            "effective couplings are defined for zero modulation phases only "
            f"(phi1={settings.phi1!r}, phi2={settings.phi2!r})"
        )
    l1, l2 = settings.lambda1, settings.lambda2
    g1 = g * bessel_j(0, l1) * bessel_j(-1, l2)
    g2 = g * bessel_j(0, l2) * bessel_j(-1, l1)
    return EffectiveCouplings(g1=g1, g2=g2)


def _orders(truncation: int):
    return range(-truncation, truncation + 1)


def coupling_series(g: float, settings: ModulationSettings, t, truncation: int = DEFAULT_TRUNCATION):
    """Time-dependent couplings g1(t), g2(t) from the truncated double sums.

    ``t`` may be a scalar or an array (seconds); the result has its shape.
    """
    if truncation < 0:
        raise DomainError("truncation must be >= 0")
    t = np.asarray(t, dtype=float)
    s = settings
    j1 = {m: bessel_j(m, s.lambda1) for m in _orders(truncation)}
    j2 = {m: bessel_j(m, s.lambda2) for m in _orders(truncation)}
    g1 = np.zeros(t.shape, dtype=complex)
    g2 = np.zeros(t.shape, dtype=complex)
    for m1 in _orders(truncation):
        for m2 in _orders(truncation):
            w = j1[m1] * j2[m2]
            if w == 0.0:
                continue
            f1 = s.omega_L + s.omega_d + m1 * s.omega1 + m2 * s.omega2
            g1 += w * np.exp(-1j * f1 * t - 1j * (m1 * s.phi1 + m2 * s.phi2))
            f2 = s.omega_L - s.omega_d - m1 * s.omega1 - m2 * s.omega2
            g2 += w * np.exp(-1j * f2 * t + 1j * (m1 * s.phi1 + m2 * s.phi2))
    return g * g1, g * g2


class SidebandTerm(NamedTuple):
    coupling: str  # "g1" or "g2"
    m1: int
    m2: int
    frequency: float  # rad/s
    amplitude: float  # rad/s, signed


@dataclass(frozen=True)
class RwaResidual:
    """Neglected modulation sidebands and the validity metric.

    ``metric`` is max |amplitude/frequency| over the sidebands (inf when a
    neglected sideband is static). The unmodulated carrier terms (m1 = m2 = 0)
    are the ordinary fast terms of the bare coupling and are reported
    separately through ``carrier_metric``.
    """

    terms: list
    metric: float
    carrier_metric: float
    violations: list

    @property
    def valid(self) -> bool:
        return self.metric < 1.0


def rwa_residual(g: float, settings: ModulationSettings,
                 truncation: int = DEFAULT_TRUNCATION) -> RwaResidual:
    if not settings.matched():
        r1, r2 = settings.residuals()
        raise PreconditionError(f"unmatched modulation frequencies (residuals {r1:.6g}, {r2:.6g})")
    s = settings
    static_tol = MATCH_RTOL * (abs(s.omega_L) + abs(s.omega_d))
    kept = {("g1", 0, -1), ("g2", -1, 0)}
    terms, violations = [], []
    metric = 0.0
    carrier = 0.0
    for m1 in _orders(truncation):
        for m2 in _orders(truncation):
            w = bessel_j(m1, s.lambda1) * bessel_j(m2, s.lambda2)
            for name, freq in (
                ("g1", s.omega_L + s.omega_d + m1 * s.omega1 + m2 * s.omega2),
                ("g2", s.omega_L - s.omega_d - m1 * s.omega1 - m2 * s.omega2),
            ):
                if (name, m1, m2) in kept:
                    continue
                amp = g * w
                if m1 == 0 and m2 == 0:
                    ratio = math.inf if abs(freq) <= static_tol else abs(amp / freq)
                    carrier = max(carrier, ratio)
                    continue
                if amp == 0.0:
                    continue
                term = SidebandTerm(name, m1, m2, freq, amp)
                terms.append(term)
                if abs(freq) <= static_tol:
                    violations.append(term)
                    metric = math.inf
                else:
                    metric = max(metric, abs(amp / freq))
    return RwaResidual(terms=terms, metric=metric, carrier_metric=carrier, violations=violations)
