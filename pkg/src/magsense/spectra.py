"""Input-output transfer functions and the phase-quadrature noise budget.

With the convention O(w) = (1/2pi) int dt O(t) e^{iwt}, the fluctuations
solve V(w) = (-iw - C)^{-1} B V_in(w) with B = diag(sqrt ka, sqrt ka,
sqrt km, sqrt km), and the detected quadrature is
P_out = sqrt(ka) P_a - p_in. The resolvent is the only source of truth for
M1..M4; :func:`transfer_closed_form_zero_detuning` is an independent
two-by-two reduction used to check it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InstabilityError, PreconditionError
from .model import NoiseOccupancies, SystemParams, thermal_occupancy
from .modulation import EffectiveCouplings
from .stability import PA, PM, XA, XM, drift_matrix, routh_hurwitz

SQL = 0.5


@dataclass(frozen=True)
class TransferFunctions:
    """M1..M4 at probe frequency ``omega`` (scalar or array, rad/s)."""

    omega: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m4: np.ndarray


def _require_stable(params, couplings):
    report = routh_hurwitz(params, couplings)
    if not report.stable:
        raise InstabilityError("parameters are dynamically unstable; spectra undefined\n"
                               + report.describe(), report)
    return report


def transfer_functions(omega, params: SystemParams, couplings: EffectiveCouplings,
                       check_stability: bool = True) -> TransferFunctions:
    if check_stability:
        _require_stable(params, couplings)
    km = params.kappa_m
    w = np.asarray(omega, dtype=float)
    c = drift_matrix(params, couplings) / km
    a = -1j * (w[..., None, None] / km) * np.eye(4) - c
    # only the P_a row of the resolvent is needed: solve a^T x = e_Pa
    e = np.zeros(w.shape + (4,), dtype=complex)
    e[..., PA] = 1.0
    try:
        row = np.linalg.solve(np.swapaxes(a, -1, -2), e[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise InstabilityError(f"singular resolvent: {exc}") from exc
    ka_n = params.kappa_a / km
    root = np.sqrt(ka_n)
    m1 = root * row[..., XM]
    m2 = root * row[..., PM]
    m3 = ka_n * row[..., XA]
    m4 = ka_n * row[..., PA] - 1.0
    return TransferFunctions(omega=w, m1=m1, m2=m2, m3=m3, m4=m4)


def susceptibility(omega, kappa):
    return 1.0 / (kappa / 2 - 1j * np.asarray(omega, dtype=float))


def transfer_closed_form_zero_detuning(omega, params: SystemParams, couplings: EffectiveCouplings):
    """(M1, M4) from the decoupled (P_a, X_m) block at zero detuning.

    M1 = -chi_a chi_m (g1+g2) sqrt(ka km) / D and M4 = (chi_a ka - D) / D
    with D = 1 + chi_a chi_m (g2^2 - g1^2).
    """
    if params.delta_a != 0 or params.delta_m != 0:
        raise PreconditionError("closed form requires delta_a = delta_m = 0")
    km = params.kappa_m
    w = np.asarray(omega, dtype=float) / km
    ka = params.kappa_a / km
    g1, g2 = couplings.g1 / km, couplings.g2 / km
    chi_a = susceptibility(w, ka)
    chi_m = susceptibility(w, 1.0)
    d = 1 + chi_a * chi_m * (g2 * g2 - g1 * g1)
    m1 = -chi_a * chi_m * (g1 + g2) * np.sqrt(ka) / d
    m4 = (chi_a * ka - d) / d
    return m1, m4


def output_spectrum(tf: TransferFunctions, occ: NoiseOccupancies, s_bex=0.0):
    """Symmetrised phase-quadrature output density Y_out.

    Includes |M2|^2 and |M3|^2 so that detuned operation keeps every noise
    channel; at zero detuning those vanish and the familiar two-term form
    remains.
    """
    if np.any(np.asarray(s_bex) < 0):
        raise PreconditionError("signal density must be non-negative")
    a2 = np.abs(tf.m1) ** 2
    return ((occ.n_a + 0.5) * (np.abs(tf.m3) ** 2 + np.abs(tf.m4) ** 2)
            + (occ.n_m + 0.5) * (a2 + np.abs(tf.m2) ** 2)
            + a2 * s_bex)


def response(omega, params: SystemParams, couplings: EffectiveCouplings):
    """Signal response R_B = |M1|^2."""
    return np.abs(transfer_functions(omega, params, couplings).m1) ** 2


def _additional_noise(tf, n_a):
    r = np.abs(tf.m1) ** 2
    if np.any(r == 0):
        raise PreconditionError("no signal response (|M1| = 0): additional noise undefined")
    return (n_a + 0.5) * np.abs(tf.m4) ** 2 / r


def additional_noise(omega, params: SystemParams, couplings: EffectiveCouplings, n_a=None):
    """Cavity-referred added noise (n_a + 1/2)|M4|^2 / |M1|^2.

    ``n_a`` defaults to the cavity occupancy at ``params.temperature``.
    """
    if n_a is None:
        n_a = thermal_occupancy(params.omega_a, params.temperature)
    return _additional_noise(transfer_functions(omega, params, couplings), n_a)


@dataclass(frozen=True)
class UltraStrongParams:
    """Reference scheme without modulation (counter-rotating coupling from
    ultra-strong interaction), parametrised by its cooperativity."""

    cooperativity: float
    kappa_a: float
    kappa_m: float
    n_a: float

    def __post_init__(self):
        if self.cooperativity < 1:
            raise PreconditionError("cooperativity must be >= 1")


def ultrastrong_reference(omega, ref: UltraStrongParams):
    """(R_B2, N_ad2) of the ultra-strong-coupling reference scheme at zero detuning."""
    w = np.asarray(omega, dtype=float)
    ka, km = ref.kappa_a, ref.kappa_m
    chi_m1 = 1.0 / (km / 2 + 1j * w)
    r_b2 = 4 * ka**2 * km**2 * ref.cooperativity * np.abs(chi_m1 / (2j * w + ka)) ** 2
    n_ad2 = np.abs(1 + 2 * ka / (2j * w + ka)) ** 2 * (ref.n_a + 0.5) / r_b2
    return r_b2, n_ad2


@dataclass
class SpectrumResult:
    omega: np.ndarray
    y_out: np.ndarray
    r_b: np.ndarray
    n_ad: np.ndarray
    below_sql: np.ndarray
    stable: bool
    metadata: dict = field(default_factory=dict)


def spectrum_scan(omega, params: SystemParams, couplings: EffectiveCouplings,
                  s_bex=0.0) -> SpectrumResult:
    """All figures of merit on an angular-frequency grid at ``params.temperature``."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.size == 0:
        raise PreconditionError("frequency grid is empty")
    report = _require_stable(params, couplings)
    occ = params.occupancies()
    tf = transfer_functions(w, params, couplings, check_stability=False)
    y = output_spectrum(tf, occ, s_bex)
    r_b = np.abs(tf.m1) ** 2
    n_ad = _additional_noise(tf, occ.n_a)
    flags = []
    if params.delta_a == 0 and params.delta_m == 0 and np.isclose(
            abs(couplings.g1), abs(couplings.g2), rtol=1e-12, atol=0):
        flags.append("unit-modulus M4 regime")
    meta = {
        "params": params.as_dict(),
        "couplings": {"g1": couplings.g1, "g2": couplings.g2},
        "occupancies": {"n_a": occ.n_a, "n_m": occ.n_m},
        "stability": {"stable": report.stable, "criteria": list(report.criteria),
                      "max_eigen_real": report.max_eigen_real},
        "flags": flags,
        "noise_classification": ("N_ad counts cavity quantum and thermal noise only; "
                                 "the magnon input term (n_m + 1/2)|M1|^2 is probe-referred "
                                 "and appears in Y_out but not in N_ad"),
    }
    return SpectrumResult(omega=w, y_out=y, r_b=r_b, n_ad=n_ad, below_sql=n_ad < SQL,
                          stable=report.stable, metadata=meta)
