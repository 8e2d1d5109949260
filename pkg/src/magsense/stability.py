"""Quadrature drift matrix and Routh-Hurwitz stability.

The linearised fluctuations obey dV/dt = C V + noise with
V = (X_a, P_a, X_m, P_m). The characteristic polynomial of C is
lambda^4 + H3 lambda^3 + H2 lambda^2 + H1 lambda + H0, and the coefficients
are evaluated in units of kappa_m to keep the fourth-order products in
H0 well conditioned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, PreconditionError
from .model import SystemParams
from .modulation import EffectiveCouplings, ModulationSettings, effective_couplings

BOUNDARY_TOL = 1e-9

# quadrature ordering
XA, PA, XM, PM = range(4)


def drift_matrix(params: SystemParams, couplings: EffectiveCouplings) -> np.ndarray:
    """4x4 real drift matrix C in rad/s."""
    g1, g2 = couplings.g1, couplings.g2
    ka, km = params.kappa_a, params.kappa_m
    da, dm = params.delta_a, params.delta_m
    return np.array([
        [-ka / 2, da, 0.0, g2 - g1],
        [-da, -ka / 2, -(g1 + g2), 0.0],
        [0.0, g2 - g1, -km / 2, dm],
        [-(g1 + g2), 0.0, -dm, -km / 2],
    ])


def hurwitz_coefficients(ka, km, da, dm, g1, g2):
    """(H3, H2, H1, H0) for the given rates (any consistent unit)."""
    g1s, g2s = g1 * g1, g2 * g2
    h3 = ka + km
    h2 = 2 * (g2s - g1s) + da**2 + dm**2 + ka**2 / 4 + km**2 / 4 + ka * km
    h1 = (-g1s * ka + g2s * ka + dm**2 * ka - g1s * km + g2s * km + da**2 * km
          + ka**2 * km / 4 + ka * km**2 / 4)
    h0 = (g1s**2 - 2 * g1s * g2s + g2s**2 - 2 * g1s * da * dm - 2 * g2s * da * dm
          + da**2 * dm**2 + dm**2 * ka**2 / 4 - g1s * ka * km / 2 + g2s * ka * km / 2
          + da**2 * km**2 / 4 + ka**2 * km**2 / 16)
    return h3, h2, h1, h0


def eigen_stable(matrix: np.ndarray) -> float:
    """Largest real part of the eigenvalues of ``matrix``."""
    matrix = np.asarray(matrix, dtype=float)
    scale = np.max(np.abs(matrix))
    if scale == 0:
        return 0.0
    return float(np.max(np.linalg.eigvals(matrix / scale).real) * scale)


@dataclass(frozen=True)
class StabilityReport:
    """Routh-Hurwitz verdict.

    ``h`` holds (H3, H2, H1, H0) and ``criteria`` the Hurwitz determinants
    (H3, H3 H2 - H1, H3 H2 H1 - H1^2 - H3^2 H0, H0), both in units of
    kappa_m. ``max_eigen_real`` is in rad/s.
    """

    stable: bool
    marginal: bool
    h: tuple
    criteria: tuple
    max_eigen_real: float

    def describe(self) -> str:
        names = ("H3", "H3*H2-H1", "H3*H2*H1-(H1^2+H3^2*H0)", "H0")
        lines = [f"stable: {self.stable}" + (" (marginal)" if self.marginal else "")]
        lines += [f"  {n} = {v:.6g}" for n, v in zip(names, self.criteria)]
        lines.append(f"  max Re(eigenvalue) = {self.max_eigen_real:.6g} rad/s")
        return "\n".join(lines)


def routh_hurwitz(params: SystemParams, couplings: EffectiveCouplings) -> StabilityReport:
    km = params.kappa_m
    h = hurwitz_coefficients(params.kappa_a / km, 1.0, params.delta_a / km,
                             params.delta_m / km, couplings.g1 / km, couplings.g2 / km)
    h3, h2, h1, h0 = h
    criteria = (h3, h3 * h2 - h1, h3 * h2 * h1 - (h1 * h1 + h3 * h3 * h0), h0)
    stable = all(c > 0 for c in criteria)
    marginal = any(abs(c) < BOUNDARY_TOL for c in criteria)
    max_re = eigen_stable(drift_matrix(params, couplings) / km)
    if not marginal and abs(max_re) >= BOUNDARY_TOL and stable != (max_re < 0):
        raise InternalConsistencyError(
            f"Routh-Hurwitz verdict {stable} disagrees with eigenvalues (max Re = {max_re * km:.6g})"
        )
    return StabilityReport(stable=stable, marginal=marginal, h=h, criteria=criteria,
                           max_eigen_real=max_re * km)


MAP_PARAMETERS = ("lambda1", "lambda2", "delta_a", "delta_m", "g", "g1", "g2")


def _point(params, settings, assignment):
    sys_changes = {k: v for k, v in assignment.items() if k in ("delta_a", "delta_m", "g")}
    p = params.replace(**sys_changes) if sys_changes else params
    if "g1" in assignment or "g2" in assignment:
        base = effective_couplings(p.g, settings) if settings is not None else EffectiveCouplings(0.0, 0.0)
        return p, EffectiveCouplings(assignment.get("g1", base.g1), assignment.get("g2", base.g2))
    s = settings
    if "lambda1" in assignment or "lambda2" in assignment:
        from dataclasses import replace

        s = replace(settings, **{k: v for k, v in assignment.items() if k in ("lambda1", "lambda2")})
    return p, effective_couplings(p.g, s)


def stability_map(params: SystemParams, settings: ModulationSettings | None,
                  name1: str, values1, name2: str | None = None, values2=None) -> np.ndarray:
    """Element-wise Routh-Hurwitz verdicts over a one- or two-parameter grid.

    Returns a boolean array of shape (len(values1), len(values2)) (or
    (len(values1), 1) when only one axis is given). Rates are in rad/s.
    """
    values1 = list(values1)
    values2 = [None] if name2 is None else list(values2)
    if not values1 or not values2:
        raise PreconditionError("stability grid must be nonempty")
    for name in (name1, name2):
        if name is not None and name not in MAP_PARAMETERS:
            raise PreconditionError(f"cannot map over {name!r}; choose from {MAP_PARAMETERS}")
    out = np.zeros((len(values1), len(values2)), dtype=bool)
    for (i, v1), (j, v2) in itertools.product(enumerate(values1), enumerate(values2)):
        assignment = {name1: float(v1)}
        if name2 is not None:
            assignment[name2] = float(v2)
        p, c = _point(params, settings, assignment)
        out[i, j] = routh_hurwitz(p, c).stable
    return out
