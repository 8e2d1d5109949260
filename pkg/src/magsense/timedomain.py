"""Stochastic time-domain oracle for the linear quadrature dynamics.

The quantum Langevin equations are integrated as classical linear SDEs
dV = C V dt + B dW whose white-noise variances equal the symmetrised
quantum correlators, (n + 1/2) per quadrature. For Gaussian states and
symmetrised observables this reproduces the quantum spectra exactly, which
is all the oracle is used for.

The detected quadrature reuses the integrator's own p_a increments,
y_k = sqrt(ka) P_a[k+1] - dW_pa[k]/dt, so that the input-output interference
behind |M4| is present in the samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import fft, linalg, signal

from .errors import InstabilityError, PreconditionError, StiffnessError
from .model import NoiseOccupancies, SystemParams
from .modulation import EffectiveCouplings
from .stability import PA, PM, XM, drift_matrix, eigen_stable

STIFFNESS_LIMIT = 0.1
CHUNK = 1 << 20


@dataclass(frozen=True)
class SdeConfig:
    """Integration and spectral-averaging settings; times in seconds."""

    dt: float
    duration: float
    burn_in: float
    seed: int = 0
    segments: int = 256
    segment_overlap: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if not self.duration > self.burn_in >= 0:
            raise PreconditionError("need duration > burn_in >= 0")
        if self.segments < 1:
            raise PreconditionError("segments must be >= 1")
        if not 0 <= self.segment_overlap < 1:
            raise PreconditionError("segment_overlap must lie in [0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise PreconditionError("seed must be an unsigned 64-bit integer")

    @classmethod
    def default(cls, params: SystemParams, couplings: EffectiveCouplings, seed: int = 0,
                **overrides) -> "SdeConfig":
        """dt = 1e-3/max|C|, 2e4/kappa_m of data, 256 half-overlapping segments."""
        c = drift_matrix(params, couplings)
        decay = -eigen_stable(c)
        burn_in = 30.0 / decay if decay > 0 else 30.0 / params.kappa_m
        kw = dict(dt=1e-3 / np.max(np.abs(c)), duration=burn_in + 2e4 / params.kappa_m,
                  burn_in=burn_in, seed=seed)
        kw.update(overrides)
        return cls(**kw)

    def as_dict(self) -> dict:
        return {"dt": self.dt, "duration": self.duration, "burn_in": self.burn_in,
                "seed": int(self.seed), "segments": self.segments,
                "segment_overlap": self.segment_overlap}


@dataclass(frozen=True)
class SignalSpec:
    """Quadrature drive u(t) = amplitude cos(omega_s t) added to the magnon input."""

    kind: str = "none"
    amplitude: float = 0.0
    omega_s: float = 0.0
    channel: str = "x_m"

    def __post_init__(self):
        if self.kind not in ("none", "tone"):
            raise PreconditionError(f"unknown signal kind {self.kind!r}")
        if self.channel not in ("x_m", "p_m"):
            raise PreconditionError(f"unknown signal channel {self.channel!r}")
        if self.amplitude < 0:
            raise PreconditionError("signal amplitude must be non-negative")


@dataclass
class SimulationResult:
    output: np.ndarray  # delta P_a^out samples after burn-in
    dt: float
    t0: float
    covariance: np.ndarray  # time-averaged <V V^T> after burn-in
    covariance_stderr: np.ndarray  # batch-means standard error
    batches: int


@dataclass
class PsdEstimate:
    omega: np.ndarray
    psd: np.ndarray
    stderr: np.ndarray
    segments: int
    nperseg: int


@numba.njit(cache=True)
def _em_chunk(a, b, state, xi, drive, chan, sqrt_ka, inv_dt, out, acc):
    n = xi.shape[0]
    v = state.copy()
    new = np.empty(4)
    for k in range(n):
        for i in range(4):
            s = b[i] * xi[k, i]
            for j in range(4):
                s += a[i, j] * v[j]
            new[i] = s
        if chan >= 0:
            new[chan] += b[chan] * drive[k]
        for i in range(4):
            v[i] = new[i]
        out[k] = sqrt_ka * v[1] - xi[k, 1] * inv_dt
        for i in range(4):
            for j in range(4):
                acc[i, j] += v[i] * v[j]
    return v


def _check_stiffness(c, dt):
    worst = dt * np.max(np.abs(c))
    if worst >= STIFFNESS_LIMIT:
        suggested = 1e-3 / np.max(np.abs(c))
        raise StiffnessError(
            f"dt*max|C| = {worst:.3g} >= {STIFFNESS_LIMIT}; try dt = {suggested:.3g} s", suggested)


def simulate(params: SystemParams, couplings: EffectiveCouplings, occupancies: NoiseOccupancies | None,
             config: SdeConfig, signal_spec: SignalSpec | None = None) -> SimulationResult:
    """Euler-Maruyama integration from the zero state.

    ``occupancies=None`` switches the noise off entirely (deterministic
    response runs).
    """
    c = drift_matrix(params, couplings)
    if eigen_stable(c) >= 0:
        raise InstabilityError("cannot simulate an unstable system")
    dt = config.dt
    _check_stiffness(c, dt)
    sig = signal_spec or SignalSpec()
    if sig.kind == "tone" and not sig.omega_s < math.pi / dt:
        raise PreconditionError(f"tone frequency {sig.omega_s:.6g} rad/s is above Nyquist {math.pi / dt:.6g}")

    a = np.eye(4) + c * dt
    ka, km = params.kappa_a, params.kappa_m
    b = np.sqrt(np.array([ka, ka, km, km]))
    if occupancies is None:
        sigma = np.zeros(4)
    else:
        var = np.array([occupancies.n_a, occupancies.n_a, occupancies.n_m, occupancies.n_m]) + 0.5
        sigma = np.sqrt(var * dt)
    chan = -1
    if sig.kind == "tone" and sig.amplitude > 0:
        chan = XM if sig.channel == "x_m" else PM

    rng = np.random.Generator(np.random.PCG64(int(config.seed)))
    n_burn = int(round(config.burn_in / dt))
    n_total = int(round(config.duration / dt))
    n_rec = n_total - n_burn
    out = np.empty(n_rec)
    state = np.zeros(4)
    batch_means = []
    scratch = np.empty(CHUNK)
    step = 0
    while step < n_total:
        n = min(CHUNK, n_total - step)
        xi = rng.standard_normal((n, 4)) * sigma if occupancies is not None else np.zeros((n, 4))
        if chan >= 0:
            t = (step + np.arange(n)) * dt
            drive = sig.amplitude * np.cos(sig.omega_s * t) * dt
        else:
            drive = np.zeros(1)
        # split the chunk at the burn-in boundary
        cut = min(max(n_burn - step, 0), n)
        if cut:
            acc = np.zeros((4, 4))
            state = _em_chunk(a, b, state, xi[:cut], drive[:cut] if chan >= 0 else drive,
                              chan, math.sqrt(ka), 1.0 / dt, scratch[:cut], acc)
        if cut < n:
            lo = step + cut - n_burn
            acc = np.zeros((4, 4))
            state = _em_chunk(a, b, state, xi[cut:], drive[cut:] if chan >= 0 else drive,
                              chan, math.sqrt(ka), 1.0 / dt, out[lo:lo + n - cut], acc)
            if n - cut == CHUNK:
                batch_means.append(acc / CHUNK)
        step += n
    if batch_means:
        stack = np.array(batch_means)
        cov = stack.mean(axis=0)
        se = stack.std(axis=0, ddof=1) / np.sqrt(len(stack)) if len(stack) > 1 else np.full((4, 4), np.nan)
    else:
        cov = np.full((4, 4), np.nan)
        se = np.full((4, 4), np.nan)
    return SimulationResult(output=out, dt=dt, t0=n_burn * dt, covariance=cov,
                            covariance_stderr=se, batches=len(batch_means))


def segment_layout(n: int, segments: int, overlap: float):
    """(nperseg, hop) so that ``segments`` windows with ``overlap`` span n samples."""
    nperseg = int(n // (1 + (segments - 1) * (1 - overlap)))
    if nperseg > 64:
        nperseg = fft.prev_fast_len(nperseg, real=True)
    hop = max(1, int(round(nperseg * (1 - overlap))))
    return nperseg, hop


def estimate_psd(series, dt: float, segments: int = 256, overlap: float = 0.5,
                 omega_max: float | None = None) -> PsdEstimate:
    """Hann-windowed, segment-averaged periodogram (two-sided density).

    Normalised so that samples of a white process with density S (sample
    variance S/dt) give a flat estimate S, the same convention as Y_out.
    The standard error is the inter-segment scatter over sqrt(segments).
    """
    x = np.asarray(series, dtype=float)
    nperseg, hop = segment_layout(x.size, segments, overlap)
    if segments < 1 or nperseg < 16:
        raise PreconditionError(f"series of {x.size} samples is too short for {segments} segments")
    window = signal.get_window("hann", nperseg)
    scale = dt / np.sum(window**2)
    omega = 2 * np.pi * np.fft.rfftfreq(nperseg, dt)
    keep = omega.size if omega_max is None else int(np.searchsorted(omega, omega_max, side="right"))
    total = np.zeros(keep)
    total_sq = np.zeros(keep)
    for k in range(segments):
        seg = x[k * hop:k * hop + nperseg]
        p = scale * np.abs(fft.rfft(seg * window)[:keep]) ** 2
        total += p
        total_sq += p * p
    mean = total / segments
    if segments > 1:
        var = np.maximum(total_sq / segments - mean**2, 0.0) * segments / (segments - 1)
        stderr = np.sqrt(var / segments)
    else:
        stderr = np.full(keep, np.nan)
    return PsdEstimate(omega=omega[:keep], psd=mean, stderr=stderr, segments=segments, nperseg=nperseg)


def steady_covariance(matrix, occupancies: NoiseOccupancies, kappa_a: float, kappa_m: float) -> np.ndarray:
    """Solve C V + V C^T + D = 0 with D = diag(ka(na+1/2), ka(na+1/2), km(nm+1/2), km(nm+1/2))."""
    c = np.asarray(matrix, dtype=float)
    if eigen_stable(c) >= 0:
        raise InstabilityError("no steady state: drift matrix is not Hurwitz")
    d = np.diag([kappa_a * (occupancies.n_a + 0.5)] * 2 + [kappa_m * (occupancies.n_m + 0.5)] * 2)
    cn, dn = c / kappa_m, d / kappa_m
    v = linalg.solve_continuous_lyapunov(cn, -dn)
    v = 0.5 * (v + v.T)
    resid = np.linalg.norm(cn @ v + v @ cn.T + dn)
    if resid > 1e-10 * np.linalg.norm(dn):
        raise InstabilityError(f"Lyapunov residual {resid:.3g} too large")
    return v


def fit_tone_amplitude(y, dt: float, t0: float, omega_s: float) -> float:
    """Least-squares amplitude of a cos/sin pair (plus offset) at omega_s."""
    gram = np.zeros((3, 3))
    rhs = np.zeros(3)
    for lo in range(0, y.size, CHUNK):
        t = t0 + np.arange(lo, min(lo + CHUNK, y.size)) * dt
        basis = np.stack([np.cos(omega_s * t), np.sin(omega_s * t), np.ones(t.size)])
        gram += basis @ basis.T
        rhs += basis @ y[lo:lo + t.size]
    coef = np.linalg.solve(gram, rhs)
    return float(math.hypot(coef[0], coef[1]))


def measure_tone_gain(params: SystemParams, couplings: EffectiveCouplings, omega_s: float,
                      amplitude: float = 1.0, config: SdeConfig | None = None,
                      periods: int = 10, channel: str = "x_m") -> float:
    """Noise-free output/input amplitude ratio for a tone on the magnon input.

    Tracks |M1(omega_s)| (or |M2| on the p_m channel).
    """
    if not amplitude > 0:
        raise PreconditionError("tone amplitude must be positive")
    if not omega_s > 0:
        raise PreconditionError("tone frequency must be positive")
    if config is None:
        base = SdeConfig.default(params, couplings)
        record = max(periods * 2 * math.pi / omega_s, 200.0 / params.kappa_m)
        config = SdeConfig(dt=base.dt, burn_in=base.burn_in, duration=base.burn_in + record)
    if not omega_s < math.pi / config.dt:
        raise PreconditionError("tone frequency above Nyquist")
    tone = SignalSpec(kind="tone", amplitude=amplitude, omega_s=omega_s, channel=channel)
    res = simulate(params, couplings, None, config, tone)
    return fit_tone_amplitude(res.output, res.dt, res.t0, omega_s) / amplitude
