"""Compare the stochastic oracle against the analytic spectrum for several seeds.

Prints, per seed, the PSD RMS deviation over [0.05, 5] kappa_m and the
largest covariance z-score against the Lyapunov solution.
"""
import argparse

import numpy as np

from magsense.model import operating_point
from magsense.modulation import effective_couplings, operating_modulation
from magsense.spectra import spectrum_scan
from magsense.stability import drift_matrix
from magsense.timedomain import SdeConfig, estimate_psd, simulate, steady_covariance


def run(seed, ratio, temperature):
    system = operating_point(temperature)
    cp = effective_couplings(system.g, operating_modulation(system, lambda2_ratio=ratio))
    km = system.kappa_m
    config = SdeConfig.default(system, cp, seed=seed)
    sim = simulate(system, cp, system.occupancies(), config)
    est = estimate_psd(sim.output, sim.dt, config.segments, config.segment_overlap, omega_max=6 * km)
    band = (est.omega >= 0.05 * km) & (est.omega <= 5 * km)
    y = spectrum_scan(est.omega[band], system, cp).y_out
    rms = np.sqrt(np.mean((est.psd[band] / y - 1) ** 2))
    v = steady_covariance(drift_matrix(system, cp), system.occupancies(), system.kappa_a, km)
    z = np.abs(sim.covariance - v) / sim.covariance_stderr
    return rms, z.max()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=[42, 43, 44])
    parser.add_argument("--ratio", type=float, default=0.95, help="lambda2 / lambda1")
    parser.add_argument("--temperature", type=float, default=0.05, help="K")
    args = parser.parse_args()
    for seed in args.seeds:
        rms, z = run(seed, args.ratio, args.temperature)
        print(f"seed {seed}: PSD RMS deviation {rms:.4f}, covariance max |z| {z:.2f}")


if __name__ == "__main__":
    main()
