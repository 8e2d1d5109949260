"""Command-line front end.

    magsense spectrum   --config run.json [--outdir DIR]
    magsense sweep      --config run.json
    magsense stability  --config run.json
    magsense montecarlo --config run.json [--seed N]
    magsense reproduce  --figure fig3b

Exit codes: 0 success, 1 configuration error, 2 physics precondition
failure (instability, stiffness). Every CSV gets a JSON sidecar that can be
passed back as ``--config`` to regenerate it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ConfigError, InstabilityError, PreconditionError, StiffnessError
from .figures import FIGURE_IDS, reproduce
from .model import thermal_occupancy, validate_params
from .modulation import effective_couplings, rwa_residual
from .spectra import SQL, UltraStrongParams, spectrum_scan, transfer_functions, ultrastrong_reference
from .stability import drift_matrix, routh_hurwitz, stability_map
from .timedomain import estimate_psd, measure_tone_gain, simulate, steady_covariance

CONTRACT_BAND = (0.05, 5.0)


# -- output helpers ---------------------------------------------------------

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path, data):
    _atomic_write(path, json.dumps(_jsonable(data), indent=2, sort_keys=False) + "\n")


def sidecar(cfg: RunConfig | None, command: str, extra: dict) -> dict:
    """Resolved config plus a ``metadata`` block; valid input for ``--config``."""
    out = cfg.resolved() if cfg is not None else {}
    meta = {"command": command, "artifact": {"name": "magsense", "version": __version__}}
    meta.update(extra)
    out["metadata"] = meta
    return out


def _resolved_si(cfg: RunConfig):
    system = cfg.system()
    mod = cfg.modulation(system)
    info = {"system": system.as_dict(), "modulation": mod.as_dict(), "units": "rad/s, K"}
    flags = []
    if system.omega_a_assumed:
        flags.append("omega_a assumed equal to omega_m (only enters the cavity occupancy)")
    try:
        rwa = rwa_residual(system.g, mod)
        info["rwa_validity_metric"] = rwa.metric
        info["rwa_carrier_metric"] = rwa.carrier_metric
        if not math.isfinite(rwa.metric):
            flags.append("degenerate drive frequencies: static neglected sidebands "
                         "(omega_L == omega_d or commensurate tones); set system.omega_a or modulation drives")
    except PreconditionError as exc:
        info["rwa_validity_metric"] = str(exc)
    warnings = validate_params(system) + mod.advisories()
    return system, mod, info, flags, warnings


def _couplings(cfg, system, mod):
    try:
        return effective_couplings(system.g, mod)
    except PreconditionError as exc:
        raise ConfigError(f"modulation: {exc}") from None


def _outdir(cfg, args):
    return args.outdir or cfg.raw["output"]["directory"]


def _maybe_sidecar(cfg, path, meta):
    if cfg is None or cfg.raw["output"]["metadata"]:
        write_json(path, meta)


# -- commands ---------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, args) -> int:
    system, mod, si, flags, warnings = _resolved_si(cfg)
    couplings = _couplings(cfg, system, mod)
    w = cfg.omega_grid()
    res = spectrum_scan(w * system.kappa_m, system, couplings)
    outdir = _outdir(cfg, args)
    rows = [[x, y, r, n, b] for x, y, r, n, b in zip(w, res.y_out, res.r_b, res.n_ad, res.below_sql)]
    write_csv(os.path.join(outdir, "spectrum.csv"),
              ["omega_over_kappa_m", "Y_out", "R_B", "N_ad", "below_sql"], rows)
    meta = sidecar(cfg, "spectrum", {"resolved_si": si, "flags": flags + res.metadata["flags"],
                                     "warnings": warnings, "spectrum": res.metadata})
    _maybe_sidecar(cfg, os.path.join(outdir, "spectrum.json"), meta)
    print(f"wrote {len(rows)} rows to {os.path.join(outdir, 'spectrum.csv')}")
    return 0


def _sweep_rows(cfg, name, values, w):
    base_sys = cfg.system()
    rows = []
    for v in values:
        if name == "cooperativity":
            if v < 1:
                raise ConfigError(f"sweep.values: cooperativity must be >= 1, got {v!r}")
            n_a = thermal_occupancy(base_sys.omega_a, base_sys.temperature)
            ref = UltraStrongParams(v, base_sys.kappa_a, base_sys.kappa_m, n_a)
            r_b, n_ad = ultrastrong_reference(w * base_sys.kappa_m, ref)
            rows += [[v, x, True, r, n] for x, r, n in zip(w, r_b, n_ad)]
            continue
        if name == "temperature":
            system = base_sys.replace(temperature=v)
        elif name == "detuning":
            system = base_sys.replace(delta_a=2 * math.pi * v, delta_m=2 * math.pi * v)
        else:
            system = base_sys
        mod = cfg.modulation(base_sys)
        if name == "lambda2_ratio":
            from dataclasses import replace

            mod = replace(mod, lambda2=v * mod.lambda1)
        couplings = _couplings(cfg, system, mod)
        if not routh_hurwitz(system, couplings).stable:
            rows.append([v, "", False, "", ""])
            continue
        res = spectrum_scan(w * system.kappa_m, system, couplings)
        rows += [[v, x, True, r, n] for x, r, n in zip(w, res.r_b, res.n_ad)]
    return rows


def cmd_sweep(cfg: RunConfig, args) -> int:
    name, values = cfg.sweep()
    _, _, si, flags, warnings = _resolved_si(cfg)
    w = cfg.omega_grid()
    rows = _sweep_rows(cfg, name, values, w)
    outdir = _outdir(cfg, args)
    write_csv(os.path.join(outdir, "sweep.csv"),
              ["sweep_value", "omega_over_kappa_m", "stable", "R_B", "N_ad"], rows)
    meta = sidecar(cfg, "sweep", {"resolved_si": si, "flags": flags, "warnings": warnings,
                                  "sweep_parameter": name,
                                  "note": "cooperativity rows use the ultra-strong reference scheme (R_B2, N_ad2)"})
    _maybe_sidecar(cfg, os.path.join(outdir, "sweep.json"), meta)
    print(f"wrote {len(rows)} rows to {os.path.join(outdir, 'sweep.csv')}")
    return 0


_MAP_UNITS = {"delta_a": 2 * math.pi, "delta_m": 2 * math.pi, "g": 2 * math.pi,
              "g1": 2 * math.pi, "g2": 2 * math.pi}


def cmd_stability(cfg: RunConfig, args) -> int:
    system, mod, si, flags, warnings = _resolved_si(cfg)
    couplings = _couplings(cfg, system, mod)
    report = routh_hurwitz(system, couplings)
    print(report.describe())
    outdir = _outdir(cfg, args)
    smap = cfg.raw.get("stability_map")
    if smap:
        try:
            p1, v1 = smap["param1"], list(smap["values1"])
            p2, v2 = smap.get("param2"), smap.get("values2")
        except (KeyError, TypeError):
            raise ConfigError("stability_map: needs param1 and values1 (param2/values2 optional)") from None
        # rate-like axes are given as /2pi Hz
        s1 = [x * _MAP_UNITS.get(p1, 1.0) for x in v1]
        s2 = None if p2 is None else [x * _MAP_UNITS.get(p2, 1.0) for x in v2]
        try:
            grid = stability_map(system, mod, p1, s1, p2, s2)
        except PreconditionError as exc:
            raise ConfigError(f"stability_map: {exc}") from None
        rows = [[a, "" if p2 is None else b, grid[i, j]]
                for i, a in enumerate(v1) for j, b in enumerate(v2 if p2 is not None else [None])]
    else:
        rows = [["", "", report.stable]]
    write_csv(os.path.join(outdir, "stability.csv"), ["param1", "param2", "stable"], rows)
    meta = sidecar(cfg, "stability", {"resolved_si": si, "flags": flags, "warnings": warnings,
                                      "routh_hurwitz": {"stable": report.stable, "marginal": report.marginal,
                                                        "h": list(report.h), "criteria": list(report.criteria),
                                                        "max_eigen_real": report.max_eigen_real}})
    _maybe_sidecar(cfg, os.path.join(outdir, "stability.json"), meta)
    return 0


def cmd_montecarlo(cfg: RunConfig, args) -> int:
    if "montecarlo" not in cfg.raw:
        raise ConfigError("montecarlo: section required for this command")
    system, mod, si, flags, warnings = _resolved_si(cfg)
    couplings = _couplings(cfg, system, mod)
    sde = cfg.sde_config(system, couplings, seed_override=args.seed)
    occ = system.occupancies()
    sim = simulate(system, couplings, occ, sde)
    km = system.kappa_m
    w_max = max(cfg.raw["grid"]["omega_max_over_kappa_m"], CONTRACT_BAND[1])
    est = estimate_psd(sim.output, sim.dt, sde.segments, sde.segment_overlap, omega_max=w_max * km)
    keep = est.omega > 0
    w = est.omega[keep]
    analytic = spectrum_scan(w, system, couplings).y_out
    psd, se = est.psd[keep], est.stderr[keep]
    rows = [[x / km, p, e, a, p / a - 1] for x, p, e, a in zip(w, psd, se, analytic)]
    outdir = _outdir(cfg, args)
    write_csv(os.path.join(outdir, "montecarlo_psd.csv"),
              ["omega_over_kappa_m", "psd", "stderr", "Y_out_analytic", "rel_dev"], rows)
    band = (w >= CONTRACT_BAND[0] * km) & (w <= CONTRACT_BAND[1] * km)
    rms = float(np.sqrt(np.mean((psd[band] / analytic[band] - 1) ** 2)))
    lyap = steady_covariance(drift_matrix(system, couplings), occ, system.kappa_a, km)
    z = (sim.covariance - lyap) / sim.covariance_stderr
    summary = {
        "rms_relative_deviation": rms,
        "band_over_kappa_m": list(CONTRACT_BAND),
        "bins_in_band": int(band.sum()),
        "segments": est.segments,
        "nperseg": est.nperseg,
        "pass_rms_below_0.1": rms < 0.1,
        "covariance_lyapunov": lyap,
        "covariance_montecarlo": sim.covariance,
        "covariance_stderr": sim.covariance_stderr,
        "covariance_max_abs_z": float(np.max(np.abs(z[np.triu_indices(4)]))),
    }
    sig = cfg.signal()
    if sig is not None and sig.kind == "tone":
        gain = measure_tone_gain(system, couplings, sig.omega_s, sig.amplitude or 1.0, channel=sig.channel)
        tf = transfer_functions(sig.omega_s, system, couplings)
        ref = float(abs(tf.m1 if sig.channel == "x_m" else tf.m2))
        write_csv(os.path.join(outdir, "tone_gain.csv"),
                  ["omega_s_over_kappa_m", "channel", "gain", "abs_M_analytic", "rel_dev"],
                  [[sig.omega_s / km, sig.channel, gain, ref, gain / ref - 1 if ref else ""]])
        summary["tone_gain"] = {"gain": gain, "analytic": ref}
    write_json(os.path.join(outdir, "montecarlo_report.json"), summary)
    meta = sidecar(cfg, "montecarlo", {"resolved_si": si, "flags": flags, "warnings": warnings,
                                       "seed": int(sde.seed), "sde_config": sde.as_dict()})
    meta["montecarlo"]["seed"] = int(sde.seed)
    _maybe_sidecar(cfg, os.path.join(outdir, "montecarlo_psd.json"), meta)
    print(f"RMS deviation over [{CONTRACT_BAND[0]}, {CONTRACT_BAND[1]}] kappa_m: {rms:.4f}")
    return 0


def cmd_reproduce(cfg: RunConfig | None, args, figure: str) -> int:
    if figure not in FIGURE_IDS:
        raise ConfigError(f"unknown figure {figure!r}; choose from {', '.join(FIGURE_IDS)}")
    data = reproduce(figure)
    outdir = args.outdir or (cfg.raw["output"]["directory"] if cfg else "out")
    write_csv(os.path.join(outdir, f"{figure}.csv"), data.columns, data.rows)
    report = {"figure": figure, "anchors": [a.as_dict() for a in data.anchors]}
    write_json(os.path.join(outdir, f"{figure}_report.json"), report)
    write_json(os.path.join(outdir, f"{figure}.json"),
               sidecar(None, "reproduce", {"figure": figure, "bundles": data.bundles}))
    for a in data.anchors:
        print(f"[{a.verdict}] {a.name}: published {a.published!s}; computed {a.computed!s}")
    return 0


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="magsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "sweep", "stability", "montecarlo", "reproduce"):
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--outdir", metavar="PATH")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--figure", metavar="ID")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, meta = (RunConfig.load(args.config) if args.config else (None, {}))
        if args.command == "reproduce":
            figure = args.figure or meta.get("figure")
            if figure is None:
                raise ConfigError("reproduce needs --figure (or a reproduce sidecar as --config)")
            return cmd_reproduce(cfg, args, figure)
        if cfg is None:
            cfg = RunConfig.from_dict({})
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        handler = {"spectrum": cmd_spectrum, "sweep": cmd_sweep, "stability": cmd_stability,
                   "montecarlo": cmd_montecarlo}[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StiffnessError as exc:
        print(f"stiffness guard: {exc} (suggested dt = {exc.suggested_dt:.6g} s)", file=sys.stderr)
        return 2
    except InstabilityError as exc:
        print(f"unstable parameters: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
