"""Parameter bundles and quantitative anchors for the published figures.

Every figure shares the operating point omega_m/2pi = 37.5 GHz, g = 0.01
omega_m, kappa_m/2pi = 15 MHz, kappa_a/2pi = 33 MHz, lambda1 = 0.16, zero
detunings. Each ``fig*`` function returns the long-format table behind the
figure and a list of anchors comparing a number quoted with the figure to
the value computed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InstabilityError
from .model import SystemParams, operating_point, thermal_occupancy
from .modulation import EffectiveCouplings, effective_couplings, operating_modulation
from .spectra import SQL, UltraStrongParams, spectrum_scan, ultrastrong_reference
from .stability import routh_hurwitz

FIGURE_IDS = ("fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig7a", "fig7b")
RATIO_FAMILY = (0.0, 0.3, 0.6, 0.95)
# lambda2 = lambda1 is discussed alongside the caption family as the reference curve
RATIO_REFERENCE = 1.0
LAMBDA1 = 0.16
# anti-rotating-only coupling must stay below sqrt(ka km)/2 for stability;
# lambda1 = 0.16 would give |g1| ~ 2.7x that threshold
ANTI_ONLY_LAMBDA2 = 0.02
COOPERATIVITIES = (10.0, 100.0, 1000.0)
VALLEY_OMEGA = 0.33
VALLEY_WINDOW = (0.1, 1.0)


@dataclass
class Anchor:
    name: str
    published: str
    computed: float | str
    verdict: str
    note: str = ""

    def as_dict(self):
        return {"anchor": self.name, "published": self.published, "computed": self.computed,
                "verdict": self.verdict, "note": self.note}


@dataclass
class FigureData:
    figure: str
    columns: list
    rows: list
    anchors: list
    bundles: dict = field(default_factory=dict)


def verdict(ok: bool) -> str:
    return "MATCH" if ok else "DISCREPANCY"


def omega_grid(points: int = 201) -> np.ndarray:
    """0 followed by a log grid 1e-3..1e1 (units of kappa_m)."""
    return np.concatenate([[0.0], np.logspace(-3, 1, points)])


def bundle(ratio: float, temperature: float = 0.05, system: SystemParams | None = None):
    system = system or operating_point(temperature)
    mod = operating_modulation(system, lambda2_ratio=ratio, lambda1=LAMBDA1)
    return system, effective_couplings(system.g, mod), mod


def rotating_only(temperature=0.05):
    system = operating_point(temperature)
    mod = operating_modulation(system, lambda2_ratio=0.0, lambda1=LAMBDA1)
    return system, effective_couplings(system.g, mod), mod


def anti_rotating_only(temperature=0.05):
    system = operating_point(temperature)
    mod = operating_modulation(system, lambda2_ratio=0.0, lambda1=0.0)
    mod = type(mod)(lambda1=0.0, lambda2=ANTI_ONLY_LAMBDA2, omega_L=mod.omega_L, omega_d=mod.omega_d)
    return system, effective_couplings(system.g, mod), mod


def unmodulated(temperature=0.05):
    """Bare beam-splitter coupling g with no counter-rotating part."""
    system = operating_point(temperature)
    return system, EffectiveCouplings(0.0, system.g), None


def _describe(system, couplings, mod):
    report = routh_hurwitz(system, couplings)
    if not report.stable:
        raise InstabilityError(f"figure bundle unstable:\n{report.describe()}", report)
    return {
        "params": system.as_dict(),
        "modulation": None if mod is None else mod.as_dict(),
        "couplings": {"g1": couplings.g1, "g2": couplings.g2},
        "stable": report.stable,
    }


def _curves(labelled, w):
    rows, bundles, results = [], {}, {}
    for label, (system, couplings, mod) in labelled.items():
        bundles[label] = _describe(system, couplings, mod)
        res = spectrum_scan(w * system.kappa_m, system, couplings)
        results[label] = res
        for x, y, r, n in zip(w, res.y_out, res.r_b, res.n_ad):
            rows.append([label, float(x), float(y), float(r), float(n)])
    return rows, bundles, results


COLUMNS = ["curve", "omega_over_kappa_m", "Y_out", "R_B", "N_ad"]


def _fig2(which):
    w = omega_grid()
    labelled = {"rotating_only": rotating_only(), "anti_rotating_only": anti_rotating_only()}
    rows, bundles, res = _curves(labelled, w)
    rot, anti = res["rotating_only"], res["anti_rotating_only"]
    s, c, _ = labelled["rotating_only"]
    u = 4 * c.g2**2 / (s.kappa_a * s.kappa_m)
    anchors = []
    if which == "a":
        for label in labelled:
            peak = float(res[label].r_b.max())
            anchors.append(Anchor(f"max R_B, {label}", "curves are below 10^0", peak, verdict(peak <= 1.0)))
        bound = 4 * u / (1 + u) ** 2
        anchors.append(Anchor("rotating-only R_B(0) vs 4u/(1+u)^2", f"{bound:.6g}", float(rot.r_b[0]),
                              verdict(math.isclose(rot.r_b[0], bound, rel_tol=1e-9))))
        sa, ca, _ = labelled["anti_rotating_only"]
        v = 4 * ca.g1**2 / (sa.kappa_a * sa.kappa_m)
        anchors.append(Anchor("anti-rotating-only 4g1^2/(ka km)", "not stated", v, "INFO",
                              "anti-rotating-only R_B(0) = 4v/(1-v)^2 stays <= 1 only for v <= 3-2*sqrt(2)"))
    else:
        anchors.append(Anchor("N_ad(0): rotating-only < anti-rotating-only",
                              "rotating wave term suppresses more at resonance",
                              f"{rot.n_ad[0]:.6g} vs {anti.n_ad[0]:.6g}",
                              verdict(rot.n_ad[0] < anti.n_ad[0])))
    return FigureData(f"fig2{which}", COLUMNS, rows, anchors, bundles)


def _family(temperature):
    ratios = RATIO_FAMILY + (RATIO_REFERENCE,)
    return {f"lambda2_ratio={r:g}": bundle(r, temperature) for r in ratios}


def _local_minima(x, y):
    idx = [i for i in range(1, len(y) - 1) if y[i] < y[i - 1] and y[i] < y[i + 1]]
    return [(float(x[i]), float(y[i])) for i in idx]


def _fig3(which):
    w = omega_grid()
    labelled = _family(0.05)
    rows, bundles, res = _curves(labelled, w)
    key = {r: f"lambda2_ratio={r:g}" for r in RATIO_FAMILY + (RATIO_REFERENCE,)}
    anchors = []
    if which == "a":
        rb0 = [float(res[key[r]].r_b[0]) for r in RATIO_FAMILY]
        anchors.append(Anchor("R_B(0) increases with lambda2/lambda1 over 0, 0.3, 0.6, 0.95",
                              "response improved in the resonance region",
                              ", ".join(f"{v:.4g}" for v in rb0),
                              verdict(all(a < b for a, b in zip(rb0, rb0[1:])))))
        anchors.append(Anchor("R_B(0) at lambda2=0.95 lambda1 > 1", "signal amplification", rb0[-1],
                              verdict(rb0[-1] > 1)))
        anchors.append(Anchor("R_B(0) < 1 for lambda2=0 (rotating only)",
                              "single interaction cannot amplify", rb0[0], verdict(rb0[0] < 1)))
    else:
        best = res[key[0.95]].n_ad[0]
        equal = res[key[1.0]].n_ad[0]
        anchors.append(Anchor("N_ad(0): lambda2=0.95 lambda1 below lambda2=lambda1",
                              "best suppression at lambda2=0.95 lambda1, not lambda2=lambda1",
                              f"{best:.4g} vs {equal:.4g}", verdict(best < equal)))
        curve = res[key[0.95]]
        mins = [m for m in _local_minima(w, curve.n_ad) if VALLEY_WINDOW[0] <= m[0] <= VALLEY_WINDOW[1]]
        at = float(np.interp(VALLEY_OMEGA, w, curve.n_ad))
        ref_at = float(np.interp(VALLEY_OMEGA, w, res[key[1.0]].n_ad))
        monotone = bool(np.all(np.diff(curve.n_ad) >= 0))
        note = (f"N_ad(0.33 km) = {at:.4g} (lambda2=0.95 lambda1) vs {ref_at:.4g} (lambda2=lambda1), "
                f"ratio {ref_at / at:.3g}; N_ad(0) = {curve.n_ad[0]:.4g}; "
                f"curve monotone non-decreasing in omega: {monotone}; "
                f"local minima in [{VALLEY_WINDOW[0]}, {VALLEY_WINDOW[1]}] km: {mins or 'none'}")
        anchors.append(Anchor("valley of N_ad near omega = 0.33 kappa_m (lambda2=0.95 lambda1)",
                              "valley region at omega ~ 0.33 kappa_m, one order below lambda2=lambda1",
                              mins[0][0] if mins else "no valley", verdict(bool(mins)), note))
        for r in (0.3, 0.6):
            m = _local_minima(w, res[key[r]].n_ad)
            anchors.append(Anchor(f"suppression valley for lambda2={r} lambda1", "both have a suppression valley",
                                  m[0][0] if m else "no valley", verdict(bool(m)),
                                  f"minimum N_ad {m[0][1]:.4g}" if m else ""))
    return FigureData(f"fig3{which}", COLUMNS, rows, anchors, bundles)


def _fig4a():
    w = omega_grid()
    labelled = _family(300.0)
    rows, bundles, res = _curves(labelled, w)
    n0 = float(res["lambda2_ratio=0.95"].n_ad[0])
    anchors = [Anchor("N_ad(0) at 300 K, lambda2=0.95 lambda1 below SQL", "N_ad < 1/2 near omega = 0",
                      n0, verdict(n0 < SQL))]
    return FigureData("fig4a", COLUMNS, rows, anchors, bundles)


def temperature_grid(points: int = 60) -> np.ndarray:
    return np.logspace(np.log10(0.05), np.log10(300.0), points)


def _fig4b():
    temps = temperature_grid()
    rows, bundles, curves = [], {}, {}
    for r in RATIO_FAMILY + (RATIO_REFERENCE,):
        label = f"lambda2_ratio={r:g}"
        vals = []
        for t in temps:
            system, couplings, mod = bundle(r, float(t))
            vals.append(float(spectrum_scan([0.0], system, couplings).n_ad[0]))
        bundles[label] = _describe(*bundle(r, 0.05))
        curves[label] = np.array(vals)
        rows += [[label, float(t), v] for t, v in zip(temps, vals)]
    best = curves["lambda2_ratio=0.95"]
    anchors = [
        Anchor("N_ad(0) below SQL over 0.05-300 K (lambda2=0.95 lambda1)",
               "below the SQL in a wide temperature range", float(best.max()), verdict(best.max() < SQL)),
        Anchor("N_ad(0) monotone in T", "grows with temperature", "monotone" if np.all(np.diff(best) > 0) else "not monotone",
               verdict(bool(np.all(np.diff(best) > 0)))),
    ]
    return FigureData("fig4b", ["curve", "temperature_K", "N_ad_at_zero"], rows, anchors, bundles)


def _fig7a():
    w = omega_grid()
    labelled = {"with_modulation": bundle(0.95), "without_modulation": unmodulated()}
    rows, bundles, res = _curves(labelled, w)
    with_, without = res["with_modulation"].n_ad[0], res["without_modulation"].n_ad[0]
    orders = math.log10(without / with_)
    anchors = [Anchor("orders of magnitude of N_ad(0) improvement over the unmodulated scheme",
                      "nearly five orders of magnitude", orders, verdict(abs(orders - 5) <= 1.0),
                      f"N_ad(0) {with_:.4g} with vs {without:.4g} without; MATCH means within one order of 5")]
    return FigureData("fig7a", COLUMNS, rows, anchors, bundles)


def _fig7b():
    w = omega_grid()
    system, couplings, mod = bundle(0.95)
    bundles = {"this_scheme": _describe(system, couplings, mod)}
    ours = spectrum_scan(w * system.kappa_m, system, couplings)
    rows = [["this_scheme", float(x), float(r), float(n)] for x, r, n in zip(w, ours.r_b, ours.n_ad)]
    n_a = thermal_occupancy(system.omega_a, system.temperature)
    ref0 = {}
    for coop in COOPERATIVITIES:
        ref = UltraStrongParams(coop, system.kappa_a, system.kappa_m, n_a)
        r_b2, n_ad2 = ultrastrong_reference(w * system.kappa_m, ref)
        label = f"reference_C={coop:g}"
        bundles[label] = {"cooperativity": coop, "kappa_a": system.kappa_a, "kappa_m": system.kappa_m, "n_a": n_a}
        rows += [[label, float(x), float(r), float(n)] for x, r, n in zip(w, r_b2, n_ad2)]
        ref0[coop] = float(n_ad2[0])
    ours0 = float(ours.n_ad[0])
    anchors = [
        Anchor("this scheme N_ad(0)", "0.0004", ours0, verdict(abs(ours0 - 4e-4) <= 0.15 * 4.1e-4)),
        Anchor("green dashed line (C=100) N_ad2(0)", "0.0002", ref0[100.0], verdict(math.isclose(ref0[100.0], 2e-4, rel_tol=0.5)),
               f"closed form gives {ref0[100.0]:.4g} at C=100 and {ref0[1000.0]:.4g} at C=1000; "
               "the quoted 0.0002 fits C=1000"),
        Anchor("this scheme beats C=10 and C=100 at omega=0", "significantly stronger than C=10,100",
               f"{ours0:.3g} vs {ref0[10.0]:.3g}, {ref0[100.0]:.3g}", verdict(ours0 < ref0[100.0] < ref0[10.0])),
        Anchor("same order of magnitude as C=1000", "same order of magnitude under C=1000",
               ours0 / ref0[1000.0], verdict(0.1 < ours0 / ref0[1000.0] < 10)),
    ]
    return FigureData("fig7b", ["curve", "omega_over_kappa_m", "R_B", "N_ad"], rows, anchors, bundles)


def reproduce(figure: str) -> FigureData:
    builders = {
        "fig2a": lambda: _fig2("a"), "fig2b": lambda: _fig2("b"),
        "fig3a": lambda: _fig3("a"), "fig3b": lambda: _fig3("b"),
        "fig4a": _fig4a, "fig4b": _fig4b, "fig7a": _fig7a, "fig7b": _fig7b,
    }
    if figure not in builders:
        raise KeyError(figure)
    return builders[figure]()
