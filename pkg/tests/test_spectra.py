import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magsense.errors import InstabilityError, PreconditionError
from magsense.model import NoiseOccupancies, operating_point, thermal_occupancy
from magsense.modulation import EffectiveCouplings, effective_couplings, operating_modulation
from magsense.spectra import (UltraStrongParams, additional_noise, output_spectrum, response,
                              spectrum_scan, transfer_closed_form_zero_detuning, transfer_functions,
                              ultrastrong_reference)

SYS = operating_point()
KA, KM = SYS.kappa_a, SYS.kappa_m
W = np.linspace(-5, 5, 101) * KM


def couplings(ratio, system=SYS):
    return effective_couplings(system.g, operating_modulation(system, lambda2_ratio=ratio))


def test_empty_cavity_reflection():
    tf = transfer_functions(0.0, SYS, EffectiveCouplings(0.0, 0.0))
    assert tf.m4 == pytest.approx(1.0)
    assert tf.m1 == 0 and tf.m2 == 0 and tf.m3 == 0


def test_operating_point(defaults):
    _, cp, _ = defaults
    tf = transfer_functions(0.0, SYS, cp)
    assert abs(tf.m1) ** 2 == pytest.approx(37.56, rel=1e-3)
    assert abs(tf.m4) ** 2 == pytest.approx(0.0310, abs=1e-4)
    m1, m4 = transfer_closed_form_zero_detuning(0.0, SYS, cp)
    assert tf.m1 == pytest.approx(m1, rel=1e-12)
    assert tf.m4 == pytest.approx(m4, rel=1e-12)


def test_hand_arithmetic_at_zero_frequency(defaults):
    # chi_a = 2/ka, chi_m = 2/km at omega = 0
    _, cp, _ = defaults
    d = 1 + 4 * (cp.g2**2 - cp.g1**2) / (KA * KM)
    m1 = -4 * (cp.g1 + cp.g2) / np.sqrt(KA * KM) / d
    assert response(0.0, SYS, cp) == pytest.approx(m1**2, rel=1e-12)


@settings(max_examples=60)
@given(st.floats(0, 1.0), st.floats(-50, 50))
def test_block_decoupling(ratio, w):
    tf = transfer_functions(w * KM, SYS, couplings(ratio))
    assert abs(tf.m2) < 1e-14 and abs(tf.m3) < 1e-14


@settings(max_examples=60)
@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(-3, 3), st.floats(-3, 3))
def test_closed_form_matches_resolvent(ka, km, g1, g2):
    p = SYS.replace(kappa_a=ka * KM, kappa_m=km * KM)
    cp = EffectiveCouplings(g1 * KM, g2 * KM)
    try:
        tf = transfer_functions(W, p, cp)
    except InstabilityError:
        return
    m1, m4 = transfer_closed_form_zero_detuning(W, p, cp)
    assert np.allclose(tf.m1, m1, rtol=1e-10, atol=1e-12)
    assert np.allclose(tf.m4, m4, rtol=1e-10, atol=1e-12)


def test_high_frequency_limit(defaults):
    tf = transfer_functions(1e6 * KM, SYS, defaults[1])
    assert abs(tf.m1) < 1e-5 and tf.m4 == pytest.approx(-1.0, abs=1e-5)


@given(st.floats(0, 1.5))
def test_equal_indices_unit_modulus(lam):
    cp = effective_couplings(SYS.g, operating_modulation(SYS, 1.0, lam))
    tf = transfer_functions(W, SYS, cp)
    assert np.allclose(np.abs(tf.m4), 1.0, atol=1e-12)


def test_conjugate_symmetry(defaults):
    tf = transfer_functions(W, SYS, defaults[1])
    for m in (tf.m1, tf.m4):
        assert np.allclose(m[::-1], np.conj(m), rtol=1e-12)


def test_vacuum_output():
    tf = transfer_functions(W, SYS, EffectiveCouplings(0.0, 0.0))
    assert np.allclose(output_spectrum(tf, NoiseOccupancies(0.0, 0.0)), 0.5)


def test_zero_detuning_output_is_two_term(defaults):
    tf = transfer_functions(W, SYS, defaults[1])
    occ = NoiseOccupancies(3.0, 7.0)
    two_term = 3.5 * np.abs(tf.m4) ** 2 + 7.5 * np.abs(tf.m1) ** 2
    assert np.allclose(output_spectrum(tf, occ), two_term, rtol=1e-13)


@given(st.floats(0, 100))
def test_signal_enters_linearly(s):
    tf = transfer_functions(W, SYS, couplings(0.95))
    occ = NoiseOccupancies(0.1, 0.2)
    diff = output_spectrum(tf, occ, 2 * s) - output_spectrum(tf, occ, s)
    assert np.allclose(diff, np.abs(tf.m1) ** 2 * s, rtol=1e-9, atol=1e-9)


def test_negative_signal_rejected(defaults):
    tf = transfer_functions(0.0, SYS, defaults[1])
    with pytest.raises(PreconditionError):
        output_spectrum(tf, NoiseOccupancies(0, 0), -1.0)


@settings(max_examples=100)
@given(st.floats(0, 20))
def test_rotating_only_response_bound(g2):
    u = 4 * g2**2
    cp = EffectiveCouplings(0.0, g2 * np.sqrt(KA * KM))
    assert response(0.0, SYS, cp) == pytest.approx(4 * u / (1 + u) ** 2, rel=1e-10, abs=1e-300)
    assert response(0.0, SYS, cp) <= 1 + 1e-12


def test_no_coupling_no_response():
    assert response(W, SYS.replace(g=0.0), EffectiveCouplings(0.0, 0.0)).max() == 0.0
    with pytest.raises(PreconditionError):
        additional_noise(0.0, SYS, EffectiveCouplings(0.0, 0.0))


def test_noise_values():
    assert additional_noise(0.0, SYS, couplings(0.95)) == pytest.approx(4.1e-4, rel=0.02)
    assert additional_noise(0.0, SYS, couplings(1.0)) == pytest.approx(4.4e-3, rel=0.01)
    # |M4| = 1 reduction
    assert additional_noise(0.0, SYS, couplings(1.0)) == pytest.approx(
        0.5 / response(0.0, SYS, couplings(1.0)), rel=1e-12)
    hot = SYS.replace(temperature=300.0)
    assert additional_noise(0.0, hot, couplings(0.95)) == pytest.approx(0.14, abs=0.005)


@given(st.floats(0.01, 300), st.floats(0.01, 300))
def test_noise_monotone_in_temperature(t1, t2):
    lo, hi = sorted((t1, t2))
    cp = couplings(0.95)
    assert additional_noise(0.0, SYS.replace(temperature=lo), cp) <= \
        additional_noise(0.0, SYS.replace(temperature=hi), cp)


@settings(max_examples=50)
@given(st.floats(1e-3, 1e3))
def test_noise_scale_invariant(s):
    cp = couplings(0.95)
    p = SYS.replace(kappa_a=KA * s, kappa_m=KM * s, g=SYS.g * s)
    a = additional_noise(W, SYS, cp, n_a=0.0)
    b = additional_noise(W * s, p, cp.scaled(s), n_a=0.0)
    assert np.allclose(a, b, rtol=1e-9)


def test_reference_scheme_closed_forms():
    for c in (10.0, 100.0, 1000.0):
        r, n = ultrastrong_reference(0.0, UltraStrongParams(c, KA, KM, 0.0))
        assert r == pytest.approx(16 * c, rel=1e-14)
        assert n == pytest.approx(9 * 0.5 / (16 * c), rel=1e-14)
    with pytest.raises(PreconditionError):
        UltraStrongParams(0.5, KA, KM, 0.0)


def test_scan_single_point(defaults):
    res = spectrum_scan([0.0], SYS, defaults[1])
    assert res.n_ad[0] == pytest.approx(4.13e-4, rel=1e-3)
    assert res.r_b[0] == pytest.approx(37.56, rel=1e-3)
    assert res.below_sql[0] and res.stable


def test_scan_even_in_frequency(defaults):
    res = spectrum_scan(W, SYS, defaults[1])
    assert np.allclose(res.r_b, res.r_b[::-1], rtol=1e-12)
    assert np.allclose(res.n_ad, res.n_ad[::-1], rtol=1e-12)


def test_scan_flags_unit_modulus():
    res = spectrum_scan(W, SYS, couplings(1.0))
    assert "unit-modulus M4 regime" in res.metadata["flags"]
    assert "unit-modulus M4 regime" not in spectrum_scan(W, SYS, couplings(0.95)).metadata["flags"]


def test_scan_rejects_empty_and_unstable():
    with pytest.raises(PreconditionError):
        spectrum_scan([], SYS, couplings(0.95))
    with pytest.raises(InstabilityError):
        spectrum_scan(W, SYS, couplings(1.5))


def test_occupancy_feeds_noise():
    hot = SYS.replace(temperature=300.0)
    n_a = thermal_occupancy(hot.omega_a, 300.0)
    assert additional_noise(0.0, hot, couplings(0.95)) == pytest.approx(
        additional_noise(0.0, SYS, couplings(0.95), n_a=n_a), rel=1e-14)
