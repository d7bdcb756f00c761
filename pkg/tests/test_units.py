import math

import pytest
from hypothesis import given, strategies as st

from spinx import units
from spinx.units import PhysQuantity, UnitError, convert, convert_value, reduced_mass, wavenumber

ENERGY_UNITS = ["hartree", "eV", "meV", "MHz", "kelvin"]
ALL_UNITS = ENERGY_UNITS + [
    "bohr", "angstrom", "amu", "electron_mass",
    "bohr^2", "cm^2", "second", "atomic_time", "cm^3/s",
]


def test_hartree_to_mev():
    q = convert(PhysQuantity(1.0, "hartree"), "meV")
    assert q.value == pytest.approx(27211.386, rel=1e-7)


def test_mhz_to_mev():
    q = convert(PhysQuantity(1.0, "MHz"), "meV")
    assert q.value == pytest.approx(4.1357e-6, rel=1e-4)


def test_kelvin_to_mev():
    # k_B * 373.15 K, straight arithmetic from CODATA k_B
    expected = 373.15 * 1.380649e-23 / 1.602176634e-19 * 1e3
    q = convert(PhysQuantity(373.15, "kelvin"), "meV")
    assert q.value == pytest.approx(expected, rel=1e-12)
    assert q.value == pytest.approx(32.16, abs=0.005)


def test_incompatible_dimensions_names_both_units():
    with pytest.raises(UnitError, match="bohr.*meV|meV.*bohr"):
        convert_value(1.0, "bohr", "meV")


def test_unknown_unit_rejected():
    with pytest.raises(UnitError):
        PhysQuantity(1.0, "furlong")


@given(
    st.sampled_from(ALL_UNITS),
    st.floats(min_value=1e-12, max_value=1e12, allow_nan=False),
)
def test_round_trip_identity(unit, value):
    # pick a partner unit in the same dimension
    dim = units._UNITS[unit][0]
    partners = [u for u, (d, _) in units._UNITS.items() if d == dim and u != unit]
    if not partners:
        partners = [unit]
    other = partners[0]
    back = convert_value(convert_value(value, unit, other), other, unit)
    assert back == pytest.approx(value, rel=1e-12)


@given(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=1e-6, max_value=1e6))
def test_energy_conversion_linear_monotone(a, b):
    lo, hi = sorted((a, b))
    for unit in ENERGY_UNITS:
        x = convert_value(lo, "hartree", unit)
        y = convert_value(hi, "hartree", unit)
        if lo < hi:
            assert x < y
        # linearity
        s = convert_value(lo + hi, "hartree", unit)
        assert s == pytest.approx(x + y, rel=1e-12)


def test_reduced_mass_khe():
    mu = reduced_mass(38.9637, 3.01603)
    assert convert(mu, "amu").value == pytest.approx(2.7993, abs=2e-4)
    assert mu.value == pytest.approx(5102.9, rel=2e-4)


def test_reduced_mass_symmetric():
    mu = reduced_mass(7.25, 7.25)
    assert convert(mu, "amu").value == pytest.approx(7.25 / 2, rel=1e-12)


def test_reduced_mass_kar():
    mu = reduced_mass(38.9637, 36.9668)
    assert convert(mu, "amu").value == pytest.approx(18.968, abs=2e-3)


def test_reduced_mass_rejects_nonpositive():
    with pytest.raises(ValueError):
        reduced_mass(-1.0, 3.0)
    with pytest.raises(ValueError):
        reduced_mass(3.0, 0.0)


def test_wavenumber_convention():
    # mu = 5102.9 m_e, E = 10 meV
    e_h = convert_value(10.0, "meV", "hartree")
    assert e_h == pytest.approx(3.675e-4, rel=1e-3)
    assert wavenumber(e_h, 5102.9) == pytest.approx(1.937, abs=1e-3)


def test_wavenumber_rejects_negative_energy():
    with pytest.raises(ValueError):
        wavenumber(-1e-4, 5102.9)


def test_gamma_inverse_nanosecond():
    # 1/(1 ns) expressed in inverse atomic time
    gamma_au = 1.0 / convert_value(1e-9, "second", "atomic_time")
    assert gamma_au == pytest.approx(2.4189e-8, rel=1e-4)


def test_mean_thermal_speed_khe():
    # sqrt(8 kT / (pi mu)) at 373.15 K should be about 1680 m/s
    kt = convert_value(373.15, "kelvin", "hartree")
    v_au = math.sqrt(8 * kt / (math.pi * units.mu_khe()))
    v_m_s = v_au * units.AU_VELOCITY_CM_S / 100.0
    assert v_m_s == pytest.approx(1680.0, rel=5e-3)
