import numpy as np
import pytest

from spinx import potential as pot
from spinx.units import convert_value, mu_khe


@pytest.fixture(scope="module")
def dataset():
    return pot.load_bundled_dataset()


def test_raw_table_shapes(dataset):
    # 10 potential columns (9 shared states + cation), 9 hyperfine columns,
    # 54 R rows in the potential table counting the asymptote row
    assert len(dataset.v_raw.headers) == 10
    assert "Cation" in dataset.v_raw.headers
    assert len(dataset.alpha_raw.headers) == 9
    assert "Cation" not in dataset.alpha_raw.headers
    assert dataset.v_raw.n_rows == 54
    assert dataset.alpha_raw.n_rows == 53


def test_shared_states_parsed(dataset):
    assert sorted(dataset.states) == sorted(dataset.alpha_raw.headers)
    assert len(dataset.states) == 9


def test_nodes_truncated_at_a(dataset):
    s = dataset.state("4S")
    assert s.v.r_nodes[-1] == 40.0
    assert len(s.v.r_nodes) == 49  # 53 finite rows minus the four beyond 40 bohr
    assert len(s.alpha.r_nodes) == 49


def test_asymptote_metadata(dataset):
    assert dataset.state("4S").v.asymptote == 0.0
    assert dataset.state("5S").v.asymptote == 2579.1
    assert dataset.state("5S").alpha.asymptote == 0.0


def test_tabulated_node_values(dataset):
    # spot values typed independently from the source tables
    s4, s5 = dataset.state("4S"), dataset.state("5S")
    assert pot.interpolate(s4.v, 5.0) == pytest.approx(114.17, rel=1e-12)
    assert pot.interpolate(s5.alpha, 5.0) == pytest.approx(-4.9381, rel=1e-12)
    assert pot.interpolate(s5.v, 12.0) == pytest.approx(9.0086, rel=1e-12)
    assert pot.interpolate(s4.v, 2.5) == pytest.approx(6491.3, rel=1e-12)
    assert pot.interpolate(s5.v, 40.0) == pytest.approx(-0.0016327, rel=1e-12)


def test_interpolation_exact_at_every_node(dataset):
    for state in dataset.states.values():
        for curve in (state.v, state.alpha):
            vals = pot.interpolate(curve, curve.r_nodes)
            np.testing.assert_allclose(vals, curve.values, rtol=1e-12, atol=1e-300)


def test_zero_beyond_truncation(dataset):
    s = dataset.state("5S")
    assert pot.interpolate(s.v, 40.0001) == 0.0
    assert pot.interpolate(s.v, 120.0) == 0.0
    assert pot.interpolate(s.alpha, 41.0) == 0.0


def test_wall_extrapolation_below_first_node(dataset):
    v = dataset.state("4S").v
    # exponential through the first two nodes: monotone growth inward
    v1 = pot.interpolate(v, 2.0)
    v2 = pot.interpolate(v, 1.0)
    assert v2 > v1 > pot.interpolate(v, 2.5)
    # continuity at the first node
    assert pot.interpolate(v, 2.5 - 1e-9) == pytest.approx(6491.3, rel=1e-5)


def test_interpolate_rejects_nonpositive_r(dataset):
    with pytest.raises(ValueError):
        pot.interpolate(dataset.state("4S").v, 0.0)
    with pytest.raises(ValueError):
        pot.interpolate(dataset.state("4S").v, -3.0)


def test_spline_max_of_5s_barrier_near_12(dataset):
    v = dataset.state("5S").v
    r = np.arange(10.0, 14.0, 1e-3)
    vals = pot.interpolate(v, r)
    assert abs(r[np.argmax(vals)] - 12.0) < 0.5


def test_spline_no_ringing(dataset):
    # spline deviates from linear interpolation at midpoints by no more
    # than 10x the local second-difference scale (window of +-3 entries;
    # the tabulated tail is flat noise, so purely pointwise scales vanish)
    for state in dataset.states.values():
        c = state.v
        r, v = c.r_nodes, c.values
        mid = 0.5 * (r[:-1] + r[1:])
        lin = 0.5 * (v[:-1] + v[1:])
        spl = pot.interpolate(c, mid)
        d2 = np.abs(np.diff(v, 2))
        scale = np.empty(len(mid))
        for i in range(len(mid)):
            lo, hi = max(0, i - 3), min(len(d2), i + 4)
            scale[i] = d2[lo:hi].max() if hi > lo else 0.0
        floor = 1e-9 * np.max(np.abs(v))
        assert np.all(np.abs(spl - lin) <= 10.0 * scale + floor)


def test_channel_potential_spin_shift(dataset):
    mu = mu_khe()
    cp = pot.channel_potential(dataset.state("4S"), j=1, l=0, mu=mu)
    w_mev = convert_value(cp.w(5.0), "hartree", "meV")
    shift = 0.25 * convert_value(45.874, "MHz", "meV")
    assert shift == pytest.approx(4.74e-5, rel=1e-3)
    assert w_mev == pytest.approx(114.17 + shift, rel=1e-9)


def test_channel_no_centrifugal_at_l0(dataset):
    mu = mu_khe()
    for j in (0, 1):
        cp = pot.channel_potential(dataset.state("5S"), j=j, l=0, mu=mu)
        r = np.linspace(3.0, 39.0, 57)
        np.testing.assert_allclose(cp.w(r), cp.interior(r), rtol=0, atol=0)


def test_centrifugal_term_value(dataset):
    mu = mu_khe()
    cp0 = pot.channel_potential(dataset.state("5S"), j=1, l=0, mu=mu)
    cp25 = pot.channel_potential(dataset.state("5S"), j=1, l=25, mu=mu)
    got = cp25.w(10.0) - cp0.w(10.0)
    assert got == pytest.approx(25 * 26 / (2 * mu * 100.0), rel=1e-12)
    assert got == pytest.approx(6.3689e-4, rel=1e-4)


def test_j_split_equals_alpha_everywhere(dataset):
    mu = mu_khe()
    cp0 = pot.channel_potential(dataset.state("5S"), j=0, l=7, mu=mu)
    cp1 = pot.channel_potential(dataset.state("5S"), j=1, l=7, mu=mu)
    r = np.linspace(2.6, 39.5, 211)
    alpha_h = pot.interpolate(dataset.state("5S").alpha, r) * convert_value(1.0, "MHz", "hartree")
    # atol covers float cancellation: w is ~1e-3 hartree while the split is ~1e-10
    np.testing.assert_allclose(cp1.w(r) - cp0.w(r), alpha_h, rtol=1e-6, atol=5e-17)


def test_channel_rejects_bad_arguments(dataset):
    with pytest.raises(ValueError):
        pot.channel_potential(dataset.state("5S"), j=2, l=0, mu=1.0)
    with pytest.raises(ValueError):
        pot.channel_potential(dataset.state("5S"), j=1, l=-1, mu=1.0)
    with pytest.raises(ValueError):
        pot.channel_potential(dataset.state("5S"), j=1, l=0, mu=0.0)
    with pytest.raises(KeyError):
        dataset.state("7S")


def test_barrier_profile_5s_ground_channel(dataset):
    cp = pot.channel_potential(dataset.state("5S"), j=1, l=0, mu=mu_khe())
    prof = pot.barrier_profile(cp)
    assert prof is not None
    assert prof.well_depth_mev == pytest.approx(-65.1, abs=0.5)
    assert abs(prof.well_r_bohr - 5.0) < 0.3
    assert prof.barrier_height_mev == pytest.approx(9.0, abs=0.3)
    assert abs(prof.barrier_r_bohr - 12.0) < 0.5


def test_barrier_profile_4s_monotone(dataset):
    cp = pot.channel_potential(dataset.state("4S"), j=1, l=0, mu=mu_khe())
    assert pot.barrier_profile(cp) is None


def test_barrier_height_grows_with_l(dataset):
    mu = mu_khe()
    heights = []
    for l in (0, 5, 10, 15, 20, 25):
        prof = pot.barrier_profile(pot.channel_potential(dataset.state("5S"), 1, l, mu))
        assert prof is not None
        heights.append(prof.barrier_height_mev)
    assert all(b >= a for a, b in zip(heights, heights[1:]))
    assert heights[-1] > heights[0]


def test_parse_errors():
    good_v = "R\tA\tB\n1\t1.0\t2.0\n2\t0.5\t1.0\n3\t0.2\t0.5\n4\t0.1\t0.2\n"
    good_a = "R\tA\tB\n1\t1.0\t2.0\n2\t0.5\t1.0\n3\t0.2\t0.5\n4\t0.1\t0.2\n"
    assert len(pot.parse_state_tables(good_v, good_a, truncation_radius=4.0)) == 2

    with pytest.raises(pot.TableError, match="malformed"):
        pot.load_raw_table("R\tA\n1\tx\n2\t1\n3\t1\n4\t1\n")
    with pytest.raises(pot.TableError, match="not strictly increasing"):
        pot.load_raw_table("R\tA\n1\t1\n3\t1\n2\t1\n4\t1\n")
    bad_a = "R\tA\tC\n1\t1.0\t2.0\n2\t0.5\t1.0\n3\t0.2\t0.5\n4\t0.1\t0.2\n"
    with pytest.raises(pot.TableError, match="missing from the potential"):
        pot.parse_state_tables(good_v, bad_a, truncation_radius=4.0)


def test_delimiter_autodetect():
    for d in (",", ";"):
        text = d.join(["R", "A"]) + "\n" + "\n".join(
            d.join([str(i), str(1.0 / i)]) for i in range(1, 6)
        )
        raw = pot.load_raw_table(text)
        assert raw.headers == ["A"]
        assert len(raw.r_values) == 5
