import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import make_scenario
from uavplace import radio
from uavplace.errors import DemandExceedsTable, ZeroDistance
from uavplace.scenario import LinkBudget, default_mcs_table

LB = LinkBudget.from_db()  # 5250 MHz, 20 MHz, 20 dBm, 0 dBi, -85 dBm, 25 dB
LB20 = LinkBudget.from_db(nlos_loss_db=20.0)
SQUARE = [(10, 10), (30, 10), (30, 30), (10, 30)]


@pytest.mark.parametrize("a, b, d", [((0, 0, 0), (0, 0, 0), 0.0), ((0, 0, 0), (3, 4, 0), 5.0), ((1, 2, 3), (4, 6, 15), 13.0)])
def test_distance(a, b, d):
    assert radio.distance(a, b) == d


def test_loss_factor():
    assert radio.loss_factor(True, 25) == 1.0
    assert radio.loss_factor(False, 20) == 100.0
    # [DERIVED] 10^2.5 in 50-digit arithmetic
    assert radio.loss_factor(False, 25) == pytest.approx(float(oracles.db_to_lin(25)), rel=1e-15)
    assert radio.loss_factor(False, 25) == pytest.approx(316.2278, abs=5e-5)


def test_snr_at_100m_matches_high_precision_oracle():
    ref = oracles.snr(0.1, 1, 1, 5.25e9, oracles.dbm_to_w(-85), 100)
    got = radio.snr(LB, 100.0, True)
    # [DERIVED] 65.29847984876... (18.149 dB)
    assert oracles.rel(got, ref) <= 1e-9
    assert got == pytest.approx(65.3, abs=0.01)
    assert 10 * math.log10(got) == pytest.approx(18.1, abs=0.05)


def test_snr_inverse_square_and_nlos_factor():
    s100 = radio.snr(LB20, 100.0, True)
    assert radio.snr(LB20, 200.0, True) == pytest.approx(s100 / 4, rel=1e-15)
    assert radio.snr(LB20, 100.0, False) == pytest.approx(s100 / 100, rel=1e-15)


def test_snr_zero_distance():
    with pytest.raises(ZeroDistance):
        radio.snr(LB, 0.0, True)


def test_capacity_examples():
    assert radio.capacity(LB, 0.0) == 0.0
    assert radio.capacity(LB, 1.0) == 20e6
    # [DERIVED] 20 MHz * log2(66.3) = 121.0187393 Mbit/s from the 50-digit oracle
    ref = oracles.capacity(20e6, 65.3)
    got = radio.capacity(LB, 65.3)
    assert oracles.rel(got, ref) <= 1e-12
    assert got == pytest.approx(121_018_739.3, abs=0.1)


def test_required_snr_follows_mcs_ladder():
    table = default_mcs_table(20e6)
    # [PAPER] 58.5 Mbit/s is MCS index 0, 117 Mbit/s is MCS index 1
    assert radio.required_snr(58.5e6, table) == table[0].min_snr_linear
    assert radio.required_snr(117e6, table) == table[1].min_snr_linear
    assert radio.required_mcs(100e6, table).index == 1
    with pytest.raises(DemandExceedsTable):
        radio.required_snr(1e9, table)


def test_max_distance_examples():
    d = radio.max_distance(LB, 65.3, True)
    ref = oracles.max_distance(0.1, 1, 1, 5.25e9, oracles.dbm_to_w(-85), 65.3)
    assert oracles.rel(d, ref) <= 1e-12
    assert d == pytest.approx(100.0, abs=0.01)
    assert radio.max_distance(LB, 2 * 65.3, True) == pytest.approx(d / math.sqrt(2), rel=1e-14)
    assert radio.max_distance(LB, 65.3, False) == pytest.approx(d / math.sqrt(10**2.5), rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-10, 40), st.floats(-130, -60), st.floats(100, 60000), st.floats(1e-3, 1e5), st.booleans(),
)
def test_max_distance_is_inverse_of_snr(tx_dbm, noise_dbm, f_mhz, s, los):
    lb = LinkBudget.from_db(frequency_mhz=f_mhz, tx_power_dbm=tx_dbm, noise_floor_dbm=noise_dbm)
    d = radio.max_distance(lb, s, los)
    assert abs(radio.snr(lb, d, los) - s) / s <= 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 5000), st.floats(1e-3, 10), st.floats(-30, 30))
def test_monotonicity_and_unit_scaling(d, extra, scale_db):
    assert radio.snr(LB, d, True) > radio.snr(LB, d * (1 + extra), True)
    s = radio.snr(LB, d, True)
    assert radio.capacity(LB, s * (1 + extra)) > radio.capacity(LB, s)
    k = 10 ** (scale_db / 10)
    scaled = LinkBudget(LB.frequency_hz, LB.bandwidth_hz, LB.tx_power_w * k, 1.0, 1.0, LB.noise_floor_w * k, 25.0)
    assert radio.snr(scaled, d, True) == pytest.approx(s, rel=1e-12)


@pytest.mark.parametrize("rate_index", range(9))
def test_inside_the_sphere_capacity_covers_the_rate(rate_index):
    # with Shannon-inverted thresholds, any distance up to the radius meets the MCS rate
    table = default_mcs_table(20e6)
    e = table[rate_index]
    r = radio.max_distance(LB, e.min_snr_linear, True)
    for frac in (0.1, 0.5, 0.9, 0.999999, 1.0):
        c = radio.capacity(LB, radio.snr(LB, r * frac, True))
        assert c >= e.rate_bps * (1 - 1e-12)


def test_evaluate_links_saturates_at_demand():
    s = make_scenario([(0, 0, 58.5)], venue={"x_min": -5, "x_max": 5, "y_min": -5, "y_max": 5, "z_min": 1, "z_max": 50})
    rep = radio.evaluate_links((0, 0, 20), s)
    (m,) = rep.links
    assert m.los and m.demand_met and m.served_bps == 58.5e6
    assert m.capacity_bps > m.demand_bps
    assert rep.aggregate_bps == 58.5e6


def test_evaluate_links_deep_nlos_is_capacity_limited():
    s = make_scenario(
        [(0, 20, 58.5), (40, 20, 58.5)], [(SQUARE, 15.0)], radio={"nlos_loss_db": 60},
        venue={"z_min": 15, "z_max": 30},
    )
    rep = radio.evaluate_links((0, 20, 15), s)
    far = rep.links[1]
    assert not far.los
    assert far.served_bps == far.capacity_bps < far.demand_bps
    assert not far.demand_met


def test_use_case_a_aggregate():
    # [PAPER] eight users at 58.5 Mbit/s, all served in full
    s = make_scenario([(x, y, 58.5) for x, y in [(0, 0), (5, 0), (10, 0), (0, 5), (5, 5), (10, 5), (0, 10), (5, 10)]])
    rep = radio.evaluate_links((5, 5, 20), s)
    assert all(m.demand_met for m in rep.links)
    assert rep.aggregate_bps == 468e6


def test_capacity_cap_is_flagged_not_enforced():
    s = make_scenario([(0, 0, 58.5), (3, 0, 58.5)], c_max_mbps=100)
    rep = radio.evaluate_links((1, 1, 5), s)
    assert rep.total_capacity_bps > 100e6 and rep.c_max_violated
    assert rep.aggregate_bps == 117e6


def test_batch_and_scalar_paths_agree_bitwise():
    s = make_scenario([(0, 20, 58.5), (40, 20, 117), (20, 45, 58.5)], [(SQUARE, 15.0)])
    pts = [(x, y, z) for x in (-2.0, 7.0, 20.0, 42.0) for y in (18.0, 33.0) for z in (15.0, 40.0)]
    batch = radio.evaluate_many(pts, s)
    for p, rep in zip(pts, batch):
        assert rep == radio.evaluate_links(p, s)
