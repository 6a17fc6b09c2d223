import numpy as np
import pytest

from nonlocal_networks import builtin_diamond
from nonlocal_networks.local import simulate_local
from nonlocal_networks.measures import (
    actual_split_ratios,
    congestion,
    congestion_per_road,
    l1_distance,
    l1_profiles,
    mass_balance_error,
    measure_report,
    outflow,
    total_travel_time,
    travel_time_per_road,
    tv_seminorm,
)
from nonlocal_networks.network import Network, Road, VelocityLaw
from nonlocal_networks.runner import run_scenario
from nonlocal_networks.scenario import build_network, initial_state
from nonlocal_networks.scheme import State, Trajectory


def frozen(mass_row, excess_row, dts):
    """Trajectory stub holding the same per-road integrals at every step."""
    k = len(mass_row)
    ids = tuple(range(1, k + 1))
    n = len(dts)
    st = State(0.0, {e: np.zeros(1) for e in ids})
    return Trajectory(
        model="stub", road_ids=ids, dx=1.0, times=np.cumsum([0.0] + list(dts[:-1])), dts=np.asarray(dts, dtype=float),
        mass=np.tile(mass_row, (n, 1)), excess=np.tile(excess_row, (n, 1)), junction_flux={},
        boundary_in=np.zeros(n), boundary_out=np.zeros(n), snapshots={}, snapshot_times={},
        initial_state=st, final_state=st, artificial={e: False for e in ids}, x_centers={}, v_max={},
    )


def test_ttt_frozen_constant_density():
    traj = frozen([0.4] * 7, [0.0] * 7, [0.25] * 4)
    assert total_travel_time(traj) == pytest.approx(2.8, abs=1e-14)


def test_cm_clamps_road_integral_not_cells():
    traj = frozen([0.0, 0.0], [-0.1, 0.3], [0.5, 0.5])
    assert congestion(traj) == pytest.approx(0.3, abs=1e-15)


def test_free_flow_has_zero_congestion():
    traj = frozen([0.3, 0.3], [0.0, 0.0], [1.0])
    assert congestion(traj) == 0.0


def test_recorded_excess_is_spatial_integral():
    net = Network([Road(1, 0.0, 0.2, VelocityLaw(1.0, 1.0))], [])
    rho0 = {1: np.array([0.9, 0.1])}
    traj = simulate_local(net, 0.1, rho0, T=0.05, variant="maxflux")
    cell = rho0[1] * (1.0 - rho0[1])
    assert traj.excess[0, 0] == pytest.approx(0.1 * np.sum(rho0[1] - cell / 0.5), abs=1e-15)


def test_zero_density_measures_vanish():
    traj = run_scenario(builtin_diamond(eta=0.1, T=1.0).with_overrides())
    zero = run_scenario(_zero_diamond())
    assert total_travel_time(zero) == 0.0
    assert outflow(zero) == 0.0
    assert congestion(zero) == 0.0
    assert total_travel_time(traj) > 0.0


def _zero_diamond():
    cfg = builtin_diamond(eta=0.1, T=1.0)
    cfg.initial = {k: 0.0 for k in cfg.initial}
    return cfg


@pytest.fixture(scope="module")
def short_runs():
    return {m: run_scenario(builtin_diamond(eta=0.1, model=m, T=3.0, )) for m in ("nonlocal-maxflux", "nonlocal-distribution")}


def test_measures_nonnegative_and_additive(short_runs):
    for traj in short_runs.values():
        per_t = travel_time_per_road(traj)
        per_c = congestion_per_road(traj)
        assert all(v >= 0 for v in per_t.values()) and all(v >= 0 for v in per_c.values())
        assert total_travel_time(traj) == pytest.approx(sum(per_t.values()), rel=1e-14)
        assert total_travel_time(traj, [1, 2, 3]) + total_travel_time(traj, [4, 5, 6, 7]) == pytest.approx(total_travel_time(traj), rel=1e-14)
        assert congestion(traj, [1, 2]) + congestion(traj, [3, 4, 5, 6, 7]) == pytest.approx(congestion(traj), rel=1e-14)
        assert outflow(traj) >= 0


def test_outflow_is_road_seven_exit(short_runs):
    traj = short_runs["nonlocal-maxflux"]
    assert outflow(traj) == outflow(traj, 7)
    assert outflow(traj) == pytest.approx(float(traj.dts @ traj.junction_flux[6][0][7]), rel=1e-15)


def test_distribution_ratios_equal_alpha(short_runs):
    traj = short_runs["nonlocal-distribution"]
    for jid, alpha in ((2, (0.5, 0.5)), (3, (0.2, 0.8))):
        ratios = actual_split_ratios(traj, jid)
        outs = sorted(ratios)
        for o, a in zip(outs, alpha):
            r = ratios[o][~np.isnan(ratios[o])]
            assert r.size > 0
            np.testing.assert_allclose(r, a, rtol=1e-12)


def test_ratios_missing_without_flux():
    cfg = _zero_diamond()
    ratios = actual_split_ratios(run_scenario(cfg), 2)
    assert all(np.all(np.isnan(v)) for v in ratios.values())


def test_one_to_one_junction_has_no_ratios(short_runs):
    assert actual_split_ratios(short_runs["nonlocal-maxflux"], 1) == {}


def test_l1_examples(short_runs):
    traj = short_runs["nonlocal-maxflux"]
    assert l1_distance(traj, traj, 4, 3.0) == 0.0
    a = np.zeros(20)
    b = a.copy()
    b[:10] = 1.0
    assert l1_profiles(a, b, 0.01) == pytest.approx(0.1)


def test_l1_grid_mismatch(short_runs):
    coarse = run_scenario(builtin_diamond(eta=0.1, dx=0.02, T=1.0))
    with pytest.raises(ValueError, match="grid mismatch"):
        l1_distance(short_runs["nonlocal-maxflux"], coarse, 4, 1.0)


def _diamond_net_and_state():
    cfg = builtin_diamond()
    net = build_network(cfg)
    return net, initial_state(cfg, net)


def test_tv_constant_state_only_junction_terms():
    net, _ = _diamond_net_and_state()
    rho = {r.id: np.full(100 if not r.is_artificial else 200, 0.4) for r in net.roads}
    tv = tv_seminorm(net, rho, breakdown=True)
    assert tv.incoming_interior == tv.outgoing_first == tv.outgoing_interior == 0.0
    assert tv.total == tv.junction_jumps == 0.0


def test_tv_single_unit_jump():
    net, _ = _diamond_net_and_state()
    rho = {r.id: np.zeros(100 if not r.is_artificial else 200) for r in net.roads}
    rho[4][50:] = 1.0
    tv = tv_seminorm(net, rho, breakdown=True)
    assert tv.outgoing_interior == 1.0
    # road 4's last cell now differs from road 6's first cell
    assert tv.total == 1.0 + tv.junction_jumps
    assert tv.junction_jumps == 1.0


def test_tv_diamond_initial_data():
    net, rho = _diamond_net_and_state()
    # within-road variation is zero; junction jumps by hand from the initial densities
    d = dict(enumerate((0.4, 0.4, 0.4, 0.4, 0.8, 0.4, 0.8, 0.2, 0.2)))
    pairs = [(0, 1), (1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (4, 6), (5, 7), (6, 7), (7, 8)]
    expected = sum(abs(d[a] - d[b]) for a, b in pairs)
    assert tv_seminorm(net, rho) == pytest.approx(expected, abs=1e-14)


def test_measures_bitwise_reproducible(short_runs):
    traj = short_runs["nonlocal-maxflux"]
    a, b = measure_report(traj).scalars(), measure_report(traj).scalars()
    assert a == b


def test_mass_balance(short_runs):
    for traj in short_runs.values():
        assert mass_balance_error(traj) <= 1e-12
