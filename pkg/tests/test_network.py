import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_networks.network import (
    ConfigurationError,
    DomainError,
    Junction,
    Network,
    Road,
    VelocityLaw,
    eval_velocity,
    n_cells,
    validate_network,
)
from nonlocal_networks.scenario import build_network, builtin_diamond


def diamond_net():
    return build_network(builtin_diamond())


def test_eval_velocity_examples():
    assert eval_velocity(VelocityLaw(0.5, 1.0), 0.0) == 0.5
    assert eval_velocity(VelocityLaw(2.0, 1.0), 1.0) == 0.0
    assert eval_velocity(VelocityLaw(1.0, 1.0), 0.4) == pytest.approx(0.6, abs=1e-15)


@pytest.mark.parametrize("rho", [-0.01, 1.01, float("nan")])
def test_eval_velocity_rejects_out_of_range(rho):
    with pytest.raises(DomainError):
        eval_velocity(VelocityLaw(1.0, 1.0), rho)


@given(
    st.floats(0.01, 10.0),
    st.floats(0.01, 10.0),
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=30),
)
def test_velocity_nonincreasing_and_bounded(v_max, rho_max, fractions):
    law = VelocityLaw(v_max, rho_max)
    rho = np.sort(np.asarray(fractions)) * rho_max
    v = np.array([eval_velocity(law, r) for r in rho])
    assert np.all(np.diff(v) <= 1e-15)
    assert np.all((v >= 0) & (v <= v_max))


def test_diamond_is_valid():
    assert validate_network(diamond_net(), 0.5) == []


def test_single_short_road_violates_range():
    net = Network([Road(1, 0.0, 1.0, VelocityLaw(1, 1))], [])
    problems = validate_network(net, 1.5)
    assert len(problems) == 1
    assert "smaller than the road length" in problems[0]


def test_bad_alpha_row_is_one_violation():
    roads = [Road(i, 0.0, 1.0, VelocityLaw(1, 1)) for i in (1, 2, 3)]
    net = Network(roads, [Junction(1, [1], [2, 3], "one_to_two_maxflux", distribution=(0.3, 0.6))])
    problems = validate_network(net, 0.5)
    assert len(problems) == 1
    assert "sum" in problems[0]


def test_unsupported_shape_rejected():
    with pytest.raises(ConfigurationError):
        Junction(1, [1, 2], [3, 4], "two_to_one_maxflux")


def _corrupt(net, road_id=None, junction_id=None, **changes):
    roads = [dataclasses.replace(r, **changes) if r.id == road_id else r for r in net.roads]
    juncs = [dataclasses.replace(j, **changes) if j.id == junction_id else j for j in net.junctions]
    return Network(roads, juncs)


CORRUPTIONS = [
    dict(road_id=3, velocity_law=VelocityLaw(-1.0, 1.0)),
    dict(road_id=3, velocity_law=VelocityLaw(1.0, 0.0)),
    dict(road_id=4, b=0.3),
    dict(road_id=5, a=2.0),
    dict(junction_id=2, distribution=(0.5, 0.6)),
    dict(junction_id=3, distribution=(1.2, -0.2)),
    dict(junction_id=4, priority=(0.5, 0.6)),
    dict(junction_id=5, priority=(1.0, 0.0)),
    dict(junction_id=2, distribution=None),
    dict(junction_id=4, coupling="one_to_two_maxflux"),
    dict(junction_id=6, outgoing=(7,)),
    dict(junction_id=3, outgoing=(4, 99)),
]


@pytest.mark.parametrize("change", CORRUPTIONS, ids=[str(c) for c in CORRUPTIONS])
def test_each_single_corruption_is_rejected(change):
    assert validate_network(_corrupt(diamond_net(), **change), 0.5) != []


def test_disconnected_network_rejected():
    net = diamond_net()
    extra = Road(42, 0.0, 1.0, VelocityLaw(1, 1))
    assert any("connected" in p for p in validate_network(Network(net.roads + (extra,), net.junctions), 0.5))


def test_network_norms():
    net = diamond_net()
    assert (net.v_norm, net.dv_norm, net.rho_norm) == (2.0, 2.0, 1.0)


def test_n_cells_requires_exact_multiple():
    assert n_cells(1.0, 0.01) == 100
    with pytest.raises(ConfigurationError):
        n_cells(1.0, 0.03)
