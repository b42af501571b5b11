import math

import numpy as np
import pytest

import qshare


@pytest.fixture(scope="module")
def lv5():
    return qshare.load_scenario("lv5")


def test_bundled(lv5):
    assert set(qshare.bundled_scenarios()) == {"lv5", "mv9-template"}
    assert lv5.name == "lv5"
    assert lv5.ibr_count == 5
    np.testing.assert_allclose(lv5.s_rated, [1.1, 0.6, 0.8, 0.75, 1.3])
    np.testing.assert_allclose(lv5.load_pf, [0.85, 0.9, 0.88, 0.92, 0.87])


def test_round_trip(lv5):
    assert qshare.parse_scenario(qshare.serialize_scenario(lv5)) == lv5


def test_parse_error_lists_problems(lv5):
    text = qshare.serialize_scenario(lv5).replace("scale-load 5 0.2", "scale-load 99 0.2")
    with pytest.raises(qshare.ScenarioError) as err:
        qshare.parse_scenario(text, "bad.scn")
    assert "bus 99" in str(err.value)
    assert issubclass(qshare.ScenarioError, qshare.ModelError)


def test_graph():
    ring = [(i, i % 5 + 1, 1.0) for i in range(1, 6)]
    L = qshare.laplacian(5, ring)
    assert np.allclose(L.sum(axis=1), 0.0)
    assert qshare.algebraic_connectivity(5, ring) == pytest.approx(2 - 2 * math.cos(2 * math.pi / 5))
    K = qshare.consensus_gain_matrix(2, [(1, 2, 1.0)], 1.0)
    np.testing.assert_allclose(K, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_network(lv5):
    G, B = qshare.kron_reduce(lv5)
    assert G.shape == (5, 5)
    np.testing.assert_allclose(G, G.T, atol=1e-14)
    theta = np.array([0.0, -0.01, 0.02, 0.005, -0.015])
    V = np.ones(5)
    P, Q = qshare.power_flow(G, B, theta, V)
    P2, Q2 = qshare.power_flow(G, B, theta + 1.3, V)
    np.testing.assert_allclose(P, P2, atol=1e-12)
    J = qshare.jacobians(G, B, theta, V)
    assert np.linalg.norm(J["J_theta_P"] @ np.ones(5)) < 1e-9


def test_simulate_short():
    sc = qshare.load_scenario("lv5")
    sc.t_end = 12.0
    assert len(sc.events) == 1
    ts = qshare.simulate(sc)
    assert ts["t"][-1] == pytest.approx(12.0)
    assert ts["V"].shape == (1201, 5)
    assert ts["containment_violations"] == 0
    assert ts["max_dual_drift"] <= 1e-8
    assert ts["mode"][0] == "droop" and ts["mode"][-1] == "proposed"


def test_steady_state_and_stability(lv5):
    eq = qshare.solve_equilibrium(lv5)
    rep = qshare.verify_properties(lv5, eq)
    assert rep["all_pass"]
    assert np.ptp(eq.lambda_) <= 1e-8
    a = qshare.analyze_stability(lv5, [0.1])
    assert a["sweep"][0][1] < 0.0
    assert "lmi" in a["report"]


def test_tune(lv5):
    r = qshare.tune(lv5)
    assert r["k"] == pytest.approx(7.236, abs=0.005)
    assert r["m_star"] == pytest.approx(1.571, abs=0.001)
    assert r["m_v_volts"] == pytest.approx([11.0] * 5)
    assert qshare.validate(lv5)["pass"]
