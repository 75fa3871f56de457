import math

import numpy as np
import pytest

import pcol


def test_gauss2_counts_and_accuracy():
    res = pcol.integrate_pcol(5.0, 50.0, 25.0, "gauss2", 0.5, 0.5)
    assert res["eval_count"] == 480
    assert res["addition_count"] == 480
    ref = pcol.reference_pcol(5.0, 50.0, 25.0)
    assert abs(res["p_col"] - ref) < 3 * 7.18e-11


def test_isotropic_closed_form():
    r, s = 3.0, 20.0
    got = pcol.integrate_pcol(r, s, s, "gauss3", 0.05, 0.05)["p_col"]
    assert got == pytest.approx(-math.expm1(-r * r / (2 * s * s)), abs=1e-12)


def test_reduce_axis_aligned():
    cov = np.diag([2500.0, 2500.0, 625.0])
    s1 = pcol.ObjectState([0, 0, 200], [7500, 0, 0], cov, 3.0)
    s2 = pcol.ObjectState([0, 0, 0], [-7500, 0, 0], cov, 2.0)
    g = pcol.reduce_conjunction(s1, s2)
    assert g.combined_radius == 5.0
    assert g.sigma_x == pytest.approx(math.sqrt(5000.0))
    assert g.sigma_z == pytest.approx(math.sqrt(1250.0))


def test_typed_errors():
    with pytest.raises(pcol.PcolError) as info:
        pcol.integrate_pcol(5.0, 50.0, 25.0, "gauss9")
    assert info.value.code == "InvalidInput"
    s = pcol.ObjectState([0, 0, 0], [1, 0, 0], np.eye(3), 1.0)
    with pytest.raises(pcol.PcolError) as info:
        pcol.reduce_conjunction(s, s)
    assert info.value.code == "ZeroRelativeVelocity"


def test_monte_carlo_agrees():
    est, err = pcol.mc_pcol_2d(5.0, 50.0, 25.0, samples=200_000, seed=4)
    assert abs(est - pcol.reference_pcol(5.0, 50.0, 25.0)) < 4 * err


def test_taylor_series():
    assert pcol.taylor_series("exp", -0.005, 5) == pytest.approx(math.exp(-0.005), abs=1e-16)
    assert abs(pcol.taylor_series("cos", 2 * math.pi, 5) - 1.0) > 5.0


def test_threshold_table_on_toy_ring():
    session = pcol.ThresholdSession("toy", parties=3, seed=5)
    assert session.slots == 16
    values = [0.1 * i for i in range(16)]
    assert np.allclose(session.round_trip(values), values, atol=1e-5)
    res = session.table_pcol(5.0, 50.0, 25.0, "gauss2", 0.5)
    plain = pcol.integrate_pcol(5.0, 50.0, 25.0, "gauss2", 0.5, 0.5)["p_col"]
    assert res["p_col"] == pytest.approx(plain, rel=1e-5)
    assert res["counter"]["additions"] == 480


def test_single_party_is_rejected():
    with pytest.raises(pcol.PcolError):
        pcol.ThresholdSession("toy", parties=1)
