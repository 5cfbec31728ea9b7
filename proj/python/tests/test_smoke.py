import math
import subprocess
import sys

import numpy as np
import pytest

import fracflow as ff


def ball_closed_form(alpha, r):
    # -(2r)^-alpha B(1/2, (1 - alpha)/2) / alpha
    beta = math.gamma(0.5) * math.gamma((1 - alpha) / 2) / math.gamma(1 - alpha / 2)
    return -((2 * r) ** -alpha) * beta / alpha


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_ball_oracle_matches_closed_form(alpha):
    k = ff.Kernel.power_law(alpha)
    assert ff.radial_ball_oracle(1.0, k) == pytest.approx(ball_closed_form(alpha, 1.0), rel=1e-9)


def test_monte_carlo_is_close_and_seeded():
    k = ff.Kernel.power_law(0.5)
    a = ff.monte_carlo_ball_curvature(1.0, k, 100000, 5)
    assert a == ff.monte_carlo_ball_curvature(1.0, k, 100000, 5)
    assert a == pytest.approx(-7.4162987092054875, rel=1e-2)


def test_field_round_trip_and_area():
    g = ff.Grid.centered(1.0, 1.0 / 32)
    u = ff.Field.disk(g, 0.0, 0.0, 0.5)
    assert u.values.shape == (g.ny, g.nx)
    assert u.area() == pytest.approx(math.pi * 0.25, rel=1e-3)
    v = ff.Field(g, u.values, outside=u.outside)
    assert np.array_equal(v.values, u.values)
    with pytest.raises(ff.DataError):
        ff.Field(g, np.zeros((3, 3)))


def test_affine_field_is_flat():
    g = ff.Grid.centered(0.5, 1.0 / 16)
    u = ff.Field.affine(g, 0.6, 0.8, 0.0)
    k = ff.Kernel.power_law(0.5)
    e = ff.kappa_at(u, 8, 8, k, 4 * g.h)
    assert abs(e["kappa_upper"]) < 1e-8 * k.tail_mass(4 * g.h)


def test_band_curvature_on_a_disk():
    g = ff.Grid.centered(0.5 + 12 / 32, 1.0 / 32)
    u = ff.Field.disk(g, 0.0, 0.0, 0.5)
    nodes, kappa = ff.curvature_band(u, ff.Kernel.power_law(0.5), 4 * g.h, 0.5 * g.h)
    assert nodes.shape[0] > 0 and kappa.shape == (nodes.shape[0], 2)
    assert np.all(kappa < 0)


def test_short_flow_shrinks_a_disk():
    g = ff.Grid.centered(0.6 + 12 / 32, 1.0 / 32)
    out = ff.simulate(ff.Field.disk(g, 0.0, 0.0, 0.6), ff.Kernel.power_law(0.5), t_end=0.005)
    areas = [s["area"] for s in out["snapshots"]]
    assert not out["aborted"]
    assert areas[-1] < areas[0]


def test_audit_flags_alpha_one():
    assert ff.audit(ff.Kernel.power_law(0.5))["pass"]
    with pytest.raises(ff.ConfigError):
        ff.Kernel.power_law(1.0)


def test_run_reports_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[kernel]\nalpha = 2\n")
    with pytest.raises(ff.ConfigError):
        ff.run("simulate", str(bad))


def test_run_simulate(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[grid]\nextent = 0.75\nh = 0.0625\n[initial]\nradius = 0.2\n"
        f"[flow]\nt_end = 0.002\n[output]\ndir = {tmp_path / 'out'}\n"
    )
    assert ff.run("simulate", str(cfg)) == 0
    assert (tmp_path / "out" / "stats.csv").exists()
