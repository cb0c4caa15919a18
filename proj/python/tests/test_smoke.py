import math

import numpy as np
import pytest

import ppac


def test_presets_listed():
    assert set(ppac.preset_names()) == {"paper-sim", "scalar-demo"}
    assert "[controller.proposed]" in ppac.preset_text("paper-sim")


def test_transform_values():
    f = ppac.transform(1.0, 0.0)
    assert f["z"] == pytest.approx(math.sqrt(2))
    assert f["Pi"] == pytest.approx(2.12132, rel=1e-5)
    assert f["W"] == pytest.approx(1 / math.sqrt(2))
    assert ppac.psi_inverse("tanh", 0.9) == pytest.approx(1.47222, rel=1e-5)


def test_outside_funnel_raises():
    with pytest.raises(ppac.FunnelViolation):
        ppac.transform(50.0, 10.0)


def test_scalar_demo_short_run():
    res = ppac.run(preset="scalar-demo", t_final=2.0)
    (run,) = res["runs"]
    assert run["status"] == "completed"
    log = run["log"]
    assert log["t"].shape == (2001,)
    assert np.all(np.abs(log["x1"]) < log["bound"])
    assert np.all(np.diff(log["rho_hat"]) >= -1e-12)
    assert '"experiment"' in res["summary"]


def test_bad_config_rejected():
    text = ppac.preset_text("scalar-demo").replace("k = 1", "k = -1")
    with pytest.raises(ppac.InvalidArgument):
        ppac.run(config_text=text)
    with pytest.raises(ppac.InvalidArgument):
        ppac.run()


def test_verify_scalar_demo():
    ok, checks = ppac.verify(preset="scalar-demo", samples=100, t_final=2.0)
    assert ok
    assert any(c["name"] == "lyapunov" and c["status"] == "PASS" for c in checks)
