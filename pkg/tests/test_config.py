import math

import pytest

from vacuum_nozzle.config import ConfigError, ExperimentConfig, load_config


def test_defaults():
    cfg = load_config()
    assert cfg.gamma == 1.4 and cfg.n_phi == 129 and cfg.eps_list == (0.0, 1e-3)
    assert cfg.gas_params().delta == pytest.approx(0.2)
    c, p1 = cfg.profiles()
    assert c.amplitude == 0.0 and p1.amplitude == 1.0


def test_ini_roundtrip(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(
        "[gas]\ngamma = 1.6\n\n[grid]\nn_phi = 65\n\n[perturbation]\neps_list = 0, 2e-3\n\n"
        "[diagnostics]\nenergy_T = 5, 10\nineq_families = bump, dr2\n\n[output]\ndir = res\n\n[run]\nseed = 7\n"
    )
    cfg = load_config(path)
    assert cfg.gamma == 1.6 and cfg.n_phi == 65
    assert cfg.eps_list == (0.0, 2e-3) and cfg.energy_T == (5.0, 10.0)
    assert cfg.ineq_families == ("bump", "dr2")
    assert cfg.out_dir == "res" and cfg.seed == 7
    assert load_config(path, seed=9, out_dir=None).seed == 9


@pytest.mark.parametrize(
    "text",
    [
        "[gas]\ngamma = 2.5\n",
        "[gas]\nfoo = 1\n",
        "[grid]\nn_phi = many\n",
        "[grid]\nn_phi = 9\n",
        "[perturbation]\nwidth_frac = 0.9\n",
        "[diagnostics]\nenergy_k = 2\n",
        "[diagnostics]\ndecay_window_z = 100, 10\n",
        "not an ini file",
    ],
)
def test_bad_config(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_refined():
    cfg = ExperimentConfig()
    assert cfg.refined(0) is cfg
    assert cfg.refined(1).n_phi == 257 and cfg.refined(1).max_rel_step == 0.025
    assert cfg.refined(-1).n_phi == 65 and cfg.refined(-2).n_phi == 33


def test_explicit_delta():
    cfg = ExperimentConfig(delta=0.1)
    assert cfg.gas_params().delta == 0.1
    # a gamma override recomputes the default delta for that gamma
    assert cfg.gas_params(1.2).delta == pytest.approx(0.1)
    assert math.isnan(ExperimentConfig().delta)


def test_as_items_stable():
    a = ExperimentConfig().as_items()
    assert a == ExperimentConfig().as_items()
    assert ("gamma", "1.4") in a
