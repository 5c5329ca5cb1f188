import subprocess
import sys

import pytest

from vacuum_nozzle.cli import main

SMALL = """\
[grid]
n_phi = 33
r_max = 20

[perturbation]
eps_list = 0, 1e-3

[diagnostics]
background_n = 50
energy_T = 5, 10, 20
decay_r_max = 200
decay_window_dr = 10, 100
decay_window_z = 20, 200
ineq_members = 2
ineq_levels = 0, 1
ineq_T = 4, 8
z_probes = 5
"""


@pytest.fixture
def small(tmp_path):
    def make(extra=""):
        p = tmp_path / f"cfg{abs(hash(extra))}.ini"
        p.write_text(SMALL + extra)
        return str(p)

    return make


def _read_checks(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "name,measured,threshold,passed"
    return {ln.split(",")[0]: ln.split(",")[-1] == "1" for ln in lines[1:]}


def test_background_ok(tmp_path, small):
    out = tmp_path / "o"
    assert main(["background", "--config", small(), "--out", str(out), "--plot-data"]) == 0
    d = out / "background"
    assert (d / "background.csv").read_text().startswith("r,rho,U,c2,P1,P2,dP1,dP2\n")
    assert (d / "decay_fits.csv").read_text().startswith("quantity,r_lo,r_hi,slope,residual\n")
    assert all(_read_checks(d / "checks.csv").values())
    assert (d / "plot_background_rho.dat").exists()
    meta = (d / "run.meta.txt").read_text()
    assert "command = background" in meta and "seed = 0" in meta


def test_march_outputs_deterministic(tmp_path, small):
    cfg = small()
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["march", "--config", cfg, "--out", str(a)]) == 0
    assert main(["march", "--config", cfg, "--out", str(b)]) == 0
    names = sorted(p.name for p in (a / "march").iterdir())
    assert "trace_eps0.csv" in names and "trace_eps1.meta.txt" in names
    for n in names:
        assert (a / "march" / n).read_bytes() == (b / "march" / n).read_bytes()


def test_march_abort_exit_code(tmp_path, small):
    out = tmp_path / "o"
    cfg = small().replace(".ini", "x.ini")
    with open(cfg, "w") as fh:
        fh.write(SMALL.replace("eps_list = 0, 1e-3", "eps_list = 1e-3, 0.9"))
    assert main(["march", "--config", cfg, "--out", str(out)]) == 3
    abort = (out / "march" / "abort_eps1.txt").read_text()
    assert "guard = " in abort and "r = " in abort
    assert (out / "march" / "trace_eps0.csv").exists()


def test_tampered_mu_fails_verify(tmp_path, small):
    out_bad, out_ok = tmp_path / "bad", tmp_path / "ok"
    assert main(["verify", "--config", small("\nmu_offset = 0.5\n"), "--out", str(out_bad)]) == 2
    bad = _read_checks(out_bad / "verify" / "checks.csv")
    assert not bad["certificate_first_gamma1.4"]
    main(["verify", "--config", small(), "--out", str(out_ok)])
    ok = _read_checks(out_ok / "verify" / "checks.csv")
    assert all(v for k, v in ok.items() if k.startswith("certificate_"))
    assert (out_ok / "verify" / "energy.csv").read_text().startswith("k,T,surface_dr,surface_Z,volume_dr,volume_Z,eps\n")
    assert (out_ok / "verify" / "inequality.csv").read_text().startswith("ineq_id,family_member,grid_level,ratio\n")


def test_ineq_seed_changes_output(tmp_path, small):
    cfg = small()
    for seed in ("1", "2"):
        assert main(["ineq", "--config", cfg, "--out", str(tmp_path / seed), "--seed", seed]) == 0
    a = (tmp_path / "1" / "ineq" / "inequality.csv").read_text()
    b = (tmp_path / "2" / "ineq" / "inequality.csv").read_text()
    assert a != b and a.count("\n") == b.count("\n") == 1 + 2 * 2 * 4


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["background", "--refine", "3"],
        ["background", "--refine", "x"],
        ["background", "--seed", "-1"],
    ],
)
def test_usage_errors(argv, tmp_path):
    with pytest.raises(SystemExit) as info:
        code = main(argv + ["--out", str(tmp_path)])
        raise SystemExit(code)
    assert info.value.code == 64


def test_config_error_exit(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[gas]\ngamma = 3\n")
    assert main(["background", "--config", str(p), "--out", str(tmp_path)]) == 64
    assert main(["background", "--config", str(tmp_path / "missing.ini")]) == 64


def test_io_error_exit(tmp_path, small):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["background", "--config", small(), "--out", str(blocker / "sub")]) == 74


def test_module_entry_point(tmp_path, small):
    res = subprocess.run(
        [sys.executable, "-m", "vacuum_nozzle", "background", "--config", small(), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert "PASS background_conservation" in res.stdout
