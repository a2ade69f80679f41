import json

import numpy as np
import pytest

from chemofv import cli
from chemofv.cli import (
    EXIT_BLOWUP,
    EXIT_CERTIFICATE,
    EXIT_DEADCORE,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    Outcome,
    format_snapshot,
    main,
    parse_snapshot,
)
from chemofv.config import load_config, read_config_text
from chemofv.stepper import ExitReason, RunResult, SimState

FAST = """\
[grid]
cells_x = 16

[model]
diffusion = porous_medium
m = 2
chi = 1

[stepper]
t_end = 0.02

[initial]
u0 = cosine_bump
u0_level = 0.6
u0_amplitude = 0.3
v0 = gaussian
v0_offset = 0.5
v0_amplitude = 0.5
v0_width = 0.1

[probes]
record_every = 2
snapshot_times = 0.005, 0.01, 0.015, 0.02
holder_theta = 0.5

[output]
directory = ignored
prefix = fast
"""


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv("SIM_OUTPUT_DIR", str(d))
    return d


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_writes_outputs(tmp_path, outdir):
    assert main(["run", write(tmp_path, FAST)]) == EXIT_OK
    names = sorted(p.name for p in outdir.iterdir())
    assert "fast_probes.csv" in names and "fast_summary.json" in names
    assert sum(n.startswith("fast_u_") for n in names) == 4
    summary = json.loads((outdir / "fast_summary.json").read_text())
    for key in ("A", "B", "delta_u", "K2", "C_S", "M_u", "T", "min_margin", "holds", "tolerance",
                "C1", "lambda1", "gradient_bound_holds", "K_u0", "K_v0"):
        assert key in summary
    assert summary["holds"] is True and summary["T"] == 0.02
    assert summary["tolerance_source"].startswith("heuristic")
    assert summary["holder_seminorm"] > 0
    csv = (outdir / "fast_probes.csv").read_bytes()
    assert b"\r" not in csv and csv.startswith(b"t,min_u,max_u")
    t, vals = parse_snapshot((outdir / "fast_u_0003.txt").read_text())
    assert t == 0.02 and vals.shape == (16,)


def test_blowup_exit(tmp_path, outdir):
    text = FAST.replace("t_end = 0.02", "t_end = 0.02\nblowup_threshold = 1.0").replace(
        "u0_level = 0.6\nu0_amplitude = 0.3", "u0_level = 1.5\nu0_amplitude = 0.5")
    assert main(["run", write(tmp_path, text)]) == EXIT_BLOWUP
    summary = json.loads((outdir / "fast_summary.json").read_text())
    assert summary["exit_reason"] == "blow_up" and summary["t_max_proxy"] == 0.0


def test_deadcore_exit(tmp_path, outdir):
    text = FAST.replace("t_end = 0.02", "t_end = 0.02\ndeadcore_epsilon = 0.35")
    assert main(["run", write(tmp_path, text)]) == EXIT_DEADCORE


def test_malformed_config_exit(tmp_path, capsys, outdir):
    assert main(["run", write(tmp_path, FAST.replace("m = 2", "m = two"))]) == EXIT_USAGE
    assert "line 6" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["fly", "x"], ["run"], ["run", "/no/such/file.ini"]])
def test_usage_errors(argv, outdir):
    assert main(argv) == EXIT_USAGE


def test_convergence_levels_must_be_two(outdir):
    assert main(["convergence", "heat_mms", "--levels", "1"]) == EXIT_USAGE


def test_convergence_needs_reference(tmp_path, outdir):
    assert main(["convergence", write(tmp_path, FAST), "--levels", "2"]) == EXIT_USAGE


def test_convergence_table(tmp_path, outdir, capsys):
    assert main(["convergence", "heat_mms", "--levels", "2"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ",".join(cli.CONVERGENCE_COLUMNS)
    assert float(out[2].split(",")[6]) > 1.8
    assert (outdir / "heat_mms_convergence.csv").exists()


def test_barenblatt_support_guard(tmp_path, outdir):
    text = read_config_text("barenblatt_pm2").replace("t_end = 0.05", "t_end = 2.0")
    assert main(["convergence", write(tmp_path, text), "--levels", "2"]) == EXIT_USAGE


def test_validate_model_exit_codes(tmp_path, capsys):
    assert main(["validate-model", write(tmp_path, FAST)]) == EXIT_OK
    dip = FAST.replace("diffusion = porous_medium\nm = 2", "diffusion = custom\ntable = 0:0, 0.5:1, 1:0.4, 2:2")
    assert main(["validate-model", write(tmp_path, dip, "dip.ini")]) == EXIT_CERTIFICATE
    assert "D_nondecreasing" in capsys.readouterr().out
    lin = FAST.replace("diffusion = porous_medium\nm = 2", "diffusion = linear\np = 1.5")
    assert main(["validate-model", write(tmp_path, lin, "lin.ini")]) == EXIT_OK


def test_certify_prints_summary(tmp_path, capsys):
    assert main(["certify", write(tmp_path, FAST)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["holds"] is True


def test_degenerate_reference_run(outdir):
    assert main(["run", "barenblatt_pm2"]) == EXIT_OK
    summary = json.loads((outdir / "barenblatt_pm2_summary.json").read_text())
    assert summary["holds"] is None


@pytest.mark.parametrize(
    "reason, holds, code",
    [
        (ExitReason.COMPLETED, True, EXIT_OK),
        (ExitReason.COMPLETED, False, EXIT_CERTIFICATE),
        (ExitReason.BLOW_UP, None, EXIT_BLOWUP),
        (ExitReason.DEAD_CORE, None, EXIT_DEADCORE),
        (ExitReason.CFL_VIOLATION, None, EXIT_NUMERICAL),
        (ExitReason.SOLVER_FAILURE, None, EXIT_NUMERICAL),
        (ExitReason.NONFINITE, None, EXIT_NUMERICAL),
    ],
)
def test_exit_code_contract(reason, holds, code):
    cert = None
    if holds is not None:
        cert = type("Cert", (), {"holds": holds})()
    res = RunResult(None, [], reason, SimState(None, None))
    out = Outcome(None, res, 1.0, 1.0, cert, None, None, "")
    assert out.exit_code == code


def test_exit_codes_cover_every_reason():
    codes = {r: Outcome(None, RunResult(None, [], r, SimState(None, None)), 0, 0, None, None, None, "").exit_code
             for r in ExitReason}
    assert set(codes.values()) <= {EXIT_OK, EXIT_BLOWUP, EXIT_DEADCORE, EXIT_NUMERICAL}
    assert codes[ExitReason.COMPLETED] == EXIT_OK


def test_snapshot_format_2d():
    vals = np.arange(6.0).reshape(2, 3) / 7
    text = format_snapshot(0.1, vals)
    assert text.splitlines()[0] == "# t=0.1 nx=2 ny=3"
    t, back = parse_snapshot(text)
    assert t == 0.1
    np.testing.assert_array_equal(back, vals)
