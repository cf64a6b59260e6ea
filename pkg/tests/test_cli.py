"""End-to-end CLI behavior: tables, artifacts, config merging, exit codes."""

import json
import os

import pytest

from wfgem.cli import main


def _read(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def _manifest(out_dir):
    return json.loads(_read(os.path.join(out_dir, "manifest.json")))


# ---------------------------------------------------------------------------
# constants


def test_constants_wf_table(capsys):
    assert main(["constants", "--a", "0.5", "--b", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "K" in out
    assert "0.5" in out
    assert "harnack_regime" in out


def test_constants_requires_parameters(capsys):
    assert main(["constants"]) == 3
    assert "config error" in capsys.readouterr().err


def test_constants_requires_both_a_and_b(capsys):
    assert main(["constants", "--a", "0.5"]) == 3


def test_constants_writes_json_when_out_dir_given(tmp_path, capsys):
    out = str(tmp_path / "c")
    assert main(["constants", "--a", "1.0", "--b", "2.0", "--out-dir", out]) == 0
    doc = json.loads(_read(os.path.join(out, "constants.json")))
    # K(1, 2) = (sqrt(21) + 5)/4, rendered at 12 significant digits
    assert float(doc["wright_fisher"]["K"]) == pytest.approx(
        (21.0**0.5 + 5.0) / 4.0, rel=1e-11
    )
    assert _manifest(out)["command"] == "constants"


def test_constants_sequence_table(capsys):
    assert main(["constants", "--alpha", "0.5", "--theta", "0.0", "--t", "1.0"]) == 0
    out = capsys.readouterr().out
    assert "lambda_inf" in out
    assert "gamma_quadratic_c" in out
    assert "beta(" in out


def test_constants_divergent_gamma_degrades_gracefully(capsys):
    # alpha=0 has constant curvature: the series diverges, the row says so
    assert main(["constants", "--alpha", "0.0", "--theta", "1.0"]) == 0
    out = capsys.readouterr().out
    assert "unavailable" in out


# ---------------------------------------------------------------------------
# kernel


def test_kernel_writes_csv_and_png(tmp_path):
    out = str(tmp_path / "k")
    rc = main(
        ["kernel", "--a", "0.5", "--b", "0.5", "--t", "0.5",
         "--grid-n", "5", "--n-basis", "20", "--out-dir", out]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "kernel.csv")).splitlines()
    assert lines[0] == "t,x,y,value,trunc_err"
    assert len(lines) == 1 + 25
    assert os.path.exists(os.path.join(out, "kernel.png"))


def test_kernel_no_plots_suppresses_png(tmp_path):
    out = str(tmp_path / "k")
    rc = main(
        ["kernel", "--t", "0.5", "--grid-n", "3", "--n-basis", "16",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    assert os.path.exists(os.path.join(out, "kernel.csv"))
    assert not os.path.exists(os.path.join(out, "kernel.png"))


def test_kernel_product_mode(tmp_path, capsys):
    out = str(tmp_path / "pk")
    rc = main(
        ["kernel", "--alpha", "0.5", "--theta", "1.0", "--n-coords", "2",
         "--t", "1.0", "--n-basis", "20",
         "--x", "0.3,0.5", "--y", "0.4,0.6", "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    doc = json.loads(_read(os.path.join(out, "product_kernel.json")))
    assert float(doc["value"]) > 0
    assert float(doc["tail_lower"]) <= 1.0 <= float(doc["tail_upper"])


def test_kernel_product_mode_needs_coordinates(capsys):
    assert main(["kernel", "--alpha", "0.5", "--theta", "1.0"]) == 3


# ---------------------------------------------------------------------------
# simulate / couple / gem-sample


def test_simulate_single_path(tmp_path):
    out = str(tmp_path / "s")
    rc = main(
        ["simulate", "--x0", "0.4", "--T", "0.02", "--dt", "0.001",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "path.csv")).splitlines()
    assert lines[0] == "t,state"
    assert len(lines) == 1 + 21
    assert _manifest(out)["command"] == "simulate"


def test_simulate_ensemble_histogram(tmp_path):
    out = str(tmp_path / "e")
    rc = main(
        ["simulate", "--n-paths", "8", "--T", "0.01", "--dt", "0.001",
         "--bins", "8", "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "histogram.csv")).splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    counts = [int(float(l.split(",")[2])) for l in lines[1:]]
    assert sum(counts) == 10 * 8


def test_simulate_gem_mode(tmp_path):
    out = str(tmp_path / "g")
    rc = main(
        ["simulate", "--alpha", "0.5", "--theta", "1.0", "--n-coords", "2",
         "--T", "0.01", "--dt", "0.001", "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "gem_path.csv")).splitlines()
    assert lines[0] == "t,x1,x2,mass1,mass2,remainder"


def test_couple_single_pair(tmp_path, capsys):
    out = str(tmp_path / "cp")
    rc = main(
        ["couple", "--x0", "0.3", "--y0", "0.7", "--T", "0.05", "--dt", "0.001",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "coupling.csv")).splitlines()
    assert lines[0] == "t,x,y,rho,envelope"
    assert "envelope violations" in capsys.readouterr().out


def test_couple_ensemble_summary(tmp_path, capsys):
    out = str(tmp_path / "ce")
    rc = main(
        ["couple", "--x0", "0.45", "--y0", "0.55", "--T", "1.0", "--dt", "0.01",
         "--n-paths", "16", "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    doc = json.loads(_read(os.path.join(out, "couple.json")))
    assert 0.0 <= doc["coupled_fraction"] <= 1.0
    assert doc["girsanov_bound"] > 1.0


def test_gem_sample_csv(tmp_path, capsys):
    out = str(tmp_path / "gs")
    rc = main(
        ["gem-sample", "--alpha", "0.0", "--theta", "1.0", "--n-sticks", "8",
         "--seed", "3", "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    lines = _read(os.path.join(out, "gem_sample.csv")).splitlines()
    assert lines[0] == "i,mass,remainder"
    assert len(lines) == 9
    last = lines[-1].split(",")
    # mass_n + remainder_n = remainder_{n-1}; all remainders in (0,1)
    assert 0.0 < float(last[2]) < 1.0
    assert "expected" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# verify


def test_verify_list_names(capsys):
    assert main(["verify", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 15
    assert "harnack1d" in names
    assert "product-kernel" in names


def test_verify_single_check_override(tmp_path, capsys):
    out = str(tmp_path / "v")
    rc = main(
        ["verify", "harnack1d", "--a", "0.5", "--b", "0.5", "--p", "2", "--t", "0.5",
         "--out-dir", out]
    )
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "PASS" in stdout
    assert "harnack1d[override]" in stdout
    for f in ("report.json", "summary.csv", "margins.png", "manifest.json"):
        assert os.path.exists(os.path.join(out, f)), f
    lines = _read(os.path.join(out, "summary.csv")).splitlines()
    assert lines[0] == "check,params_hash,margin,status"
    assert lines[1].startswith("harnack1d,")


def test_verify_report_is_deterministic(tmp_path):
    out1 = str(tmp_path / "r1")
    out2 = str(tmp_path / "r2")
    args = ["verify", "poincare", "ball-volume", "--scale", "desk",
            "--seed", "11", "--no-plots"]
    assert main(args + ["--out-dir", out1]) == 0
    assert main(args + ["--out-dir", out2]) == 0
    assert _read(os.path.join(out1, "report.json")) == _read(
        os.path.join(out2, "report.json")
    )


def test_verify_unknown_check_is_config_error(tmp_path, capsys):
    assert main(["verify", "bogus-check", "--out-dir", str(tmp_path)]) == 3
    assert "config error" in capsys.readouterr().err


def test_verify_override_rejected_for_unparameterized_check(tmp_path, capsys):
    rc = main(["verify", "phi-psi", "--a", "0.5", "--out-dir", str(tmp_path)])
    assert rc == 3


def test_verify_override_rejects_disallowed_field(tmp_path):
    # poincare takes a/b only, not t
    assert main(["verify", "poincare", "--t", "0.7", "--out-dir", str(tmp_path)]) == 3


def test_verify_override_needs_single_check(tmp_path):
    rc = main(
        ["verify", "poincare", "ball-volume", "--a", "0.5", "--out-dir", str(tmp_path)]
    )
    assert rc == 3


def test_verify_manifest_runtimes(tmp_path):
    out = str(tmp_path / "vm")
    assert main(
        ["verify", "poincare", "--scale", "desk", "--out-dir", out, "--no-plots"]
    ) == 0
    man = _manifest(out)
    assert man["command"] == "verify"
    assert man["status"] == "PASS"
    assert "total" in man["runtimes_s"]
    assert set(man["versions"]) == {"python", "numpy", "scipy", "package"}


# ---------------------------------------------------------------------------
# config file handling


def test_config_section_applied(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("seed: 7\nsimulate:\n  T: 0.02\n  store-every: 2\n")
    out = str(tmp_path / "s")
    rc = main(
        ["simulate", "--config", str(cfg), "--dt", "0.001",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    conf = _manifest(out)["config"]
    assert conf["T"] == 0.02
    assert conf["store_every"] == 2
    assert conf["seed"] == 7


def test_config_flags_win(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("simulate:\n  T: 0.02\n")
    out = str(tmp_path / "s")
    rc = main(
        [f"--config={cfg}", "simulate", "--T", "0.03", "--dt", "0.001",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0
    assert _manifest(out)["config"]["T"] == 0.03


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("simulate:\n  bogus: 1\n")
    assert main(["simulate", "--config", str(cfg)]) == 3
    assert "simulate.bogus" in capsys.readouterr().err


def test_config_unknown_section_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("simulated:\n  T: 0.02\n")
    assert main(["simulate", "--config", str(cfg)]) == 3


def test_config_non_mapping_root_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("- 1\n- 2\n")
    assert main(["simulate", "--config", str(cfg)]) == 3
    assert "mapping" in capsys.readouterr().err


def test_config_missing_file_rejected(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == 3
    assert "not found" in capsys.readouterr().err


def test_config_empty_file_ok(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("")
    out = str(tmp_path / "s")
    rc = main(
        ["simulate", "--config", str(cfg), "--T", "0.01", "--dt", "0.001",
         "--out-dir", out, "--no-plots"]
    )
    assert rc == 0


def test_config_top_level_no_plots(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("no_plots: true\n")
    out = str(tmp_path / "k")
    rc = main(
        ["kernel", "--config", str(cfg), "--grid-n", "3", "--n-basis", "16",
         "--out-dir", out]
    )
    assert rc == 0
    assert not os.path.exists(os.path.join(out, "kernel.png"))


# ---------------------------------------------------------------------------
# top-level dispatch


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "wfgem" in capsys.readouterr().out


def test_bad_choice_exits_three(capsys):
    assert main(["simulate", "--scheme", "bogus"]) == 3


def test_missing_subcommand_exits_three(capsys):
    assert main([]) == 3
