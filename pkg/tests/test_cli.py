import json

import pytest

from pstab.cli import RunConfig, main, parse_config


def run(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PSTAB_OUTPUT_DIR", str(tmp_path))
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_empty_argv_is_usage_error(capsys):
    assert main([]) == 2


def test_unknown_command_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_bad_flag_value_is_usage_error(capsys):
    assert main(["euler", "--s", "not-a-number"]) == 2
    assert main(["euler", "--cutoffs", "10,apple"]) == 2


def test_parse_complex_and_defaults():
    config = parse_config(["euler", "--s", "1.5"])
    assert config.s == 1.5 + 0j
    assert config.format == "csv"
    assert config.deterministic is True
    assert config.threads == 1


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("cutoffs=10,100\nformat=json\n# comment\nthreads=2\n")
    config = parse_config(["euler", "--config", str(cfg)])
    assert config.cutoffs == [10.0, 100.0]
    assert config.format == "json"
    assert config.threads == 2
    config = parse_config(["euler", "--config", str(cfg), "--cutoffs", "7"])
    assert config.cutoffs == [7.0]  # the flag wins


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("frobs=3\n")
    assert main(["euler", "--config", str(cfg)]) == 2


def test_descending_cutoffs_rejected():
    with pytest.raises(ValueError):
        RunConfig(command="euler", cutoffs=[100.0, 10.0])


def test_stabilize_artifact(tmp_path, monkeypatch, capsys):
    code, out, err = run(["stabilize", "--form", "delta", "-p", "2", "--format", "json"],
                         tmp_path, monkeypatch, capsys)
    assert code == 0
    payload = json.loads((tmp_path / "stabilize_delta_p2.json").read_text())
    assert payload["up_ratio"] == 1216.0
    assert payload["stab_ratio"] == 1.40625


def test_stabilize_needs_prime(tmp_path, monkeypatch, capsys):
    code, _, err = run(["stabilize", "--form", "delta"], tmp_path, monkeypatch, capsys)
    assert code == 2


def test_stabilize_bad_prime_is_module_error(tmp_path, monkeypatch, capsys):
    code, _, err = run(["stabilize", "--form", "cm32", "-p", "2"],
                       tmp_path, monkeypatch, capsys)
    assert code == 3
    assert "error" in err


def test_euler_hand_computed_product(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["euler", "--form", "cm32", "--cutoffs", "10"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    lines = (tmp_path / "euler_cm32_q.csv").read_text().strip().splitlines()
    value = float(lines[1].split(",")[1])
    expected = 1.0
    for p, ap in ((3, 0), (5, -2), (7, 0)):
        expected *= 1.0 / (1.0 - ap * p**-1.5 + p * p**-3.0)
    assert abs(value - expected) < 1e-14


def test_deterministic_reruns_are_byte_identical(tmp_path, monkeypatch, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        code, _, _ = run(["coeffs", "--form", "delta", "--max-n", "50",
                          "--output", str(out)], tmp_path, monkeypatch, capsys)
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()

    for out in (out1, out2):
        code, _, _ = run(["euler", "--form", "cm32", "--cutoffs", "10,100,1000",
                          "--output", str(out)], tmp_path, monkeypatch, capsys)
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_satake_artifact(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["satake", "--form", "cm32", "-p", "5", "--format", "json"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    payload = json.loads((tmp_path / "satake_cm32_p5.json").read_text())
    assert payload["lambda"] == -2.0


def test_petersson_level1_artifact(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["petersson", "--form", "delta", "--format", "json"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    payload = json.loads((tmp_path / "petersson_level1.json").read_text())
    assert abs(payload["value"] - 1.0354e-6) < 1e-9
    assert payload["schema"] == 1


def test_coeffs_csv_format(tmp_path, monkeypatch, capsys):
    code, _, _ = run(["coeffs", "--form", "cm32", "--max-n", "25"],
                     tmp_path, monkeypatch, capsys)
    assert code == 0
    lines = (tmp_path / "coeffs_cm32_25.csv").read_text().strip().splitlines()
    assert lines[0] == "n,a_n"
    assert lines[25] == "25,-1"


def test_sym2_with_reference_column(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["sym2", "--form", "delta", "--cutoffs", "100,1000"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    lines = (tmp_path / "sym2_delta.csv").read_text().strip().splitlines()
    assert lines[0] == "cutoff,re,im,abs_error"
    err_100 = float(lines[1].split(",")[3])
    err_1000 = float(lines[2].split(",")[3])
    assert err_1000 < err_100  # drifting toward the bridge reference


def test_hida_artifact(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["hida", "--form", "delta", "--format", "json"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    payload = json.loads((tmp_path / "hida_delta.json").read_text())
    assert 0.6 < payload["sym2_value_at_weight"] < 0.7


def test_factorize_small_cutoffs(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["factorize", "--form", "delta", "--cutoffs", "100,1000"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    lines = (tmp_path / "factorize_delta.csv").read_text().strip().splitlines()
    assert lines[0].startswith("cutoff,rhs,quadrature_norm,rel_gap")
    gap_100 = float(lines[1].split(",")[3])
    gap_1000 = float(lines[2].split(",")[3])
    assert gap_1000 < gap_100


def test_appendix_example_via_env_dir(tmp_path, monkeypatch, capsys):
    code, out, _ = run(["appendix-example", "--threads", "2"],
                       tmp_path, monkeypatch, capsys)
    assert code == 0
    assert (tmp_path / "appendix_example.csv").exists()
    assert "0.826" in out
