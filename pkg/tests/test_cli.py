import json

import pytest

from localbirch.cli import main


def run_cli(args, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(args + ["-o", str(out)])
    return code, json.loads(out.read_text())


def strip_timing(report):
    report = dict(report)
    report.pop("timing", None)
    return report


def test_birch_command_small(tmp_path):
    code, rep = run_cli(
        ["birch", "--n", "1", "--p", "3", "--m", "1", "--l", "3"], tmp_path
    )
    assert code == 0
    assert rep["all_pass"] and rep["campaign"]["characters"] == 1
    assert rep["config"]["n"] == 1 and rep["artifact_version"]


def test_birch_command_vacuous(tmp_path):
    code, rep = run_cli(
        ["birch", "--n", "1", "--p", "2", "--m", "1", "--l", "3"], tmp_path
    )
    assert code == 0
    assert "vacuous" in rep["campaign"]


def test_birch_rejects_bad_level(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["birch", "--n", "2", "--p", "3", "--m", "1", "--l", "3"])
    assert err.value.code == 2


def test_birch_missing_args_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["birch", "--n", "1"])
    assert err.value.code == 2


def test_identities_command(tmp_path):
    code, rep = run_cli(
        ["identities", "--max-n", "2", "--samples", "5"], tmp_path
    )
    assert code == 0 and rep["all_pass"]


def test_identities_corruption_flag(tmp_path):
    code, rep = run_cli(
        ["identities", "--max-n", "1", "--samples", "2", "--selftest-corrupt"],
        tmp_path,
    )
    assert code == 1
    assert not rep["all_pass"]
    assert "selftest" in rep["witnesses"]


def test_hecke_command(tmp_path):
    code, rep = run_cli(["hecke", "--n", "2", "--p", "2"], tmp_path)
    assert code == 0 and rep["all_pass"]
    # nu (n - 2 nu - 1) for nu = 1, 2 at n = 2
    gaps = [entry["normalization_gap_qh"] for entry in rep["satake"]]
    assert gaps == [-1, -6]


def test_measures_command(tmp_path):
    code, rep = run_cli(["measures", "--p", "3", "--depth", "3"], tmp_path)
    assert code == 0 and rep["all_pass"]
    assert rep["orders"]["dirac"] == "bounded"


def _rerun_bytes(args, tmp_path):
    # identical config (including the output path): rerun and compare the
    # serialized reports byte for byte, timing stripped
    out = tmp_path / "report.json"
    texts = []
    for _ in range(2):
        main(args + ["-o", str(out)])
        rep = strip_timing(json.loads(out.read_text()))
        texts.append(json.dumps(rep, indent=2, sort_keys=True))
    return texts


def test_determinism_byte_identical(tmp_path):
    a, b = _rerun_bytes(["identities", "--max-n", "2", "--samples", "8", "--seed", "5"], tmp_path)
    assert a == b
    c, d = _rerun_bytes(["measures", "--p", "2", "--depth", "3", "--seed", "9"], tmp_path)
    assert c == d


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
