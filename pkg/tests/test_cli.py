import json

import pytest

from convbound.cli import main, parse_budget, parse_kinds
from convbound.dataflow import DataflowKind, KIND_ORDER
from convbound.workload import ConvLayer, Workload, workload_to_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def small_workload_file(tmp_path, **kw):
    layer = ConvLayer("l0", co=kw.get("co", 8), ci=kw.get("ci", 4),
                      ho=kw.get("ho", 6), wo=kw.get("wo", 6))
    path = tmp_path / "wl.json"
    path.write_text(workload_to_json(Workload(layers=(layer,), batch=1)))
    return path, layer


def test_parse_budget_units():
    assert parse_budget("1024").s_words == 1024
    assert parse_budget("173.5KB").s_words == 88832
    assert parse_budget("16kb").s_words == 8192
    with pytest.raises(Exception):
        parse_budget("0")


def test_parse_kinds():
    assert parse_kinds(None) == KIND_ORDER
    assert parse_kinds("proposed,wtr_a") == (DataflowKind.PROPOSED,
                                             DataflowKind.WTR_A)
    with pytest.raises(SystemExit):
        parse_kinds("bogus")


def test_bound_reference_total(capsys):
    code, out, _ = run_cli(capsys, "bound", "--workload", "vgg16",
                           "--batch", "3", "--budget", "173.5KB")
    assert code == 0
    assert out.startswith("# schema=convbound-bound-v1\n")
    total = [l for l in out.splitlines() if l.startswith("TOTAL")][0]
    mb = float(total.split(",")[-1])
    assert abs(mb - 274.8) / 274.8 < 0.02


def test_bound_single_layer_matches_library(capsys, tmp_path):
    from convbound.bounds import MemoryBudget, offchip_lower_bound

    path, layer = small_workload_file(tmp_path)
    code, out, _ = run_cli(capsys, "bound", "--workload", str(path),
                           "--budget", "500")
    assert code == 0
    row = out.splitlines()[2].split(",")
    assert int(row[2]) == offchip_lower_bound(layer, 1, MemoryBudget(500))


def test_csv_determinism(capsys, tmp_path):
    args = ("compare", "--workload", "vgg16", "--batch", "3",
            "--budget", "32KB", "--kinds", "proposed,inr_a")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2
    target = tmp_path / "sweep.csv"
    code = main(list(args) + ["--out", str(target)])
    assert code == 0
    assert target.read_text() == out1


def test_compare_single_kind_columns(capsys, tmp_path):
    path, _ = small_workload_file(tmp_path)
    code, out, _ = run_cli(capsys, "compare", "--workload", str(path),
                           "--budget", "400", "--kinds", "proposed")
    assert code == 0
    rows = [l for l in out.splitlines() if l.startswith("l0")]
    assert len(rows) == 1 and rows[0].split(",")[1] == "proposed"


def test_simulate_report_and_functional(capsys, tmp_path):
    path, _ = small_workload_file(tmp_path)
    code, out, _ = run_cli(capsys, "simulate", "--workload", str(path),
                           "--hw", "1", "--functional", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# schema=convbound-simulate-v1"
    total = [l for l in lines if l.startswith("TOTAL")][0]
    assert total.split(",")[-1] == "True"


def test_simulate_hw_file(capsys, tmp_path):
    path, _ = small_workload_file(tmp_path)
    hw_path = tmp_path / "hw.json"
    hw_path.write_text(json.dumps({
        "p": 8, "q": 8, "lreg_words_per_pe": 32, "igbuf_words": 1024,
        "wgbuf_words": 256, "greg_words": 1024, "pg": 2, "qg": 2}))
    code, out, _ = run_cli(capsys, "simulate", "--workload", str(path),
                           "--hw", str(hw_path))
    assert code == 0 and "TOTAL" in out


def test_bad_configs_exit_nonzero(capsys, tmp_path):
    code, _, err = run_cli(capsys, "bound", "--workload",
                           str(tmp_path / "missing.json"), "--budget", "100")
    assert code == 2 and "error" in err
    with pytest.raises(SystemExit):
        main(["bound", "--workload", "vgg16", "--budget", "0KB"])
    with pytest.raises(SystemExit):
        main(["simulate", "--hw", "9"])
