import csv
import json

import numpy as np
import pytest

from mgmcast.cli import main, make_config, parse_list, CliError
from mgmcast.harness import (AlgoSpec, ExperimentConfig, alpha_cdf_rows, fmt, mean_trace, run,
                             summarize)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _cfg(tmp_path, scenario="sweep_snr", name="out.csv", **kw):
    base = dict(M=2, K=2, L=1, snr_db=(10.0,), realizations=2, seed=3,
                algorithms=(AlgoSpec("wmmse2"), AlgoSpec("zf")), alpha_grid=(0.3, 0.6),
                output_path=str(tmp_path / name), max_iters=30)
    base.update(kw)
    return ExperimentConfig(scenario, **base)


def test_fmt():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(np.int64(4)) == "4" and fmt(True) == "1" and fmt("x") == "x"


def test_algo_parse():
    assert AlgoSpec.parse("WMMSE1-fixed=0.2").label == "WMMSE1-fixed(0.2)"
    assert AlgoSpec.parse("zf").label == "ZF"
    for bad in ("dpc", "wmmse1-fixed", "wmmse1-fixed=1.5"):
        with pytest.raises(ValueError):
            AlgoSpec.parse(bad)


@pytest.mark.parametrize("kw", [dict(realizations=0), dict(snr_db=()), dict(delta=(1.5,)),
                                dict(weights=(1, 2, 3, 4)), dict(solver="fast")])
def test_config_validation(tmp_path, kw):
    with pytest.raises(ValueError):
        _cfg(tmp_path, **kw)


def test_sweep_writes_rows_and_meta(tmp_path):
    written = run(_cfg(tmp_path, snr_db=(0.0, 10.0)))
    rows = _rows(written["results"])
    assert len(rows) == 2 * 2 * 2
    for r in rows:
        wsr = float(r["weighted_Ru_bits"]) + float(r["b"]) * float(r["R_c_bits"])
        assert float(r["wsr_bits"]) == pytest.approx(wsr, rel=1e-8)
    meta = json.loads(written["meta"].read_text())
    assert meta["config"]["realizations"] == 2


def test_deterministic_across_workers(tmp_path):
    a = run(_cfg(tmp_path, name="a.csv"))["results"].read_bytes()
    b = run(_cfg(tmp_path, name="b.csv", workers=2))["results"].read_bytes()
    assert a == b


def test_sweep_delta_lowers_rates(tmp_path):
    rows = _rows(run(_cfg(tmp_path, "sweep_delta", delta=(0.0, 0.5),
                          algorithms=(AlgoSpec("wmmse2"),)))["results"])
    for r0, r1 in zip(rows[::2], rows[1::2]):
        assert float(r1["wsr_bits"]) <= float(r0["wsr_bits"]) + 1e-12


def test_converge_traces(tmp_path):
    written = run(_cfg(tmp_path, "converge", algorithms=(AlgoSpec("wmmse2"),)))
    trace = _rows(written["trace"])
    assert trace[0]["iter"] == "0"
    mean = _rows(written["mean_trace"])
    assert all(r["runs"] == "2" for r in mean)


def test_mean_trace_holds_final_value():
    traces = [["A", 0, 0, 1.0, 0, 0], ["A", 0, 1, 2.0, 0, 0],
              ["A", 1, 0, 3.0, 0, 0], ["A", 1, 1, 4.0, 0, 0], ["A", 1, 2, 5.0, 0, 0]]
    out = mean_trace(traces, 10)
    assert [row[2] for row in out] == [2.0, 3.0, 3.5]


def test_alpha_cdf(tmp_path):
    written = run(_cfg(tmp_path, "alpha_cdf", algorithms=(AlgoSpec("zf"),), realizations=4))
    cdf = [float(r["cdf"]) for r in _rows(written["cdf"])]
    assert cdf == sorted(cdf) and cdf[-1] == 1.0
    rows = [[None, "ZF", 0, 0, 0, 15.0, 0, a] for a in (0.1, 0.3, 0.3)]
    assert [r[3] for r in alpha_cdf_rows(rows, [0.1, 0.2, 0.3])] == pytest.approx([1 / 3, 1 / 3, 1])


def test_alpha_cdf_needs_search(tmp_path):
    with pytest.raises(ValueError):
        _cfg(tmp_path, "alpha_cdf", algorithms=(AlgoSpec("wmmse2"),))


def test_summarize(tmp_path):
    path = run(_cfg(tmp_path, realizations=1))["results"]
    table = summarize([path])
    assert len(table) == 2
    assert all(e["n"] == 1 and e["wsr_bits_stderr"] == 0.0 for e in table)
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n")
        summarize([bad])


def test_parse_list():
    assert parse_list("0:30:10") == [0.0, 10.0, 20.0, 30.0]
    assert parse_list("1, 2,3", int) == [1, 2, 3]
    assert parse_list("0:0.6:0.1")[-1] == pytest.approx(0.6)
    for bad in ("", "1:2", "0:1:0"):
        with pytest.raises(CliError):
            parse_list(bad)


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    out = tmp_path / "r.csv"
    conf.write_text(f"# demo\nm = 2\nk = 2\nl = 1\nrealizations = 3\nsnr = 5\n"
                    f"algos = zf\nout = {out}\n")
    assert main(["sweep-snr", "--config", str(conf), "--realizations", "1"]) == 0
    rows = _rows(out)
    assert len(rows) == 1 and rows[0]["algorithm"] == "ZF"
    assert make_config("sweep-delta", {}).delta[-1] == pytest.approx(0.6)


def test_cli_errors(tmp_path, capsys):
    assert main(["sweep-snr", "--algos", "dpc", "--out", str(tmp_path / "x.csv")]) == 2
    assert "unknown algorithm" in capsys.readouterr().err
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = red\n")
    assert main(["converge", "--config", str(conf)]) == 2
    assert main(["sweep-snr", "--out", str(tmp_path / "missing" / "x.csv"), "--realizations", "1",
                 "--algos", "zf", "--snr", "0"]) == 2


def test_cli_complexity(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["complexity", "--m", "2,4", "--k", "2,4", "--l", "2", "--out", str(out)]) == 0
    rows = {(r["M"], r["K"]): (r["WMMSE1"], r["WMMSE2"]) for r in _rows(out)}
    assert rows[("2", "2")] == ("1113", "989") and rows[("4", "4")] == ("7033", "5929")
