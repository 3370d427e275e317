import io

import pytest

from assetflow.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_stability():
    code, out = run("stability", "--scenario", "oil_nigeria_libya")
    assert code == 0
    assert out.startswith("# classification: stable")
    assert "index,real,imag" in out


def test_simulate_writes_files(tmp_path):
    csv, svg = tmp_path / "t.csv", tmp_path / "t.svg"
    code, out = run("simulate", "--scenario", "oil_nigeria_libya", "--t-end", "20",
                    "--out", str(csv), "--svg", str(svg))
    assert code == 0
    assert csv.read_text().startswith("t,P.nigeria,P.libya,zeta1.nigeria.usa")
    assert svg.read_text().startswith("<svg")
    assert out.splitlines()[0].startswith("nigeria,amplitude=")


def test_simulate_to_stdout():
    code, out = run("simulate", "--scenario", "oil_nigeria_libya", "--t-end", "1", "--mode", "fixed")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 12
    assert "M.usa" not in lines[0]


def test_equilibrium_and_calibrate(tmp_path):
    code, out = run("equilibrium", "--scenario", "oil_nigeria_libya", "--initial", "96", "96")
    assert code == 0 and "# kind: fundamental" in out
    dest = tmp_path / "c.yaml"
    code, _ = run("calibrate", "--scenario", "oil_nigeria_libya", "--out", str(dest))
    assert code == 0 and "221875.0" in dest.read_text()


def test_print_effective():
    code, out = run("scenario", "print-effective", "--scenario", "oil_nigeria_libya")
    assert code == 0 and "trend_weights" in out and "calibrate: false" in out


def test_wealth_stats():
    code, out = run("wealth-stats", "--scenario", "oil_nigeria_libya", "--t-end", "50")
    assert code == 0 and out.splitlines()[0] == "group,mean,std,min,max"


def test_bifurcate(tmp_path):
    csv, svg = tmp_path / "d.csv", tmp_path / "d.svg"
    code, out = run("bifurcate", "--scenario", "oil_nigeria_libya", "--param", "groups.china.q1",
                    "--range", "0.3:0.4", "--points", "2", "--t-end", "40", "--out", str(csv), "--svg", str(svg))
    assert code == 0
    assert out.startswith("threshold_eigen,0.32")
    assert "# initial_prices: [82.0, 80.5]" in csv.read_text()
    assert 'class="threshold"' in svg.read_text()


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["bifurcate", "--scenario", "oil_nigeria_libya", "--range", "a:b"])
    assert info.value.code == 1
    code, _ = run("bifurcate", "--scenario", "oil_nigeria_libya", "--param", "groups.india.q1")
    assert code == 1
    assert "groups.india.q1" in capsys.readouterr().err


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model:\n  assets: [{name: x, fundamental_price: 1.0}]\n"
                   "  groups: [{name: g, cash: 1.0, q1: -0.1}]\n")
    code, _ = run("stability", "--scenario", str(bad))
    assert code == 2
    assert "model.groups[0].q1" in capsys.readouterr().err


def test_numerical_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model:\n  assets: [{name: x, fundamental_price: 1.0}]\n"
                   "  groups: [{name: g, cash: 1.0, rates: {baseline_sell: 0.0}}]\n")
    code, _ = run("stability", "--scenario", str(bad))
    assert code == 3
