import json

import pytest

from ldist.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coeffs(capsys):
    code, out, _ = _run(capsys, "coeffs", "--sigma", "0.75")
    assert code == EXIT_OK
    d = json.loads(out)
    c = d["coefficients"]
    assert c["a"]["0.75,0,0"] == "2.4717245537395387"
    assert float(c["frak_a0"]) == pytest.approx(float(c["gsigma"]) / 4, rel=1e-9)
    assert d["metadata"]["config"]["sigma"] == "0.75"
    assert "numpy" in d["metadata"]["versions"]


def test_coeffs_csv(capsys):
    code, out, _ = _run(capsys, "coeffs", "--sigma", "0.9", "--format", "csv")
    assert code == EXIT_OK
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert rows[0] == "table,sigma,n,m,value" and len(rows) == 19


def test_not_prime(capsys):
    code, _, err = _run(capsys, "discrepancy", "--q", "8")
    assert code == EXIT_INVALID and "NotPrime" in err


@pytest.mark.parametrize("argv", [["saddle", "--sigma", "1.5"], ["empirical"], ["mc", "--samples", "0"],
                                  ["saddle", "--tau-min", "3", "--tau-max", "2"], ["saddle", "--format", "text"]])
def test_validation_errors(capsys, argv):
    assert _run(capsys, *argv)[0] == EXIT_INVALID


def test_unwritable_output(capsys, tmp_path):
    code, _, err = _run(capsys, "coeffs", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == EXIT_INVALID


def test_nonconvergence_exit(capsys):
    code, _, err = _run(capsys, "saddle", "--tau-min", "1e5", "--tau-steps", "1")
    assert code == EXIT_NUMERICAL and "ConvergenceError" in err


@pytest.mark.parametrize("argv", [
    ["mc", "--samples", "20000", "--seed", "5", "--y", "1000"],
    ["mc", "--samples", "20000", "--seed", "5", "--y", "1000", "--format", "json"],
    ["saddle", "--tau-steps", "3"],
    ["empirical", "--q", "1009", "--format", "json"],
    ["discrepancy", "--q", "1009", "--grid", "16"],
    ["kernel-test", "--samples", "50", "--seed", "2"],
])
def test_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_threads_flag_and_env(tmp_path, monkeypatch):
    argv = ["mc", "--samples", "5000", "--y", "1000"]
    assert main(argv + ["--threads", "1", "--out", str(tmp_path / "a")]) == EXIT_OK
    monkeypatch.setenv("LDIST_THREADS", "1")
    assert main(argv + ["--out", str(tmp_path / "b")]) == EXIT_OK
    body = lambda p: [ln for ln in p.read_text().splitlines() if not ln.startswith("#")]  # noqa: E731
    assert body(tmp_path / "a") == body(tmp_path / "b")


def test_mc_csv_layout(capsys):
    code, out, _ = _run(capsys, "mc", "--samples", "1000", "--y", "100", "--tau-min", "0", "--tau-steps", "2")
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == EXIT_OK and rows[0] == "tau,prob,std_err" and len(rows) == 3


def test_empirical_csv(capsys):
    code, out, _ = _run(capsys, "empirical", "--q", "1009", "--tau-min", "1", "--tau-steps", "1")
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == EXIT_OK and rows[0] == "tau,phi,psi,ratio,deviation"
    assert "exceptional_fraction" in out


def test_kernel_test(capsys):
    code, out, _ = _run(capsys, "kernel-test", "--samples", "100", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["metadata"]["bound_holds"] is True
    assert float(d["metadata"]["measured_constant"]) <= 4


def test_selftest_subset(capsys):
    code, out, err = _run(capsys, "selftest", "--criteria", "1,4,11")
    assert code == EXIT_OK
    assert out.count("[PASS]") == 3 and "3/3 criteria passed" in out
