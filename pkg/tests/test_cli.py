import csv
import io
import json

import mpmath as mp
import pytest

from xibrane import cli, xi
from xibrane.errors import UnknownKey


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def local_minima(zs, vals):
    return [zs[i] for i in range(1, len(vals) - 1) if vals[i] < vals[i - 1] and vals[i] < vals[i + 1]]


def test_defaults():
    cfg = cli.parse_config()
    assert (cfg.precision_digits, cfg.quadrature_tol, cfg.theta_window) == (50, 1e-30, 3.5)
    assert (cfg.zero_scan_T, cfg.zero_scan_step) == (100.0, 0.05)


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("digits=40\n")
    assert cli.parse_config(path).precision_digits == 40
    assert cli.parse_config(path, {"precision_digits": 80}).precision_digits == 80


def test_json_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"zero_scan": {"T": 50, "step": 0.1}, "seed": 3}))
    cfg = cli.parse_config(path)
    assert (cfg.zero_scan_T, cfg.zero_scan_step, cfg.seed) == (50.0, 0.1, 3)


def test_unknown_key_named(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("diggits=40\n")
    with pytest.raises(UnknownKey, match="diggits"):
        cli.parse_config(path)


def test_precision_floor():
    with pytest.raises(cli.ConfigTypeError):
        cli.parse_config(flags={"precision_digits": 20})


@pytest.mark.parametrize("text,value", [("1.5", mp.mpf("1.5")), ("-2.5j", mp.mpc(0, -2.5)),
                                        ("1+2j", mp.mpc(1, 2)), ("j", mp.mpc(0, 1))])
def test_parse_number(text, value):
    assert cli.parse_number(text) == value


def test_parse_number_rejects_garbage():
    with pytest.raises(cli.ConfigTypeError):
        cli.parse_number("abc")


def test_exit_code_config_error(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("diggits=40\n")
    code, _, err = run(["--config", str(path), "airy", "eval", "--z", "0"], capsys)
    assert code == 2
    assert json.loads(err)["error"]["code"].endswith("UnknownKey")


def test_exit_code_missing_file(tmp_path, capsys):
    code, _, _ = run(["--config", str(tmp_path / "nope.cfg"), "airy", "eval", "--z", "0"], capsys)
    assert code == 2


def test_exit_code_numeric(capsys):
    code, _, err = run(["--digits", "30", "xi", "eval", "--z", "10", "--route", "series", "--order", "3"], capsys)
    assert code == 3
    assert json.loads(err)["exit_code"] == 3


def test_exit_code_domain(capsys):
    code, _, err = run(["primes", "euler", "--z", "0"], capsys)
    assert code == 4
    assert json.loads(err)["error"]["code"] == "primes.ConvergenceDomainError"


def test_manifest_records_precision(tmp_path, capsys):
    out = tmp_path / "ai.csv"
    code, _, _ = run(["--digits", "40", "--tol", "1e-25", "--output", str(out), "airy", "eval", "--z", "1"], capsys)
    assert code == 0
    manifest = json.loads((tmp_path / "ai.csv.manifest.json").read_text())
    assert manifest["config"]["precision_digits"] == 40
    assert manifest["config"]["quadrature_tol"] == 1e-25
    assert manifest["effective"] == {"precision_digits": 40, "quadrature_tol": 1e-25}
    assert {"versions", "wall_time_s", "command"} <= manifest.keys()
    row = rows(out.read_text())[0]
    assert abs(mp.mpf(row["value"]) - mp.airyai(1)) < mp.mpf(10) ** -35


def test_byte_identical_outputs(tmp_path, capsys):
    texts = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert run(["--seed", "5", "--output", str(path), "mc", "expect", "--N", "3", "--samples", "2000"], capsys)[0] == 0
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]


def test_effective_tolerance_clamped():
    cfg = cli.parse_config(flags={"precision_digits": 30})
    assert cfg.effective_tol == 1e-20
    assert cli.parse_config().effective_tol == 1e-30


def test_json_output(capsys):
    code, out, _ = run(["--format", "json", "gamma", "recfact", "--z", "3"], capsys)
    assert code == 0
    assert abs(mp.mpf(json.loads(out)[0]["value"]) - mp.mpf(1) / 6) < mp.mpf(10) ** -20


def test_zero_cache_round_trip(tmp_path, capsys, monkeypatch):
    cache = tmp_path / "zeros.json"
    argv = ["--digits", "30", "--zero-cache", str(cache), "xi", "zeros", "--T", "30"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and cache.is_file()
    assert [p.name for p in tmp_path.iterdir()] == ["zeros.json"]
    assert abs(mp.mpf(rows(out)[0]["zero"]) - mp.im(mp.zetazero(1))) < mp.mpf(10) ** -20

    def boom(*a, **k):
        raise AssertionError("cache should have been used")

    monkeypatch.setattr(xi, "find_zeros", boom)
    assert run(argv, capsys)[1] == out
    with pytest.raises(AssertionError):
        run(["--digits", "40", "--zero-cache", str(cache), "xi", "zeros", "--T", "30"], capsys)


def test_xi_grid_minima_match_zeros(zeros100, capsys):
    code, out, _ = run(["--digits", "30", "xi", "grid"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 601
    zs = [float(r["z"]) for r in data]
    minima = local_minima(zs, [float(r["abs_xi"]) for r in data])
    inside = [float(z) for z in zeros100.up_to(30)]
    expected = sorted(inside + [-z for z in inside])
    assert len(minima) == len(expected)
    assert all(abs(a - b) <= 0.1 for a, b in zip(minima, expected))


def test_airy_grid_minima_negative(capsys):
    code, out, _ = run(["--digits", "30", "airy", "grid"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 401
    zs = [float(r["z"]) for r in data]
    minima = local_minima(zs, [float(r["abs_ai"]) for r in data])
    assert minima and all(z < 0 for z in minima)
    true = [float(mp.airyaizero(k)) for k in range(1, len(minima) + 1)]
    assert all(abs(a - b) <= 0.05 for a, b in zip(sorted(minima, reverse=True), true))


def test_compare_kernels(capsys):
    code, out, _ = run(["--digits", "30", "compare", "kernels"], capsys)
    assert code == 0
    row = rows(out)[0]
    assert float(row["max_gap"]) > 0.1
    assert {"phi_derived", "phi_paper_literal"} <= row.keys()


@pytest.mark.parametrize("argv", [
    ["airy", "zeros", "--count", "3"],
    ["brane", "eval", "--kernel", "airy", "--z", "0.3,-0.4"],
    ["pq", "sk", "--p", "3"],
    ["primes", "count", "--ell", "30"],
    ["gamma", "liouville", "--z=-1j"],
    ["mc", "sample", "--N", "3"],
    ["xi", "coeffs", "--n", "3"],
])
def test_commands_succeed(argv, capsys):
    code, out, _ = run(["--digits", "30"] + argv, capsys)
    assert code == 0 and rows(out)
