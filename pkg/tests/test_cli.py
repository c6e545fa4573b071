import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from spinhelix.cli import ConfigError, Eta, emit_texture_csv, main, resolve_config, run
from spinhelix.elliptic import EllipticContext
from spinhelix.helix import build_shs, local_vector, texture, ProductState
from spinhelix.lattice import build_lattice
from spinhelix.model import ModelSpec
from spinhelix.spin import build_spin_rep


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_meta(doc):
    return {k: v for k, v in doc.items() if k != "metadata"}


class TestEta:
    @pytest.mark.parametrize("text,a,b", [
        ("2/11", Fraction(2, 11), 0),
        ("1/3*tau", 0, Fraction(1, 3)),
        ("tau/6", 0, Fraction(1, 6)),
        ("1/2-tau", Fraction(1, 2), -1),
        ("-2*tau/6+1/3", Fraction(1, 3), Fraction(-1, 3)),
        ("0.5", Fraction(1, 2), 0),
    ])
    def test_exact_parse(self, text, a, b):
        e = Eta.parse(text)
        assert e.exact and e.rational == a and e.tau_coeff == b
        assert Eta.parse(e.to_json()) == e

    @pytest.mark.parametrize("raw,val", [("0.2,0.1", 0.2 + 0.1j), ([0.3, -0.2], 0.3 - 0.2j), (0.25, 0.25)])
    def test_numeric(self, raw, val):
        e = Eta.parse(raw)
        assert not e.exact and e.value(0.8j) == val

    def test_bad(self):
        with pytest.raises(ConfigError):
            Eta.parse("banana")

    def test_exact_lattice_point(self):
        assert Eta.parse("10/27*tau").lattice_point(27) == (5, 0)
        assert Eta.parse("2/11").lattice_point(11) == (0, 1)
        assert Eta.parse("1/5").lattice_point(11) is False
        assert Eta.parse("1/3*tau").lattice_point(6, has_tau=False) is False


class TestCommands:
    def test_couplings(self, capsys):
        code, out, _ = run_cli(["couplings", "--eta", "2/11", "--tau", "0,0.8"], capsys)
        assert code == 0
        r = json.loads(out)["result"]
        for k, v in (("jx", 1.1128), ("jy", 0.9184), ("jz", 0.8348)):
            assert abs(r[k][0] - v) < 5e-5 and r[k][1] == 0

    def test_identities(self, capsys):
        code, out, _ = run_cli(["identities", "--samples", "100", "--seed", "7"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        assert max(doc["result"]["residuals"].values()) < 1e-11

    def test_verify_shs(self, capsys):
        code, out, _ = run_cli(["verify-shs", "--eta", "2/11", "--tau", "0,0.8", "--u", "0.28,0"], capsys)
        doc = json.loads(out)
        assert code == 0
        names = [r["check_name"] for r in doc["result"]["reports"]]
        assert names == ["shs", "negative_control"]
        assert doc["result"]["exact_witness"] == {"p": [0], "q": [1]}

    def test_texture_csv(self, tmp_path, capsys):
        path = tmp_path / "tex.csv"
        code, _, _ = run_cli(["texture", "--eta", "10/27*tau", "--tau", "0,0.7", "--dims", "27",
                              "--u", "0.1,0.2", "-o", str(path)], capsys)
        assert code == 0
        raw = path.read_bytes()
        assert b"\r" not in raw
        rows = list(csv.reader(io.StringIO(raw.decode())))
        assert rows[0] == ["site", "n0", "sx", "sy", "sz"]
        assert len(rows) == 28
        spec = ModelSpec("xyz", build_spin_rep(1), build_lattice((27,)), 10 * 0.7j / 27, EllipticContext(0.7j))
        ref = texture(build_shs(0.1 + 0.2j, (1,), spec), spec.spin)
        got = np.array([[float(x) for x in r[2:]] for r in rows[1:]])
        assert np.abs(got - ref).max() < 1e-11
        assert all(len(x.replace("-", "").replace(".", "").lstrip("0")) <= 12 for r in rows[1:] for x in r[2:] if "e" not in x)
        assert json.loads(path.with_suffix(".csv.json").read_text())["config"]["command"] == "texture"

    def test_texture_in_plane(self, tmp_path, capsys):
        path = tmp_path / "t.csv"
        main(["texture", "--eta", "2/11", "--tau", "0,0.8", "--u", "0.28,0", "-o", str(path)])
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 11
        assert max(abs(float(r["sy"])) for r in rows) < 1e-10

    def test_spectrum(self, capsys):
        code, out, _ = run_cli(["spectrum", "--variant", "xxz", "--dims", "6", "--eta", "1/3", "--format", "json"], capsys)
        r = json.loads(out)["result"]
        assert code == 0 and len(r["eigenvalues"]) == 64 and r["cluster_size"] >= 12

    def test_spectrum_csv(self, capsys):
        code, out, _ = run_cli(["spectrum", "--variant", "xxz", "--dims", "4", "--eta", "1/2"], capsys)
        lines = out.splitlines()
        assert lines[0] == "index,re,im" and len(lines) == 17

    def test_entropy(self, capsys):
        code, out, _ = run_cli(["entropy", "--variant", "xxz", "--dims", "8", "--eta", "1/2", "--n", "4", "--va", "4"], capsys)
        assert code == 0 and json.loads(out)["result"]["reports"][0]["residual"] < 1e-12

    def test_divergence(self, capsys):
        code, out, _ = run_cli(["divergence", "--twice-s", "4", "--samples", "5", "--seed", "1"], capsys)
        assert code == 0 and len(json.loads(out)["result"]["reports"]) == 10

    def test_towers(self, capsys):
        code, out, _ = run_cli(["towers", "--variant", "xxz", "--dims", "6", "--eta", "1/3"], capsys)
        r = json.loads(out)["result"]
        assert code == 0 and r["span_dimension"] == 12 == r["predicted_dimension"]

    def test_direction_dependent(self, capsys):
        code, out, _ = run_cli(["verify-shs", "--variant", "direction_dependent", "--dims", "4x3",
                                "--eta", "1/2*tau;2/3", "--epsilon=1,-1", "--twice-s", "2"], capsys)
        assert code == 0
        assert json.loads(out)["config"]["model"]["eta"] == ["1/2*tau", "2/3"]


class TestExitCodes:
    @pytest.mark.parametrize("argv,fieldname", [
        (["verify-shs", "--eta", "1/5"], "model.eta"),
        (["verify-shs", "--twice-s", "0"], "model.twice_s"),
        (["couplings", "--tau", "0,-1"], "model.tau"),
        (["verify-shs", "--dims", "4x4", "--epsilon=1"], "state.epsilon"),
        (["towers", "--variant", "xyz"], "model.variant"),
        (["couplings", "--tol", "bogus=1"], "tolerances.bogus"),
        (["verify-shs", "--eta", "0.1,0.1", "--dims", "10"], "model"),
    ])
    def test_validation(self, argv, fieldname, capsys):
        code, _, err = run_cli(argv, capsys)
        assert code == 1
        assert f"error: {fieldname}" in err

    def test_failed_check_still_writes(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        code, _, _ = run_cli(["verify-shs", "--tol", "eigenstate=1e-30", "-o", str(path)], capsys)
        assert code == 2
        assert json.loads(path.read_text())["passed"] is False

    def test_missing_config(self, capsys):
        assert run_cli(["run", "--config", "/nonexistent.json"], capsys)[0] == 1


class TestConfig:
    @pytest.mark.parametrize("argv", [
        ["couplings", "--eta", "2/11"],
        ["verify-shs", "--variant", "long_range", "--dims", "8", "--eta", "1/4*tau+1/4", "--long-range", "1:1,2:0.5"],
        ["verify-shs", "--variant", "open_chain_1d", "--dims", "6", "--eta", "1/3*tau", "--tau", "0,0.9"],
        ["texture", "--variant", "xy_a", "--dims", "8", "--twice-s", "3", "--format", "json"],
        ["divergence", "--eta", "0.23,0.01", "--sign", "-1"],
    ])
    def test_round_trip(self, argv, capsys):
        code, out, _ = run_cli(argv, capsys)
        emitted = json.loads(out)["config"]
        again = resolve_config(emitted).to_dict()
        assert again == emitted
        assert resolve_config(again).to_dict() == again

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = {"command": "couplings", "model": {"eta": "1/3", "variant": "xxz"}}
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        code, out, _ = run_cli(["run", "--config", str(p)], capsys)
        assert code == 0 and json.loads(out)["result"]["jz"][0] == pytest.approx(0.5)
        code, out, _ = run_cli(["couplings", "--config", str(p), "--eta", "0"], capsys)
        assert json.loads(out)["result"]["jz"][0] == pytest.approx(1.0)

    def test_deterministic(self, capsys):
        argv = ["divergence", "--twice-s", "3", "--samples", "4", "--seed", "11"]
        _, a, _ = run_cli(argv, capsys)
        _, b, _ = run_cli(argv, capsys)
        assert strip_meta(json.loads(a)) == strip_meta(json.loads(b))
        da, db = json.loads(a), json.loads(b)
        da["metadata"] = db["metadata"] = None
        assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)

    def test_env_output_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("SPINHELIX_OUTPUT_DIR", str(tmp_path))
        assert main(["couplings"]) == 0
        assert (tmp_path / "couplings.json").exists()
        assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]

    def test_run_api(self):
        cfg = resolve_config({"command": "couplings", "model": {"variant": "xxz", "eta": "1/3"}})
        code, doc = run(cfg)
        assert code == 0 and doc["config"] == cfg.to_dict()


def test_emit_texture_csv_single_site(tmp_path):
    spin = build_spin_rep(2)
    st_ = ProductState((local_vector(0.3, spin, EllipticContext(0.8j)),), 0.3, (1,), 0.0)
    p = emit_texture_csv(st_, spin, tmp_path / "one.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "site,n0,sx,sy,sz" and len(lines) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "spinhelix", "couplings", "--variant", "xxz", "--eta", "1/3"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["result"]["jz"][0] == pytest.approx(0.5)
