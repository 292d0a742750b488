import csv
import json
from pathlib import Path

import numpy as np
import pytest

from dfcb.cli import fmt, load_config, main, parse_config, run_verify
from dfcb.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _doc(name="demo.json"):
    return json.loads((CONFIGS / name).read_text())


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_fmt_roundtrips():
    for x in (0.1, -3.0, 1e-300, 123456.789, np.pi, -0.0):
        assert float(fmt(x)) == x
    assert fmt(float("nan")) == "nan"
    assert fmt(np.float64(2.5)) == "2.5"


def test_config_roundtrip():
    cfg = load_config(CONFIGS / "demo.json")
    again = parse_config(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg and hash(again) == hash(cfg)


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.update(fold=5), "fold"),
    (lambda d: d.update(fold=3), "fold"),
    (lambda d: d["seeds"][1].update(k=0.8), "seeds[1].k"),
    (lambda d: d["seeds"][0].pop("c"), "seeds[0].c"),
    (lambda d: d["seeds"][0].update(c=[0, 0, 0]), "seeds[0]"),
    (lambda d: d.update(options={"tolerence": 1e-8}), "options.tolerence"),
    (lambda d: d["lambda"].update(kind="linear", params={"a": 1.0, "b": -0.5}), "lambda"),
    (lambda d: d["h"].update(kind="cubic"), "h.kind"),
    (lambda d: d["grid"].update(nx=0), "grid.nx"),
    (lambda d: d.pop("lambda"), "lambda"),
])
def test_config_errors_name_field(mutate, path):
    d = _doc()
    mutate(d)
    with pytest.raises(ConfigError) as err:
        parse_config(d)
    assert err.value.path == path


def test_grid_counts_default():
    d = _doc()
    for k in ("nx", "ny", "nt"):
        d["grid"].pop(k)
    cfg = parse_config(d)
    assert (cfg.grid.nx, cfg.grid.ny, cfg.grid.nt) == (21, 1, 5)


def test_sample_csv(tmp_path):
    assert main(["sample", "--config", str(CONFIGS / "demo.json"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "field.csv").read_text().splitlines()
    cfg = load_config(CONFIGS / "demo.json")
    assert lines[0] == "x,y,t,u,v"
    assert len(lines) == cfg.grid.size + 1
    rows = list(csv.reader(lines[1:]))
    # x runs fastest, then y, then t
    assert float(rows[1][0]) > float(rows[0][0]) and rows[1][1:3] == rows[0][1:3]
    assert float(rows[cfg.grid.nx][1]) > float(rows[0][1])
    summary = json.loads((tmp_path / "field_summary.json").read_text())
    assert summary["masked_count"] + summary["valid_count"] == cfg.grid.size
    assert summary["u_range"][0] <= summary["u_range"][1]


def test_sample_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["sample", "--config", str(CONFIGS / "demo.json"), "--out", str(out)])
    assert (a / "field.csv").read_bytes() == (b / "field.csv").read_bytes()


def test_sample_fold_zero_is_background(tmp_path):
    d = _doc("damped.json")
    d["fold"] = 0
    main(["sample", "--config", str(_write(tmp_path, d)), "--out", str(tmp_path)])
    rows = list(csv.DictReader((tmp_path / "field.csv").read_text().splitlines()))
    for r in rows:
        h = 0.2 * np.sin(float(r["t"]))
        assert float(r["u"]) == pytest.approx(h, abs=1e-15) and float(r["v"]) == float(r["u"])


def test_sample_pole_rows_are_nan(tmp_path):
    main(["sample", "--config", str(CONFIGS / "pole.json"), "--out", str(tmp_path)])
    rows = list(csv.DictReader((tmp_path / "field.csv").read_text().splitlines()))
    nan_rows = [r for r in rows if r["u"] == "nan"]
    assert len(nan_rows) == 1 and nan_rows[0]["v"] == "nan"
    # xi3 = x at y = t = 0 for k = 1; the masked node is where cos xi3 vanishes
    assert float(nan_rows[0]["x"]) == pytest.approx(np.pi / 2)
    for r in rows:
        if r["u"] != "nan":
            assert abs(np.cos(float(r["x"]))) > 1e-5


def test_verify_demo_passes(tmp_path, capsys):
    assert main(["verify", "--config", str(CONFIGS / "demo.json"), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "mode_equivalence" in out and "fd_order" in out
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["pass"] is True


def test_verify_twofold_passes():
    crits = run_verify(load_config(CONFIGS / "twofold.json"))
    assert all(c.passed for c in crits), [c.line() for c in crits if not c.passed]


def test_verify_corrupt_names_res_u(tmp_path, capsys):
    rc = main(["verify", "--config", str(CONFIGS / "damped.json"), "--out", str(tmp_path),
               "--corrupt", "u", "+0.1"])
    assert rc == 1
    assert "verification failed: pde_jet.res_u" in capsys.readouterr().err


def test_verify_corrupt_without_damping_hits_res_v(tmp_path, capsys):
    """With S = 0 a shift of u only enters through P u u_x."""
    rc = main(["verify", "--config", str(CONFIGS / "demo.json"), "--out", str(tmp_path),
               "--corrupt", "u", "0.1"])
    assert rc == 1
    assert "verification failed: pde_jet.res_v" in capsys.readouterr().err


def test_equal_k_rejected(tmp_path, capsys):
    rc = main(["verify", "--config", str(CONFIGS / "equal_k.json"), "--out", str(tmp_path)])
    assert rc == 2
    assert "seeds[1].k" in capsys.readouterr().err
    assert not (tmp_path / "verify_report.txt").exists()


def test_missing_config_file(tmp_path):
    assert main(["sample", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_sweep_outputs(tmp_path):
    rc = main(["sweep", "--config", str(CONFIGS / "sweep_damping.json"), "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "sweep_damping_summary.csv").read_text().splitlines()
    assert lines[0] == "param,t,amplitude"
    assert len(lines) == 1 + 5 * 8
    assert len(list(tmp_path.glob("sweep_damping_0*.csv"))) == 5
    rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
    # Lambda scales the correction 3 Lam d_x^2 log psi, so at the last slice a larger
    # growth rate b gives a larger amplitude
    last = {p: a for p, t, a in rows if t == rows[-1][1]}
    vals = [last[p] for p in sorted(last)]
    assert vals == sorted(vals)


def test_sweep_forcing_values(tmp_path):
    rc = main(["sweep", "--config", str(CONFIGS / "sweep_damping.json"), "--out", str(tmp_path),
               "--axis", "forcing", "--values", "0.0", "0.5"])
    assert rc == 0
    meta = json.loads((tmp_path / "sweep_forcing_summary.json").read_text())
    assert [r["h"]["params"]["a"] for r in meta["runs"]] == [0.0, 0.5]


def test_compare_explicit(tmp_path, capsys):
    rc = main(["compare-explicit", "--config", str(CONFIGS / "demo.json"), "--out", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "explicit_report.json").read_text())
    assert rep["fold"] == 1 and "classification" in rep
    assert "classification" in capsys.readouterr().out
