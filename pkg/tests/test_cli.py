"""Tests for the JSON config loader and the command-line front end.

Commands run in-process through ``cli.main(argv)`` (it returns the exit
code), with one subprocess test to prove the installed console script is
wired to the same entry point.  Expected numbers are either structural
facts (row counts, exit codes, exact knot values), hand-derivable closed
forms (W(0) = 2 from the geometric series, entropy log 2 for the full
tent), or values already frozen by the module-level test files; the
box-counting tolerances quoted here are the coarse ones appropriate for
each config's ladder, established by the module tests.
"""

import hashlib
import json
import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from fracdim import cli
from fracdim.config import load_config, parse_config
from fracdim.errors import InvalidConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


def write_config(tmp_path: Path, doc: dict, name: str = "cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def line_config(depth: int = 18, scales=None) -> dict:
    doc = {
        "version": 1,
        "kind": "fif",
        "system": {
            "data": {"x": ["0", "1/2", "1"], "y": ["0", "1/2", "1"]},
            "scalings": ["1/3", "1/3"],
        },
        "sampling": {"depth": depth},
    }
    if scales is not None:
        doc["scales"] = scales
    return doc


DYADIC_4_9 = [0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125]


# ---------------------------------------------------------------------------
# config loader
# ---------------------------------------------------------------------------


def test_rational_strings_stay_exact(tmp_path):
    p = write_config(
        tmp_path,
        {"version": 1, "kind": "series", "system": {"phi": "takagi", "alpha": "2/3", "b": 2}},
    )
    cfg = load_config(p)
    assert cfg.system.alpha == Fraction(2, 3)
    assert isinstance(cfg.system.alpha, Fraction)
    assert cfg.sha256 == hashlib.sha256(p.read_bytes()).hexdigest()


def test_golden_beta_only_for_tent():
    doc = {"version": 1, "kind": "tent", "system": {"beta": "golden", "alpha": 0.9}}
    cfg = parse_config(doc)
    assert float(cfg.system.beta) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    bad = {"version": 1, "kind": "series", "system": {"phi": "takagi", "alpha": "golden", "b": 2}}
    with pytest.raises(InvalidConfig, match="golden"):
        parse_config(bad)


def test_unknown_fields_are_rejected_with_paths():
    base = {"version": 1, "kind": "tent", "system": {"beta": 1.5, "alpha": 0.9}}
    with pytest.raises(InvalidConfig, match=r"system\.betaa"):
        parse_config({**base, "system": {"beta": 1.5, "alpha": 0.9, "betaa": 1}})
    with pytest.raises(InvalidConfig, match=r"sampling\.depht"):
        parse_config({**base, "sampling": {"depht": 3}})
    with pytest.raises(InvalidConfig, match="colour"):
        parse_config({**base, "colour": "red"})


def test_version_and_kind_gates():
    with pytest.raises(InvalidConfig, match="version"):
        parse_config({"version": 2, "kind": "tent", "system": {"beta": 1.5, "alpha": 0.9}})
    with pytest.raises(InvalidConfig, match="kind"):
        parse_config({"version": 1, "kind": "circle", "system": {}})
    with pytest.raises(InvalidConfig, match="required"):
        parse_config({"version": 1, "kind": "tent"})


def test_module_preconditions_fire_at_load():
    # system constructors run during parsing, so out-of-contract
    # parameters are config errors, not mid-run surprises
    with pytest.raises(InvalidConfig, match=r"alpha\*beta"):
        parse_config({"version": 1, "kind": "tent", "system": {"beta": 1.5, "alpha": 0.5}})
    with pytest.raises(InvalidConfig, match="increasing"):
        parse_config(
            {
                "version": 1,
                "kind": "fif",
                "system": {
                    "data": {"x": ["0", "3/4", "1/2", "1"], "y": ["0", "1", "0", "1"]},
                    "scalings": ["1/2", "1/2", "1/2"],
                },
            }
        )


def test_scales_and_anchor_validation():
    base = {"version": 1, "kind": "tent", "system": {"beta": 1.5, "alpha": 0.9}}
    with pytest.raises(InvalidConfig, match="scales"):
        parse_config({**base, "scales": [0.5, -0.25, 0.125, 0.0625]})
    with pytest.raises(InvalidConfig, match="scales"):
        parse_config({**base, "scales": "fine"})
    with pytest.raises(InvalidConfig, match="nbern"):
        parse_config({**base, "nbern": {"anchor": [2, 2]}})  # tent has no shift space
    fif = line_config()
    with pytest.raises(InvalidConfig, match="anchor"):
        parse_config({**fif, "nbern": {"anchor": [1, 2, 3]}})


def test_config_defaults():
    cfg = parse_config({"version": 1, "kind": "tent", "system": {"beta": 1.5, "alpha": 0.9}})
    assert cfg.depth == 12
    assert cfg.entropy_n == 20
    assert cfg.scales is None
    assert cfg.eval_eps == 1e-10
    assert cfg.seed == 0


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(InvalidConfig, match="cannot read"):
        load_config(tmp_path / "missing.json")
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(InvalidConfig, match="JSON"):
        load_config(p)


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def test_eval_takagi_rows_and_determinism(tmp_path):
    assert run("eval", "--config", CONFIGS / "takagi.json", "--out", tmp_path, "--grid", 4097) == 0
    blob = (tmp_path / "eval.csv").read_bytes()
    lines = blob.decode().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 4098
    assert run("eval", "--config", CONFIGS / "takagi.json", "--out", tmp_path, "--grid", 4097) == 0
    assert (tmp_path / "eval.csv").read_bytes() == blob


def test_eval_weierstrass_geometric_endpoints(tmp_path):
    # W(0) = sum (1/2)^n = 2; W(1/2) = sum (1/2)^n cos(pi 3^n) = -2
    assert run("eval", "--config", CONFIGS / "weierstrass.json", "--out", tmp_path, "--grid", 3) == 0
    rows = (tmp_path / "eval.csv").read_text().splitlines()[1:]
    ys = [float(r.split(",")[1]) for r in rows]
    assert ys[0] == pytest.approx(2.0, abs=1e-9)
    assert ys[1] == pytest.approx(-2.0, abs=1e-9)
    assert ys[2] == pytest.approx(2.0, abs=1e-9)


def test_eval_fif_interpolates_knots(tmp_path):
    assert run("eval", "--config", CONFIGS / "fig2-fif.json", "--out", tmp_path, "--grid", 5) == 0
    rows = (tmp_path / "eval.csv").read_text().splitlines()[1:]
    table = {float(r.split(",")[0]): float(r.split(",")[1]) for r in rows}
    assert table[0.25] == pytest.approx(2 / 3, abs=1e-9)
    assert table[0.5] == pytest.approx(0.25, abs=1e-9)
    assert table[1.0] == pytest.approx(1.0, abs=1e-9)


def test_eval_tent_starts_at_zero(tmp_path):
    assert run("eval", "--config", CONFIGS / "tent-golden.json", "--out", tmp_path, "--grid", 9) == 0
    rows = (tmp_path / "eval.csv").read_text().splitlines()
    assert len(rows) == 10
    assert rows[1] == "0.0,0.0"


def test_eval_grid_too_small_is_config_error(tmp_path):
    assert run("eval", "--config", CONFIGS / "takagi.json", "--out", tmp_path, "--grid", 1) == 2


# ---------------------------------------------------------------------------
# dim
# ---------------------------------------------------------------------------


def test_dim_fig2_moran_report(tmp_path):
    cfg = CONFIGS / "fig2-fif.json"
    assert run("dim", "--config", cfg, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "dim.json").read_text())
    rep = doc["report"]
    assert rep["branch"] == "moran"
    assert rep["s_root"] == pytest.approx(1.2588019778900161, abs=1e-12)
    assert rep["hausdorff_equals_box"] == "yes"
    assert rep["witnesses"]["quotient_pair"] == [1, 2]
    assert doc["config_sha256"] == hashlib.sha256(cfg.read_bytes()).hexdigest()
    assert doc["tolerances"]["eval_eps"] == 1e-10


def test_dim_fig3_spectral_report_with_measure(tmp_path):
    assert run("dim", "--config", CONFIGS / "fig3-markov.json", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "dim.json").read_text())
    rep = doc["report"]
    assert rep["branch"] == "spectral"
    assert rep["witnesses"]["rho_at_1"] == pytest.approx(1.226191170142781, abs=1e-8)
    m = doc["measure"]
    assert m["h"] == pytest.approx(m["chi2"] + (rep["s_root"] - 1) * m["chi1"], abs=1e-10)
    assert m["dim"] == pytest.approx(rep["s_root"], abs=1e-9)


def test_dim_series_reports_both_routes(tmp_path):
    assert run("dim", "--config", CONFIGS / "takagi.json", "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "dim.json").read_text())["report"]
    assert rep["branch"] == "series-moran"
    assert rep["theoretical_box"] == pytest.approx(rep["closed_form"], abs=1e-9)
    assert rep["closed_form"] == pytest.approx(2 + math.log(2 / 3) / math.log(2), abs=1e-12)


def test_dim_collinear_data_gives_a_line(tmp_path):
    p = write_config(tmp_path, line_config())
    assert run("dim", "--config", p, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "dim.json").read_text())["report"]
    assert rep["branch"] == "collinear"
    assert rep["theoretical_box"] == 1.0


# ---------------------------------------------------------------------------
# boxdim
# ---------------------------------------------------------------------------


def test_boxdim_fig2_artifacts(tmp_path):
    assert run("boxdim", "--config", CONFIGS / "fig2-fif.json", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "boxdim.json").read_text())
    assert abs(doc["fit"]["dim"] - 1.2588019778900161) < 0.08
    assert doc["points"] == 531441
    assert doc["dropped"] == [0.001953125]
    assert doc["tolerances"]["saturation_rtol"] == 0.01
    lines = (tmp_path / "boxdim.csv").read_text().splitlines()
    assert lines[0] == "log_inv_eps,log_n"
    assert len(lines) == 7  # one row per measured scale, dropped included


def test_boxdim_takagi_example(tmp_path):
    assert run("boxdim", "--config", CONFIGS / "takagi.json", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "boxdim.json").read_text())
    assert abs(doc["fit"]["dim"] - 1.415037) < 0.06


def test_boxdim_line_example(tmp_path):
    p = write_config(tmp_path, line_config(depth=18, scales=DYADIC_4_9))
    assert run("boxdim", "--config", p, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "boxdim.json").read_text())
    assert abs(doc["fit"]["dim"] - 1.0) < 0.02
    assert doc["dropped"] == []


def test_boxdim_full_tent_example(tmp_path):
    # beta = 2, alpha = 0.7: Holder exponent 2 - dim = 0.515 is large, so
    # a mid-size cloud already sits within a few hundredths of
    # 2 + log 0.7 / log 2 (the (0.9, 1.78) system needs the big ladder and
    # is exercised at acceptance level through the library route).
    doc = {
        "version": 1,
        "kind": "tent",
        "system": {"beta": 2.0, "alpha": 0.7},
        "sampling": {"depth": 16},
        "scales": DYADIC_4_9,
    }
    p = write_config(tmp_path, doc)
    assert run("boxdim", "--config", p, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "boxdim.json").read_text())
    assert rep["points"] == 4259840
    assert abs(rep["fit"]["dim"] - (2 + math.log(0.7) / math.log(2))) < 0.05


def test_boxdim_threads_do_not_change_artifacts(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("boxdim", "--config", CONFIGS / "fig2-fif.json", "--out", a) == 0
    assert run("boxdim", "--config", CONFIGS / "fig2-fif.json", "--out", b, "--threads", 3) == 0
    assert (a / "boxdim.json").read_bytes() == (b / "boxdim.json").read_bytes()
    assert (a / "boxdim.csv").read_bytes() == (b / "boxdim.csv").read_bytes()


def test_boxdim_starved_sample_exits_4(tmp_path, capsys):
    p = write_config(
        tmp_path,
        line_config(depth=5, scales=[0.015625, 0.0078125, 0.00390625, 0.001953125, 0.0009765625]),
    )
    assert run("boxdim", "--config", p, "--out", tmp_path) == 4
    assert "diagnostics failed" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# nbern
# ---------------------------------------------------------------------------


def test_nbern_fig3_table(tmp_path):
    assert run("nbern", "--config", CONFIGS / "fig3-markov.json", "--out", tmp_path, "--n", "20,40,80") == 0
    lines = (tmp_path / "nbern.csv").read_text().splitlines()
    assert lines[0] == "n,h_n,entropy_gap,cyl2_gap"
    rows = [line.split(",") for line in lines[1:]]
    assert [int(r[0]) for r in rows] == [20, 40, 80]
    egaps = [float(r[2]) for r in rows]
    cgaps = [float(r[3]) for r in rows]
    assert egaps[0] > egaps[1] > egaps[2]
    assert cgaps[0] > cgaps[1] > cgaps[2]
    assert egaps[2] < 0.05


def test_nbern_uniform_full_shift_gaps_are_pure_pad_effects(tmp_path):
    # equal |scaling| on equal intervals (and sum > 1, so the equilibrium
    # construction is nondegenerate): the equilibrium measure is uniform
    # Bernoulli.  The block middles then reproduce it exactly, and the
    # only deviation is the deterministic length-1 connector pads, whose
    # contribution has a closed form: the block entropy is short by the
    # two pad symbols (gap 2 log 2 / n), and a length-2 cylinder sees a
    # boundary in 3 of n phases (max gap 5/(4n), at the word (1,1) the
    # pads favor).  Anything beyond these closed forms would mean the
    # middle symbols are not exact.
    doc = {
        "version": 1,
        "kind": "fif",
        "system": {
            "data": {"x": ["0", "1/2", "1"], "y": ["0", "1/3", "1"]},
            "scalings": ["7/10", "-7/10"],
        },
    }
    p = write_config(tmp_path, doc)
    assert run("nbern", "--config", p, "--out", tmp_path, "--n", "6,9,20") == 0
    rows = [line.split(",") for line in (tmp_path / "nbern.csv").read_text().splitlines()[1:]]
    for r in rows:
        n = int(r[0])
        assert float(r[2]) == pytest.approx(2 * math.log(2) / n, abs=1e-12)
        assert float(r[3]) == pytest.approx(5 / (4 * n), abs=1e-12)


def test_nbern_needs_a_shift_space(tmp_path):
    assert run("nbern", "--config", CONFIGS / "takagi.json", "--out", tmp_path) == 2


def test_nbern_small_n_is_a_precondition_failure(tmp_path, capsys):
    assert run("nbern", "--config", CONFIGS / "fig3-markov.json", "--out", tmp_path, "--n", "3") == 3
    assert "precondition failed" in capsys.readouterr().err


def test_nbern_bad_n_list(tmp_path):
    assert run("nbern", "--config", CONFIGS / "fig3-markov.json", "--out", tmp_path, "--n", "a,b") == 2


# ---------------------------------------------------------------------------
# tent
# ---------------------------------------------------------------------------


def test_tent_golden_bundle(tmp_path):
    assert run("tent", "--config", CONFIGS / "tent-golden.json", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "tent.json").read_text())
    assert doc["entropy"]["abs_gap"] < 1e-4
    markov = doc["report"]["markov"]
    assert markov["exact"] is True
    assert len(markov["breakpoints"]) == 7
    assert markov["closed_form_gap"] < 1e-8
    assert doc["report"]["theoretical_box"] == pytest.approx(
        2 + math.log(0.9) / math.log((1 + math.sqrt(5)) / 2), abs=1e-12
    )


def test_tent_full_branch_is_exact(tmp_path):
    p = write_config(
        tmp_path,
        {
            "version": 1,
            "kind": "tent",
            "system": {"beta": 2.0, "alpha": 0.7},
            "sampling": {"entropy_n": 12},
        },
    )
    assert run("tent", "--config", p, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "tent.json").read_text())
    assert doc["entropy"]["estimate"] == math.log(2.0)
    assert doc["entropy"]["abs_gap"] == 0.0
    markov = doc["report"]["markov"]
    assert markov is not None
    assert markov["s_m"] == pytest.approx(2 + math.log(0.7) / math.log(2), abs=1e-12)


def test_tent_command_requires_tent_config(tmp_path):
    assert run("tent", "--config", CONFIGS / "takagi.json", "--out", tmp_path) == 2


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def test_sample_fif_cloud(tmp_path):
    doc = {
        "version": 1,
        "kind": "fif",
        "system": {
            "data": {"x": ["0", "1/4", "1/2", "1"], "y": ["0", "2/3", "1/4", "1"]},
            "scalings": ["1/3", "-1/2", "1/2"],
        },
        "sampling": {"depth": 6},
    }
    p = write_config(tmp_path, doc)
    assert run("sample", "--config", p, "--out", tmp_path) == 0
    lines = (tmp_path / "sample.csv").read_text().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 3**6 + 1
    assert lines[1] == "0.0,0.0"


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def test_seed_override_lands_in_reports(tmp_path):
    assert run("dim", "--config", CONFIGS / "fig2-fif.json", "--out", tmp_path, "--seed", 9) == 0
    assert json.loads((tmp_path / "dim.json").read_text())["seed"] == 9
    assert run("dim", "--config", CONFIGS / "fig2-fif.json", "--out", tmp_path, "--seed", -1) == 2


def test_config_error_messages_reach_stderr(tmp_path, capsys):
    p = write_config(
        tmp_path,
        {"version": 1, "kind": "series", "system": {"phi": "takagi", "alpha": "2/3", "b": 2, "alpa": 1}},
    )
    assert run("dim", "--config", p, "--out", tmp_path) == 2
    err = capsys.readouterr().err
    assert "invalid config" in err
    assert "system.alpa" in err


def test_out_directory_is_created(tmp_path):
    out = tmp_path / "deep" / "nested"
    assert run("dim", "--config", CONFIGS / "fig2-fif.json", "--out", out) == 0
    assert (out / "dim.json").exists()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [
            "fracdim",
            "eval",
            "--config",
            str(CONFIGS / "takagi.json"),
            "--out",
            str(tmp_path),
            "--grid",
            "9",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "eval.csv").read_text().splitlines()[0] == "x,y"


def test_every_shipped_config_loads():
    for p in sorted(CONFIGS.glob("*.json")):
        cfg = load_config(p)
        assert cfg.kind in ("series", "fif", "markov-fif", "tent"), p.name
