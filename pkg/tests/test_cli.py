import csv
import json
from pathlib import Path

import pytest

from twistlab.bohr import golden_bohr, golden_cube, kronecker_demo
from twistlab.cli import build_parser, main, run
from twistlab.config import ConfigError, data_path, load_bohr, load_experiment, load_group
from twistlab.experiments import CONFIG_ERROR, OK, UNRESOLVED
from twistlab.matgroup import berggren, sl2z, sl3z

SHIPPED = sorted(p.stem[4:] for p in data_path("").glob("exp-*.toml"))
VOLATILE = {"started", "finished", "seconds", "config"}


def quiet(*_):
    pass


def write(tmp_path, text, name="exp.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def capture(command, path, **kw):
    lines = []
    status = run(command, str(path), echo=lines.append, **kw)
    return status, "\n".join(lines)


@pytest.mark.parametrize("name,build", [("sl2z", sl2z), ("sl3z", sl3z), ("berggren", berggren)])
def test_shipped_groups_match_builders(name, build):
    g, h = load_group(data_path(f"group-{name}.toml")), build()
    assert set(g.labels) == set(h.labels)
    assert all(g.matrices[k] == h.matrices[k] for k in h.labels)
    assert g.form == h.form


@pytest.mark.parametrize("name,build", [("golden", golden_bohr), ("golden-cube", golden_cube),
                                        ("kronecker-demo", kronecker_demo)])
def test_shipped_bohr_sets_match_builders(name, build):
    spec, ref = load_bohr(data_path(f"bohr-{name}.toml")), build()
    assert spec.system == ref.system and spec.arcs == ref.arcs


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_experiments_load(name):
    cfg = load_experiment(data_path(f"exp-{name}.toml"))
    assert cfg.name == name


def test_schema_file_ships():
    text = data_path("csv_schema.md").read_text()
    for cmd in ("equidist", "irred", "bohr", "density", "pattern", "surject", "recur", "galois"):
        assert f"## {cmd}" in text


def test_malformed_toml(tmp_path):
    p = write(tmp_path, 'kind = "surjectivity"\ntargets = [0,\n')
    status, out = capture("surject", p)
    assert status == CONFIG_ERROR
    assert str(p) in out and "config error" in out


@pytest.mark.parametrize("command,text,needle", [
    ("surject", 'kind = "nonsense"\n', "unknown kind"),
    ("surject", 'kind = "surjectivity"\npsi = "Q(1,1;1)"\ntargets = [0, 3]\n[E]\nbohr = "nope"\n',
     "no shipped bohr named 'nope'"),
    ("surject", 'kind = "surjectivity"\npsi = "Q(1,1;1)"\n[E]\nbohr = "golden-cube"\n', "'targets'"),
    ("recur", 'kind = "recurrence"\nbohr = "golden"\ngroup = "sl2z"\na = [[1, 0]]\nL = 2\n',
     "field 'a'"),
    ("equidist", 'kind = "equidistribution"\ngroup = "sl2z"\nchi = ["1/2", 0]\na = [1, 0]\nn = [5]\n'
     '[walk]\nmode = "montecarlo"\n', "seed"),
    ("equidist", 'kind = "equidistribution"\ngroup = "sl2z"\nchi = [0.5, 0]\na = [1, 0]\nn = [5]\n',
     "field 'chi'"),
])
def test_config_diagnostics(tmp_path, command, text, needle):
    status, out = capture(command, write(tmp_path, text))
    assert status == CONFIG_ERROR
    assert needle in out


def test_kind_must_match_subcommand(tmp_path):
    status, out = capture("recur", data_path("exp-surject-q3.toml"))
    assert status == CONFIG_ERROR and "cannot run under 'recur'" in out


def test_load_experiment_raises_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "missing.toml")


def test_surjectivity_run_writes_witness_table(tmp_path):
    assert run("surject", "surject-q3", out=tmp_path, echo=quiet) == OK
    rows = list(csv.DictReader((tmp_path / "surject-q3.csv").open()))
    assert [int(r["target"]) for r in rows] == list(range(-50, 51))
    for r in rows:
        u, v, w = int(r["v1"]), int(r["v2"]), int(r["v3"])
        assert u * u + v * v - w * w == int(r["target"])


def test_equidistribution_rational_has_limit_line(tmp_path):
    assert run("equidist", "equidist-rational", out=tmp_path, echo=quiet) == OK
    rows = list(csv.DictReader((tmp_path / "equidist-rational.csv").open()))
    assert rows[0]["n"] == "limit" and float(rows[0]["re"]) == pytest.approx(-1 / 3)
    assert all(r["provenance"] for r in rows)


def test_unresolved_search_has_own_exit_code(tmp_path):
    p = write(tmp_path, 'kind = "surjectivity"\npsi = "Q(1,1;1)"\ntargets = [1, 4]\n'
                        'max_steps = 1\n[E]\nprogression = {moduli = [2, 2, 2], '
                        'residues = [0, 0, 0]}\n')
    status, out = capture("surject", p)
    assert status == UNRESOLVED


def mc_config(tmp_path):
    return write(tmp_path, 'kind = "equidistribution"\nname = "mc"\nseed = 3\ngroup = "sl2z"\n'
                           'chi = ["golden", "sqrt2m1"]\na = [1, 0]\nn = [10, 20]\n'
                           '[walk]\nmode = "montecarlo"\nsamples = 300\n', "mc.toml")


def test_reports_are_deterministic(tmp_path):
    cfg = mc_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["equidist", str(cfg), "--out", str(a)]) == OK
    assert main(["equidist", str(cfg), "--out", str(b), "--workers", "2"]) == OK
    for suffix in (".json", ".csv"):
        assert (a / f"mc{suffix}").read_bytes() == (b / f"mc{suffix}").read_bytes()
    ma = json.loads((a / "mc.manifest.json").read_text())
    mb = json.loads((b / "mc.manifest.json").read_text())
    mb["workers"] = ma["workers"]
    assert {k: v for k, v in ma.items() if k not in VOLATILE} == \
           {k: v for k, v in mb.items() if k not in VOLATILE}
    assert ma["provenance"]


def test_seed_flag_changes_monte_carlo_payload(tmp_path):
    cfg = mc_config(tmp_path)
    main(["equidist", str(cfg), "--out", str(tmp_path / "a")])
    main(["equidist", str(cfg), "--seed", "4", "--out", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "mc.json").read_text())
    b = json.loads((tmp_path / "b" / "mc.json").read_text())
    assert a != b
    man = json.loads((tmp_path / "b" / "mc.manifest.json").read_text())
    assert man["seed"] == 4


def test_global_flags_accepted_before_and_after_subcommand():
    p = build_parser()
    a = p.parse_args(["--seed", "5", "recur", "recur-demo"])
    b = p.parse_args(["recur", "recur-demo", "--seed", "5"])
    assert a.seed == b.seed == 5
    assert p.parse_args(["verify", "--level", "full"]).level == "full"


def test_shipped_config_by_name_and_path():
    assert run("galois", "galois3", echo=quiet) == OK
    assert run("galois", str(Path(data_path("exp-galois3.toml"))), echo=quiet) == OK


@pytest.mark.parametrize("name", SHIPPED)
def test_every_shipped_experiment_succeeds(name, tmp_path):
    command = name.split("-")[0].rstrip("0123456789")
    assert run(command, name, out=tmp_path, echo=quiet) == OK
    assert (tmp_path / f"{name}.json").exists() and (tmp_path / f"{name}.csv").exists()
