import csv
import io
import json
from fractions import Fraction
from importlib import resources

import pytest

from teichtqft import build_triangulation, cli, codec

MULTI_CUSP = ([1, -1, 1, 1],
              [(2, 1, 1, 0), (1, 3, 3, 0), (0, 0, 2, 3), (0, 2, 3, 2),
               (0, 3, 3, 1), (3, 3, 0, 1), (2, 0, 1, 2), (1, 1, 2, 2)])


def data(name):
    return str(resources.files("teichtqft") / "data" / f"{name}.tri")


def run_json(capsys, argv):
    assert cli.run(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_info_fig8(capsys):
    d = run_json(capsys, ["info", data("fig8")])
    assert d["tets"] == 2 and d["edges"] == 2 and d["vertices"] == 1
    assert d["valences"] == [6, 6]
    assert d["link"] == "torus"
    assert d["h2_rank"] == 0 and d["h2_torsion"] == []
    assert d["admissible"] is True and d["balanced_dim"] == 3


def test_info_five2(capsys):
    d = run_json(capsys, ["info", data("five2")])
    assert d["tets"] == 3 and d["edges"] == 3
    assert sorted(d["valences"]) == [5, 6, 7]
    assert d["balanced_dim"] == 4 and d["admissible"] is True


def test_info_trefoil_not_admissible(capsys):
    d = run_json(capsys, ["info", data("trefoil")])
    assert d["positive_angle_structure"] is False
    assert d["admissible"] is False
    assert d["h2_rank"] == 0


def test_syntax_error_exit(tmp_path, capsys):
    f = tmp_path / "bad.tri"
    f.write_text("tqft-tri v1\ntets 2\nsigns +1 -1\nglue 0 0 one 2\n")
    assert cli.run(["info", str(f)]) == 2
    assert "line 4, column 10" in capsys.readouterr().err


def test_usage_error_exit():
    with pytest.raises(SystemExit) as ei:
        cli.run(["compute", "nonsense"])
    assert ei.value.code == 2


def test_semantic_error_exit(capsys):
    assert cli.run(["qdilog", "--z", "0.1", "--b", "1", "--hbar", "0.2"]) == 3
    assert cli.run(["info", "/nonexistent/file.tri"]) == 3


def test_not_admissible_exit(tmp_path, capsys):
    f = tmp_path / "cusps.tri"
    codec.dump(build_triangulation(*MULTI_CUSP), f)
    assert cli.run(["compute", "partition", str(f), "--b", "1"]) == 4


def test_quadrature_exit(capsys):
    assert cli.run(["qdilog", "--z", "500"]) == 5


def test_invalid_site_exit(capsys):
    assert cli.run(["pachner", data("fig8"), "--move", "32", "--edge", "0"]) == 6


def test_infeasible_exit(capsys):
    assert cli.run(["compute", "partition", data("trefoil")]) == 7


def test_qdilog_json(capsys):
    d = run_json(capsys, ["qdilog", "--z", "0.3+0.2i", "--b", "1"])
    assert set(d) == {"b", "z", "re", "im"}
    assert d["z"] == {"re": 0.3, "im": 0.2}


def test_volume(capsys):
    d = run_json(capsys, ["compute", "volume", data("fig8")])
    assert abs(d["volume"] - 2.029883212819307) < 1e-8


def test_partition_json(capsys):
    d = run_json(capsys, ["compute", "partition", data("fig8"), "--b", "1"])
    assert abs(d["z"]["re"] - 0.2763932022500212) < 1e-9
    assert d["dimension"] == 2
    assert set(d) == {"hbar", "z", "error_estimate", "dimension", "shifts"}


def test_transform_round_trip(tmp_path, capsys):
    up = tmp_path / "up.tri"
    assert cli.run(["transform", data("fig8"), "--move", "23", "--face", "0", "0",
                    "--out", str(up)]) == 0
    diff = json.loads(capsys.readouterr().out)
    new_edge, = diff["added_edges"]
    tri = codec.load(up)
    assert tri.n == 3 and tri.angles is not None
    down = tmp_path / "down.tri"
    assert cli.run(["transform", str(up), "--move", "32", "--edge", str(new_edge),
                    "--out", str(down), "--diff", str(tmp_path / "d.json")]) == 0
    back = codec.load(down)
    assert back.n == 2 and back.cells.num_edges == 2
    assert all(a == (Fraction(1, 3),) * 3 for a in back.angles)
    assert json.loads((tmp_path / "d.json").read_text())["removed_edges"] == [new_edge]


def test_sweep_csv(capsys):
    assert cli.run(["compute", "sweep", data("fig8"), "--grid", "0.15,0.12", "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["hbar", "re", "im", "abs", "log_abs", "rate"]
    assert [float(r[0]) for r in rows[1:]] == [0.15, 0.12]
    assert all(float(r[5]) < 0 for r in rows[1:])


def test_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults\nb = 1.3\n")
    d = run_json(capsys, ["qdilog", "--z", "0.1", "--config", str(conf)])
    assert d["b"] == 1.3
    d = run_json(capsys, ["qdilog", "--z", "0.1", "--config", str(conf), "--b", "0.9"])
    # b and 1/b describe the same dilogarithm; the larger one is reported
    assert abs(d["b"] - 1 / 0.9) < 1e-15


def test_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("colour = blue\n")
    assert cli.run(["qdilog", "--z", "0.1", "--config", str(conf)]) == 3


def test_wgz_csv(capsys):
    assert cli.run(["wgz", "--n", "2", "--M", "16"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["x", "y", "abs"] and len(rows) == 5
