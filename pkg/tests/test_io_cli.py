import json
import math

import numpy as np
import pytest

from hypb import io
from hypb.cli import main
from hypb.errors import InputError
from hypb.round_tree import model_complex


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, text):
    path.write_text(text)
    return path


@pytest.fixture
def tri(tmp_path):
    e2 = repr(math.exp(-2))
    return write(tmp_path / "q.csv", f",a,b,c\na,0,1,{e2}\nb,1,0,{e2}\nc,{e2},{e2},0\n")


# --- readers -------------------------------------------------------------------


def test_edge_list_errors_carry_line_numbers(tmp_path):
    p = write(tmp_path / "g.edges", "# comment\na b\nb c x\n")
    with pytest.raises(InputError, match=r"g.edges:3:3"):
        io.read_edge_list(p)
    p = write(tmp_path / "h.edges", "a b\nc\n")
    with pytest.raises(InputError, match=r"h.edges:2"):
        io.read_edge_list(p)


def test_matrix_csv_errors(tmp_path):
    with pytest.raises(InputError, match=r":3:2"):
        io.read_matrix_csv(write(tmp_path / "m.csv", "a,b\n0,1\n1,zz\n"))
    with pytest.raises(InputError, match="data rows"):
        io.read_matrix_csv(write(tmp_path / "n.csv", "a,b\n0,1\n"))
    with pytest.raises(InputError, match="row id"):
        io.read_matrix_csv(write(tmp_path / "o.csv", ",a,b\nb,0,1\na,1,0\n"))


def test_json_errors_report_position(tmp_path):
    with pytest.raises(InputError, match=r"g.json:1:"):
        io.read_graph_json(write(tmp_path / "g.json", "{bad"))


def test_tree_spec_forms(tmp_path):
    t = io.read_tree_spec(write(tmp_path / "t.json", '{"root_degree": 4, "branching": 3, "depth": 5}'))
    assert t.level_count(2) == 12
    t = io.read_tree_spec(write(tmp_path / "u.json", '{"depth": 3, "default": 2, "children": {"": 3, "0": 4}}'))
    assert t.level_count(1) == 3 and t.level_count(2) == 8
    with pytest.raises(InputError):
        io.tree_from_spec({"depth": 3})


def test_cover_readers(tmp_path):
    fam = io.read_cover(write(tmp_path / "c.csv", "epsilon,count,common_diameter\n0.5,4,0.5\n0.25,12,0.25\n"))
    assert fam.table() == [(0.5, 4), (0.25, 12)]
    fam = io.read_cover(write(tmp_path / "c.json", '{"levels": [{"scale": 0.5, "diameters": [0.5, 0.25]}]}'))
    assert fam.levels[0].power_sum(1) == 0.75


def test_complex_roundtrip(tmp_path):
    c = model_complex(2, 2, 2)
    p = tmp_path / "cx.json"
    io.write_atomic(p, io.dumps(io.complex_to_json(c)))
    again = io.read_complex_json(p)
    assert {x.id for x in again.cells} == {x.id for x in c.cells}


def test_jsonable_and_atomic_write(tmp_path):
    text = io.dumps({"b": math.inf, "a": np.float64(0.5), "c": (1, 2), "d": np.arange(2)})
    assert json.loads(text) == {"a": 0.5, "b": "inf", "c": [1, 2], "d": [0, 1]}
    assert text.index('"a"') < text.index('"b"')
    p = tmp_path / "sub" / "x.json"
    io.write_atomic(p, "one")
    io.write_atomic(p, "two")
    assert p.read_text() == "two"
    assert [f.name for f in p.parent.iterdir()] == ["x.json"]


# --- CLI -------------------------------------------------------------------------


def test_delta_on_tree(tmp_path, capsys):
    g = write(tmp_path / "tree.edges", "a b\nb c\nb d\nd e 3\n")
    code, out, _ = run(capsys, "delta", "--graph", g)
    assert code == 0 and json.loads(out)["four_point_delta"] == 0


def test_exit_codes(tmp_path, capsys):
    code, _, err = run(capsys, "delta", "--graph", tmp_path / "missing.edges")
    assert code == 2 and "input error" in err
    code, _, err = run(capsys, "delta", "--graph", write(tmp_path / "bad.edges", "a b\nq\n"))
    assert code == 2 and "bad.edges:2" in err
    code, _, _ = run(capsys, "mdp", "--root-degree", 4, "--branching", 3, "--s", 1.7, "--C", 0.75, "--k-max", 4)
    assert code == 1
    with pytest.raises(SystemExit):
        main(["nosuchcommand"])


def test_chain_and_quasimetric(tri, capsys):
    code, out, _ = run(capsys, "chain", "--matrix", tri)
    d = json.loads(out)
    assert code == 0 and d["chain_metric"][0][1] == pytest.approx(2 * math.exp(-2), abs=1e-12)
    code, out, _ = run(capsys, "quasimetric", "--matrix", tri)
    d = json.loads(out)
    assert d["K"] == pytest.approx(math.exp(2)) and d["epsilon"] == pytest.approx(math.log(2) / 2)
    code, out, _ = run(capsys, "snowflake", "--matrix", tri, "--eps", 0.5, "--format", "csv")
    assert out.splitlines()[0] == "a,b,c"


def test_treedim_certificates_verify(tmp_path, capsys):
    outdir = tmp_path / "td"
    code, out, _ = run(capsys, "treedim", "--root-degree", 4, "--branching", 3, "--a", 2, "--depth", 8, "--mdp-depth", 5, "--out-dir", outdir)
    res = json.loads(out)
    assert code == 0
    assert res["box_dimension_fit"]["slope"] == pytest.approx(math.log(3) / math.log(2), abs=1e-9)
    assert (outdir / "fit.svg").read_text().startswith("<svg")
    for name in ("fit.json", "mdp.json"):
        code, out, _ = run(capsys, "verify", outdir / name)
        assert code == 0 and json.loads(out)["valid"]


def test_verify_detects_tampering(tmp_path, capsys):
    outdir = tmp_path / "td"
    run(capsys, "treedim", "--root-degree", 4, "--branching", 3, "--a", 2, "--depth", 6, "--mdp-depth", 4, "--out-dir", outdir)
    cert = json.loads((outdir / "mdp.json").read_text())
    cert["balls"][3]["measure"] *= 0.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(cert))
    code, out, _ = run(capsys, "verify", bad)
    assert code == 1 and not json.loads(out)["valid"]
    fit = json.loads((outdir / "fit.json").read_text())
    fit["slope"] += 0.01
    bad.write_text(json.dumps(fit))
    assert run(capsys, "verify", bad)[0] == 1
    bad.write_text('{"kind": "other"}')
    assert run(capsys, "verify", bad)[0] == 2


def test_cantor_mdp_certificate_verifies(tmp_path, capsys):
    p = tmp_path / "c.json"
    code, _, _ = run(capsys, "mdp", "--cantor", 5, "--s", math.log(2) / math.log(3), "--C", 2, "--out", p)
    assert code == 0
    assert run(capsys, "verify", p)[0] == 0


def test_bounds_commands(capsys):
    _, a, _ = run(capsys, "bounds", "bourdon", "--p", 5, "--q", 3)
    _, b, _ = run(capsys, "bounds", "bourdon", "--p", 9, "--q", 5)
    va, vb = json.loads(a)["bourdon_cdim"]["value"], json.loads(b)["bourdon_cdim"]["value"]
    assert abs(va - vb) <= 1e-12
    _, c, _ = run(capsys, "bounds", "coxeter", "--m", 11, "--M", 3)
    assert json.loads(c)["coxeter_bounds"]["upper"]["value"] is None
    code, _, _ = run(capsys, "bounds", "random", "--m", 2, "--d", 0.9, "--l", 10, "--C", 5)
    assert code == 0
    code, _, _ = run(capsys, "bounds", "bourdon", "--p", 4, "--q", 3)
    assert code == 2


def test_metric_subcommands(tmp_path, capsys):
    pts = np.linspace(0, 1, 6)
    ids = [f"p{i}" for i in range(6)]
    m = write(tmp_path / "m.csv", io.metric_to_csv(ids, np.abs(pts[:, None] - pts[None])))
    assert json.loads(run(capsys, "perfect", "--metric", m)[1])["uniformly_perfect_constant"]["c"] == pytest.approx(0.5)
    assert json.loads(run(capsys, "disconnect", "--metric", m)[1])["uniform_disconnection_constant"]["delta"] == pytest.approx(0.2)
    assert json.loads(run(capsys, "doubling", "--metric", m)[1])["doubling_constant_metric"]["C"] >= 2
    cr = json.loads(run(capsys, "crossratio", "--metric", m, "--z", "p0", "p1", "p2", "p3")[1])["cross_ratio"]
    assert cr == pytest.approx((0.4 * 0.4) / (0.6 * 0.2))
    code, out, _ = run(capsys, "product", "--metric-a", m, "--metric-b", m, "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 37
    p = write(tmp_path / "pair.csv", "domain,codomain\n" + "".join(f"{i},{i}\n" for i in ids))
    code, out, _ = run(capsys, "qs", "--domain", m, "--codomain", m, "--pairing", p, "--phi", 1, 1)
    d = json.loads(out)
    assert code == 0 and d["control_envelope"]["alpha"] == 1.0 and d["annulus_distortion_check"]["passed"]


def test_graph_subcommands(tmp_path, capsys):
    g = write(tmp_path / "c6.edges", "".join(f"{i} {(i + 1) % 6}\n" for i in range(6)))
    assert json.loads(run(capsys, "slim", "--graph", g)[1])["slim_triangle_delta"] == 1
    assert json.loads(run(capsys, "gromov", "--graph", g, "--p", 0, "--x", 2, "--y", 4)[1])["gromov_product"] == 1
    out = json.loads(run(capsys, "growth", "--graph", g, "--p", "0", "--n-max", 4)[1])
    assert out["growth_rate"]["counts"] == [1, 3, 5, 6, 6]
    out = json.loads(run(capsys, "coornaert", "--root-degree", 4, "--branching", 3, "--a", "e")[1])
    assert out["coornaert_dimension"] == pytest.approx(math.log(3), abs=1e-6)


def test_alpha_and_roundtree(tmp_path, capsys):
    out = json.loads(run(capsys, "alpha", "--rays", 0, math.pi / 2, "--t", 10)[1])
    assert out["alpha_limit_check"]["gap"] < 1e-3
    out = json.loads(run(capsys, "alpha", "--y", "0.5,0", "--y2=-0.5,0")[1])
    assert out["bourdon_alpha"] == pytest.approx(1.0)
    cx = tmp_path / "cx.json"
    io.write_atomic(cx, io.dumps(io.complex_to_json(model_complex(2, 3, 2))))
    code, out, _ = run(capsys, "roundtree", "--V", 2, "--H", 3, "--depth", 5, "--complex", cx)
    assert code == 0 and json.loads(out)["validate_round_tree"]["passed"]


def test_reproduce_filter_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "reproduce", "--only", 8, "--out", a)[0] == 0
    assert run(capsys, "reproduce", "--only", 8, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert [c["id"] for c in json.loads(a.read_text())["criteria"]] == [8]
    assert run(capsys, "reproduce", "--only", 42)[0] == 2
