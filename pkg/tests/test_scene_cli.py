import json

import numpy as np
import pytest

from tubeforms.ambient import E3
from tubeforms.cli import main
from tubeforms.errors import NotATableRow, SceneError, UnsupportedChart
from tubeforms.export import chart_points, curvature_residual, mesh_from_analysis, read_csv, read_obj, write_csv
from tubeforms.scene import build_scene, classification_line, load_scene, packaged_scenes

TUBE = {
    "space": "H3",
    "kind": "hyperbolic",
    "r": 2,
    "eps_p": 1,
    "eps_pp": 1,
    "curve": {"expr": ["0", "0", "cos(u)", "sin(u)"]},
    "domain": {"u": [0, 6]},
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_every_table_row_has_a_packaged_scene():
    rows = sorted(load_scene(n).data["row"] for n in packaged_scenes() if n.startswith("row"))
    assert rows == list(range(1, 18))


def test_classification_line_for_the_equidistant_tube():
    line = classification_line(build_scene(load_scene(TUBE)))
    assert line.startswith("hyperbolic, c=-3/4, d=arcoth(2)")


def test_parabolic_scene_has_no_distance(capsys):
    code, out, _ = run(capsys, "classify", "--scene", "row05-h3-parabolic")
    assert code == 0 and out.startswith("parabolic, c=0, d undefined")


def test_sign_rows_outside_the_table_are_rejected_with_the_admissible_rows():
    bad = dict(TUBE, space="E3", eps_p=-1, eps_pp=-1, r=1)
    with pytest.raises(NotATableRow, match=r"admissible: \[\(0, 1, 1\)\]"):
        load_scene(bad)


def test_declared_kind_and_row_must_match_the_table():
    with pytest.raises(SceneError, match="hyperbolic tube, not elliptic"):
        load_scene(dict(TUBE, kind="elliptic"))
    with pytest.raises(SceneError, match="row 4"):
        load_scene(dict(TUBE, row=3))


def test_invalid_scene_exit_status(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("space: E3\nkind: elliptic\nr: 1\neps_p: -1\neps_pp: -1\ncurve: {expr: [u, '0', '0', '0']}\n")
    code, _, err = run(capsys, "build", "--scene", str(path), "--out", str(tmp_path / "x.json"))
    assert code == 2 and "not a table row" in err
    path.write_text("space: [unclosed\n")
    assert run(capsys, "verify", "--scene", str(path))[0] == 2
    assert run(capsys, "verify", "--scene", "no-such-scene")[0] == 2


def test_verify_exit_status_and_report(tmp_path, capsys):
    report = tmp_path / "torus.json"
    code, out, _ = run(capsys, "verify", "--scene", "torus", "--grid", "32x32", "--out", str(report))
    assert code == 0 and "PASS" in out
    data = json.loads(report.read_text())
    assert data["curvature"]["checks"]["constant_curvature"]["value"] < 1e-8
    code, out, _ = run(capsys, "verify", "--scene", "neg-e3-paraboloid", "--grid", "16x16")
    assert code == 1 and "FAIL" in out


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--scene", "row06-l3-spacelike-hyperbolic", "--grid", "16x16")
    second = run(capsys, "verify", "--scene", "row06-l3-spacelike-hyperbolic", "--grid", "16x16")
    assert first == second


def test_quadratic_example_lists_its_umbilic_circle(capsys):
    code, out, _ = run(capsys, "verify", "--scene", "ex-e3-quadratic")
    assert code == 0
    assert "u in {0}" in out


def test_build_writes_a_descriptor_that_verify_accepts(tmp_path, capsys):
    desc = tmp_path / "tube.json"
    code, out, _ = run(capsys, "build", "--scene", "row04-h3-hyperbolic", "--out", str(desc))
    assert code == 0 and "c=-3/4" in out and "d=arcoth(2)" in out
    assert json.loads(desc.read_text())["classification"]["c"] == "-3/4"
    assert run(capsys, "verify", "--scene", str(desc), "--grid", "16x16")[0] == 0


@pytest.mark.parametrize(
    "scene, home",
    [("torus", "E3"), ("row04-h3-hyperbolic", "dS3, spacelike"), ("row05-h3-parabolic", "null cone")],
)
def test_reconstruct_writes_samples_with_their_home(tmp_path, capsys, scene, home):
    out_file = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "reconstruct", "--scene", scene, "--grid", "24x24", "--out", str(out_file))
    assert code == 0 and f"home: {home};" in out
    text = out_file.read_text()
    assert text.startswith(f"# home: {home}\n")
    samples = np.loadtxt(text.splitlines()[2:], delimiter=",")
    assert samples.shape == (24, 5)


def test_reconstructed_torus_core_is_a_circle(tmp_path, capsys):
    out_file = tmp_path / "c.csv"
    run(capsys, "reconstruct", "--scene", "torus", "--grid", "16x16", "--out", str(out_file))
    x = np.loadtxt(out_file.read_text().splitlines()[2:], delimiter=",")[:, 1:]
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 3.0, atol=1e-12)


def test_torus_obj_is_a_closed_band_in_v(tmp_path, capsys):
    path = tmp_path / "torus.obj"
    assert run(capsys, "export", "--scene", "torus", "--grid", "10x12", "--out", str(path))[0] == 0
    verts, faces = read_obj(path.read_text())
    assert verts.shape == (120, 3)
    assert faces.shape == (9 * 12, 4)
    assert faces.min() == 1 and faces.max() == 120
    # the last column of quads wraps back to v index 0
    assert any(f[0] % 12 == 0 and f[3] % 12 == 1 for f in faces)


def test_h3_tube_lies_inside_the_poincare_ball(tmp_path, capsys):
    path = tmp_path / "h3.obj"
    assert run(capsys, "export", "--scene", "row04-h3-hyperbolic", "--chart", "poincare", "--out", str(path))[0] == 0
    verts, _ = read_obj(path.read_text())
    assert np.all(np.linalg.norm(verts, axis=1) < 1)


def test_chart_mismatch(capsys, tmp_path):
    with pytest.raises(UnsupportedChart):
        chart_points(E3, np.zeros((4, 3)), "poincare")
    code, _, err = run(capsys, "export", "--scene", "torus", "--chart", "stereographic", "--out", str(tmp_path / "t.obj"))
    assert code == 2 and "stereographic" in err


def test_non_isometric_chart_warns(capsys, tmp_path):
    code, _, err = run(capsys, "export", "--scene", "row12-ds3-timelike-elliptic", "--grid", "8x8", "--out", str(tmp_path / "d.obj"))
    assert code == 0 and "not isometric" in err


def test_csv_round_trip_is_bit_identical(tmp_path, capsys):
    path = tmp_path / "torus.csv"
    assert run(capsys, "export", "--scene", "torus", "--format", "csv", "--grid", "16x16", "--out", str(path))[0] == 0
    table = read_csv(path.read_text())
    scene = load_scene("torus")
    scene.grid = (16, 16)
    sp = build_scene(scene)
    from tubeforms.geometry import Grid, analyze

    grid = Grid.of(sp, 16, 16)
    mesh = mesh_from_analysis(sp, grid, analyze(sp, *grid.points()))
    for key in ("k1", "k2", "u", "v"):
        assert np.array_equal(table[key], mesh[key])
    assert np.array_equal(table["X"], mesh["X"])
    assert curvature_residual(table, sp.declared_r) == curvature_residual(mesh, sp.declared_r)
    assert write_csv(table | {"faces": None}) == path.read_text()


def test_csv_header_and_digits(tmp_path, capsys):
    path = tmp_path / "t.csv"
    run(capsys, "export", "--scene", "torus", "--format", "csv", "--grid", "4x4", "--out", str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "u,v,x1,x2,x3,x4,k1,k2,umbilic"
    assert len(lines) == 17


def test_bad_grid_argument(capsys):
    with pytest.raises(SystemExit):
        main(["verify", "--scene", "torus", "--grid", "64by64"])
