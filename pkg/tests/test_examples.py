import numpy as np
import pytest

from tubeforms.errors import ImmersionViolation, SceneError
from tubeforms.examples import (
    ExampleFamily,
    aledo_galvez_crosscheck,
    build_example,
    closed_form_kappa1,
    make_profile,
    planar_curve,
)
from tubeforms.geometry import Grid, analyze
from tubeforms import hyperdual as hd


def kappa1_error(fam, domain=(-2.0, 2.0), nu=33, nv=32):
    sp = build_example(fam, domain)
    U, V = Grid.of(sp, nu, nv).points()
    d = analyze(sp, U, V)
    want = closed_form_kappa1(fam, U, V)
    ok = d["valid"] & np.isfinite(want)
    return float(np.max(np.abs(d["k1"] - want)[ok])), d


@pytest.mark.parametrize(
    "profile",
    [make_profile("constant", value=3), make_profile("cubic_ramp", offset=2), make_profile("expr", h="2 + sin(u)")],
    ids=["constant", "cubic-ramp", "expr"],
)
def test_e3_family_matches_its_formula(profile):
    err, d = kappa1_error(ExampleFamily("E3Tube", 1.0, profile))
    assert err < 1e-9
    np.testing.assert_allclose(d["k2"][d["valid"]], 1.0, atol=1e-12)


def test_l3_family_matches_its_formula():
    err, _ = kappa1_error(ExampleFamily("L3Tube", 1.0, make_profile("quadratic")), domain=(-1.5, 1.5))
    assert err < 1e-9


def test_planar_curve_has_speed_h():
    prof = make_profile("constant", value=2)
    _, d1, _ = hd.jet(planar_curve(prof), np.linspace(-1, 1, 5))
    np.testing.assert_allclose(np.linalg.norm(np.asarray(d1), axis=0), 2.0, atol=1e-14)


def test_quadrature_profiles_agree_with_closed_form_moments():
    closed = make_profile("quadratic")
    numeric = make_profile("expr", h="u**2")
    u = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(np.asarray(planar_curve(closed)(u)), np.asarray(planar_curve(numeric)(u)), atol=1e-13)


@pytest.mark.parametrize("a, b", [(0.0, 0.0), (0.5, 0.3), (0.0, "1 - u**2")])
def test_parabolic_family_matches_its_formula(a, b):
    err, _ = kappa1_error(ExampleFamily("H3Parabolic", 1.0, a=a, b=b))
    assert err < 1e-9


def test_hyperbolic_frame_matrix_must_be_read_by_rows():
    prof = make_profile("constant", value=1)
    rows, _ = kappa1_error(ExampleFamily("H3Hyperbolic", 2.0, prof, convention="rows"))
    cols, _ = kappa1_error(ExampleFamily("H3Hyperbolic", 2.0, prof, convention="columns"))
    assert rows < 1e-9
    assert cols > 1e-2


def test_aledo_galvez_rescaling_divides_by_one_minus_r_squared():
    out = aledo_galvez_crosscheck()
    assert out["max_discrepancy_h_tilde_divided"] < 1e-12
    assert out["max_discrepancy_h_tilde_scaled"] > 1e-2


def test_family_argument_checks():
    with pytest.raises(SceneError):
        ExampleFamily("H3Parabolic", 2.0)
    with pytest.raises(SceneError):
        ExampleFamily("H3Hyperbolic", 0.5, make_profile("constant", value=1))
    with pytest.raises(SceneError):
        ExampleFamily("Klein", 1.0)


def test_no_immersion_point_is_refused():
    # h = 0 with v pinned at pi/2 puts every sample on h + r cos v = 0
    fam = ExampleFamily("E3Tube", 1.0, make_profile("constant", value=0.0))
    with pytest.raises(ImmersionViolation):
        build_example(fam, (-1.0, 1.0), (np.pi / 2 - 1e-14, np.pi / 2 + 1e-14))
