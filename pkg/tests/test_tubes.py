import math
from fractions import Fraction

import numpy as np
import pytest

from tubeforms import hyperdual as hd
from tubeforms.ambient import DS3, E3, H3, S3, SPACE_FORMS, inner
from tubeforms.curves import ExprCurve, FramedCurve, ParabolicData
from tubeforms.errors import (
    FlatSpaceHasNoPolar,
    FrameSignatureMismatch,
    InvalidParabolicData,
    NotATableRow,
    ParabolicHasNoDistance,
    VanishingPrincipalCurvature,
)
from tubeforms.tubes import (
    TABLE,
    SurfacePatch,
    TubeKind,
    classify_tube,
    critical_constant,
    elliptic_tube,
    hyperbolic_tube,
    normalization,
    parabolic_tube,
    polar_surface,
    regime,
    table_row,
    tube_distance,
)

F = Fraction

# c = eps'' (eps + eps' / r^2) worked by hand for one radius per row
HAND_CONSTANTS = [
    (1, F(1, 2), F(4)),
    (2, F(1, 2), F(5)),
    (3, F(1, 2), F(3)),
    (4, 2, F(-3, 4)),
    (5, 1, F(0)),
    (6, F(1, 2), F(-4)),
    (7, F(1, 2), F(4)),
    (8, F(1, 2), F(-4)),
    (9, F(1, 2), F(-3)),
    (10, 2, F(3, 4)),
    (11, 1, F(0)),
    (12, F(1, 2), F(5)),
    (13, F(1, 2), F(-5)),
    (14, F(1, 2), F(-5)),
    (15, F(1, 2), F(3)),
    (16, 2, F(3, 4)),
    (17, 1, F(0)),
]


@pytest.mark.parametrize("index, r, c", HAND_CONSTANTS)
def test_each_row_has_the_hand_computed_critical_constant(index, r, c):
    row = TABLE[index - 1]
    got = critical_constant(*row.signs, r)
    assert got == c and isinstance(got, Fraction)
    assert classify_tube(got) is row.kind
    assert table_row(row.space, row.signs[1], row.signs[2], r) is row


def test_table_has_one_row_per_case_and_covers_every_space_form_with_curvature_sign():
    assert len(TABLE) == 17
    assert {row.space for row in TABLE} == set(SPACE_FORMS) - {SPACE_FORMS[-1]}


@pytest.mark.parametrize("space", SPACE_FORMS[:-1], ids=lambda q: q.name)
def test_validation_accepts_exactly_the_table_sign_rows(space):
    listed = {row.signs for row in TABLE if row.space == space}
    for eps_p in (-1, 1):
        for eps_pp in (-1, 1):
            signs = (space.eps, eps_p, eps_pp)
            for r in (F(1, 2), 1, 2):
                if signs in listed:
                    regimes = {row.regime for row in TABLE if row.space == space and row.signs == signs}
                    if "any" in regimes or regime(r) in regimes:
                        assert table_row(space, eps_p, eps_pp, r).signs == signs
                    else:
                        with pytest.raises(NotATableRow, match="admits no tube"):
                            table_row(space, eps_p, eps_pp, r)
                else:
                    with pytest.raises(NotATableRow, match="not a table row"):
                        table_row(space, eps_p, eps_pp, r)


def test_flat_row_with_both_signs_negative_is_rejected():
    with pytest.raises(NotATableRow, match=r"\(0, -1, -1\)"):
        table_row(E3, -1, -1, 1)


def test_float_radius_close_to_one_is_parabolic():
    assert classify_tube(critical_constant(-1, 1, 1, 1.0)) is TubeKind.PARABOLIC
    assert classify_tube(critical_constant(-1, 1, 1, 1.001)) is TubeKind.HYPERBOLIC


@pytest.mark.parametrize(
    "eps, eps_p, r, d",
    [(0, 1, 0.5, 0.5), (1, 1, 0.5, math.atan(0.5)), (-1, 1, 0.5, math.atanh(0.5)), (-1, 1, 2.0, math.atanh(0.5))],
)
def test_distance(eps, eps_p, r, d):
    assert tube_distance(eps, eps_p, r) == pytest.approx(d, rel=1e-15)


def test_parabolic_case_has_no_distance():
    with pytest.raises(ParabolicHasNoDistance):
        tube_distance(-1, 1, 1)


def test_normalization():
    assert normalization(-1, 1, 2) == pytest.approx(1 / math.sqrt(3))
    assert normalization(1, 1, 1) == pytest.approx(1 / math.sqrt(2))
    assert normalization(-1, 1, 1) == 1.0


def _h3_geodesic_frame():
    # dS3 geodesic (0, 0, cos u, sin u) with the constant normal frame e0, e1
    curve = ExprCurve(["0", "0", "cos(u)", "sin(u)"])
    frame = lambda u: (np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0]))
    return FramedCurve(DS3, curve, frame, (-1, 1), (0.0, 6.0))


def test_hyperbolic_tube_about_a_geodesic_lies_on_h3():
    sp = hyperbolic_tube(_h3_geodesic_frame(), 2, 1, 1)
    assert sp.space == H3 and sp.declared_r == 2
    u, v = np.meshgrid(np.linspace(0, 6, 7), np.linspace(-2, 2, 5))
    x = np.asarray(sp(u, v))
    np.testing.assert_allclose(inner(x, x, 1), -1, atol=1e-13)
    assert sp.provenance.c == F(-3, 4)


def test_wrong_frame_signature_is_refused():
    fc = FramedCurve(DS3, ExprCurve(["0", "0", "cos(u)", "sin(u)"]), lambda u: None, (1, 1), (0.0, 1.0))
    with pytest.raises(FrameSignatureMismatch):
        hyperbolic_tube(fc, 2, 1, 1)


def test_invalid_parabolic_data_is_refused():
    bad = ParabolicData(H3, 1, lambda u: (np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0])), (0.0, 1.0))
    with pytest.raises(InvalidParabolicData):
        parabolic_tube(bad)


def test_polar_errors():
    torus = elliptic_tube(
        FramedCurve(E3, ExprCurve(["3*cos(u)", "3*sin(u)", "0", "0"]), lambda u: (np.stack([np.cos(u), np.sin(u), 0 * u, 0 * u]), np.array([0, 0, 1.0, 0])), (1, 1), (0.0, 6.0)),
        1,
        1,
        1,
    )
    with pytest.raises(FlatSpaceHasNoPolar):
        polar_surface(torus)
    # an equatorial 2-sphere of S3 is totally geodesic
    sphere = SurfacePatch(S3, lambda u, v: hd.stack([hd.mul(hd.cos(u), hd.cos(v)), hd.mul(hd.cos(u), hd.sin(v)), hd.sin(u), 0.0 * hd.value(u)]), (-1.0, 1.0), (0.0, 6.0))
    with pytest.raises(VanishingPrincipalCurvature):
        polar_surface(sphere)
