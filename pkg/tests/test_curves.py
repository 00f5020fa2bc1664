import numpy as np
import pytest

from tubeforms import hyperdual as hd
from tubeforms.ambient import DS3, E3, H3, L3, S3, inner
from tubeforms.curves import (
    ExprCurve,
    SplineCurve,
    curve_jet,
    frame_residuals,
    parabolic_from_transport,
    solve_frame_system,
    transport_normal_frame,
)
from tubeforms.errors import FrameSignatureUnavailable, NotInLieAlgebra, RegularityLoss

HELIX = ExprCurve(["cos(u)", "sin(u)", "0.5*u", "0"])
H3_CURVE = ExprCurve(
    ["cosh(s)*cosh(t*u)", "cosh(s)*sinh(t*u)", "sinh(s)*cos(u)", "sinh(s)*sin(u)"],
    {"s": 0.5, "t": 0.5},
)


def test_expr_curve_derivatives():
    jet = curve_jet(HELIX, np.asarray(0.3), third=True)
    np.testing.assert_allclose(jet.d1, [-np.sin(0.3), np.cos(0.3), 0.5, 0], atol=1e-15)
    np.testing.assert_allclose(jet.d3, [np.sin(0.3), -np.cos(0.3), 0, 0], atol=1e-15)


@pytest.mark.parametrize(
    "Q, curve, signature",
    [(E3, HELIX, (1, 1)), (H3, H3_CURVE, (1, 1)), (L3, ExprCurve(["0.3*u", "cos(u)", "sin(u)", "0"]), (-1, 1))],
)
def test_transported_frame_meets_every_invariant(Q, curve, signature):
    fc = transport_normal_frame(curve, Q, domain=(0.0, 3.0), signature=signature)
    for u in np.linspace(0, 3, 7):
        res = frame_residuals(fc, u)
        assert max(res.values()) < 1e-9, res


def test_transport_is_parallel_in_the_normal_bundle():
    # e1' has no normal component: <e1', e2> = 0
    fc = transport_normal_frame(HELIX, E3, domain=(0.0, 3.0))
    t = hd.new_tag()
    e1, e2 = fc.frame(hd.HyperDual(np.asarray(1.1), 1.0, 0.0, 0.0, tag=t))
    assert abs(inner(e1.e1, e2.re, 0)) < 1e-12


def test_helix_frame_turns_against_the_frenet_frame_at_the_torsion_rate():
    # for a helix, the parallel normal frame rotates against the Frenet frame at the torsion rate
    fc = transport_normal_frame(HELIX, E3, domain=(0.0, 2.0))
    e1a, e2a = (np.asarray(x) for x in fc.frame(np.asarray(0.0)))
    e1b, e2b = (np.asarray(x) for x in fc.frame(np.asarray(2.0)))
    # a parallel normal vector turns against the Frenet normal at minus the torsion rate
    speed = np.sqrt(1.25)
    torsion = 0.5 / 1.25
    normal = lambda u: np.array([-np.cos(u), -np.sin(u), 0])
    binormal = lambda u: np.cross([-np.sin(u), np.cos(u), 0.5], [-np.cos(u), -np.sin(u), 0]) / speed
    angle = lambda e, u: np.arctan2(e[:3] @ binormal(u), e[:3] @ normal(u))
    turn = (angle(e1b, 2.0) - angle(e1a, 0.0) + np.pi) % (2 * np.pi) - np.pi
    assert turn == pytest.approx(-torsion * speed * 2.0, abs=1e-10)


def test_transport_refuses_a_vertex():
    with pytest.raises(RegularityLoss):
        transport_normal_frame(ExprCurve(["u**2", "u**3", "0", "0"]), E3, domain=(-1.0, 1.0))


def test_unavailable_signature_is_reported():
    with pytest.raises(FrameSignatureUnavailable):
        transport_normal_frame(HELIX, E3, domain=(0.0, 1.0), signature=(-1, 1))


def test_frame_system_requires_the_lie_algebra():
    def bad(u):
        return np.ones((4, 4) + np.shape(hd.value(u)))

    with pytest.raises(NotInLieAlgebra):
        solve_frame_system(bad, np.eye(4), (0.0, 1.0), 1)


def test_frame_system_solves_a_hyperbolic_rotation():
    # F' = F M with a constant boost generator: F(u) = exp(u M)
    def M(u):
        z = np.zeros((4, 4) + np.shape(hd.value(u)))
        z[0, 1] = z[1, 0] = 1.0
        return z

    mf = solve_frame_system(M, np.eye(4), (0.0, 1.0), 1)
    F = np.asarray(mf(np.asarray(0.8)))
    assert F[0, 0] == pytest.approx(np.cosh(0.8), abs=1e-12)
    assert F[1, 0] == pytest.approx(np.sinh(0.8), abs=1e-12)


def test_spline_curve_is_pushed_onto_the_quadric():
    u = np.linspace(0, 2, 41)
    pts = np.stack([np.cos(u), np.sin(u), 0 * u, 0 * u], axis=1) * 1.01
    sc = SplineCurve(u, pts, S3)
    x = np.asarray(sc(np.asarray(0.77)))
    assert inner(x, x, 0) == pytest.approx(1.0, abs=1e-14)


def test_parabolic_data_from_transport():
    pd = parabolic_from_transport(H3_CURVE, H3, 1, (0.0, 2.0))
    for u in (0.0, 0.9, 2.0):
        assert max(frame_residuals(pd, u).values()) < 1e-9
    swapped = pd.swapped()
    assert swapped.space == DS3
    dp, dm, _ = pd.evaluate(np.asarray(0.5))
    sp_, sm_, _ = swapped.evaluate(np.asarray(0.5))
    np.testing.assert_array_equal(dp, sm_)
    np.testing.assert_array_equal(dm, sp_)
