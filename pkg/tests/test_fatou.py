import math

import numpy as np
import pytest
from gmpy2 import mpc

from fatoulab import maps
from fatoulab.cf import context
from fatoulab.errors import OutsideImageBand
from fatoulab.fatou import (ConstantsLedger, FatouFrame, SectorSpec, SigmaStrip, ThetaSpec,
                            abel_report, cloud_diameter, deck_distance, dilatation_report,
                            fatou_phi, fatou_phi_inverse, first_visit_index, fit_M, lift_F,
                            near_translation_report, sector_extract, semiconjugacy_report,
                            semiconjugacy_residual, sigma_contains, tau_cover, theta_contains)


@pytest.fixture(scope="module")
def quad():
    return FatouFrame(maps.quadratic(0.01))


@pytest.fixture(scope="module")
def cubic():
    return FatouFrame(maps.cubic(0.01))


def test_tau_is_deck_periodic(quad):
    w = 3.2 + 1.7j
    assert abs(tau_cover(quad, w) - tau_cover(quad, w + 100)) < 1e-12
    # tau tends to 0 as Im w -> +inf and to sigma as Im w -> -inf
    assert abs(tau_cover(quad, 1 + 400j)) < 1e-6
    assert abs(tau_cover(quad, 1 - 400j) - complex(quad.sigma)) < 1e-6


def test_lift_is_near_translation(quad):
    w = quad.mp(complex(20, 5))
    dev = abs(complex(lift_F(quad, w)) - complex(w) - 1)
    assert dev < 0.25


@pytest.mark.parametrize("name", ["quad", "cubic"])
def test_semiconjugacy_pointwise(name, request):
    fr = request.getfixturevalue(name)
    with context(fr.bits):
        for w in (mpc("10+3j"), mpc("-30-2j"), mpc("45+20j")):
            assert semiconjugacy_residual(fr, w) < 1e-30


def test_theta_and_sigma_membership():
    th = ThetaSpec(R=5, alpha=0.01)
    assert theta_contains(th, 50 + 0j)
    assert not theta_contains(th, 100 + 3j)
    assert deck_distance(99 + 0j, 0.01) == pytest.approx(1)
    st = SigmaStrip(Q=5, alpha=0.01)
    assert sigma_contains(st, 50 + 100j)
    assert not sigma_contains(st, 1 + 5j)       # left wedge needs |Im| >= 9
    assert sigma_contains(st, 1 + 9j)
    assert sigma_contains(st, 99 - 20j)


def test_phi_normalised_at_critical_point(quad):
    assert abs(complex(fatou_phi(quad, quad.cp_lift))) == 0


def test_abel_equation_double_and_mp(quad):
    w = complex(quad.base_a + 0.4, 2.0)
    d = fatou_phi(quad, quad.F(w)) - fatou_phi(quad, w) - 1
    assert abs(d) < 1e-12
    with context(quad.bits):
        wm = quad.mp(w)
        d = quad.phi(quad.F(wm)) - quad.phi(wm) - 1
        assert abs(d) < 1e-30


def test_phi_inverse_roundtrip(quad):
    for zeta in (0.3 + 1j, 17.5 - 2j, 60.25 + 0.5j):
        w = fatou_phi_inverse(quad, zeta)
        assert abs(fatou_phi(quad, w) - zeta) < 1e-9


def test_phi_inverse_band(quad):
    with pytest.raises(OutsideImageBand):
        fatou_phi_inverse(quad, -3 + 0j)
    with pytest.raises(OutsideImageBand):
        fatou_phi_inverse(quad, quad.band_limit + 2 + 0j)


def test_near_translation_report(quad):
    rep = near_translation_report(quad, grid=60)
    assert rep.passed
    assert rep.residuals["sup_F_minus_translation"] < 0.25
    assert 1 < rep.fitted["C2"] < 20


def test_near_translation_explicit_region(cubic):
    rep = near_translation_report(cubic, ThetaSpec(8, 0.01), grid=40)
    assert rep.passed and rep.region["R"] == 8


def test_dilatation_bound(quad, cubic):
    for fr in (quad, cubic):
        rep = dilatation_report(fr)
        assert rep.passed and rep.residuals["sup_dilatation"] < 1 / 3


def test_semiconjugacy_and_abel_reports(cubic):
    assert semiconjugacy_report(cubic, grid=10).passed
    rep = abel_report(cubic, points=30)
    assert rep.passed and rep.samples == 30


def test_first_visit_and_sectors(quad):
    i = first_visit_index(quad)
    w = complex(quad.cp_lift)
    for _ in range(i):
        assert w.real < quad.c2_fitted
        w = quad.F(w)
    assert w.real >= quad.c2_fitted
    cloud = sector_extract(quad, SectorSpec("C"), samples=8)
    assert cloud.points.shape == (64,)
    assert cloud.diameter == pytest.approx(cloud_diameter(cloud.points))
    assert cloud.to_csv().startswith("zeta_re,zeta_im,z_re,z_im\n")


def test_pullback_inverts_the_lift(quad):
    base = sector_extract(quad, SectorSpec("S0", re_band=(0.5, 1.5), im_band=(2.0, 6.0)), 6)
    back = sector_extract(quad, SectorSpec("S0", re_band=(0.5, 1.5), im_band=(2.0, 6.0),
                                           pullback_depth=2), 6)
    assert np.all(np.isfinite(back.points))
    fwd = quad.F(quad.F(back.lifted))
    assert np.max(np.abs(fwd - (base.lifted + 1 / quad.alpha))) < 1e-9


def test_cloud_diameter_square():
    pts = np.array([0, 1, 1 + 1j, 1j, 0.5 + 0.5j])
    assert cloud_diameter(pts) == pytest.approx(math.sqrt(2))


def test_fit_m_is_positive(quad):
    assert fit_M([quad]) > 0


def test_constants_ledger():
    led = ConstantsLedger()
    led.record("C2", 5.1, "largest deck distance of a violating sample")
    assert led.to_dict()["C2"] == {"value": 5.1, "tag": "fitted",
                                   "protocol": "largest deck distance of a violating sample"}
