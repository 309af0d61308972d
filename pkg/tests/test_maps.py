import cmath
import json
import math

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc

from fatoulab import maps
from fatoulab.cf import context
from fatoulab.errors import OutsideDomain, ParabolicCase, ZeroNotInImage
from fatoulab.report import load_schema


@pytest.mark.parametrize("make", [maps.quadratic, maps.cubic])
@pytest.mark.parametrize("alpha", [0.3, 0.01, "0.001"])
def test_sigma_is_fixed(make, alpha):
    m = make(alpha)
    with context(128):
        s = maps.sigma_fixed_point(m, 128)
        assert abs(maps.evaluate(m, s) - s) < 1e-35
        assert s != 0


def test_sigma_small_alpha_asymptotics():
    with context(128):
        s = complex(maps.sigma_fixed_point(maps.cubic("1e-6"), 128))
    assert abs(s / 1e-6 - (-1j * math.pi)) < 1e-4
    s = complex(maps.sigma_fixed_point(maps.quadratic("1e-6")))
    assert abs(s / 1e-6 - (-2j * math.pi)) < 1e-4


def test_parabolic_case_rejected():
    with pytest.raises(ParabolicCase):
        maps.sigma_fixed_point(maps.quadratic(0))


def test_u_forms_agree():
    m = maps.cubic(0.05)
    with context(128):
        for z in (mpc("0.1+0.2j"), mpc("-0.3+0.01j"), mpc("1e-30")):
            assert abs(maps.u_quotient(m, z) - maps.u_function(m, z)) < 1e-20
        assert abs(maps.u_at_zero(m) - maps.u_function(m, mpc(0))) < 1e-30


def test_quadratic_u_is_one():
    with context(128):
        assert abs(maps.u_at_zero(maps.quadratic(0.2)) - 1) < 1e-35


def test_critical_points():
    lam = cmath.exp(2j * math.pi * 0.3)
    m = maps.quadratic(0.3)
    assert abs(complex(maps.critical_points(m)[0]) + lam / 2) < 1e-15
    c = maps.cubic(0.3)
    for cp in maps.critical_points(c):
        assert abs(complex(maps.derivative(c, cp))) < 1e-15
    assert abs(complex(maps.evaluate(c, mpc(-1)))) == 0
    assert abs(complex(maps.critical_value(c)) - lam * (-4 / 27)) < 1e-15


def test_domain_u():
    assert maps.in_domain_U(0)
    assert maps.in_domain_U(0.3 + 0.3j)
    assert not maps.in_domain_U(-2)
    assert not maps.in_domain_U(-1)           # on the slit and in B
    assert not maps.in_domain_U(-1 + 5e-4j)   # inside B
    assert maps.in_domain_U(-1 + 9e-4j)       # just outside B
    assert not maps.in_domain_U(1e3)


def test_domain_mask_pgm():
    d = maps.default_domain()
    data = d.to_pgm()
    assert data.startswith(b"P5\n512 512\n255\n")
    assert len(data) == len(b"P5\n512 512\n255\n") + 512 * 512


def test_orbit_rows_and_escape():
    m = maps.quadratic(0.3)
    rec = maps.orbit(m, maps.critical_value(m), 10)
    assert len(rec.points) == 11 and rec.escaped_at is None
    assert rec.to_csv().count("\n") == 12
    esc = maps.orbit(m, 10, 100, escape_radius=50)
    assert esc.escaped_at == 1 and len(esc.points) == 2
    assert esc.to_csv().splitlines()[1].endswith(",1")


def test_orbit_mp_matches_double():
    m = maps.quadratic(0.3)
    a = maps.orbit(m, 0.1 + 0.1j, 30)
    b = maps.orbit(m, 0.1 + 0.1j, 30, bits=128)
    assert max(abs(complex(x) - complex(y)) for x, y in zip(a.points, b.points)) < 1e-12


def test_orbit_json_schema():
    jsonschema = pytest.importorskip("jsonschema")
    rec = maps.orbit(maps.quadratic(0.3), 10, 5)
    jsonschema.validate(json.loads(rec.to_json()), load_schema("orbit.v1"))


def test_renorm_kind_needs_payload_and_radius():
    with pytest.raises(ValueError):
        maps.MapSpec(maps.RENORM, 0.2)
    m = maps.MapSpec(maps.RENORM, 0.2, payload=lambda z: 2 * z, validated_radius=0.5)
    assert maps.evaluate(m, 0.1) == 0.2
    with pytest.raises(OutsideDomain):
        maps.evaluate(m, 1.0)


def test_exp_project_periodic_and_lift_roundtrip():
    w = 0.3 + 0.7j
    assert abs(maps.exp_project(w) - maps.exp_project(w + 1)) < 1e-15
    for conj in (True, False):
        z = maps.exp_project(w, conjugate=conj)
        back = maps.exp_lift(z, 0, conjugate=conj)
        assert abs(back - w) < 1e-14
        assert abs(maps.exp_lift(z, 2, conjugate=conj) - (w + 2)) < 1e-14
    with pytest.raises(ZeroNotInImage):
        maps.exp_lift(0)


def test_exp_mp_branch():
    with context(200):
        w = mpc("0.25+1.5j")
        z = maps.exp_project(w)
        assert abs(maps.exp_lift(z) - w) < gmpy2.mpfr(2) ** -190


def test_exp_vectorized():
    w = np.array([0.1 + 1j, -0.4 + 2j])
    z = maps.exp_project(w)
    assert np.allclose(maps.exp_lift(z), w)
