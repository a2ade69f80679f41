import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chemofv.bounds import (
    DEFAULT_C1,
    calibrate_C1,
    check_gradient_bound,
    default_tolerance,
    lambda1,
    semigroup_gradient_bound,
    subsolution_certificate,
)
from chemofv.errors import CoverageError, PreconditionError
from chemofv.grid import GridSpec
from chemofv.model import Constant, Linear, ModelSpec, Saturating
from chemofv.probes import ProbeSeries

# 1 + (1 + sqrt(pi^3)) / pi^2, evaluated once and frozen
SEMIGROUP_ORACLE = 1.665510767190094


def synthetic(T=1.0, n=41, min_u=None, max_u=1.0, lap=2.0, grad=0.5):
    s = ProbeSeries()
    for t in np.linspace(0.0, T, n):
        s.append(t=float(t), min_u=float(min_u(t)) if min_u else 0.5, max_u=max_u, sup_v=1.0,
                 sup_grad_v=grad, sup_lap_v=lap, mass_u=1.0, mass_v=1.0, deadcore_cells=0)
    return s


def test_semigroup_bound_oracle():
    assert semigroup_gradient_bound(1.0, 1.0, math.pi**2, 1.0) == pytest.approx(SEMIGROUP_ORACLE, rel=1e-15)


def test_semigroup_bound_degenerate_inputs():
    assert semigroup_gradient_bound(2.0, 0.0, 3.0, 1.5) == 3.0
    assert semigroup_gradient_bound(0.0, 5.0, 3.0, 1.5) == 0.0


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_semigroup_bound_linear_in_K(K, M, lam, C1):
    one = semigroup_gradient_bound(K, M, lam, C1)
    assert semigroup_gradient_bound(2 * K, M, lam, C1) == pytest.approx(2 * one, rel=1e-12, abs=1e-300)


def test_lambda1():
    assert lambda1(GridSpec.interval(8, 2.0)) == pytest.approx(math.pi**2 / 4)
    assert lambda1(GridSpec.box(8, 8, 1.0, 1.5)) == pytest.approx((math.pi / 1.5) ** 2)


def test_default_C1_matches_calibration():
    assert calibrate_C1() == DEFAULT_C1
    assert DEFAULT_C1 >= 1.0


def test_gradient_bound_report():
    s = synthetic(grad=0.5)
    rep = check_gradient_bound(s, K_v0=1.0, M_u=1.0, lam1=math.pi**2, C1=1.0)
    assert rep.holds and rep.bound == pytest.approx(SEMIGROUP_ORACLE)
    assert rep.status == "calibrated, not certified"
    bad = check_gradient_bound(synthetic(grad=10.0), 1.0, 1.0, math.pi**2, 1.0)
    assert not bad.holds
    with pytest.raises(CoverageError):
        check_gradient_bound(ProbeSeries(), 1.0, 1.0, 1.0)


def test_certificate_closed_form():
    s = synthetic(min_u=lambda t: 0.1, lap=2.0)
    spec = ModelSpec(Linear(1.0), Constant(1.0))
    cert = subsolution_certificate(s, [], spec, 1.0, delta0=0.5, tolerance=1e-8)
    assert cert.A == 0.1 and cert.C_S == 1.0 and cert.K2 == 2.0 and cert.B == 2.0
    assert cert.delta_u == pytest.approx(0.1 * math.exp(-2.0), rel=1e-14)
    assert cert.holds
    # the record just after T/2 is the tightest: 0.1 - 0.1 e^{-2 t}
    t_first = 0.525
    assert cert.min_margin == pytest.approx(0.1 - 0.1 * math.exp(-2 * t_first))


def test_certificate_zero_laplacian_collapses_exponent():
    s = synthetic(min_u=lambda t: 0.3, lap=0.0)
    cert = subsolution_certificate(s, [], ModelSpec(Linear(1.0)), 1.0, 0.2, 0.0)
    assert cert.B == 0.0 and cert.delta_u == cert.A == 0.2
    assert cert.min_margin == pytest.approx(0.1)


def test_certificate_uses_snapshots_and_detects_violation():
    s = synthetic(min_u=lambda t: 0.5, lap=0.0)
    snaps = [(0.75, np.array([0.5, 0.01, 0.5]))]
    cert = subsolution_certificate(s, snaps, ModelSpec(Linear(1.0)), 1.0, 0.2, 1e-8)
    assert cert.min_margin == pytest.approx(0.01 - 0.2)
    assert not cert.holds
    assert cert.checked_points == 20 + 3


def test_certificate_saturating_sensitivity_constant():
    s = synthetic(min_u=lambda t: 0.4, max_u=3.0, lap=1.0)
    cert = subsolution_certificate(s, [], ModelSpec(Linear(1.0), Saturating(2.0, 5.0)), 1.0, 1.0, 0.0)
    assert cert.C_S == 2.0 and cert.M_u == 3.0


def test_certificate_preconditions():
    spec = ModelSpec(Linear(1.0))
    with pytest.raises(PreconditionError):
        subsolution_certificate(synthetic(), [], spec, 1.0, 0.0, 0.0)
    with pytest.raises(PreconditionError):
        subsolution_certificate(synthetic(min_u=lambda t: 0.0), [], spec, 1.0, 0.1, 0.0)
    with pytest.raises(PreconditionError):
        subsolution_certificate(synthetic(), [], spec, 0.0, 0.1, 0.0)
    with pytest.raises(CoverageError):
        subsolution_certificate(synthetic(n=6), [], spec, 1.0, 0.1, 0.0)


@given(
    A=st.floats(1e-3, 1.0),
    K2=st.floats(0.0, 10.0),
    T=st.floats(0.1, 5.0),
)
def test_certificate_delta_formula(A, K2, T):
    s = synthetic(T=T, min_u=lambda t: A, lap=K2)
    cert = subsolution_certificate(s, [], ModelSpec(Linear(1.0), Constant(1.0)), T, 10.0, 0.0)
    assert cert.delta_u == pytest.approx(A * math.exp(-K2 * T), rel=1e-13)
    # a constant density equal to A always dominates A e^{-Bt}
    assert cert.holds


def test_default_tolerance():
    g = GridSpec.interval(64)
    assert default_tolerance(g, 1e-5, 2.0) == pytest.approx(10 * (1 / 64**2 + 1e-5) * 2)
    assert default_tolerance(GridSpec.interval(2**12), 1e-12, 1e-6) == 1e-8


def test_certificate_to_dict_keys():
    cert = subsolution_certificate(synthetic(), [], ModelSpec(Linear(1.0)), 1.0, 0.2, 0.0)
    d = cert.to_dict()
    for key in ("A", "B", "delta_u", "K2", "C_S", "M_u", "T", "min_margin", "holds", "tolerance"):
        assert key in d
