import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjackson.qcore import (
    ExponentPoint,
    NonFinite,
    QContext,
    log_qpoch_exp,
    q_power,
    qpoch_inf,
    qpoch_inf_exp,
    qpoch_n,
    theta,
    theta_exp,
)

CTX = QContext()

# mpmath at 30 digits, q = 1/2
QPOCH_FROZEN = {
    0.3 + 0.7j: 0.0228087423651904623573678637548 - 0.798019023898668971338181893401j,
    -2.5 + 1.0j: 16.0469100264701043972481141865 - 18.5645264114309074008594337474j,
}
THETA_FROZEN = {
    0.8 - 0.6j: 0.0397610891129686508444270537733 + 0.119283267338905993415721412818j,
    3.1 + 0.2j: 0.0782524501312013183220086175627 + 0.000763991495261430425419834513151j,
}


def close(a, b, tol=1e-13):
    return abs(a - b) <= tol * max(1.0, abs(b))


@pytest.mark.parametrize("a", list(QPOCH_FROZEN))
def test_qpoch_inf_matches_frozen_mpmath(a):
    assert close(qpoch_inf(a, CTX), QPOCH_FROZEN[a])


@pytest.mark.parametrize("a", list(THETA_FROZEN))
def test_theta_matches_frozen_mpmath(a):
    assert close(theta(a, CTX), THETA_FROZEN[a])


def test_finite_pochhammer_positive_and_negative_length():
    a = 0.3 + 0.7j
    assert close(qpoch_n(a, 5, CTX), 0.0589856640625000675586973516995 - 0.81109738281249997453174402362j)
    assert close(qpoch_n(a, -3, CTX), 0.00160968515363237376052177299638 - 0.042354840604951882221838638243j)
    assert qpoch_n(a, 0, CTX) == 1


def test_qpoch_of_unit_power_is_exact_zero():
    for k in range(0, -4, -1):
        assert qpoch_inf_exp(k, CTX) == 0
        assert np.isneginf(log_qpoch_exp([k], CTX)[0].real)


def test_qpoch_of_zero_is_one():
    assert qpoch_inf(0.0, CTX) == 1


def test_theta_vanishes_on_q_lattice():
    for k in range(-3, 4):
        assert theta_exp(k, CTX) == 0


def test_q_power_exponent_zero_is_exact():
    assert q_power(0, CTX) == 1
    assert close(q_power(2, CTX), 0.25, 1e-15)


def test_overflowing_argument_raises():
    with pytest.raises(NonFinite):
        qpoch_inf(float("inf"), CTX)


@pytest.mark.parametrize("bad", [dict(q=1.0), dict(q=0.0), dict(product_tol=1e-3, identity_tol=1e-4),
                                 dict(lattice_cutoff=0), dict(identity_tol=-1.0)])
def test_context_validation(bad):
    with pytest.raises(ValueError):
        QContext(**bad)


def test_context_with_returns_modified_copy():
    ctx = CTX.with_(q=0.3)
    assert ctx.q == 0.3 and CTX.q == 0.5
    assert math.isclose(ctx.log_q, math.log(0.3))


def test_exponent_point_operations():
    x = ExponentPoint([0.1, 0.2 + 0.3j, -0.4])
    assert x.n == 3
    assert x.total() == pytest.approx(-0.1 + 0.3j)
    assert x.inverse().xi == (-0.1 + 0j, -0.2 - 0.3j, 0.4 + 0j)
    assert x.shifted(1, 2).xi[1] == 2.2 + 0.3j
    assert x.drop(0).xi == x.xi[1:]
    assert x.swapped(0, 2).xi == (x.xi[2], x.xi[1], x.xi[0])
    assert close(x.value(1, CTX), cmath.exp((0.2 + 0.3j) * math.log(0.5)))


def test_exponent_point_rejects_non_finite():
    with pytest.raises(ValueError):
        ExponentPoint([float("nan")])


complex_args = st.builds(
    lambda r, t: r * cmath.exp(1j * t),
    st.floats(0.05, 6.0),
    st.floats(-math.pi, math.pi),
)


@settings(max_examples=60, deadline=None)
@given(complex_args)
def test_theta_quasi_periodicity(a):
    assert close(theta(CTX.q * a, CTX), -theta(a, CTX) / a, 1e-12)


@settings(max_examples=60, deadline=None)
@given(complex_args)
def test_theta_inversion(a):
    # theta(q/a) = theta(a) by definition
    assert close(theta(CTX.q / a, CTX), theta(a, CTX), 1e-12)


@settings(max_examples=40, deadline=None)
@given(complex_args, st.integers(-8, 12))
def test_pochhammer_split(a, N):
    lhs = qpoch_inf(a, CTX)
    rhs = qpoch_n(a, N, CTX) * qpoch_inf(a * CTX.q ** N, CTX)
    assert close(lhs, rhs, 1e-11)


@settings(max_examples=30, deadline=None)
@given(complex_args, st.sampled_from([0.2, 0.5, 0.8]))
def test_qpoch_against_mpmath(a, q):
    ctx = QContext(q=q)
    ref = complex(mp.qp(mp.mpc(a), mp.mpf(q)))
    assert close(qpoch_inf(a, ctx), ref, 1e-11)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_log_qpoch_matches_scalar_kernel(exps):
    logs = log_qpoch_exp(exps, CTX)
    for e, lg in zip(exps, logs):
        v = qpoch_inf_exp(e, CTX)
        if v == 0:
            assert np.isneginf(lg.real)
        else:
            assert close(cmath.exp(lg), v, 1e-10)
