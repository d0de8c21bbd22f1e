import cmath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjackson.families import mg
from qjackson.families._common import vandermonde_sign
from qjackson.families.mg import MGParams
from qjackson.lattice import Cycle, SumSpec
from qjackson.qcore import ExponentPoint, QContext, q_power, qpoch_inf, theta_exp

CTX = QContext(identity_tol=1e-11)
FINE = QContext(identity_tol=1e-14)
P1 = MGParams([0.3 + 0.1j], [-0.4 + 0.2j], 0.6)
X1 = ExponentPoint([0.2 - 0.1j])
P2 = MGParams([0.3, -0.5 + 0.1j], [-0.4, 0.6j], 0.7)
X2 = ExponentPoint([0.1, 0.25 + 0.3j])

# direct mpmath sums (30 digits for n=1, 20 digits and |nu_i| <= 80 for n=2)
I1_FROZEN = -1.36925897043990478974781470912 - 1.81615636765725144402801760376j
I1_AT_A_FROZEN = 0.0280628722712052580039066987667 - 1.98104437011576456207046131459j
I2_FROZEN = -4.3899697998933847842 + 4.3401689919989513559j


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def test_one_dimensional_sum_matches_mpmath():
    assert rel(mg.mg_lhs(P1, X1, ctx=FINE).value, I1_FROZEN) < 1e-12


def test_two_dimensional_sum_matches_mpmath():
    assert rel(mg.mg_lhs(P2, X2, ctx=FINE).value, I2_FROZEN) < 1e-12


@pytest.mark.parametrize("p,x", [(P1, X1), (P2, X2)])
def test_sum_matches_product(p, x):
    assert rel(mg.mg_lhs(p, x, ctx=CTX).value, mg.mg_rhs(p, x, CTX)) < 1e-10


def test_truncated_sum_matches_mpmath_and_product():
    res = mg.mg_truncated_lhs(P1, FINE)
    assert rel(res.value, I1_AT_A_FROZEN) < 1e-12
    assert rel(mg.mg_truncated_rhs(P1, CTX), I1_AT_A_FROZEN) < 1e-12


def q_binomial_series(a, t, q, tol=1e-18):
    """sum_k (a;q)_k / (q;q)_k t^k by the term ratio."""
    total, term, k = 0j, 1 + 0j, 0
    while abs(term) > tol or k < 3:
        total += term
        term *= (1 - a * q ** k) / (1 - q ** (k + 1)) * t
        k += 1
    return total


def test_truncated_one_dimensional_sum_is_q_binomial():
    q = CTX.q
    ab = q_power(P1.alpha_exp[0] + P1.beta_exp[0], CTX)
    t = q_power(P1.alpha, CTX)
    expected = (1 - q) * q_power(P1.alpha * P1.alpha_exp[0], CTX) * qpoch_inf(q, CTX) / qpoch_inf(ab, CTX)
    expected *= q_binomial_series(ab, t, q)
    assert rel(mg.mg_truncated_lhs(P1, CTX).value, expected) < 1e-10


@pytest.mark.parametrize("p", [P1, P2])
def test_dual_truncated_sum_matches_product(p):
    assert rel(mg.mg_dual_truncated_lhs(p, CTX).value, mg.mg_dual_truncated_rhs(p, CTX)) < 1e-10


@pytest.mark.parametrize("p,x", [(P1, X1), (P2, X2)])
def test_parameter_swap_maps_dual_sum_to_sum(p, x):
    dual = mg.mg_dual_lhs(p, x, ctx=CTX).value
    swapped = mg.mg_lhs(p.swapped(), x, ctx=CTX).value
    assert rel(dual, vandermonde_sign(p.n) * swapped) < 1e-10


def test_swap_is_an_involution():
    back = P2.swapped().swapped()
    assert back.alpha_exp == P2.alpha_exp and back.beta_exp == P2.beta_exp
    assert abs(back.alpha - P2.alpha) < 1e-15


@pytest.mark.parametrize("p,x", [(P1, X1), (P2, X2)])
def test_reflection(p, x):
    lhs = mg.mg_lhs(p, x, ctx=CTX).value
    rhs = mg.mg_reflection_factor(p, x, CTX) * mg.mg_dual_lhs(p, x.inverse(), ctx=CTX).value
    assert rel(lhs, rhs) < 1e-10


@pytest.mark.parametrize("p,x", [(P1, X1), (P2, X2)])
def test_connections_to_truncated_sums(p, x):
    full = mg.mg_lhs(p, x, ctx=CTX).value
    via_a = mg.mg_connection_to_a(p, x, CTX) * mg.mg_truncated_lhs(p, CTX).value
    via_b = mg.mg_connection_to_b(p, x, CTX) * mg.mg_dual_truncated_lhs(p, CTX).value
    assert rel(full, via_a) < 1e-10
    assert rel(full, via_b) < 1e-10


@pytest.mark.parametrize("p,x", [(P1, X1), (P2, X2)])
def test_macdonald_form_constant(p, x):
    assert rel(mg.mg_macdonald_lhs(p, x, ctx=CTX).value, mg.mg_macdonald_rhs(p, CTX)) < 1e-10


def test_constant_from_truncated_sum():
    a = ExponentPoint(P2.alpha_exp)
    value = mg.mg_truncated_lhs(P2, CTX).value
    c = value / (mg.mg_regularizer_h(P2, a, CTX) * theta_exp(P2.alpha + P2.a_sum + P2.b_sum, CTX))
    assert rel(c, mg.mg_constant(P2, CTX)) < 1e-10


def test_alpha_recurrence():
    p = MGParams([0.3 + 0.1j], [-2.3 + 0.2j], 1.5)
    x = X1
    ratio = mg.mg_lhs(p, x, ctx=CTX).value / mg.mg_lhs(p.with_alpha(p.alpha + 1), x, ctx=CTX).value
    assert rel(ratio, mg.mg_recurrence_factor(p, CTX)) < 1e-10


def test_dual_alpha_recurrence():
    p = MGParams([0.3, -1.5 + 0.1j], [-0.4, -1.2 + 0.6j], 1.7)
    ratio = (mg.mg_dual_lhs(p, X2, ctx=CTX).value
             / mg.mg_dual_lhs(p.with_alpha(p.alpha - 1), X2, ctx=CTX).value)
    assert rel(ratio, mg.mg_dual_recurrence_factor(p, CTX)) < 1e-10


def test_sum_is_alternating_in_the_base_point():
    a = mg.mg_lhs(P2, X2, ctx=CTX).value
    b = mg.mg_lhs(P2, X2.swapped(0, 1), ctx=CTX).value
    assert rel(b, -a) < 1e-12


def test_convergence_margin_and_validation():
    assert P1.convergence_margin(CTX) > 0
    P1.validate(CTX)
    with pytest.raises(ValueError):
        P1.with_alpha(-0.2).validate(CTX)


def test_parameter_shape_validation():
    with pytest.raises(ValueError):
        MGParams([0.1, 0.2], [0.3], 0.5)


def test_point_dimension_must_match():
    with pytest.raises(ValueError):
        mg.mg_lhs(P2, X1, ctx=CTX)


def test_fixed_small_cutoff_is_flagged_unconverged():
    res = mg.mg_lhs(P1, X1, SumSpec(1, Cycle.BOX, 4, adaptive=False), CTX)
    assert not res.converged


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.15, 0.3))
def test_regularised_sum_is_constant_in_x(re, im):
    # the imaginary window keeps x away from every theta zero
    x = ExponentPoint([complex(re, im)])
    value = mg.mg_lhs(P1, x, ctx=CTX).value
    regularised = mg.mg_regularized(P1, x, value, CTX)
    theta_x = mg.mg_rhs(P1, x, CTX) / (mg.mg_regularizer_h(P1, x, CTX) * mg.mg_constant(P1, CTX))
    assert rel(regularised / theta_x, mg.mg_constant(P1, CTX)) < 1e-9


def test_asymptotic_leading_term_is_finite_at_zero_shift():
    lead = mg.mg_asymptotic_log_leading(P2, 0, CTX)
    assert cmath.isfinite(lead)
