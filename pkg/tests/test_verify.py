import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjackson import verify as V
from qjackson.families import da, gus, mg
from qjackson.lattice import Cycle, NotConverged, SumSpec
from qjackson.qcore import ExponentPoint, QContext, q_power

CTX = QContext()


# Permutations and skew-symmetrisation


@pytest.mark.parametrize("image,sign", [((0, 1, 2), 1), ((1, 0, 2), -1), ((1, 2, 0), 1), ((3, 2, 1, 0), 1)])
def test_permutation_sign(image, sign):
    assert V.Permutation(image).sign == sign


@settings(max_examples=30)
@given(st.permutations(range(5)))
def test_permutation_inverse_and_sign_multiplicativity(image):
    p = V.Permutation(tuple(image))
    z = tuple("abcde")
    assert p.inverse().act(p.act(z)) == z
    assert p.inverse().sign == p.sign


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        V.Permutation((0, 0, 1))


def test_skew_of_symmetric_function_is_zero():
    assert V.skew_symmetrize(lambda z: sum(z) * np.prod(z), 3, [1.0, 2.0, 5.0]) == 0


def test_skew_of_second_coordinate():
    assert V.skew_symmetrize(lambda z: z[1], 2, [3.0, 7.0]) == 7.0 - 3.0


def test_skew_of_staircase_monomial_is_vandermonde():
    z = [1.5, -0.5, 2.0]
    got = V.skew_symmetrize(lambda v: v[0] ** 2 * v[1], 3, z)
    expected = np.prod([z[i] - z[j] for i in range(3) for j in range(i + 1, 3)])
    assert math.isclose(got, expected)


def test_skew_dimension_guard():
    with pytest.raises(V.DimensionTooLarge):
        V.skew_symmetrize(lambda z: 0, V.MAX_SKEW_DIMENSION + 1, range(V.MAX_SKEW_DIMENSION + 1))
    with pytest.raises(ValueError):
        V.skew_symmetrize(lambda z: 0, 2, [1.0])


# Polynomial lemmas


def _mg_case(n, seed):
    return (V.sample_params("mg", n, seed, CTX, kind="algebraic"), V.sample_algebraic_point(n, seed))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("seed", range(3))
def test_mg_expansion_holds(n, seed):
    p, z = _mg_case(n, seed)
    assert V.check_poly_expansion_mg(p, z, CTX).passed


@pytest.mark.parametrize("n,agrees", [(1, True), (2, False), (3, False), (4, True)])
def test_mg_printed_sign_differs_exactly_at_n2_n3(n, agrees):
    p, z = _mg_case(n, 11)
    printed = V.check_poly_expansion_mg(p, z, CTX, printed=True)
    assert printed.passed is agrees
    if not agrees:
        assert abs(printed.lhs / printed.rhs + 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_da_expansion_and_printed_extra_factor(n):
    p = V.sample_params("da", n, 4, CTX, kind="algebraic")
    z = V.sample_algebraic_point(n, 4)
    assert V.check_poly_expansion_da(p, z, CTX).passed
    _, c1 = V.da_expansion_coefficients(p, CTX)
    _, c1_printed = V.da_expansion_coefficients(p, CTX, printed=True)
    assert abs(c1_printed / c1 - q_power(p.beta_exp[0], CTX)) < 1e-13
    assert not V.check_poly_expansion_da(p, z, CTX, printed=True).passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gus_expansion_and_printed_sign(n):
    p = V.sample_params("gus", n, 6, CTX, kind="algebraic")
    z = V.sample_algebraic_point(n, 6)
    assert V.check_poly_expansion_gus(p, z, CTX).passed
    printed = V.check_poly_expansion_gus(p, z, CTX, printed=True)
    assert abs(printed.lhs / printed.rhs - (-1) ** (n + 1)) < 1e-12
    assert printed.passed is (n % 2 == 1)


# Vanishing of the nabla sums


def test_zero_test_function_sums_to_exactly_zero():
    p = V.sample_params("mg", 1, 0, CTX, kind="recurrence")
    r = V.check_nabla_vanishing("zero", p, V.sample_point("mg", p, 0), ctx=CTX)
    assert r.lhs == 0 and r.passed


@pytest.mark.parametrize("family", ["mg", "da", "gus"])
def test_nabla_sums_vanish(family):
    rep = V.check_identity(f"{family}.nabla_vanishing.n2", CTX, seed=1)
    assert rep.passed, rep


def test_unknown_nabla_family():
    p = V.sample_params("mg", 1, 0, CTX)
    with pytest.raises(ValueError):
        V.check_nabla_vanishing("nope", p, ExponentPoint([0.3]), ctx=CTX)


# Reports


def test_relative_deviation_floor():
    assert V.relative_deviation(1e-3, 0.0) == 1e-3
    assert V.relative_deviation(202.0, 200.0) == pytest.approx(0.01)


@settings(max_examples=50)
@given(st.floats(0, 1e-6), st.floats(1e-12, 1e-6))
def test_passed_iff_deviation_within_tolerance(dev, tol):
    rep = V._report("x", "y", 1.0 + dev, 1.0, tol, 0, {}, 1, 0.0)
    assert rep.passed == (rep.rel_dev <= tol)


def test_threshold_is_closed():
    rep = V._report("x", "y", 1.5, 1.0, 0.5, 0, {}, 1, 0.0)
    assert rep.rel_dev == 0.5 and rep.passed


def test_serialize_turns_complex_into_pairs():
    out = V.serialize({"a": 1 + 2j, "b": (np.float64(0.5), [3j]), 4: "s"})
    assert out == {"a": [1.0, 2.0], "b": [0.5, [[0.0, 3.0]]], "4": "s"}
    json.dumps(out)


@pytest.mark.parametrize("check_id", ["mg.theorem31.n2", "da.theorem41.n1", "gus.theorem52.n1",
                                      "core.qbinomial"])
def test_reruns_are_bit_identical(check_id):
    a = V.check_identity(check_id, CTX, seed=3)
    b = V.check_identity(check_id, CTX, seed=3)
    assert (a.lhs, a.rhs, a.rel_dev, a.params_echo) == (b.lhs, b.rhs, b.rel_dev, b.params_echo)
    assert a.passed


def test_small_fixed_cutoff_raises_instead_of_passing():
    ctx = CTX.with_(lattice_cutoff=3, adaptive=False)
    with pytest.raises(NotConverged):
        V.check_identity("mg.theorem31.n1", ctx, seed=0)


def test_dimension_suffix_and_errors():
    assert V.split_check_id("mg.theorem31.n2") == ("mg.theorem31", 2)
    assert V.split_check_id("core.qbinomial") == ("core.qbinomial", None)
    with pytest.raises(KeyError):
        V.check_identity("mg.nothing.n1", CTX)
    with pytest.raises(ValueError):
        V.check_identity("gus.theorem52.n3", CTX)


def test_every_suite_is_populated():
    for suite in V.SUITES:
        assert V.checks_in_suite(suite)
    assert len(V.checks_in_suite("all")) == len(V.REGISTRY)


# Sampling


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(5))
def test_mg_draws_respect_window_and_pole_margin(n, seed):
    p = V.sample_params("mg", n, seed, CTX)
    low, margin = V._mg_window(n, "identity")
    t = 1 - (p.a_sum + p.b_sum).real
    assert low <= t < low + 1
    assert margin <= p.alpha.real <= t - margin
    assert not V._any_near_integer(V._pair_poles(p.alpha_exp, p.beta_exp))
    p.validate(CTX)


@pytest.mark.parametrize("family", ["da", "gus"])
@pytest.mark.parametrize("seed", range(5))
def test_da_gus_draws_in_window(family, seed):
    p = V.sample_params(family, 2, seed, CTX)
    s = (sum(p.alpha_exp) + sum(p.beta_exp)).real
    assert -1.45 <= s < -0.45


def test_sampling_is_reproducible_and_tag_sensitive():
    a = V.sample_params("mg", 2, 9, CTX, tag="t")
    assert a == V.sample_params("mg", 2, 9, CTX, tag="t")
    assert a != V.sample_params("mg", 2, 9, CTX, tag="u")


# Asymptotics


def test_asymptotic_check_reports_final_deviation():
    p = V.sample_params("mg", 1, 0, CTX)
    r = V.check_asymptotic("mg", p, "alpha_up", ctx=CTX)
    devs = r.params_echo["deviations"]
    assert r.rel_dev == devs[-1] and r.rhs == 1
    assert r.passed == (all(b < a for a, b in zip(devs, devs[1:])) and devs[-1] < V.ASYMPTOTIC_TOL)


def test_asymptotic_ratio_approaches_one():
    p = V.sample_params("gus", 1, 2, CTX)
    r5 = V.asymptotic_ratio("gus", p, "special", 5, CTX).value
    r15 = V.asymptotic_ratio("gus", p, "special", 15, CTX).value
    assert abs(r15 - 1) < abs(r5 - 1)


def test_unknown_asymptotic_direction():
    with pytest.raises(ValueError):
        V.asymptotic_ratio("da", V.sample_params("da", 1, 0, CTX), "alpha_up", 5, CTX)
