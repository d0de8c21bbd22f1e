"""Milne-Gustafson sums: the bilateral sum I(x), its dual, and their products.

Parameters are exponents: a_i = q**alpha_exp[i], b_i = q**beta_exp[i], and the
weight carries (z_1 ... z_n)**alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..lattice import Cycle, SumResult, SumSpec, jackson_sum
from ..qcore import (
    ExponentPoint,
    QContext,
    q_power,
    qpoch_inf,
    qpoch_inf_exp,
    qpoch_prod_exp,
    theta_exp,
)
from ._common import ProductSummand, log_poch_line, vandermonde, vandermonde_sign


@dataclass(frozen=True)
class MGParams:
    alpha_exp: tuple
    beta_exp: tuple
    alpha: complex

    def __init__(self, alpha_exp: Sequence[complex], beta_exp: Sequence[complex], alpha: complex):
        object.__setattr__(self, "alpha_exp", tuple(complex(c) for c in alpha_exp))
        object.__setattr__(self, "beta_exp", tuple(complex(c) for c in beta_exp))
        object.__setattr__(self, "alpha", complex(alpha))
        if len(self.alpha_exp) != len(self.beta_exp) or not self.alpha_exp:
            raise ValueError("need n >= 1 exponents for both a and b")

    @property
    def n(self) -> int:
        return len(self.alpha_exp)

    @property
    def beta(self) -> complex:
        """Exponent making a_1...a_n b_1...b_n q**(alpha+beta) = q."""
        return 1 - sum(self.alpha_exp) - sum(self.beta_exp) - self.alpha

    @property
    def a_sum(self) -> complex:
        return sum(self.alpha_exp, 0j)

    @property
    def b_sum(self) -> complex:
        return sum(self.beta_exp, 0j)

    def with_alpha(self, alpha: complex) -> "MGParams":
        return MGParams(self.alpha_exp, self.beta_exp, alpha)

    def swapped(self) -> "MGParams":
        """Exchange a <-> b and alpha <-> beta; an involution."""
        return MGParams(self.beta_exp, self.alpha_exp, self.beta)

    def convergence_margin(self, ctx: QContext) -> float:
        """Smallest relative gap in |q/(prod a prod b)| < |q**alpha| < 1."""
        qa = abs(q_power(self.alpha, ctx))
        low = abs(q_power(1 - self.a_sum - self.b_sum, ctx))
        return min(1 - qa, 1 - low / qa)

    def validate(self, ctx: QContext, margin: float = 0.0) -> None:
        if self.convergence_margin(ctx) <= margin:
            raise ValueError("Milne-Gustafson convergence condition fails")

    def echo(self) -> dict:
        return {"alpha_exp": self.alpha_exp, "beta_exp": self.beta_exp, "alpha": self.alpha}


def _default_spec(n: int, ctx: QContext, cycle: Cycle = Cycle.BOX) -> SumSpec:
    return SumSpec(n, cycle, ctx.lattice_cutoff)


def _line(xi: complex, weight_exp: complex, num: Sequence[complex], den: Sequence[complex], ctx):
    """log of z**w prod_j (q**(1+zeta-num_j))_inf / (q**(den_j+zeta))_inf, zeta = xi+nu."""
    lq = ctx.log_q

    def f(nu):
        out = weight_exp * (xi + nu) * lq
        for c in num:
            out = out + log_poch_line(1 + (xi - c), 1, nu, ctx)
        for c in den:
            out = out - log_poch_line(xi + c, 1, nu, ctx)
        return out

    return f


def mg_summand(params: MGParams, x: ExponentPoint, ctx: QContext, *, dual: bool = False,
               log_shift: complex = 0.0) -> ProductSummand:
    """Phi(z) Delta(z) on the q-cycle through x (or the dual pair when ``dual``)."""
    if x.n != params.n:
        raise ValueError("point dimension does not match parameters")
    if dual:
        lines = [_line(xi, params.beta, params.beta_exp, params.alpha_exp, ctx) for xi in x.xi]
        sign = vandermonde_sign(params.n)
        cross = lambda z: sign * vandermonde(z)
    else:
        lines = [_line(xi, params.alpha, params.alpha_exp, params.beta_exp, ctx) for xi in x.xi]
        cross = vandermonde
    return ProductSummand(x.xi, lines, ctx, cross=cross, log_shift=log_shift)


def mg_lhs(params: MGParams, x: ExponentPoint, spec: SumSpec | None = None,
           ctx: QContext = QContext(), workers: int = 1, rel_floor: float = 1.0) -> SumResult:
    """I(x): Jackson sum of Phi Delta over the q-cycle through x."""
    spec = spec or _default_spec(params.n, ctx)
    return jackson_sum(mg_summand(params, x, ctx), x, spec, ctx, workers, rel_floor)


def mg_dual_lhs(params: MGParams, x: ExponentPoint, spec: SumSpec | None = None,
                ctx: QContext = QContext(), workers: int = 1, rel_floor: float = 1.0) -> SumResult:
    """Dual sum with weight (prod z)**beta prod (q b_j^-1 z_i)/(a_j z_i)."""
    spec = spec or _default_spec(params.n, ctx)
    return jackson_sum(mg_summand(params, x, ctx, dual=True), x, spec, ctx, workers, rel_floor)


def mg_truncated_lhs(params: MGParams, ctx: QContext = QContext(), workers: int = 1,
                     spec: SumSpec | None = None) -> SumResult:
    """I(a) as a fan sum; the weight vanishes off N^n at x = a."""
    x = ExponentPoint(params.alpha_exp)
    return mg_lhs(params, x, spec or _default_spec(params.n, ctx, Cycle.FAN), ctx, workers)


def mg_dual_truncated_lhs(params: MGParams, ctx: QContext = QContext(), workers: int = 1,
                          spec: SumSpec | None = None) -> SumResult:
    x = ExponentPoint(params.beta_exp)
    return mg_dual_lhs(params, x, spec or _default_spec(params.n, ctx, Cycle.FAN), ctx, workers)


def _skew_theta(xi: Sequence[complex], ctx: QContext, dual: bool = False) -> complex:
    """prod_{i<j} x_j theta(x_i/x_j), or prod_{i<j} x_i theta(x_j/x_i) when ``dual``."""
    out = 1.0 + 0j
    for i in range(len(xi)):
        for j in range(i + 1, len(xi)):
            if dual:
                out *= q_power(xi[i], ctx) * theta_exp(xi[j] - xi[i], ctx)
            else:
                out *= q_power(xi[j], ctx) * theta_exp(xi[i] - xi[j], ctx)
    return out


def mg_constant(params: MGParams, ctx: QContext) -> complex:
    """The x-independent factor C of the regularised sum."""
    n = params.n
    num = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n
    num *= qpoch_prod_exp([1 - a - b for a in params.alpha_exp for b in params.beta_exp], ctx)
    den = qpoch_inf_exp(params.alpha, ctx) * qpoch_inf_exp(
        1 - params.alpha - params.a_sum - params.b_sum, ctx
    )
    return num / den


def mg_regularizer_h(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h(x) = (prod x)**alpha prod_{i<j} x_j theta(x_i/x_j) / prod theta(b_j x_i)."""
    den = 1.0 + 0j
    for xi in x.xi:
        for b in params.beta_exp:
            den *= theta_exp(xi + b, ctx)
    return q_power(params.alpha * x.total(), ctx) * _skew_theta(x.xi, ctx) / den


def mg_dual_regularizer_hbar(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h-bar(x) = (prod x)**beta prod_{i<j} x_i theta(x_j/x_i) / prod theta(a_j x_i)."""
    den = 1.0 + 0j
    for xi in x.xi:
        for a in params.alpha_exp:
            den *= theta_exp(xi + a, ctx)
    return q_power(params.beta * x.total(), ctx) * _skew_theta(x.xi, ctx, dual=True) / den


def _theta_x(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    return theta_exp(params.alpha + x.total() + params.b_sum, ctx)


def mg_rhs(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """Product evaluation of I(x)."""
    return mg_constant(params, ctx) * _theta_x(params, x, ctx) * mg_regularizer_h(params, x, ctx)


def mg_regularized(params: MGParams, x: ExponentPoint, value: complex, ctx: QContext) -> complex:
    """I(x)/h(x) from a computed I(x)."""
    return value / mg_regularizer_h(params, x, ctx)


def mg_truncated_rhs(params: MGParams, ctx: QContext) -> complex:
    """Product evaluation of the truncated sum I(a)."""
    n, a = params.n, params.alpha_exp
    out = (1 - ctx.q) ** n * q_power(params.alpha * params.a_sum, ctx)
    out *= qpoch_inf(ctx.q, ctx) ** n
    out *= qpoch_inf_exp(params.alpha + params.a_sum + params.b_sum, ctx)
    out /= qpoch_inf_exp(params.alpha, ctx)
    out /= qpoch_prod_exp([ai + bj for ai in a for bj in params.beta_exp], ctx)
    return out * _skew_theta(a, ctx)


def mg_dual_truncated_rhs(params: MGParams, ctx: QContext) -> complex:
    """Product evaluation of the truncated dual sum at x = b."""
    n, b = params.n, params.beta_exp
    out = (1 - ctx.q) ** n * q_power(params.beta * params.b_sum, ctx)
    out *= qpoch_inf(ctx.q, ctx) ** n
    out *= qpoch_inf_exp(1 - params.alpha, ctx)
    out /= qpoch_inf_exp(1 - params.alpha - params.a_sum - params.b_sum, ctx)
    out /= qpoch_prod_exp([ai + bj for ai in params.alpha_exp for bj in b], ctx)
    return out * _skew_theta(b, ctx, dual=True)


def mg_connection_coeff(params: MGParams, x: ExponentPoint, y: ExponentPoint, ctx: QContext) -> complex:
    """Ratio theta(q^alpha prod x prod b) / theta(q^alpha prod y prod b)."""
    return _theta_x(params, x, ctx) / _theta_x(params, y, ctx)


def mg_connection_to_a(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """Factor expressing I(x) through the truncated sum I(a)."""
    a = ExponentPoint(params.alpha_exp)
    return (mg_regularizer_h(params, x, ctx) * _theta_x(params, x, ctx)
            / (mg_regularizer_h(params, a, ctx) * _theta_x(params, a, ctx)))


def mg_connection_to_b(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """Factor expressing I(x) through the truncated dual sum at x = b."""
    b = ExponentPoint(params.beta_exp)
    return (mg_regularizer_h(params, x, ctx) * _theta_x(params, x, ctx)
            / (mg_dual_regularizer_hbar(params, b, ctx) * theta_exp(params.alpha, ctx)))


def mg_reflection_factor(params: MGParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h(x) / h-bar(1/x) as the explicit theta product."""
    out = 1.0 + 0j
    for xi in x.xi:
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out *= q_power(xi * (1 - a - b), ctx)
            out *= theta_exp(1 + (xi - a), ctx) / theta_exp(xi + b, ctx)
    return out


def mg_macdonald_summand(params: MGParams, x: ExponentPoint, ctx: QContext) -> ProductSummand:
    """Product-form summand of the regularised sum divided by its theta factor."""
    n = params.n
    a, b = params.alpha_exp, params.beta_exp
    beta, alpha = params.beta, params.alpha

    def line(xi):
        def f(nu):
            out = np.zeros(nu.shape, dtype=complex)
            for j in range(n):
                out = out + log_poch_line(1 + (xi - a[j]), 1, nu, ctx)
                out = out + log_poch_line(1 - b[j] - xi, -1, nu, ctx)
            return out
        return f

    sx = x.total()

    def sum_line(s):
        return -(log_poch_line(beta + params.a_sum - sx, -1, s, ctx)
                 + log_poch_line(alpha + params.b_sum + sx, 1, s, ctx))

    def pair(i, j):
        dij = x.xi[i] - x.xi[j]
        return lambda d: -(log_poch_line(1 + dij, 1, d, ctx) + log_poch_line(1 - dij, -1, d, ctx))

    pairs = {(i, j): pair(i, j) for i in range(n) for j in range(i + 1, n)}
    return ProductSummand(x.xi, [line(xi) for xi in x.xi], ctx, sum_log=sum_line, pair_logs=pairs)


def mg_macdonald_integrand(params: MGParams, nu: Sequence[int], base: ExponentPoint, ctx: QContext) -> complex:
    """Single value of the product-form summand at lattice index ``nu``."""
    f = mg_macdonald_summand(params, base, ctx)
    return complex(f(np.asarray([nu], dtype=np.int64))[0])


def mg_macdonald_lhs(params: MGParams, x: ExponentPoint, spec: SumSpec | None = None,
                     ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    spec = spec or _default_spec(params.n, ctx)
    return jackson_sum(mg_macdonald_summand(params, x, ctx), x, spec, ctx, workers)


def mg_macdonald_rhs(params: MGParams, ctx: QContext) -> complex:
    n = params.n
    num = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n
    num *= qpoch_prod_exp([1 - a - b for a in params.alpha_exp for b in params.beta_exp], ctx)
    return num / (qpoch_inf_exp(params.alpha, ctx) * qpoch_inf_exp(params.beta, ctx))


def mg_recurrence_factor(params: MGParams, ctx: QContext) -> complex:
    """I(alpha; x) / I(alpha + 1; x)."""
    qa = q_power(params.alpha, ctx)
    prod_ab = q_power(params.a_sum + params.b_sum, ctx)
    return (1 - qa * prod_ab) / (q_power(params.a_sum, ctx) * (1 - qa))


def mg_dual_recurrence_factor(params: MGParams, ctx: QContext) -> complex:
    """Dual sum at alpha divided by the dual sum at alpha - 1."""
    q1a = q_power(1 - params.alpha, ctx)
    inv = q_power(1 - params.alpha - params.a_sum - params.b_sum, ctx)
    return (1 - q1a) / (q_power(params.b_sum, ctx) * (1 - inv))


def mg_asymptotic_log_leading(params: MGParams, N: int, ctx: QContext, dual: bool = False) -> complex:
    """log of the leading term of I(alpha+N; a) (or of the dual at alpha-N, x=b)."""
    n = params.n
    if dual:
        pts, others, w = params.beta_exp, params.alpha_exp, params.beta + N
    else:
        pts, others, w = params.alpha_exp, params.beta_exp, params.alpha + N
    out = n * np.log(1 - ctx.q) + w * sum(pts, 0j) * ctx.log_q
    z = np.exp(np.asarray(pts) * ctx.log_q)
    vd = vandermonde(z[None, :])[0]
    if dual:
        vd *= vandermonde_sign(n)
    out += np.log(vd)
    for i in range(n):
        for j in range(n):
            out += np.log(qpoch_inf_exp(1 + (pts[i] - pts[j]), ctx))
            out -= np.log(qpoch_inf_exp(pts[i] + others[j], ctx))
    return complex(out)
