"""Dixon-Anderson sums J(x), their duals, and Evans's truncated evaluation.

There are n+1 parameters a_j = q**alpha_exp[j], b_j = q**beta_exp[j] while the
sum itself runs over Z^n.
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
from ._common import ProductSummand, vandermonde, vandermonde_sign
from .mg import MGParams, _line, _skew_theta


@dataclass(frozen=True)
class DAParams:
    alpha_exp: tuple
    beta_exp: tuple

    def __init__(self, alpha_exp: Sequence[complex], beta_exp: Sequence[complex]):
        object.__setattr__(self, "alpha_exp", tuple(complex(c) for c in alpha_exp))
        object.__setattr__(self, "beta_exp", tuple(complex(c) for c in beta_exp))
        if len(self.alpha_exp) != len(self.beta_exp) or len(self.alpha_exp) < 2:
            raise ValueError("need n+1 >= 2 exponents for both a and b")

    @property
    def n(self) -> int:
        return len(self.alpha_exp) - 1

    @property
    def total(self) -> complex:
        """Exponent of a_1...a_{n+1} b_1...b_{n+1}."""
        return sum(self.alpha_exp, 0j) + sum(self.beta_exp, 0j)

    @property
    def dual_weight(self) -> complex:
        return 1 - self.total

    def convergence_margin(self, ctx: QContext) -> float:
        """Relative gap in q < |prod a prod b|."""
        return 1 - ctx.q / abs(q_power(self.total, ctx))

    def recurrence_margin(self, ctx: QContext) -> float:
        """Relative gap in 1 < |prod a prod b|."""
        return 1 - 1 / abs(q_power(self.total, ctx))

    def validate(self, ctx: QContext, margin: float = 0.0) -> None:
        if self.convergence_margin(ctx) <= margin:
            raise ValueError("Dixon-Anderson convergence condition fails")

    def shift_a(self, j: int, k: int = 1) -> "DAParams":
        a = list(self.alpha_exp)
        a[j] += k
        return DAParams(a, self.beta_exp)

    def shift_b(self, j: int, k: int = 1) -> "DAParams":
        b = list(self.beta_exp)
        b[j] += k
        return DAParams(self.alpha_exp, b)

    def special_shift(self, N: int) -> "DAParams":
        """a_i -> q^{-nN} a_i, b_j -> q^{(n+1)N} b_j (j <= n), b_{n+1} -> q^{-nN} b_{n+1}."""
        n = self.n
        a = [c - n * N for c in self.alpha_exp]
        b = [c + (n + 1) * N for c in self.beta_exp[:n]] + [self.beta_exp[n] - n * N]
        return DAParams(a, b)

    def echo(self) -> dict:
        return {"alpha_exp": self.alpha_exp, "beta_exp": self.beta_exp}


def da_summand(params: DAParams, x: ExponentPoint, ctx: QContext, *, dual: bool = False,
               log_shift: complex = 0.0) -> ProductSummand:
    if x.n != params.n:
        raise ValueError("point must have n coordinates")
    if dual:
        lines = [_line(xi, params.dual_weight, params.beta_exp, params.alpha_exp, ctx) for xi in x.xi]
        sign = vandermonde_sign(params.n)
        cross = lambda z: sign * vandermonde(z)
    else:
        lines = [_line(xi, 1.0, params.alpha_exp, params.beta_exp, ctx) for xi in x.xi]
        cross = vandermonde
    return ProductSummand(x.xi, lines, ctx, cross=cross, log_shift=log_shift)


def _spec(n: int, ctx: QContext, cycle: Cycle) -> SumSpec:
    return SumSpec(n, cycle, ctx.lattice_cutoff)


def da_lhs(params: DAParams, x: ExponentPoint, spec: SumSpec | None = None,
           ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """J(x) over the q-cycle through x."""
    spec = spec or _spec(params.n, ctx, Cycle.BOX)
    return jackson_sum(da_summand(params, x, ctx), x, spec, ctx, workers)


def da_dual_lhs(params: DAParams, x: ExponentPoint, spec: SumSpec | None = None,
                ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """Dual sum with weight (prod z)**(1-sum alpha-sum beta) prod (q b_j^-1 z_i)/(a_j z_i)."""
    spec = spec or _spec(params.n, ctx, Cycle.BOX)
    return jackson_sum(da_summand(params, x, ctx, dual=True), x, spec, ctx, workers)


def _combine(results: Sequence[SumResult], signs: Sequence[int]) -> SumResult:
    return SumResult(
        value=sum(s * r.value for s, r in zip(signs, results)),
        tail_estimate=sum(r.tail_estimate for r in results),
        terms=sum(r.terms for r in results),
        converged=all(r.converged for r in results),
        cutoff=max(r.cutoff for r in results),
    )


def da_alternating_lhs(params: DAParams, xfull: ExponentPoint, spec: SumSpec | None = None,
                       ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """sum_i (-1)^(i-1) J(x with coordinate i removed), for a point of n+1 coordinates."""
    if xfull.n != params.n + 1:
        raise ValueError("alternating sum needs a point with n+1 coordinates")
    parts = [da_lhs(params, xfull.drop(i), spec, ctx, workers) for i in range(params.n + 1)]
    return _combine(parts, [(-1) ** i for i in range(params.n + 1)])


def da_constant_c0(params: DAParams, ctx: QContext) -> complex:
    n = params.n
    out = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n
    out *= qpoch_prod_exp([1 - a - b for a in params.alpha_exp for b in params.beta_exp], ctx)
    return out / qpoch_inf_exp(1 - params.total, ctx)


def da_alternating_rhs(params: DAParams, xfull: ExponentPoint, ctx: QContext) -> complex:
    den = 1.0 + 0j
    for xi in xfull.xi:
        for b in params.beta_exp:
            den *= theta_exp(xi + b, ctx)
    th = theta_exp(xfull.total() + sum(params.beta_exp), ctx)
    return da_constant_c0(params, ctx) * th * _skew_theta(xfull.xi, ctx) / den


def da_evans_lhs(params: DAParams, ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """Alternating sum of the truncated sums J(a with a_i removed), each over N^n."""
    a = ExponentPoint(params.alpha_exp)
    spec = _spec(params.n, ctx, Cycle.FAN)
    parts = [da_lhs(params, a.drop(i), spec, ctx, workers) for i in range(params.n + 1)]
    return _combine(parts, [(-1) ** i for i in range(params.n + 1)])


def da_evans_rhs(params: DAParams, ctx: QContext) -> complex:
    n = params.n
    out = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n * qpoch_inf_exp(params.total, ctx)
    out /= qpoch_prod_exp([a + b for a in params.alpha_exp for b in params.beta_exp], ctx)
    return out * _skew_theta(params.alpha_exp, ctx)


def evans_params(x_exp: Sequence[complex], s: Sequence[complex]) -> DAParams:
    """Parameters for the iterated form: a_j = x_{j-1}, b_j = q**s_{j-1} / x_{j-1}."""
    return DAParams(list(x_exp), [sj - xj for xj, sj in zip(x_exp, s)])


def evans_iterated_rhs(x_exp: Sequence[complex], s: Sequence[complex], ctx: QContext) -> complex:
    """Evans's product for the iterated Jackson integral with endpoints x_0 .. x_n."""
    n = len(x_exp) - 1
    out = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n * qpoch_inf_exp(sum(s, 0j), ctx)
    out /= qpoch_prod_exp(list(s), ctx)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            num = q_power(x_exp[j], ctx) * theta_exp(x_exp[i] - x_exp[j], ctx)
            den = (qpoch_inf_exp(x_exp[i] + s[j] - x_exp[j], ctx)
                   * qpoch_inf_exp(x_exp[j] + s[i] - x_exp[i], ctx))
            out *= num / den
    return out


def da_regularizer_h(params: DAParams, x: ExponentPoint, ctx: QContext) -> complex:
    den = 1.0 + 0j
    for xi in x.xi:
        for b in params.beta_exp:
            den *= theta_exp(xi + b, ctx)
    return q_power(x.total(), ctx) * _skew_theta(x.xi, ctx) / den


def da_dual_regularizer_hbar(params: DAParams, x: ExponentPoint, ctx: QContext) -> complex:
    den = 1.0 + 0j
    for xi in x.xi:
        for a in params.alpha_exp:
            den *= theta_exp(xi + a, ctx)
    return q_power(params.dual_weight * x.total(), ctx) * _skew_theta(x.xi, ctx, dual=True) / den


def da_reflection_factor(params: DAParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h(x) / h-bar(1/x) as the explicit theta product."""
    out = 1.0 + 0j
    for xi in x.xi:
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out *= q_power(xi * (1 - a - b), ctx)
            out *= theta_exp(1 + (xi - a), ctx) / theta_exp(xi + b, ctx)
    return out


def truncation_point_b(params: DAParams, i: int) -> ExponentPoint:
    """The point b with b_i removed."""
    return ExponentPoint(params.beta_exp).drop(i)


def da_dual_truncated_lhs(params: DAParams, i: int, ctx: QContext = QContext(),
                          workers: int = 1) -> SumResult:
    x = truncation_point_b(params, i)
    return da_dual_lhs(params, x, _spec(params.n, ctx, Cycle.FAN), ctx, workers)


def da_dual_truncated_rhs(params: DAParams, i: int, ctx: QContext) -> complex:
    """Closed form of the regularised truncated dual sum; independent of i."""
    return da_constant_c0(params, ctx)


def da_mg_bridge(params: DAParams, ctx: QContext) -> complex:
    """prod_{i<=n} (q a_i^-1 b_{n+1}^-1)_inf / (b_i a_{n+1})_inf."""
    n = params.n
    a, b = params.alpha_exp, params.beta_exp
    out = 1.0 + 0j
    for i in range(n):
        out *= qpoch_inf_exp(1 - a[i] - b[n], ctx) / qpoch_inf_exp(b[i] + a[n], ctx)
    return out


def da_bridge_mg_params(params: DAParams) -> MGParams:
    """Milne-Gustafson parameters with alpha = alpha_{n+1} + beta_{n+1}."""
    n = params.n
    return MGParams(params.alpha_exp[:n], params.beta_exp[:n],
                    params.alpha_exp[n] + params.beta_exp[n])


def da_rec_a(params: DAParams, j: int, ctx: QContext, regularized: bool = False) -> complex:
    """Ratio T_{a_j} Jbar / Jbar at a truncation point."""
    n = params.n
    aj = q_power(params.alpha_exp[j], ctx)
    num = 1.0 + 0j
    for b in params.beta_exp:
        num *= 1 - q_power(-b - params.alpha_exp[j], ctx)
    out = num / (1 - q_power(-params.total, ctx))
    return out if regularized else (-aj) ** n * out


def da_rec_b(params: DAParams, j: int, ctx: QContext, regularized: bool = False) -> complex:
    """Ratio T_{b_j} Jbar / Jbar at a truncation point."""
    n = params.n
    bj = params.beta_exp[j]
    if regularized:
        num = 1.0 + 0j
        for a in params.alpha_exp:
            num *= 1 - q_power(-a - bj, ctx)
        return num / (1 - q_power(-params.total, ctx))
    num = 1.0 + 0j
    for a in params.alpha_exp:
        num *= 1 - q_power(a + bj, ctx)
    return (-q_power(-bj, ctx)) ** n * num / (1 - q_power(params.total, ctx))


def da_c0_from_regularized(params: DAParams, xfull: ExponentPoint, jbar_values: Sequence[complex],
                           ctx: QContext) -> complex:
    """Reconstruct C_0 from regularised dual sums at the inverted points x-hat_k^-1."""
    n1 = params.n + 1
    b = params.beta_exp
    x = xfull.xi
    th_all = theta_exp(xfull.total() + sum(b), ctx)
    out = 0j
    for k in range(n1):
        term = jbar_values[k] * theta_exp(x[k] + b[k], ctx) / th_all
        for i in range(n1):
            if i != k:
                term *= theta_exp(x[k] + b[i], ctx) / theta_exp(x[k] - x[i], ctx)
        out += term
    return out


def da_asymptotic_log_leading(params: DAParams, N: int, ctx: QContext) -> complex:
    """log of the leading term of the shifted truncated dual sum at b with b_{n+1} removed."""
    n = params.n
    sp = params.special_shift(N)
    x = sp.beta_exp[:n]
    out = n * np.log(1 - ctx.q) + sp.dual_weight * sum(x, 0j) * ctx.log_q
    out += n * np.log(qpoch_inf(ctx.q, ctx))
    out += np.log(_skew_theta(x, ctx, dual=True))
    return complex(out)
