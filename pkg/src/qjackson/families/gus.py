"""Gustafson A_n sums K(x) under the balance z_1 ... z_{n+1} = d.

The last coordinate is derived: its exponent is delta - sum(xi_i + nu_i), so
the balance holds exactly in exponent arithmetic at every lattice point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..lattice import Cycle, SumResult, SumSpec, jackson_sum
from ..qcore import (
    ExponentPoint,
    QContext,
    log_qpoch_exp,
    q_power,
    qpoch_inf,
    qpoch_inf_exp,
    qpoch_prod_exp,
    theta_exp,
)
from ._common import ProductSummand, log_poch_line, vandermonde
from .mg import _skew_theta


@dataclass(frozen=True)
class GUSParams:
    alpha_exp: tuple
    beta_exp: tuple
    d_exp: complex

    def __init__(self, alpha_exp: Sequence[complex], beta_exp: Sequence[complex], d_exp: complex):
        object.__setattr__(self, "alpha_exp", tuple(complex(c) for c in alpha_exp))
        object.__setattr__(self, "beta_exp", tuple(complex(c) for c in beta_exp))
        object.__setattr__(self, "d_exp", complex(d_exp))
        if len(self.alpha_exp) != len(self.beta_exp) or len(self.alpha_exp) < 2:
            raise ValueError("need n+1 >= 2 exponents for both a and b")

    @property
    def n(self) -> int:
        return len(self.alpha_exp) - 1

    @property
    def a_sum(self) -> complex:
        return sum(self.alpha_exp, 0j)

    @property
    def b_sum(self) -> complex:
        return sum(self.beta_exp, 0j)

    @property
    def total(self) -> complex:
        return self.a_sum + self.b_sum

    def convergence_margin(self, ctx: QContext) -> float:
        return 1 - ctx.q / abs(q_power(self.total, ctx))

    def validate(self, ctx: QContext, margin: float = 0.0) -> None:
        if self.convergence_margin(ctx) <= margin:
            raise ValueError("Gustafson convergence condition fails")

    def shift_a(self, j: int, k: int = 1) -> "GUSParams":
        a = list(self.alpha_exp)
        a[j] += k
        return GUSParams(a, self.beta_exp, self.d_exp)

    def shift_b(self, j: int, k: int = 1) -> "GUSParams":
        b = list(self.beta_exp)
        b[j] += k
        return GUSParams(self.alpha_exp, b, self.d_exp)

    def milne(self) -> "GUSParams":
        """Same a, b with d = a_1 ... a_{n+1}."""
        return GUSParams(self.alpha_exp, self.beta_exp, self.a_sum)

    def special_shift(self, N: int) -> "GUSParams":
        """b_i -> q^{-nN} b_i, a_j -> q^{(n+1)N} a_j (j <= n), a_{n+1} -> q^{-nN} a_{n+1}."""
        n = self.n
        b = [c - n * N for c in self.beta_exp]
        a = [c + (n + 1) * N for c in self.alpha_exp[:n]] + [self.alpha_exp[n] - n * N]
        return GUSParams(a, b, self.d_exp)

    def echo(self) -> dict:
        return {"alpha_exp": self.alpha_exp, "beta_exp": self.beta_exp, "d_exp": self.d_exp}


def balanced_exponent(params: GUSParams, x: ExponentPoint) -> complex:
    """Exponent of x_{n+1} = d / (x_1 ... x_n)."""
    return params.d_exp - x.total()


def _full(params: GUSParams, x: ExponentPoint) -> list[complex]:
    return list(x.xi) + [balanced_exponent(params, x)]


def _weight_line(xi: complex, params: GUSParams, ctx: QContext, sign: int = 1):
    """log prod_j (q a_j^-1 z)_inf / (b_j z)_inf with z = q**(xi + sign*nu)."""

    def f(nu):
        out = np.zeros(nu.shape, dtype=complex)
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out = out + log_poch_line(1 + (xi - a), sign, nu, ctx)
            out = out - log_poch_line(xi + b, sign, nu, ctx)
        return out

    return f


def gus_summand(params: GUSParams, x: ExponentPoint, ctx: QContext) -> ProductSummand:
    """Phi(z) Delta(z) with the balanced last coordinate."""
    if x.n != params.n:
        raise ValueError("point must have n coordinates")
    last = balanced_exponent(params, x)
    lines = [_weight_line(xi, params, ctx) for xi in x.xi]
    return ProductSummand(x.xi, lines, ctx, sum_log=_weight_line(last, params, ctx, -1),
                          extra_exp=last, cross=vandermonde)


def tilde_summand(params: GUSParams, x: ExponentPoint, ctx: QContext,
                  log_shift: complex = 0.0) -> ProductSummand:
    """Phi-tilde(z) Delta(z): the weight with the theta factor k(z) removed."""
    last = balanced_exponent(params, x)
    lines = [_weight_line(xi, params, ctx) for xi in x.xi]
    w = params.n + 1 - params.total
    lq = ctx.log_q

    def last_line(s):
        zeta = last - s
        out = -w * zeta * lq
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out = out + log_poch_line(1 - b - last, 1, s, ctx)
            out = out - log_poch_line(a - last, 1, s, ctx)
        return out

    return ProductSummand(x.xi, lines, ctx, sum_log=last_line, extra_exp=last,
                          cross=vandermonde, log_shift=log_shift)


def _spec(n: int, ctx: QContext, cycle: Cycle) -> SumSpec:
    return SumSpec(n, cycle, ctx.lattice_cutoff)


def gus_lhs(params: GUSParams, x: ExponentPoint, spec: SumSpec | None = None,
            ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """K(x) over the q-cycle through x."""
    spec = spec or _spec(params.n, ctx, Cycle.BOX)
    return jackson_sum(gus_summand(params, x, ctx), x, spec, ctx, workers)


def gus_truncated_lhs(params: GUSParams, ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """K(a) with a = (a_1, ..., a_n), summed over N^n."""
    a = ExponentPoint(params.alpha_exp[: params.n])
    return gus_lhs(params, a, _spec(params.n, ctx, Cycle.FAN), ctx, workers)


def gus_regularizer_h(params: GUSParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h(x) written with the n free coordinates only."""
    n = params.n
    last = balanced_exponent(params, x)
    den = 1.0 + 0j
    for xi in x.xi:
        for b in params.beta_exp:
            den *= theta_exp(xi + b, ctx)
    out = (-1) ** n * _skew_theta(x.xi, ctx) / den
    num2 = 1.0 + 0j
    for xi in x.xi:
        num2 *= q_power(xi, ctx) * theta_exp(last - xi, ctx)
    den2 = 1.0 + 0j
    for b in params.beta_exp:
        den2 *= theta_exp(b + last, ctx)
    return out * num2 / den2


def gus_regularizer_h_symmetric(params: GUSParams, x: ExponentPoint, ctx: QContext) -> complex:
    """h(x) in the symmetric form over all n+1 coordinates."""
    full = _full(params, x)
    den = 1.0 + 0j
    for xi in full:
        for b in params.beta_exp:
            den *= theta_exp(xi + b, ctx)
    return _skew_theta(full, ctx) / den


def gus_constant_rhs(params: GUSParams, ctx: QContext) -> complex:
    """The constant value of K(x)/h(x)."""
    n = params.n
    out = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n
    out *= qpoch_inf_exp(1 - params.a_sum + params.d_exp, ctx)
    out *= qpoch_inf_exp(1 - params.b_sum - params.d_exp, ctx)
    out /= qpoch_inf_exp(1 - params.total, ctx)
    return out * qpoch_prod_exp([1 - a - b for a in params.alpha_exp for b in params.beta_exp], ctx)


def gus_milne_rhs(params: GUSParams, ctx: QContext) -> complex:
    """K(a) when d = a_1 ... a_{n+1}."""
    n = params.n
    out = (1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** (n + 1) * _skew_theta(params.alpha_exp, ctx)
    return out / qpoch_prod_exp([a + b for a in params.alpha_exp for b in params.beta_exp], ctx)


def gus_k_factor(params: GUSParams, x: ExponentPoint, ctx: QContext) -> complex:
    """k(x) = prod_j x_{n+1}^(1-alpha_j-beta_j) theta(q a_j^-1 x_{n+1}) / theta(b_j x_{n+1})."""
    last = balanced_exponent(params, x)
    out = 1.0 + 0j
    for a, b in zip(params.alpha_exp, params.beta_exp):
        out *= q_power(last * (1 - a - b), ctx)
        out *= theta_exp(1 + (last - a), ctx) / theta_exp(b + last, ctx)
    return out


def gus_weight(params: GUSParams, z: ExponentPoint, ctx: QContext) -> complex:
    """Phi at a single point given by its n free exponents."""
    out = 1.0 + 0j
    for zi in _full(params, z):
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out *= qpoch_inf_exp(1 + (zi - a), ctx) / qpoch_inf_exp(b + zi, ctx)
    return out


def gus_tilde_weight(params: GUSParams, z: ExponentPoint, ctx: QContext) -> complex:
    """Phi-tilde at a single point."""
    last = balanced_exponent(params, z)
    out = q_power(-last * (params.n + 1 - params.total), ctx)
    for zi in z.xi:
        for a, b in zip(params.alpha_exp, params.beta_exp):
            out *= qpoch_inf_exp(1 + (zi - a), ctx) / qpoch_inf_exp(b + zi, ctx)
    for a, b in zip(params.alpha_exp, params.beta_exp):
        out *= qpoch_inf_exp(1 - b - last, ctx) / qpoch_inf_exp(a - last, ctx)
    return out


def gus_tilde_lhs(params: GUSParams, x: ExponentPoint, spec: SumSpec | None = None,
                  ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    spec = spec or _spec(params.n, ctx, Cycle.BOX)
    return jackson_sum(tilde_summand(params, x, ctx), x, spec, ctx, workers)


def k0_summand(params: GUSParams, x: ExponentPoint, ctx: QContext) -> ProductSummand:
    """1 / prod_{i<j<=n+1} (q z_i/z_j)_inf (q z_j/z_i)_inf."""
    n = params.n
    xi = list(x.xi)
    last = balanced_exponent(params, x)

    def pair(i, j):
        dij = xi[i] - xi[j]
        return lambda d: -(log_poch_line(1 + dij, 1, d, ctx) + log_poch_line(1 - dij, -1, d, ctx))

    pairs = {(i, j): pair(i, j) for i in range(n) for j in range(i + 1, n)}

    def with_last(nu):
        s = nu.sum(axis=1)
        out = np.zeros(nu.shape[0], dtype=complex)
        for i in range(n):
            e = (xi[i] - last) + (nu[:, i] + s).astype(float)
            out = out - log_qpoch_exp(1 + e, ctx) - log_qpoch_exp(1 - e, ctx)
        return out

    return ProductSummand(xi, [lambda nu: np.zeros(nu.shape, dtype=complex)] * n, ctx,
                          pair_logs=pairs, cross_log=with_last)


def gus_macdonald_k0(params: GUSParams, x: ExponentPoint, spec: SumSpec | None = None,
                     ctx: QContext = QContext(), workers: int = 1) -> SumResult:
    """K_0(x); its value is (1-q)^n (q)_inf^n for every base point."""
    spec = spec or _spec(params.n, ctx, Cycle.BOX)
    return jackson_sum(k0_summand(params, x, ctx), x, spec, ctx, workers)


def gus_k0_rhs(n: int, ctx: QContext) -> complex:
    return complex((1 - ctx.q) ** n * qpoch_inf(ctx.q, ctx) ** n)


def gus_rec_a(params: GUSParams, j: int, ctx: QContext) -> complex:
    """T_{a_j} K / K (the same ratio holds for K/h)."""
    num = 1 - q_power(params.d_exp - params.a_sum, ctx)
    for b in params.beta_exp:
        num *= 1 - q_power(-b - params.alpha_exp[j], ctx)
    return num / (1 - q_power(-params.total, ctx))


def gus_rec_b(params: GUSParams, j: int, ctx: QContext, regularized: bool = False) -> complex:
    """T_{b_j} K / K, or T_{b_j} (K/h) / (K/h) when ``regularized``."""
    bj = params.beta_exp[j]
    if regularized:
        num = 1 - q_power(-params.d_exp - params.b_sum, ctx)
        for a in params.alpha_exp:
            num *= 1 - q_power(-a - bj, ctx)
        return num / (1 - q_power(-params.total, ctx))
    num = 1 - q_power(params.d_exp + params.b_sum, ctx)
    for a in params.alpha_exp:
        num *= 1 - q_power(a + bj, ctx)
    return num / (1 - q_power(params.total, ctx))


def gus_asymptotic_log_leading(params: GUSParams, N: int, ctx: QContext) -> complex:
    """log of the leading term of the shifted truncated tilde sum at x = a."""
    n = params.n
    sp = params.special_shift(N)
    a = sp.alpha_exp[:n]
    w = 1 - sp.total
    out = n * np.log(1 - ctx.q) + w * (sum(a, 0j) - sp.d_exp) * ctx.log_q
    out += n * np.log(qpoch_inf(ctx.q, ctx))
    out += np.log(_skew_theta(a, ctx))
    return complex(out)
