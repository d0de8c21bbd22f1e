"""Scalar q-series kernels: q-powers by exponent, q-Pochhammer symbols and theta.

Every complex number that enters a formula as ``q**c`` is passed around as its
exponent ``c``; powers are then ``exp(c * ln q)`` with the real logarithm, so
there is never a branch choice to make.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np


class NonFinite(ArithmeticError):
    """A kernel or summand produced NaN or infinity (usually a pole)."""


@dataclass(frozen=True)
class QContext:
    """Numeric context shared by all kernels and sums.

    ``lattice_cutoff`` is the initial half-width of a summation box and
    ``adaptive`` controls whether sums may double it until the tail is small.
    """

    q: float = 0.5
    product_tol: float = 1e-17
    lattice_cutoff: int = 16
    identity_tol: float = 1e-8
    max_terms: int = 20_000_000
    adaptive: bool = True

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"q must lie in (0, 1), got {self.q!r}")
        if not self.product_tol > 0 or not self.identity_tol > 0:
            raise ValueError("tolerances must be positive")
        if not self.product_tol < self.identity_tol:
            raise ValueError("product_tol must be smaller than identity_tol")
        if self.lattice_cutoff < 1 or self.max_terms < 1:
            raise ValueError("lattice_cutoff and max_terms must be positive")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    def with_(self, **changes) -> "QContext":
        return replace(self, **changes)


@dataclass(frozen=True)
class ExponentPoint:
    """A point of (C*)^n stored through its q-exponents, x_i = q**xi[i]."""

    xi: tuple = field(default_factory=tuple)

    def __init__(self, xi: Iterable[complex]):
        object.__setattr__(self, "xi", tuple(complex(c) for c in xi))
        for c in self.xi:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("exponents must be finite")

    @property
    def n(self) -> int:
        return len(self.xi)

    def value(self, i: int, ctx: QContext) -> complex:
        return q_power(self.xi[i], ctx)

    def values(self, ctx: QContext) -> list[complex]:
        return [q_power(c, ctx) for c in self.xi]

    def total(self) -> complex:
        """Exponent of the coordinate product x_1 ... x_n."""
        return sum(self.xi, 0j)

    def inverse(self) -> "ExponentPoint":
        return ExponentPoint(-c for c in self.xi)

    def shifted(self, i: int, k: int = 1) -> "ExponentPoint":
        xi = list(self.xi)
        xi[i] += k
        return ExponentPoint(xi)

    def drop(self, i: int) -> "ExponentPoint":
        return ExponentPoint(self.xi[:i] + self.xi[i + 1:])

    def swapped(self, i: int, j: int) -> "ExponentPoint":
        xi = list(self.xi)
        xi[i], xi[j] = xi[j], xi[i]
        return ExponentPoint(xi)


def _check(value: complex, what: str) -> complex:
    if not cmath.isfinite(value):
        raise NonFinite(f"{what} is not finite")
    return value


def q_power(c: complex, ctx: QContext) -> complex:
    """q**c computed as exp(c ln q)."""
    c = complex(c)
    if c == 0:
        return 1.0 + 0j
    return cmath.exp(c * ctx.log_q)


def _truncation_index(abs_a: float, ctx: QContext) -> int:
    # least K with |q^K a| < product_tol / (1 + |a|)
    if abs_a == 0.0:
        return 0
    if not math.isfinite(abs_a):
        raise NonFinite("q-Pochhammer argument overflows")
    log_target = math.log(ctx.product_tol) - math.log1p(abs_a)
    k = math.ceil((log_target - math.log(abs_a)) / ctx.log_q)
    return max(k, 0)


def qpoch_inf(a: complex, ctx: QContext) -> complex:
    """(a; q)_inf, truncated where the geometric tail drops below product_tol."""
    a = complex(a)
    k_max = _truncation_index(abs(a), ctx)
    prod = 1.0 + 0j
    qi = 1.0
    for _ in range(k_max + 1):
        prod *= 1.0 - qi * a
        qi *= ctx.q
    return _check(prod, "qpoch_inf")


def qpoch_inf_exp(e: complex, ctx: QContext) -> complex:
    """(q**e; q)_inf with every factor formed from its exponent.

    Factors are 1 - q**(e + i); an integer exponent e <= 0 therefore produces an
    exact zero factor.
    """
    e = complex(e)
    k_max = _truncation_index(math.exp(e.real * ctx.log_q), ctx)
    prod = 1.0 + 0j
    for i in range(k_max + 1):
        prod *= 1.0 - q_power(e + i, ctx)
    return _check(prod, "qpoch_inf")


def qpoch_n(a: complex, N: int, ctx: QContext) -> complex:
    """(a; q)_N for any integer N, with (a)_N = (a)_inf / (q^N a)_inf."""
    a = complex(a)
    if N >= 0:
        prod = 1.0 + 0j
        qi = 1.0
        for _ in range(N):
            prod *= 1.0 - qi * a
            qi *= ctx.q
        return _check(prod, "qpoch_n")
    den = 1.0 + 0j
    for i in range(1, -N + 1):
        den *= 1.0 - a * ctx.q ** (-i)
    if den == 0:
        raise ZeroDivisionError("qpoch_n: a factor 1 - q^-i a vanishes")
    return _check(1.0 / den, "qpoch_n")


def theta(a: complex, ctx: QContext) -> complex:
    """theta(a) = (a)_inf (q/a)_inf."""
    a = complex(a)
    if a == 0:
        raise ValueError("theta is undefined at 0")
    return _check(qpoch_inf(a, ctx) * qpoch_inf(ctx.q / a, ctx), "theta")


def theta_exp(e: complex, ctx: QContext) -> complex:
    """theta(q**e); vanishes exactly for integer e."""
    e = complex(e)
    return _check(qpoch_inf_exp(e, ctx) * qpoch_inf_exp(1 - e, ctx), "theta")


def qpoch_prod_exp(exps: Sequence[complex], ctx: QContext) -> complex:
    """Product of (q**e)_inf over a list of exponents."""
    out = 1.0 + 0j
    for e in exps:
        out *= qpoch_inf_exp(e, ctx)
    return out


def theta_prod_exp(exps: Sequence[complex], ctx: QContext) -> complex:
    out = 1.0 + 0j
    for e in exps:
        out *= theta_exp(e, ctx)
    return out


# Vectorised kernels used to tabulate weights along lattice lines.

def log_qpoch_exp(e, ctx: QContext) -> np.ndarray:
    """log (q**e)_inf elementwise for an array of complex exponents.

    Factors with |q**(e+i)| < 1 are multiplied directly (no overflow is
    possible there); the remaining large factors are accumulated as logarithms.
    An exact zero factor gives -inf.
    """
    e = np.atleast_1d(np.asarray(e, dtype=complex))
    lq = ctx.log_q
    mag = np.exp(e.real * lq)
    # the truncation index grows with |a|, so the largest magnitude decides
    k_max = _truncation_index(float(mag.max()), ctx) if e.size else 0
    i = np.arange(k_max + 1)
    w = np.exp((e[..., None] + i) * lq)
    # exact unit values give exact zeros
    w = np.where((e[..., None] + i) == 0, 1.0 + 0j, w)
    big = np.abs(w) >= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        small_prod = np.prod(np.where(big, 1.0 + 0j, 1.0 - w), axis=-1)
        big_log = np.sum(np.where(big, np.log(np.where(big, 1.0 - w, 1.0)), 0.0), axis=-1)
        return np.log(small_prod) + big_log
