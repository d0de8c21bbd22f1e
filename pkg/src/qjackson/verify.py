"""Checks that compare lattice sums, closed forms and polynomial expansions.

Every check returns a :class:`CheckReport`.  ``check_identity`` dispatches on a
check id such as ``"mg.theorem31.n2"``; parameters and points are drawn by a
seeded rejection sampler so any report can be rebuilt from (check id, seed,
context).
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .families import da, gus, mg
from .families._common import vandermonde
from .families.da import DAParams
from .families.gus import GUSParams
from .families.mg import MGParams
from .lattice import Cycle, NotConverged, SumResult, SumSpec, jackson_sum
from .qcore import (
    ExponentPoint,
    QContext,
    log_qpoch_exp,
    q_power,
    qpoch_inf,
    qpoch_n,
    theta,
    theta_exp,
)

MAX_SKEW_DIMENSION = 6
POLY_TOL = 1e-12
RECURRENCE_TOL = 1e-9
ASYMPTOTIC_TOL = 1e-3
# weights are exp of sums of logs of size ~10, each rounded to ~1 ulp
SHIFT_ROUNDING_FLOOR = 64 * 2.0 ** -52
DEFAULT_N_LIST = (5, 10, 15)


class DimensionTooLarge(ValueError):
    """Skew-symmetrisation was asked for more than MAX_SKEW_DIMENSION variables."""


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    paper_anchor: str
    lhs: complex
    rhs: complex
    rel_dev: float
    tol: float
    passed: bool
    seed: int
    params_echo: dict = field(default_factory=dict)
    terms: int = 0
    elapsed_ms: int = 0


def relative_deviation(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def _report(check_id, anchor, lhs, rhs, tol, seed, echo, terms, started, *, rel_dev=None,
            extra_ok=True) -> CheckReport:
    dev = relative_deviation(lhs, rhs) if rel_dev is None else rel_dev
    return CheckReport(
        check_id=check_id,
        paper_anchor=anchor,
        lhs=complex(lhs),
        rhs=complex(rhs),
        rel_dev=float(dev),
        tol=float(tol),
        passed=bool(extra_ok and dev <= tol),
        seed=int(seed),
        params_echo=serialize(echo),
        terms=int(terms),
        elapsed_ms=int(round((time.perf_counter() - started) * 1000)),
    )


def serialize(obj):
    """JSON-ready copy: complex numbers become [re, im] pairs."""
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): serialize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [serialize(v) for v in obj]
    if isinstance(obj, np.generic):
        return serialize(obj.item())
    return obj


# Permutations and the skew-symmetriser


@dataclass(frozen=True)
class Permutation:
    """A bijection of {0..m-1}, stored as its image vector."""

    image: tuple

    def __post_init__(self):
        if sorted(self.image) != list(range(len(self.image))):
            raise ValueError(f"not a permutation: {self.image}")

    @property
    def size(self) -> int:
        return len(self.image)

    @property
    def sign(self) -> int:
        seen = [False] * self.size
        parity = 0
        for start in range(self.size):
            k, length = start, 0
            while not seen[k]:
                seen[k] = True
                k = self.image[k]
                length += 1
            if length:
                parity += length - 1
        return -1 if parity % 2 else 1

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def act(self, z: Sequence) -> tuple:
        """(sigma^-1 z)_i = z_{sigma(i)}."""
        return tuple(z[k] for k in self.image)

    @classmethod
    def all(cls, m: int) -> Iterator["Permutation"]:
        for p in itertools.permutations(range(m)):
            yield cls(p)


def skew_symmetrize(f: Callable[[tuple], complex], n: int, z: Sequence) -> complex:
    """sum over sigma in S_n of sgn(sigma) f(sigma^-1 z)."""
    if n > MAX_SKEW_DIMENSION:
        raise DimensionTooLarge(f"n={n} exceeds {MAX_SKEW_DIMENSION}")
    if isinstance(z, ExponentPoint):
        z = z.xi
    if len(z) != n:
        raise ValueError("point dimension does not match n")
    return sum(p.sign * f(p.act(z)) for p in Permutation.all(n))


# Weights and the nabla operators


class WeightEval:
    """A family weight Phi (without Delta) known through q-shift ratios and logs.

    ``shift_ratio`` gives T_{z_i} Phi / Phi (or the paired shift
    T_{z_j}^-1 T_{z_i}) as a rational function of coordinate values.
    ``log_weight`` evaluates log Phi on exponents xi + nu with the integer part
    kept separate, so that truncation zeros come out exactly.
    """

    def __init__(self, ctx: QContext, power: complex, num: Sequence[complex], den: Sequence[complex]):
        self.ctx = ctx
        self.power = complex(power)
        self.num = [complex(c) for c in num]
        self.den = [complex(c) for c in den]
        self.num_vals = np.array([q_power(c, ctx) for c in self.num])
        self.den_vals = np.array([q_power(c, ctx) for c in self.den])

    def shift_ratio(self, i: int, z, j: int | None = None):
        """Phi(T z) / Phi(z) for T = T_{z_i}, or T_{z_j}^-1 T_{z_i} when j is given."""
        q = self.ctx.q
        zi = z[..., i]
        out = q_power(self.power, self.ctx) * np.prod(
            (1 - self.den_vals * zi[..., None]) / (1 - q * zi[..., None] / self.num_vals), axis=-1
        )
        if j is None:
            return out
        zj = z[..., j]
        out = out / q_power(self.power, self.ctx)
        return out * np.prod(
            (1 - zj[..., None] / self.num_vals) / (1 - self.den_vals * zj[..., None] / q), axis=-1
        )

    def column_log(self, x: complex, col: np.ndarray) -> np.ndarray:
        """log of one coordinate's factor at exponents x + col, tabulated per distinct integer."""
        values, where = np.unique(col, return_inverse=True)
        v = values.astype(float)
        out = self.power * (x + v) * self.ctx.log_q
        for a in self.num:
            out = out + log_qpoch_exp((1 + (x - a)) + v, self.ctx)
        for b in self.den:
            out = out - log_qpoch_exp((x + b) + v, self.ctx)
        return out[where.reshape(col.shape)]

    def log_weight(self, xi: Sequence[complex], nu: np.ndarray) -> np.ndarray:
        out = np.zeros(nu.shape[0], dtype=complex)
        for c, x in enumerate(xi):
            out = out + self.column_log(x, nu[:, c])
        return out


def mg_weight(params: MGParams, ctx: QContext) -> WeightEval:
    """z^alpha prod (q a_j^-1 z)_inf / (b_j z)_inf per coordinate."""
    return WeightEval(ctx, params.alpha, params.alpha_exp, params.beta_exp)


def da_dual_weight(params: DAParams, ctx: QContext) -> WeightEval:
    """z^(1-S) prod (q b_j^-1 z)_inf / (a_j z)_inf per coordinate."""
    return WeightEval(ctx, params.dual_weight, params.beta_exp, params.alpha_exp)


def gus_weight_eval(params: GUSParams, ctx: QContext) -> WeightEval:
    return WeightEval(ctx, 0.0, params.alpha_exp, params.beta_exp)


def _shift(z: np.ndarray, i: int, q: float, j: int | None = None) -> np.ndarray:
    out = np.array(z, dtype=complex, copy=True)
    out[..., i] *= q
    if j is not None:
        out[..., j] /= q
    return out


def nabla(phi, weight: WeightEval, i: int, z) -> complex:
    """phi(z) - (T_{z_i} Phi / Phi)(z) * phi(T_{z_i} z)."""
    z = np.asarray(z, dtype=complex)
    return phi(z) - weight.shift_ratio(i, z) * phi(_shift(z, i, weight.ctx.q))


def nabla_pair(phi, weight: WeightEval, i: int, j: int, z) -> complex:
    """The same with the paired shift z_i -> q z_i, z_j -> z_j / q."""
    z = np.asarray(z, dtype=complex)
    return phi(z) - weight.shift_ratio(i, z, j) * phi(_shift(z, i, weight.ctx.q, j))


# Test functions phi whose skew-symmetrised nabla has a two-term expansion.


def mg_phi(params: MGParams, ctx: QContext):
    """z_2^(n-1) z_3^(n-2) ... z_n prod_j (1 - z_1 / a_j)."""
    n = params.n
    a = np.array([q_power(c, ctx) for c in params.alpha_exp])

    def phi(z):
        out = np.prod(1 - z[..., 0, None] / a, axis=-1)
        for k in range(1, n):
            out = out * z[..., k] ** (n - k)
        return out

    return phi


def da_phi(params: DAParams, ctx: QContext):
    """z_1^-1 prod_i (b_i - z_1) prod_{j<k<=n} (z_k - b_j)."""
    n = params.n
    b = np.array([q_power(c, ctx) for c in params.beta_exp])

    def phi(z):
        out = np.prod(b - z[..., 0, None], axis=-1) / z[..., 0]
        for j in range(n):
            for k in range(j + 1, n):
                out = out * (z[..., k] - b[j])
        return out

    return phi


def gus_phi(params: GUSParams, ctx: QContext):
    """prod_i (1 - z_1/a_i)(1 - b_i z_{n+1}) z_2 ... z_n prod_{j<k<=n} (z_k - a_j)."""
    n = params.n
    a = np.array([q_power(c, ctx) for c in params.alpha_exp])
    b = np.array([q_power(c, ctx) for c in params.beta_exp])

    def phi(z):
        out = np.prod((1 - z[..., 0, None] / a) * (1 - b * z[..., n, None]), axis=-1)
        for k in range(1, n):
            out = out * z[..., k]
        for j in range(n):
            for k in range(j + 1, n):
                out = out * (z[..., k] - a[j])
        return out

    return phi


# Polynomial expansion lemmas


def _triangular_sign(n: int) -> int:
    """Sign of the skew-symmetrised monomial z_2^(n-1) ... z_n against Delta."""
    return -1 if ((n - 1) * (n - 2) // 2) % 2 else 1


def mg_expansion_coefficients(params: MGParams, ctx: QContext, printed: bool = False):
    """(c0, c1) with A nabla_1 phi = (c0 + c1 z_1...z_n) Delta.

    The printed normalisation carries the overall sign (-1)^(n-1); the
    skew-symmetrisation of the leading monomial actually gives
    (-1)^((n-1)(n-2)/2).  ``printed=True`` returns the printed pair.
    """
    n = params.n
    qa = q_power(params.alpha, ctx)
    top = (1 - qa * q_power(params.a_sum + params.b_sum, ctx)) / q_power(params.a_sum, ctx)
    if printed:
        return (-1) ** (n - 1) * (1 - qa), (-1) ** n * top
    s = _triangular_sign(n)
    return s * (1 - qa), -s * top


def da_expansion_coefficients(params: DAParams, ctx: QContext, printed: bool = False):
    """(c0, c1) with A nabla_1 phi = (c0 + c1 e(b_1; z) / (z_1...z_n)) Delta.

    The printed c1 carries one extra factor b_1; the expansion holds with
    c1 / b_1, which is also the value that reproduces the b-recurrence.
    """
    n = params.n
    a = [q_power(c, ctx) for c in params.alpha_exp]
    b1 = q_power(params.beta_exp[0], ctx)
    inv_a = 1.0 / np.prod(a)
    c0 = -inv_a / b1 * np.prod([1 - ai * b1 for ai in a])
    c1 = (-b1) ** n * inv_a * (1 - q_power(params.total, ctx))
    return (c0, c1) if printed else (c0, c1 / b1)


def gus_expansion_coefficients(params: GUSParams, ctx: QContext, printed: bool = False):
    """(c0, c1) with A nabla_{1,n+1} phi = (c0 e0(z) + c1 e(a_1; z)) Delta.

    The printed pair is off by the common sign (-1)^(n+1).
    """
    n = params.n
    a1 = q_power(params.alpha_exp[0], ctx)
    b = [q_power(c, ctx) for c in params.beta_exp]
    pb = np.prod(b)
    c0 = (-1) ** (n + 1) * 2 * a1 ** n * pb * np.prod([1 - 1 / (a1 * bi) for bi in b])
    c1 = (-1) ** n * 2 * a1 ** n * pb * (1 - q_power(-params.total, ctx))
    if printed:
        return c0, c1
    s = (-1) ** (n + 1)
    return s * c0, s * c1


def gus_balanced_c0(params: GUSParams, ctx: QContext, printed: bool = False) -> complex:
    """c0 e0(z) on the balance surface z_1...z_{n+1} = d."""
    c0, _ = gus_expansion_coefficients(params, ctx, printed)
    return c0 * (1 - q_power(params.d_exp - params.a_sum, ctx))


def _values(z: ExponentPoint, ctx: QContext) -> np.ndarray:
    return np.array(z.values(ctx), dtype=complex)


def check_poly_expansion_mg(params: MGParams, z: ExponentPoint, ctx: QContext = QContext(),
                            printed: bool = False, seed: int = 0) -> CheckReport:
    started = time.perf_counter()
    n = params.n
    zv = _values(z, ctx)
    phi, w = mg_phi(params, ctx), mg_weight(params, ctx)
    lhs = skew_symmetrize(lambda v: nabla(phi, w, 0, np.array(v)), n, zv)
    c0, c1 = mg_expansion_coefficients(params, ctx, printed)
    rhs = (c0 + c1 * np.prod(zv)) * vandermonde(zv[None, :])[0]
    echo = {"params": params.echo(), "z": z.xi, "printed": printed, "q": ctx.q}
    return _report(f"mg.poly_expansion.n{n}", "mg-skew-nabla-expansion", lhs, rhs, POLY_TOL,
                   seed, echo, math.factorial(n), started)


def check_poly_expansion_da(params: DAParams, z: ExponentPoint, ctx: QContext = QContext(),
                            printed: bool = False, seed: int = 0) -> CheckReport:
    started = time.perf_counter()
    n = params.n
    zv = _values(z, ctx)
    phi, w = da_phi(params, ctx), da_dual_weight(params, ctx)
    lhs = skew_symmetrize(lambda v: nabla(phi, w, 0, np.array(v)), n, zv)
    c0, c1 = da_expansion_coefficients(params, ctx, printed)
    b1 = q_power(params.beta_exp[0], ctx)
    e = np.prod(1 - zv / b1)
    rhs = (c0 + c1 * e / np.prod(zv)) * vandermonde(zv[None, :])[0]
    echo = {"params": params.echo(), "z": z.xi, "printed": printed, "q": ctx.q}
    return _report(f"da.poly_expansion.n{n}", "da-skew-nabla-expansion", lhs, rhs, POLY_TOL,
                   seed, echo, math.factorial(n), started)


def check_poly_expansion_gus(params: GUSParams, z: ExponentPoint, ctx: QContext = QContext(),
                             printed: bool = False, seed: int = 0) -> CheckReport:
    """``z`` holds the n free exponents; the last coordinate is d / (z_1...z_n)."""
    started = time.perf_counter()
    n = params.n
    full = ExponentPoint(list(z.xi) + [gus.balanced_exponent(params, z)])
    zv = _values(full, ctx)
    phi, w = gus_phi(params, ctx), gus_weight_eval(params, ctx)
    lhs = skew_symmetrize(lambda v: nabla_pair(phi, w, 0, n, np.array(v)), n + 1, zv)
    _, c1 = gus_expansion_coefficients(params, ctx, printed)
    a1 = q_power(params.alpha_exp[0], ctx)
    rhs = (gus_balanced_c0(params, ctx, printed) + c1 * np.prod(1 - zv / a1))
    rhs *= vandermonde(zv[None, :])[0]
    echo = {"params": params.echo(), "z": z.xi, "printed": printed, "q": ctx.q}
    return _report(f"gus.poly_expansion.n{n}", "gus-skew-nabla-expansion", lhs, rhs, POLY_TOL,
                   seed, echo, math.factorial(n + 1), started)


# Vanishing of the Jackson sum of Phi A nabla phi


class _NablaSummand:
    """Phi(z) A nabla phi(z) on the lattice, built from Phi phi - Phi(T z) phi(T z).

    Using the shifted weight instead of the shift ratio keeps truncation zeros
    exact: the ratio itself is 0/0 at the boundary of a truncated cycle.  Phi
    is symmetric, so its per-coordinate logs are computed once per block and
    reused by every permutation.
    """

    def __init__(self, weight: WeightEval, phi, xi: Sequence[complex], i: int, j: int | None,
                 last: complex | None, ctx: QContext):
        self.weight, self.phi, self.ctx = weight, phi, ctx
        self.xi = list(xi)
        self.i, self.j = i, j
        self.last = last

    def prepare(self, lo: int, hi: int) -> None:
        """Tabulate every coordinate's log factor over the integers a block can reach."""
        xi = list(self.xi)
        ranges = [(lo - 1, hi + 1)] * len(xi)
        if self.last is not None:
            n = len(xi)
            xi.append(self.last)
            ranges.append((-n * hi - 1, -n * lo + 1))
        self._tables = []
        for x, (a, b) in zip(xi, ranges):
            grid = np.arange(a, b + 1)
            self._tables.append((a, self.weight.column_log(x, grid)))

    def _column(self, c: int, x: complex, col: np.ndarray) -> np.ndarray:
        tables = getattr(self, "_tables", None)
        if tables is not None:
            start, table = tables[c]
            k = col - start
            if k.min() >= 0 and k.max() < table.shape[0]:
                return table[k]
        return self.weight.column_log(x, col)

    def _full(self, nu):
        xi = list(self.xi)
        if self.last is not None:
            xi = xi + [self.last]
            nu = np.concatenate([nu, -nu.sum(axis=1, keepdims=True)], axis=1)
        return xi, nu

    @staticmethod
    def _exp(logs):
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.exp(logs)
        return np.where(np.isneginf(logs.real), 0.0 + 0j, w)

    def __call__(self, nu: np.ndarray) -> np.ndarray:
        xi, nu = self._full(nu)
        m = len(xi)
        lq = self.ctx.log_q
        cols = [self._column(c, x, nu[:, c]) for c, x in enumerate(xi)]
        up = [self._column(c, x, nu[:, c] + 1) for c, x in enumerate(xi)]
        down = [self._column(c, x, nu[:, c] - 1) for c, x in enumerate(xi)] if self.j is not None else None
        z = np.exp((np.asarray(xi)[None, :] + nu) * lq)
        base_w = self._exp(sum(cols))
        shifted_w = {}

        def moved_weight(k, k2):
            if (k, k2) not in shifted_w:
                parts = list(cols)
                parts[k] = up[k]
                if k2 is not None:
                    parts[k2] = down[k2]
                shifted_w[(k, k2)] = self._exp(sum(parts))
            return shifted_w[(k, k2)]

        out = np.zeros(nu.shape[0], dtype=complex)
        for p in Permutation.all(m):
            idx = list(p.image)
            zs = z[:, idx]
            k = idx[self.i]
            k2 = idx[self.j] if self.j is not None else None
            zt = _shift(zs, self.i, self.ctx.q, self.j)
            out += p.sign * (base_w * self.phi(zs) - moved_weight(k, k2) * self.phi(zt))
        return out

    def magnitude(self, nu: np.ndarray) -> np.ndarray:
        """|Phi(z) Delta(z)|, the scale the vanishing sum is measured against."""
        xi, nu = self._full(nu)
        logs = sum(self._column(c, x, nu[:, c]) for c, x in enumerate(xi))
        z = np.exp((np.asarray(xi)[None, :] + nu) * self.ctx.log_q)
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.exp(logs.real)
        w = np.where(np.isneginf(logs.real), 0.0, w)
        return (w * np.abs(vandermonde(z))).astype(complex)


def check_nabla_vanishing(family: str, params, x: ExponentPoint, spec: SumSpec | None = None,
                          ctx: QContext = QContext(), workers: int = 1, seed: int = 0,
                          tol: float | None = None) -> CheckReport:
    """Jackson sum of Phi A nabla phi over the cycle through x, relative to sum |Phi Delta|.

    ``lhs`` is that ratio and ``rhs`` is 0.  The trivial test function phi = 0
    is selected with family ``"zero"`` (any params of the MG family).
    """
    started = time.perf_counter()
    tol = ctx.identity_tol if tol is None else tol
    last = None
    if family in ("mg", "zero"):
        weight, phi, i, j = mg_weight(params, ctx), mg_phi(params, ctx), 0, None
        if family == "zero":
            phi = lambda z: np.zeros(z.shape[:-1], dtype=complex)
    elif family == "da":
        weight, phi, i, j = da_dual_weight(params, ctx), da_phi(params, ctx), 0, None
    elif family == "gus":
        weight, phi, i, j = gus_weight_eval(params, ctx), gus_phi(params, ctx), 0, params.n
        last = gus.balanced_exponent(params, x)
    else:
        raise ValueError(f"unknown family {family!r}")
    n = x.n
    spec = spec or SumSpec(n, Cycle.BOX, ctx.lattice_cutoff)
    f = _NablaSummand(weight, phi, x.xi, i, j, last, ctx)
    sctx = ctx.with_(identity_tol=tol / 10)
    scale = jackson_sum(f.magnitude, x, spec, sctx, workers)
    _require(scale)
    inner = SumSpec(n, spec.cycle, max(scale.cutoff, spec.cutoff), spec.adaptive)
    res = jackson_sum(f, x, inner, sctx, workers, rel_floor=scale.value.real)
    _require(res)
    ratio = res.value / scale.value.real
    echo = {"family": family, "params": params.echo(), "x": x.xi, "q": ctx.q}
    return _report(f"{family}.nabla_vanishing.n{n}", f"{family}-nabla-sum-vanishes", ratio, 0.0,
                   tol, seed, echo, scale.terms + res.terms, started)


def _require(res: SumResult) -> SumResult:
    if not res.converged:
        raise NotConverged(f"tail {res.tail_estimate:.3e} above threshold at cutoff {res.cutoff}")
    return res


# Recurrences


def check_recurrence_mg(params: MGParams, x: ExponentPoint, spec: SumSpec | None = None,
                        ctx: QContext = QContext(), workers: int = 1, dual: bool = False,
                        seed: int = 0) -> CheckReport:
    """I(alpha)/I(alpha+1) against its factor, or the dual Ibar(alpha)/Ibar(alpha-1)."""
    started = time.perf_counter()
    sctx = ctx.with_(identity_tol=min(ctx.identity_tol, RECURRENCE_TOL / 10))
    if dual:
        top = _require(mg.mg_dual_lhs(params, x, spec, sctx, workers))
        bottom = _require(mg.mg_dual_lhs(params.with_alpha(params.alpha - 1), x, spec, sctx, workers))
        rhs = mg.mg_dual_recurrence_factor(params, ctx)
        cid, anchor = "mg.dual_recurrence", "mg-dual-alpha-recurrence"
    else:
        top = _require(mg.mg_lhs(params, x, spec, sctx, workers))
        bottom = _require(mg.mg_lhs(params.with_alpha(params.alpha + 1), x, spec, sctx, workers))
        rhs = mg.mg_recurrence_factor(params, ctx)
        cid, anchor = "mg.recurrence", "mg-alpha-recurrence"
    echo = {"params": params.echo(), "x": x.xi, "q": ctx.q}
    return _report(f"{cid}.n{params.n}", anchor, top.value / bottom.value, rhs, RECURRENCE_TOL,
                   seed, echo, top.terms + bottom.terms, started)


def check_recurrence_da(params: DAParams, ctx: QContext = QContext(), *, j: int = 0, i: int | None = None,
                        shift: str = "a", regularized: bool = False, workers: int = 1,
                        seed: int = 0) -> CheckReport:
    """T_{a_j} or T_{b_j} of the truncated dual sum at b with b_i removed, over the unshifted one."""
    started = time.perf_counter()
    i = params.n if i is None else i
    sctx = ctx.with_(identity_tol=min(ctx.identity_tol, RECURRENCE_TOL / 10))
    shifted = params.shift_a(j) if shift == "a" else params.shift_b(j)
    base = _require(da.da_dual_truncated_lhs(params, i, sctx, workers))
    moved = _require(da.da_dual_truncated_lhs(shifted, i, sctx, workers))
    ratio = moved.value / base.value
    if regularized:
        ratio *= (da.da_dual_regularizer_hbar(params, da.truncation_point_b(params, i), ctx)
                  / da.da_dual_regularizer_hbar(shifted, da.truncation_point_b(shifted, i), ctx))
    rec = da.da_rec_a if shift == "a" else da.da_rec_b
    rhs = rec(params, j, ctx, regularized)
    suffix = "_regularized" if regularized else ""
    echo = {"params": params.echo(), "j": j, "i": i, "shift": shift, "q": ctx.q}
    return _report(f"da.recurrence_{shift}{suffix}.n{params.n}", f"da-{shift}-shift-recurrence{suffix}",
                   ratio, rhs, RECURRENCE_TOL, seed, echo, base.terms + moved.terms, started)


def check_recurrence_gus(params: GUSParams, x: ExponentPoint, spec: SumSpec | None = None,
                         ctx: QContext = QContext(), *, j: int = 0, shift: str = "a",
                         regularized: bool = False, workers: int = 1, seed: int = 0) -> CheckReport:
    """T_{a_j} or T_{b_j} of K(x) (or of K/h) over the unshifted value."""
    started = time.perf_counter()
    sctx = ctx.with_(identity_tol=min(ctx.identity_tol, RECURRENCE_TOL / 10))
    shifted = params.shift_a(j) if shift == "a" else params.shift_b(j)
    base = _require(gus.gus_lhs(params, x, spec, sctx, workers))
    moved = _require(gus.gus_lhs(shifted, x, spec, sctx, workers))
    ratio = moved.value / base.value
    if regularized:
        ratio *= gus.gus_regularizer_h(params, x, ctx) / gus.gus_regularizer_h(shifted, x, ctx)
    if shift == "a":
        rhs = gus.gus_rec_a(params, j, ctx)
    else:
        rhs = gus.gus_rec_b(params, j, ctx, regularized)
    suffix = "_regularized" if regularized else ""
    echo = {"params": params.echo(), "x": x.xi, "j": j, "shift": shift, "q": ctx.q}
    return _report(f"gus.recurrence_{shift}{suffix}.n{params.n}", f"gus-{shift}-shift-recurrence{suffix}",
                   ratio, rhs, RECURRENCE_TOL, seed, echo, base.terms + moved.terms, started)


# Asymptotics

ASYMPTOTIC_DIRECTIONS = {
    "mg": ("alpha_up", "alpha_down"),
    "da": ("special",),
    "gus": ("special",),
}


def asymptotic_ratio(family: str, params, direction: str, N: int, ctx: QContext = QContext(),
                     workers: int = 1) -> SumResult:
    """Truncated sum divided by its leading term, summed in the log domain.

    mg/alpha_up: I(alpha+N; a); mg/alpha_down: the dual at alpha-N, x = b;
    da/special: the dual sum at b with b_{n+1} removed after the special shift
    T^N; gus/special: K-tilde(a) after its special shift.
    """
    n = params.n
    if family == "mg" and direction == "alpha_up":
        shifted = params.with_alpha(params.alpha + N)
        x = ExponentPoint(params.alpha_exp)
        f = mg.mg_summand(shifted, x, ctx, log_shift=mg.mg_asymptotic_log_leading(params, N, ctx))
    elif family == "mg" and direction == "alpha_down":
        shifted = params.with_alpha(params.alpha - N)
        x = ExponentPoint(params.beta_exp)
        lead = mg.mg_asymptotic_log_leading(params, N, ctx, dual=True)
        f = mg.mg_summand(shifted, x, ctx, dual=True, log_shift=lead)
    elif family == "da" and direction == "special":
        shifted = params.special_shift(N)
        x = ExponentPoint(shifted.beta_exp[:n])
        f = da.da_summand(shifted, x, ctx, dual=True, log_shift=da.da_asymptotic_log_leading(params, N, ctx))
    elif family == "gus" and direction == "special":
        shifted = params.special_shift(N)
        x = ExponentPoint(shifted.alpha_exp[:n])
        f = gus.tilde_summand(shifted, x, ctx, log_shift=gus.gus_asymptotic_log_leading(params, N, ctx))
    else:
        raise ValueError(f"no asymptotic direction {direction!r} for family {family!r}")
    spec = SumSpec(n, Cycle.FAN, ctx.lattice_cutoff)
    return _require(jackson_sum(f, x, spec, ctx, workers, rel_floor=0.0))


def check_asymptotic(family: str, params, direction: str, N_list: Sequence[int] = DEFAULT_N_LIST,
                     ctx: QContext = QContext(), workers: int = 1, seed: int = 0) -> CheckReport:
    """Passes when |ratio - 1| strictly decreases along N_list and ends below 1e-3.

    ``lhs`` is the ratio at the last N, ``rhs`` is 1 and ``rel_dev`` is the
    final deviation; the per-N deviations are echoed.
    """
    started = time.perf_counter()
    ratios, terms = [], 0
    for N in N_list:
        r = asymptotic_ratio(family, params, direction, N, ctx, workers)
        ratios.append(r.value)
        terms += r.terms
    devs = [abs(r - 1) for r in ratios]
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    echo = {"family": family, "params": params.echo(), "direction": direction,
            "N": list(N_list), "deviations": devs, "q": ctx.q}
    return _report(f"{family}.asymptotic_{direction}.n{params.n}", f"{family}-leading-asymptotics",
                   ratios[-1], 1.0, ASYMPTOTIC_TOL, seed, echo, terms, started,
                   rel_dev=devs[-1], extra_ok=decreasing)


# Seeded sampling


def _rng(seed: int, *tags) -> np.random.Generator:
    words = [int(seed) & 0xFFFFFFFF] + [zlib.crc32(str(t).encode()) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(words))


POLE_MARGIN = 0.02


def _near_integer(c: complex, margin: float = POLE_MARGIN) -> bool:
    c = complex(c)
    return abs(c - round(c.real)) < margin


def _any_near_integer(values) -> bool:
    return any(_near_integer(v) for v in values)


def _frac(rng: np.random.Generator, k: int, imag: float = 0.2) -> list[complex]:
    return list(rng.uniform(0.05, 0.95, k) + 1j * rng.uniform(-imag, imag, k))


def _shift_down(values: list[complex], k: int) -> list[complex]:
    """Subtract k units, spread round-robin from the last entry backwards."""
    out = list(values)
    for t in range(k):
        out[len(out) - 1 - (t % len(out))] -= 1
    return out


def _pair_poles(alpha: Sequence[complex], beta: Sequence[complex]) -> list[complex]:
    out = [a + b for a in alpha for b in beta]
    out += [a - c for a, c in itertools.combinations(alpha, 2)]
    out += [b - c for b, c in itertools.combinations(beta, 2)]
    return out


def sample_params(family: str, n: int, seed: int, ctx: QContext = QContext(), kind: str = "identity",
                  tag: str = ""):
    """Draw parameters inside the convergence region, away from poles.

    kind "identity" keeps every sum of the family convergent; "recurrence"
    leaves room for the unit parameter shifts used by the recurrence checks;
    "algebraic" draws unconstrained exponents for the polynomial lemmas.
    """
    rng = _rng(seed, family, n, kind, tag)
    for _ in range(10_000):
        p = _draw(family, n, rng, kind)
        if p is not None:
            return p
    raise RuntimeError(f"sampler found no admissible {family} parameters")


def _mg_window(n: int, kind: str) -> tuple[float, float]:
    """(lower end of T = 1 - sum Re(alpha_i + beta_i), margin kept for alpha).

    T lies in [low, low + 1) and Re alpha in [margin, T - margin].  Recurrences
    need room for a unit shift of alpha; three-dimensional boxes get a wider
    margin so their tails decay fast enough for laptop-scale cutoffs.
    """
    if kind == "recurrence":
        return (3.4, 1.6) if n >= 3 else (2.9, 1.35)
    return (1.4, 0.6) if n >= 3 else (0.9, 0.35)


def _draw(family: str, n: int, rng: np.random.Generator, kind: str):
    if kind == "algebraic":
        m = n if family == "mg" else n + 1
        a = list(rng.uniform(-0.5, 0.5, m) + 1j * rng.uniform(-2, 2, m))
        b = list(rng.uniform(-0.5, 0.5, m) + 1j * rng.uniform(-2, 2, m))
        if family == "mg":
            return MGParams(a, b, complex(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-2, 2)))
        if family == "da":
            return DAParams(a, b)
        return GUSParams(a, b, complex(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-2, 2)))
    if family == "mg":
        a, b = _frac(rng, n), _frac(rng, n)
        low, margin = _mg_window(n, kind)
        k = math.ceil(low - 1 + sum(a + b, 0j).real)
        b = _shift_down(b, k)
        t = 1 - sum(a + b, 0j).real
        alpha = rng.uniform(margin, t - margin) + 1j * rng.uniform(-0.2, 0.2)
        p = MGParams(a, b, alpha)
        if _any_near_integer(_pair_poles(a, b) + [alpha, p.beta]):
            return None
        return p
    if family in ("da", "gus"):
        a, b = _frac(rng, n + 1), _frac(rng, n + 1)
        k = math.ceil(sum(a + b, 0j).real + 0.45)
        b = _shift_down(b, k)
        poles = _pair_poles(a, b)
        if family == "da":
            return None if _any_near_integer(poles) else DAParams(a, b)
        d = complex(rng.uniform(0, 1) + 1j * rng.uniform(-0.2, 0.2))
        p = GUSParams(a, b, d)
        extra = [d - p.a_sum, d + p.b_sum, p.total]
        return None if _any_near_integer(poles + extra) else p
    raise ValueError(f"unknown family {family!r}")


def sample_point(family: str, params, seed: int, tag: str = "", coords: int | None = None) -> ExponentPoint:
    """A generic base point away from the poles and zeros of the family's closed forms.

    ``coords`` overrides the dimension (the DA alternating sum needs n+1).
    """
    n = params.n if coords is None else coords
    rng = _rng(seed, family, "point", n, tag)
    for _ in range(10_000):
        xi = list(rng.uniform(0, 1, n) + 1j * rng.uniform(-0.3, 0.3, n))
        if family == "gus":
            full = xi + [params.d_exp - sum(xi, 0j)]
        else:
            full = xi
        bad = [x + b for x in full for b in params.beta_exp]
        bad += [x - a for x in full for a in params.alpha_exp]
        bad += [x - y for x, y in itertools.combinations(full, 2)]
        if family == "mg":
            bad.append(params.alpha + sum(xi, 0j) + params.b_sum)
        elif family == "da":
            bad.append(sum(xi, 0j) + sum(params.beta_exp, 0j))
        if not _any_near_integer(bad):
            return ExponentPoint(xi)
    raise RuntimeError("sampler found no admissible point")


def sample_algebraic_point(m: int, seed: int, tag: str = "") -> ExponentPoint:
    rng = _rng(seed, "algebraic-point", m, tag)
    return ExponentPoint(list(rng.uniform(-0.5, 0.5, m) + 1j * rng.uniform(-2, 2, m)))


# Identity checks and the dispatch table


def identity_tolerance(n: int, ctx: QContext) -> float:
    """identity_tol for n <= 2; a hundredfold looser for larger n."""
    return ctx.identity_tol if n <= 2 else 100 * ctx.identity_tol


def _sum_ctx(n: int, ctx: QContext) -> QContext:
    """Sums are driven a decade past the check tolerance: the shell tail
    estimate undercounts a geometric tail by about 1/(1-r)."""
    return ctx.with_(identity_tol=identity_tolerance(n, ctx) / 10)


@dataclass(frozen=True)
class CheckDef:
    check_id: str
    anchor: str
    suite: str
    runner: Callable
    dims: tuple


REGISTRY: dict[str, CheckDef] = {}


def _register(check_id: str, anchor: str, suite: str, dims=(1, 2, 3)):
    def deco(fn):
        REGISTRY[check_id] = CheckDef(check_id, anchor, suite, fn, tuple(dims))
        return fn

    return deco


class _Result:
    """What a runner hands back to the report builder."""

    def __init__(self, lhs, rhs, tol, echo, terms, rel_dev=None, extra_ok=True):
        self.lhs, self.rhs, self.tol, self.echo, self.terms = lhs, rhs, tol, echo, terms
        self.rel_dev, self.extra_ok = rel_dev, extra_ok


def _terms(*results: SumResult) -> int:
    return sum(r.terms for r in results)


def _mg_setup(cid, n, seed, ctx, kind="identity"):
    p = sample_params("mg", n, seed, ctx, kind, tag=cid)
    x = sample_point("mg", p, seed, tag=cid)
    return p, x, {"params": p.echo(), "x": x.xi, "q": ctx.q}


@_register("mg.theorem31", "mg-bilateral-sum-product", "mg")
def _mg_theorem(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.theorem31", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    r = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    return _Result(r.value, mg.mg_rhs(p, x, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("mg.truncated", "mg-truncated-sum-product", "mg")
def _mg_truncated(n, seed, ctx, workers):
    p, _, echo = _mg_setup("mg.truncated", n, seed, ctx)
    r = _require(mg.mg_truncated_lhs(p, _sum_ctx(n, ctx), workers))
    return _Result(r.value, mg.mg_truncated_rhs(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("mg.dual_truncated", "mg-dual-truncated-sum-product", "mg")
def _mg_dual_truncated(n, seed, ctx, workers):
    p, _, echo = _mg_setup("mg.dual_truncated", n, seed, ctx)
    r = _require(mg.mg_dual_truncated_lhs(p, _sum_ctx(n, ctx), workers))
    return _Result(r.value, mg.mg_dual_truncated_rhs(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("mg.connection_xa", "mg-connection-to-truncated", "mg")
def _mg_connection_xa(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.connection_xa", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    full = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    trunc = _require(mg.mg_truncated_lhs(p, sctx, workers))
    rhs = mg.mg_connection_to_a(p, x, ctx) * trunc.value
    return _Result(full.value, rhs, identity_tolerance(n, ctx), echo, _terms(full, trunc))


@_register("mg.connection_xb", "mg-connection-to-dual-truncated", "mg")
def _mg_connection_xb(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.connection_xb", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    full = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    trunc = _require(mg.mg_dual_truncated_lhs(p, sctx, workers))
    rhs = mg.mg_connection_to_b(p, x, ctx) * trunc.value
    return _Result(full.value, rhs, identity_tolerance(n, ctx), echo, _terms(full, trunc))


@_register("mg.macdonald_const", "mg-product-form-constant", "mg")
def _mg_macdonald(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.macdonald_const", n, seed, ctx)
    r = _require(mg.mg_macdonald_lhs(p, x, ctx=_sum_ctx(n, ctx), workers=workers))
    return _Result(r.value, mg.mg_macdonald_rhs(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("mg.reflective", "mg-reflection", "mg")
def _mg_reflective(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.reflective", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    full = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    dual = _require(mg.mg_dual_lhs(p, x.inverse(), ctx=sctx, workers=workers))
    rhs = mg.mg_reflection_factor(p, x, ctx) * dual.value
    return _Result(full.value, rhs, identity_tolerance(n, ctx), echo, _terms(full, dual))


@_register("mg.constant_from_truncated", "mg-constant-from-truncated", "mg")
def _mg_constant(n, seed, ctx, workers):
    """C = I(a) / (h(a) theta(q^alpha prod a prod b))."""
    p, _, echo = _mg_setup("mg.constant_from_truncated", n, seed, ctx)
    a = ExponentPoint(p.alpha_exp)
    r = _require(mg.mg_truncated_lhs(p, _sum_ctx(n, ctx), workers))
    lhs = r.value / (mg.mg_regularizer_h(p, a, ctx) * theta_exp(p.alpha + p.a_sum + p.b_sum, ctx))
    return _Result(lhs, mg.mg_constant(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("mg.swap_skew", "mg-alternating-in-base-point", "mg", dims=(2,))
def _mg_swap(n, seed, ctx, workers):
    p, x, echo = _mg_setup("mg.swap_skew", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    r = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    s = _require(mg.mg_lhs(p, x.swapped(0, 1), ctx=sctx, workers=workers))
    return _Result(s.value, -r.value, identity_tolerance(n, ctx), echo, _terms(r, s))


@_register("mg.shift_invariance", "mg-q-shift-invariance", "mg", dims=(1, 2))
def _mg_shift(n, seed, ctx, workers):
    """I(x) = I(q x_1) as bilateral sums; the allowance is ten tail estimates.

    The two sums evaluate every weight through different exponent arithmetic,
    so the allowance never drops below SHIFT_ROUNDING_FLOOR (relative).
    """
    p, x, echo = _mg_setup("mg.shift_invariance", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    r = _require(mg.mg_lhs(p, x, ctx=sctx, workers=workers))
    s = _require(mg.mg_lhs(p, x.shifted(0), ctx=sctx, workers=workers))
    tol = 10 * (r.tail_estimate + s.tail_estimate) / max(1.0, abs(r.value))
    echo["tail_allowance"] = tol
    tol = max(tol, SHIFT_ROUNDING_FLOOR)
    return _Result(s.value, r.value, tol, echo, _terms(r, s))


def _da_setup(cid, n, seed, ctx, coords=None):
    p = sample_params("da", n, seed, ctx, tag=cid)
    x = sample_point("da", p, seed, tag=cid, coords=coords)
    return p, x, {"params": p.echo(), "x": x.xi, "q": ctx.q}


@_register("da.theorem41", "da-alternating-sum-product", "da", dims=(1, 2))
def _da_theorem(n, seed, ctx, workers):
    p, xf, echo = _da_setup("da.theorem41", n, seed, ctx, coords=n + 1)
    r = _require(da.da_alternating_lhs(p, xf, ctx=_sum_ctx(n, ctx), workers=workers))
    return _Result(r.value, da.da_alternating_rhs(p, xf, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("da.evans", "da-truncated-alternating-sum-product", "da")
def _da_evans(n, seed, ctx, workers):
    p, _, echo = _da_setup("da.evans", n, seed, ctx)
    r = _require(da.da_evans_lhs(p, _sum_ctx(n, ctx), workers))
    return _Result(r.value, da.da_evans_rhs(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("da.dual_truncated", "da-regularized-dual-truncated", "da", dims=(1, 2))
def _da_dual_truncated(n, seed, ctx, workers):
    p, _, echo = _da_setup("da.dual_truncated", n, seed, ctx)
    i = int(_rng(seed, "da.dual_truncated.i", n).integers(0, n + 1))
    echo["i"] = i
    r = _require(da.da_dual_truncated_lhs(p, i, _sum_ctx(n, ctx), workers))
    lhs = r.value / da.da_dual_regularizer_hbar(p, da.truncation_point_b(p, i), ctx)
    return _Result(lhs, da.da_dual_truncated_rhs(p, i, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("da.reflective", "da-reflection", "da", dims=(1, 2))
def _da_reflective(n, seed, ctx, workers):
    p, x, echo = _da_setup("da.reflective", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    full = _require(da.da_lhs(p, x, ctx=sctx, workers=workers))
    dual = _require(da.da_dual_lhs(p, x.inverse(), ctx=sctx, workers=workers))
    rhs = da.da_reflection_factor(p, x, ctx) * dual.value
    return _Result(full.value, rhs, identity_tolerance(n, ctx), echo, _terms(full, dual))


@_register("da.mg_bridge", "da-dual-truncated-via-mg", "da", dims=(1, 2))
def _da_bridge(n, seed, ctx, workers):
    p, _, echo = _da_setup("da.mg_bridge", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    j = _require(da.da_dual_truncated_lhs(p, n, sctx, workers))
    i = _require(mg.mg_dual_truncated_lhs(da.da_bridge_mg_params(p), sctx, workers))
    return _Result(j.value, i.value * da.da_mg_bridge(p, ctx), identity_tolerance(n, ctx), echo,
                   _terms(j, i))


@_register("da.c0_reconstruction", "da-constant-from-regularized-duals", "da", dims=(1, 2))
def _da_c0(n, seed, ctx, workers):
    """C_0 from the theta-interpolation sum at the degenerate point x_i = 1/b_i (i <= n).

    Every regularised dual sum enters; at that point only the one at b with
    b_{n+1} removed survives.
    """
    p, x, echo = _da_setup("da.c0_reconstruction", n, seed, ctx, coords=n + 1)
    xfull = ExponentPoint([-b for b in p.beta_exp[:n]] + [x.xi[n]])
    echo["x"] = xfull.xi
    sctx = _sum_ctx(n, ctx)
    values, terms = [], 0
    for k in range(n + 1):
        r = _require(da.da_dual_truncated_lhs(p, k, sctx, workers))
        values.append(r.value / da.da_dual_regularizer_hbar(p, da.truncation_point_b(p, k), ctx))
        terms += r.terms
    lhs = da.da_c0_from_regularized(p, xfull, values, ctx)
    return _Result(lhs, da.da_constant_c0(p, ctx), identity_tolerance(n, ctx), echo, terms)


@_register("da.swap_skew", "da-alternating-in-base-point", "da", dims=(2,))
def _da_swap(n, seed, ctx, workers):
    p, x, echo = _da_setup("da.swap_skew", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    r = _require(da.da_lhs(p, x, ctx=sctx, workers=workers))
    s = _require(da.da_lhs(p, x.swapped(0, 1), ctx=sctx, workers=workers))
    return _Result(s.value, -r.value, identity_tolerance(n, ctx), echo, _terms(r, s))


def _gus_setup(cid, n, seed, ctx):
    p = sample_params("gus", n, seed, ctx, tag=cid)
    x = sample_point("gus", p, seed, tag=cid)
    return p, x, {"params": p.echo(), "x": x.xi, "q": ctx.q}


@_register("gus.theorem52", "gus-regularized-sum-product", "gus", dims=(1, 2))
def _gus_theorem(n, seed, ctx, workers):
    p, x, echo = _gus_setup("gus.theorem52", n, seed, ctx)
    r = _require(gus.gus_lhs(p, x, ctx=_sum_ctx(n, ctx), workers=workers))
    lhs = r.value / gus.gus_regularizer_h(p, x, ctx)
    return _Result(lhs, gus.gus_constant_rhs(p, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("gus.constancy", "gus-regularized-sum-constant", "gus", dims=(1, 2))
def _gus_constancy(n, seed, ctx, workers):
    p, x, echo = _gus_setup("gus.constancy", n, seed, ctx)
    y = sample_point("gus", p, seed, tag="gus.constancy.second")
    echo["y"] = y.xi
    sctx = _sum_ctx(n, ctx)
    r = _require(gus.gus_lhs(p, x, ctx=sctx, workers=workers))
    s = _require(gus.gus_lhs(p, y, ctx=sctx, workers=workers))
    lhs = r.value / gus.gus_regularizer_h(p, x, ctx)
    rhs = s.value / gus.gus_regularizer_h(p, y, ctx)
    return _Result(lhs, rhs, identity_tolerance(n, ctx), echo, _terms(r, s))


@_register("gus.milne_special", "gus-milne-case", "gus", dims=(1, 2))
def _gus_milne(n, seed, ctx, workers):
    p, _, echo = _gus_setup("gus.milne_special", n, seed, ctx)
    m = p.milne()
    echo["params"] = m.echo()
    r = _require(gus.gus_truncated_lhs(m, _sum_ctx(n, ctx), workers))
    return _Result(r.value, gus.gus_milne_rhs(m, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("gus.k0_macdonald", "gus-k0-constant", "gus", dims=(1, 2))
def _gus_k0(n, seed, ctx, workers):
    p, x, echo = _gus_setup("gus.k0_macdonald", n, seed, ctx)
    r = _require(gus.gus_macdonald_k0(p, x, ctx=_sum_ctx(n, ctx), workers=workers))
    return _Result(r.value, gus.gus_k0_rhs(n, ctx), identity_tolerance(n, ctx), echo, r.terms)


@_register("gus.factorization", "gus-theta-factorization", "gus", dims=(1, 2))
def _gus_factorization(n, seed, ctx, workers):
    p, x, echo = _gus_setup("gus.factorization", n, seed, ctx)
    sctx = _sum_ctx(n, ctx)
    r = _require(gus.gus_lhs(p, x, ctx=sctx, workers=workers))
    t = _require(gus.gus_tilde_lhs(p, x, ctx=sctx, workers=workers))
    return _Result(r.value, gus.gus_k_factor(p, x, ctx) * t.value, identity_tolerance(n, ctx), echo,
                   _terms(r, t))


@_register("gus.factorization_pointwise", "gus-theta-factorization", "gus", dims=(1, 2))
def _gus_factorization_pointwise(n, seed, ctx, workers):
    """Phi = k Phi-tilde at 100 lattice points of the cycle; reports the worst point."""
    p, x, echo = _gus_setup("gus.factorization_pointwise", n, seed, ctx)
    rng = _rng(seed, "gus.factorization_pointwise.nu", n)
    worst, worst_pair = -1.0, (0j, 0j)
    for _ in range(100):
        nu = rng.integers(-4, 5, n)
        z = ExponentPoint([xi + int(k) for xi, k in zip(x.xi, nu)])
        lhs = gus.gus_weight(p, z, ctx)
        rhs = gus.gus_k_factor(p, z, ctx) * gus.gus_tilde_weight(p, z, ctx)
        dev = abs(lhs - rhs) / max(1e-300, abs(rhs))
        if dev > worst:
            worst, worst_pair = dev, (lhs, rhs)
    return _Result(worst_pair[0], worst_pair[1], POLY_TOL, echo, 100, rel_dev=worst)


# Polynomial lemmas and nabla vanishing as dispatchable checks


@_register("mg.poly_expansion", "mg-skew-nabla-expansion", "lemmas", dims=(1, 2, 3, 4))
def _mg_poly(n, seed, ctx, workers):
    p = sample_params("mg", n, seed, ctx, "algebraic", tag="mg.poly")
    r = check_poly_expansion_mg(p, sample_algebraic_point(n, seed, "mg.poly"), ctx, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("da.poly_expansion", "da-skew-nabla-expansion", "lemmas", dims=(1, 2, 3, 4))
def _da_poly(n, seed, ctx, workers):
    p = sample_params("da", n, seed, ctx, "algebraic", tag="da.poly")
    r = check_poly_expansion_da(p, sample_algebraic_point(n, seed, "da.poly"), ctx, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("gus.poly_expansion", "gus-skew-nabla-expansion", "lemmas", dims=(1, 2, 3, 4))
def _gus_poly(n, seed, ctx, workers):
    p = sample_params("gus", n, seed, ctx, "algebraic", tag="gus.poly")
    r = check_poly_expansion_gus(p, sample_algebraic_point(n, seed, "gus.poly"), ctx, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("mg.nabla_vanishing", "mg-nabla-sum-vanishes", "lemmas", dims=(1, 2))
def _mg_nabla(n, seed, ctx, workers):
    p, x, _ = _mg_setup("mg.nabla_vanishing", n, seed, ctx, kind="recurrence")
    r = check_nabla_vanishing("mg", p, x, ctx=ctx, workers=workers, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("da.nabla_vanishing", "da-nabla-sum-vanishes", "lemmas", dims=(1, 2))
def _da_nabla(n, seed, ctx, workers):
    p = sample_params("da", n, seed, ctx, tag="da.nabla_vanishing")
    x = da.truncation_point_b(p, n)
    r = check_nabla_vanishing("da", p, x, ctx=ctx, workers=workers, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("gus.nabla_vanishing", "gus-nabla-sum-vanishes", "lemmas", dims=(1, 2))
def _gus_nabla(n, seed, ctx, workers):
    p, x, _ = _gus_setup("gus.nabla_vanishing", n, seed, ctx)
    r = check_nabla_vanishing("gus", p, x, ctx=ctx, workers=workers, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


# Recurrences as dispatchable checks


def _pick(seed, cid, n, high):
    return int(_rng(seed, cid, "index", n).integers(0, high))


@_register("mg.recurrence", "mg-alpha-recurrence", "mg")
def _mg_rec(n, seed, ctx, workers):
    p, x, _ = _mg_setup("mg.recurrence", n, seed, ctx, kind="recurrence")
    r = check_recurrence_mg(p, x, ctx=_sum_ctx(n, ctx), workers=workers, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


@_register("mg.dual_recurrence", "mg-dual-alpha-recurrence", "mg")
def _mg_dual_rec(n, seed, ctx, workers):
    p, x, _ = _mg_setup("mg.dual_recurrence", n, seed, ctx, kind="recurrence")
    r = check_recurrence_mg(p, x, ctx=_sum_ctx(n, ctx), workers=workers, dual=True, seed=seed)
    return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)


def _da_rec_runner(cid, shift, regularized):
    def run(n, seed, ctx, workers):
        p = sample_params("da", n, seed, ctx, tag=cid)
        j, i = _pick(seed, cid, n, n + 1), _pick(seed, cid + ".i", n, n + 1)
        r = check_recurrence_da(p, ctx, j=j, i=i, shift=shift, regularized=regularized,
                                workers=workers, seed=seed)
        return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)

    return run


def _gus_rec_runner(cid, shift, regularized):
    def run(n, seed, ctx, workers):
        p, x, _ = _gus_setup(cid, n, seed, ctx)
        j = _pick(seed, cid, n, n + 1)
        r = check_recurrence_gus(p, x, ctx=ctx, j=j, shift=shift, regularized=regularized,
                                 workers=workers, seed=seed)
        return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms)

    return run


for _shift_name in ("a", "b"):
    for _reg in (False, True):
        _suffix = "_regularized" if _reg else ""
        _cid = f"da.recurrence_{_shift_name}{_suffix}"
        _register(_cid, f"da-{_shift_name}-shift-recurrence{_suffix}", "da")(
            _da_rec_runner(_cid, _shift_name, _reg))
        _cid = f"gus.recurrence_{_shift_name}{_suffix}"
        _register(_cid, f"gus-{_shift_name}-shift-recurrence{_suffix}", "gus", dims=(1, 2))(
            _gus_rec_runner(_cid, _shift_name, _reg))


# Asymptotics as dispatchable checks


def _asym_runner(family, direction):
    def run(n, seed, ctx, workers):
        cid = f"{family}.asymptotic_{direction}"
        p = sample_params(family, n, seed, ctx, tag=cid)
        r = check_asymptotic(family, p, direction, DEFAULT_N_LIST, ctx, workers, seed)
        return _Result(r.lhs, r.rhs, r.tol, r.params_echo, r.terms, rel_dev=r.rel_dev,
                       extra_ok=_decreasing(r.params_echo["deviations"]))

    return run


def _decreasing(devs) -> bool:
    return all(b < a for a, b in zip(devs, devs[1:]))


for _family, _dirs in ASYMPTOTIC_DIRECTIONS.items():
    for _dir in _dirs:
        _register(f"{_family}.asymptotic_{_dir}", f"{_family}-leading-asymptotics", "asymptotics",
                  dims=(1, 2) if _family != "mg" else (1, 2, 3))(_asym_runner(_family, _dir))


# Scalar kernel checks


@_register("core.theta_quasi_period", "theta-quasi-periodicity", "core", dims=(1,))
def _core_theta(n, seed, ctx, workers):
    rng = _rng(seed, "core.theta")
    a = complex(rng.uniform(0.2, 3) * np.exp(1j * rng.uniform(-np.pi, np.pi)))
    return _Result(theta(ctx.q * a, ctx), -theta(a, ctx) / a, POLY_TOL, {"a": a, "q": ctx.q}, 1)


@_register("core.qpoch_split", "qpoch-finite-infinite-split", "core", dims=(1,))
def _core_qpoch(n, seed, ctx, workers):
    """(a)_inf = (a)_N (q^N a)_inf for a drawn N, including negative N."""
    rng = _rng(seed, "core.qpoch")
    a = complex(rng.uniform(0.2, 3) * np.exp(1j * rng.uniform(-np.pi, np.pi)))
    N = int(rng.integers(-6, 12))
    lhs = qpoch_inf(a, ctx)
    rhs = qpoch_n(a, N, ctx) * qpoch_inf(a * ctx.q ** N, ctx)
    return _Result(lhs, rhs, POLY_TOL, {"a": a, "N": N, "q": ctx.q}, 1)


@_register("core.qbinomial", "scalar-q-binomial", "core", dims=(1,))
def _core_qbinomial(n, seed, ctx, workers):
    """sum_k (a)_k / (q)_k t^k = (a t)_inf / (t)_inf with plain recursive terms."""
    rng = _rng(seed, "core.qbinomial")
    a = complex(rng.uniform(0.2, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi)))
    t = complex(rng.uniform(0.05, 0.8) * np.exp(1j * rng.uniform(-np.pi, np.pi)))
    term, terms, k = 1.0 + 0j, [], 0
    while abs(term) > ctx.product_tol or k < 4:
        terms.append(term)
        term *= (1 - a * ctx.q ** k) / (1 - ctx.q ** (k + 1)) * t
        k += 1
    lhs = complex(math.fsum(c.real for c in terms), math.fsum(c.imag for c in terms))
    rhs = qpoch_inf(a * t, ctx) / qpoch_inf(t, ctx)
    return _Result(lhs, rhs, POLY_TOL, {"a": a, "t": t, "q": ctx.q}, len(terms))


SUITES = ("mg", "da", "gus", "core", "lemmas", "asymptotics")


def checks_in_suite(suite: str) -> list[str]:
    if suite == "all":
        return sorted(REGISTRY)
    return sorted(cid for cid, d in REGISTRY.items() if d.suite == suite)


def split_check_id(check_id: str) -> tuple[str, int | None]:
    """'mg.theorem31.n2' -> ('mg.theorem31', 2)."""
    head, _, tail = check_id.rpartition(".")
    if head and tail.startswith("n") and tail[1:].isdigit():
        return head, int(tail[1:])
    return check_id, None


def check_identity(check_id: str, ctx: QContext = QContext(), seed: int = 0, n: int | None = None,
                   workers: int = 1) -> CheckReport:
    """Run one registered check; the dimension comes from a '.nK' suffix or ``n``."""
    started = time.perf_counter()
    base, suffix_n = split_check_id(check_id)
    if base not in REGISTRY:
        raise KeyError(f"unknown check id {check_id!r}")
    definition = REGISTRY[base]
    n = suffix_n if suffix_n is not None else (n if n is not None else definition.dims[0])
    if n not in definition.dims:
        raise ValueError(f"{base} is defined for n in {definition.dims}, not {n}")
    res = definition.runner(n, seed, ctx, workers)
    return _report(f"{base}.n{n}", definition.anchor, res.lhs, res.rhs, res.tol, seed, res.echo,
                   res.terms, started, rel_dev=res.rel_dev, extra_ok=res.extra_ok)
