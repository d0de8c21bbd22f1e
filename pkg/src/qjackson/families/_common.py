"""Shared machinery for family weights: tabulated log factors and Vandermondes."""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from ..qcore import QContext, log_qpoch_exp

LogLine = Callable[[np.ndarray], np.ndarray]


def log_poch_line(offset: complex, sign: int, nu: np.ndarray, ctx: QContext) -> np.ndarray:
    """log (q**(offset + sign*nu))_inf along an integer array nu.

    ``offset`` is summed first so that an offset which is exactly an integer
    keeps every exponent an exact integer (truncation zeros stay exact).
    """
    return log_qpoch_exp(offset + sign * nu.astype(float), ctx)


def vandermonde(z: np.ndarray) -> np.ndarray:
    """prod_{i<j} (z_j - z_i) along the last axis."""
    m = z.shape[-1]
    out = np.ones(z.shape[:-1], dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            out = out * (z[..., j] - z[..., i])
    return out


def vandermonde_sign(m: int) -> int:
    """Sign relating prod_{i<j}(z_i - z_j) to prod_{i<j}(z_j - z_i)."""
    return -1 if (m * (m - 1) // 2) % 2 else 1


class ProductSummand:
    """Summand exp(sum of tabulated logs) * cross(z).

    Logs come from per-coordinate lines (functions of nu_i), an optional line in
    s = nu_1 + ... + nu_n, and optional pair lines in nu_i - nu_j.  The point z
    has coordinates q**(xi_i + nu_i), extended by q**(extra - s) when
    ``extra_exp`` is given (the balanced coordinate of the A_n family).
    """

    def __init__(
        self,
        xi: Sequence[complex],
        line_logs: Sequence[LogLine],
        ctx: QContext,
        *,
        sum_log: LogLine | None = None,
        pair_logs: Mapping[tuple[int, int], LogLine] | None = None,
        extra_exp: complex | None = None,
        cross: Callable[[np.ndarray], np.ndarray] | None = None,
        cross_log: Callable[[np.ndarray], np.ndarray] | None = None,
        log_shift: complex = 0.0,
    ):
        self.xi = [complex(c) for c in xi]
        self.n = len(self.xi)
        self.line_logs = list(line_logs)
        self.sum_log = sum_log
        self.pair_logs = dict(pair_logs or {})
        self.extra_exp = extra_exp
        self.cross = cross
        self.cross_log = cross_log
        self.log_shift = complex(log_shift)
        self.ctx = ctx
        self._bounds = None

    def prepare(self, lo: int, hi: int) -> None:
        if self._bounds == (lo, hi):
            return
        lq = self.ctx.log_q
        nu = np.arange(lo, hi + 1)
        self._lines = [f(nu) for f in self.line_logs]
        self._z = [np.exp((x + nu) * lq) for x in self.xi]
        n = self.n
        s = np.arange(n * lo, n * hi + 1)
        self._s_lo = n * lo
        self._sum = self.sum_log(s) if self.sum_log is not None else None
        self._zextra = (
            np.exp((self.extra_exp - s) * lq) if self.extra_exp is not None else None
        )
        d = np.arange(lo - hi, hi - lo + 1)
        self._d_lo = lo - hi
        self._pairs = {ij: f(d) for ij, f in self.pair_logs.items()}
        self._lo = lo
        self._bounds = (lo, hi)

    def __call__(self, nu: np.ndarray) -> np.ndarray:
        if self._bounds is None:
            lo, hi = int(nu.min()), int(nu.max())
            self.prepare(lo, hi)
        lo = self._lo
        idx = nu - lo
        logs = np.full(nu.shape[0], -self.log_shift, dtype=complex)
        for i in range(self.n):
            logs = logs + self._lines[i][idx[:, i]]
        s = nu.sum(axis=1)
        if self._sum is not None:
            logs = logs + self._sum[s - self._s_lo]
        for (i, j), table in self._pairs.items():
            logs = logs + table[nu[:, i] - nu[:, j] - self._d_lo]
        if self.cross_log is not None:
            logs = logs + self.cross_log(nu)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.exp(logs)
        vals = np.where(np.isneginf(logs.real), 0.0 + 0j, vals)
        if self.cross is not None:
            cols = [self._z[i][idx[:, i]] for i in range(self.n)]
            if self._zextra is not None:
                cols.append(self._zextra[s - self._s_lo])
            vals = vals * self.cross(np.stack(cols, axis=1))
        return vals
