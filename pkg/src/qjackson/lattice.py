"""Multi-index Jackson sums over N^n (fan) and Z^n (box).

Summands are vectorised: they receive an integer array of shape (k, n) of
lattice indices and return k complex values.  A summand may expose a
``prepare(lo, hi)`` method, called once per cutoff with the per-coordinate
index bounds, so that it can tabulate one-dimensional factors.

Reduction is exact-rounded (``math.fsum``) per slice of the leading index and
then over slices in index order.  Slices are the unit of work, so the result
does not depend on how slices are distributed over workers.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .qcore import ExponentPoint, NonFinite, QContext


class NotConverged(ArithmeticError):
    """The outermost shell stayed above threshold up to ctx.max_terms."""


# Geometric decay makes cutoffs beyond this pointless; it also bounds table sizes.
MAX_CUTOFF = 1024


class Cycle(enum.Enum):
    FAN = "fan"
    BOX = "box"


@dataclass(frozen=True)
class SumSpec:
    n: int
    cycle: Cycle
    cutoff: int
    adaptive: bool = True

    def __post_init__(self):
        if self.n < 1 or self.cutoff < 1:
            raise ValueError("dimension and cutoff must be positive")

    @property
    def bounds(self) -> tuple[int, int]:
        return (0, self.cutoff) if self.cycle is Cycle.FAN else (-self.cutoff, self.cutoff)

    def terms(self) -> int:
        lo, hi = self.bounds
        return (hi - lo + 1) ** self.n

    def with_cutoff(self, m: int) -> "SumSpec":
        return SumSpec(self.n, self.cycle, m, self.adaptive)


@dataclass(frozen=True)
class SumResult:
    value: complex
    tail_estimate: float
    terms: int
    converged: bool
    cutoff: int = 0


Summand = Callable[[np.ndarray], np.ndarray]


def shell_partition(spec: SumSpec, workers: int) -> list[range]:
    """Split the leading-index range into at most ``workers`` contiguous blocks."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    lo, hi = spec.bounds
    count = hi - lo + 1
    k = min(workers, count)
    base, extra = divmod(count, k)
    blocks, start = [], lo
    for b in range(k):
        size = base + (1 if b < extra else 0)
        blocks.append(range(start, start + size))
        start += size
    return blocks


def _tail_grid(n: int, lo: int, hi: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = [np.arange(lo, hi + 1)] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def _slice_sums(f: Summand, lead: int, rest: np.ndarray, lo: int, hi: int, fan: bool):
    nu = np.empty((rest.shape[0], rest.shape[1] + 1), dtype=np.int64)
    nu[:, 0] = lead
    nu[:, 1:] = rest
    vals = np.asarray(f(nu), dtype=complex).reshape(-1)
    if not np.all(np.isfinite(vals)):
        raise NonFinite(f"summand is not finite on the slice nu_1={lead}")
    edges = (hi,) if fan else (lo, hi)
    if lead in edges:
        shell = vals
    else:
        on_shell = np.any(rest == hi, axis=1)
        if not fan:
            on_shell |= np.any(rest == lo, axis=1)
        shell = vals[on_shell]
    return (
        math.fsum(vals.real.tolist()),
        math.fsum(vals.imag.tolist()),
        math.fsum(np.abs(shell).tolist()),
    )


def _fixed_sum(f: Summand, spec: SumSpec, workers: int):
    lo, hi = spec.bounds
    if hasattr(f, "prepare"):
        f.prepare(lo, hi)
    rest = _tail_grid(spec.n - 1, lo, hi)
    fan = spec.cycle is Cycle.FAN
    blocks = shell_partition(spec, workers)

    def run(block):
        return [_slice_sums(f, lead, rest, lo, hi, fan) for lead in block]

    if workers == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    slices = list(itertools.chain.from_iterable(parts))
    re = math.fsum(s[0] for s in slices)
    im = math.fsum(s[1] for s in slices)
    shell = math.fsum(s[2] for s in slices)
    return complex(re, im), shell


def jackson_sum(
    f: Summand,
    base: ExponentPoint | None,
    spec: SumSpec,
    ctx: QContext,
    workers: int = 1,
    rel_floor: float = 1.0,
) -> SumResult:
    """(1-q)^n times the lattice sum of ``f`` over the fan or box of ``spec``.

    The tail estimate is (1-q)^n times the sum of |f| over the outermost L-inf
    shell.  Adaptive sums double the cutoff until that estimate is at most
    identity_tol * max(rel_floor, |value|) / 10.  ``rel_floor=0`` asks for a
    purely relative criterion.
    """
    if base is not None and base.n != spec.n:
        raise ValueError("base point and sum spec disagree on the dimension")
    scale = (1.0 - ctx.q) ** spec.n
    adaptive = spec.adaptive and ctx.adaptive
    current = spec
    while True:
        if current.terms() > ctx.max_terms or current.cutoff > MAX_CUTOFF:
            if current is spec:
                raise NotConverged(f"cutoff {current.cutoff} already exceeds max_terms")
            raise NotConverged(
                f"tail {tail:.3e} above threshold at cutoff {current.cutoff // 2}"
            )
        raw, shell = _fixed_sum(f, current, workers)
        value = scale * raw
        tail = scale * shell
        converged = tail <= ctx.identity_tol * max(rel_floor, abs(value)) / 10
        if converged or not adaptive:
            return SumResult(value, tail, current.terms(), converged, current.cutoff)
        current = current.with_cutoff(2 * current.cutoff)
