"""Discretized probability distributions on a uniform time grid.

Every distribution shares one global grid: bin ``k`` is centred on time
``k * bin_width`` and its mass is taken to be spread uniformly over
``[t_k - bin_width/2, t_k + bin_width/2]``.  The CDF is therefore the piecewise
linear curve through ``(t_k + bin_width/2, C_k)`` where ``C_k`` is the running
prefix sum of the masses.  Convolution and the statistical maximum operate on
the bin masses directly, so values on the same grid never need resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRIM_EPS = 1e-15
_GRID_RTOL = 1e-9


class GridMismatchError(ValueError):
    """Raised when two distributions live on different grids."""


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    bin_width: float
    start: int
    masses: np.ndarray

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        m = np.asarray(self.masses, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("masses must be a non-empty 1-D array")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def end(self) -> int:
        """Index of the last occupied bin (inclusive)."""
        return self.start + self.masses.size - 1

    @property
    def n_bins(self) -> int:
        return self.masses.size

    def times(self) -> np.ndarray:
        return (self.start + np.arange(self.masses.size)) * self.bin_width

    def cdf(self) -> np.ndarray:
        """CDF value reached at the right edge of each occupied bin."""
        c = self.__dict__.get("_cdf")
        if c is None:
            c = np.cumsum(self.masses)
            c /= c[-1]
            c.setflags(write=False)
            object.__setattr__(self, "_cdf", c)
        return c

    def mean(self) -> float:
        return float(np.dot(self.masses, self.times()))

    def std(self) -> float:
        t = self.times()
        mu = np.dot(self.masses, t)
        return float(np.sqrt(max(np.dot(self.masses, (t - mu) ** 2), 0.0)))

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def same_as(self, other: "DiscreteDist") -> bool:
        """Bit-level equality (same grid, same support, same masses)."""
        return (
            self.start == other.start
            and self.bin_width == other.bin_width
            and self.masses.size == other.masses.size
            and np.array_equal(self.masses, other.masses)
        )

    def to_csv(self) -> str:
        rows = ["time,mass"]
        rows += [f"{t:.9g},{m:.17g}" for t, m in zip(self.times(), self.masses)]
        return "\n".join(rows) + "\n"

    def __repr__(self):
        return (
            f"DiscreteDist(bin_width={self.bin_width!r}, start={self.start}, "
            f"n_bins={self.masses.size}, mean={self.mean():.6g})"
        )


def _make(bin_width: float, start: int, masses: np.ndarray) -> DiscreteDist:
    # internal constructor for already-validated float64 arrays
    d = object.__new__(DiscreteDist)
    masses.setflags(write=False)
    object.__setattr__(d, "bin_width", bin_width)
    object.__setattr__(d, "start", start)
    object.__setattr__(d, "masses", masses)
    return d


def from_masses(masses, start: int, bin_width: float, eps: float = TRIM_EPS) -> DiscreteDist:
    """Trim negligible leading/trailing bins and renormalize to unit mass."""
    m = np.asarray(masses, dtype=np.float64)
    if m[0] < eps or m[-1] < eps:
        keep = np.flatnonzero(m >= eps)
        if keep.size == 0:
            raise ValueError("distribution has no mass above the trim threshold")
        lo, hi = keep[0], keep[-1]
        m = m[lo:hi + 1]
        start = start + int(lo)
    return _make(bin_width, int(start), m / m.sum())


def point_mass(time: float, bin_width: float) -> DiscreteDist:
    return DiscreteDist(bin_width, int(round(time / bin_width)), np.ones(1))


def _check_grid(a: DiscreteDist, b: DiscreteDist) -> None:
    if a.bin_width != b.bin_width and not math.isclose(
        a.bin_width, b.bin_width, rel_tol=_GRID_RTOL
    ):
        raise GridMismatchError(
            f"bin_width mismatch: {a.bin_width!r} vs {b.bin_width!r}"
        )


def convolve(a: DiscreteDist, d: DiscreteDist) -> DiscreteDist:
    """Distribution of the sum of two independent variables."""
    _check_grid(a, d)
    if d.masses.size == 1:
        return _make(a.bin_width, a.start + d.start, a.masses)
    if a.masses.size == 1:
        return _make(a.bin_width, a.start + d.start, d.masses)
    return from_masses(np.convolve(a.masses, d.masses), a.start + d.start, a.bin_width)


def stat_max(a: DiscreteDist, b: DiscreteDist) -> DiscreteDist:
    """Distribution of max(X, Y) for independent X, Y: the CDFs multiply."""
    _check_grid(a, b)
    # Disjoint (or touching) supports: the later operand's CDF is unchanged.
    if a.end <= b.start:
        return b
    if b.end <= a.start:
        return a
    lo = max(a.start, b.start)
    hi = max(a.end, b.end)
    prod = _cdf_on(a, lo, hi) * _cdf_on(b, lo, hi)
    m = np.empty_like(prod)
    m[0] = prod[0]
    np.subtract(prod[1:], prod[:-1], out=m[1:])
    return from_masses(m, lo, a.bin_width)


def _cdf_on(a: DiscreteDist, lo: int, hi: int) -> np.ndarray:
    """CDF of ``a`` sampled on bins lo..hi (0 before support, 1 after)."""
    out = np.ones(hi - lo + 1)
    c = a.cdf()
    i0 = a.start - lo
    if i0 >= 0:
        out[:i0] = 0.0
        n = min(c.size, out.size - i0)
        out[i0:i0 + n] = c[:n]
    else:
        n = min(c.size + i0, out.size)
        if n > 0:
            out[:n] = c[-i0:-i0 + n]
    return out


def shift(a: DiscreteDist, d: float) -> DiscreteDist:
    """Translate ``a`` by ``d`` in time; ``d`` is quantized to whole bins toward zero."""
    q = d / a.bin_width
    nearest = round(q)
    k = int(nearest) if abs(q - nearest) < 1e-9 else int(q)
    if k == 0:
        return a
    return DiscreteDist(a.bin_width, a.start + k, a.masses)


def _quantiles(a: DiscreteDist, levels: np.ndarray, side: str = "left") -> np.ndarray:
    c = a.cdf()
    bw = a.bin_width
    k = np.searchsorted(c, levels, side=side)
    beyond = k >= c.size
    k = np.minimum(k, c.size - 1)
    prev = np.where(k > 0, c[np.maximum(k - 1, 0)], 0.0)
    width = c[k] - prev
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(width > 0, (levels - prev) / width, 1.0)
    frac = np.clip(frac, 0.0, 1.0)
    t = (a.start + k - 0.5 + frac) * bw
    return np.where(beyond, (a.end + 0.5) * bw, t)


def percentile(a: DiscreteDist, p: float) -> float:
    """Smallest time at which the interpolated CDF reaches ``p``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return float(_quantiles(a, np.array([p]))[0])


def delta_p(a: DiscreteDist, a_pert: DiscreteDist, p: float) -> float:
    """Improvement of the p-percentile: positive when ``a_pert`` is earlier."""
    return percentile(a, p) - percentile(a_pert, p)


def max_delta(a: DiscreteDist, a_pert: DiscreteDist) -> float:
    """Largest percentile improvement over all p in (0, 1).

    Both quantile functions are piecewise linear with breakpoints at the CDF
    levels of either operand, so the supremum is attained at one of those
    levels (from the left or the right, where zero-mass bins make the
    quantile jump) or in the limits p -> 0+ and p -> 1-.
    """
    _check_grid(a, a_pert)
    bw = a.bin_width
    best = max((a.start - a_pert.start) * bw, (a.end - a_pert.end) * bw)
    levels = np.concatenate((a.cdf()[:-1], a_pert.cdf()[:-1]))
    levels = levels[(levels > 0.0) & (levels < 1.0)]
    if levels.size:
        for side in ("left", "right"):
            d = _quantiles(a, levels, side) - _quantiles(a_pert, levels, side)
            best = max(best, float(d.max()))
    return float(best)
