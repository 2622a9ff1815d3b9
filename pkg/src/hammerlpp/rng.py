"""Seeded, stream-keyed randomness and Poisson point-process sampling.

Every stochastic routine in this package draws from a :class:`RandomStream`,
a counter-based generator keyed by ``(seed, stream_id)``.  The stream id
enters the generator key directly (no re-seed hash chain), so distinct ids
give statistically independent sequences that can be consumed in any order
or in parallel and still reproduce bit-identically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RandomStream",
    "PointSet1D",
    "PointSet2D",
    "make_stream",
    "derive_stream_id",
    "sample_ppp_1d",
    "sample_ppp_2d",
    "sample_exponential",
]

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    """One round of the splitmix64 output mixer (pure 64-bit integer map)."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_stream_id(*parts: int | str) -> int:
    """Fold experiment labels and replicate indices into a 64-bit stream id.

    Strings are hashed bytewise, integers enter verbatim; the fold is a
    splitmix64 chain, so (experiment, replicate) pairs map to ids that
    collide only with probability ~2^-64.
    """
    acc = 0
    for part in parts:
        if isinstance(part, str):
            for b in part.encode("utf-8"):
                acc = _splitmix64(acc ^ b)
        else:
            acc = _splitmix64(acc ^ (int(part) & _MASK))
    return acc


class RandomStream:
    """Counter-based random stream keyed by (seed, stream_id).

    Wraps a Philox bit generator whose 128-bit key is the pair
    ``(seed, stream_id)``.  A stream is single-owner: it holds mutable
    counter state and must not be shared between concurrent workers.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK
        self.stream_id = int(stream_id) & _MASK
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def child(self, *tags: int | str) -> "RandomStream":
        """Derive an independent stream; same (seed, tags) -> same child."""
        return RandomStream(self.seed, derive_stream_id(self.stream_id, *tags))

    # -- primitive draws ---------------------------------------------------

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(int(n))

    def uniform(self) -> float:
        return float(self._gen.random())

    def exponential(self, rate: float, n: int | None = None):
        if rate <= 0:
            raise ValueError(f"exponential rate must be > 0, got {rate}")
        if n is None:
            return float(self._gen.exponential(1.0 / rate))
        return self._gen.exponential(1.0 / rate, int(n))

    def poisson(self, mean: float) -> int:
        if mean < 0:
            raise ValueError(f"Poisson mean must be >= 0, got {mean}")
        return int(self._gen.poisson(mean))

    def integers(self, low: int, high: int, n: int | None = None):
        return self._gen.integers(low, high, size=n)


def make_stream(seed: int, stream_id: int = 0) -> RandomStream:
    """Construct the deterministic stream for (seed, stream_id)."""
    return RandomStream(seed, stream_id)


@dataclass(frozen=True, eq=False)
class PointSet1D:
    """Sorted point configuration on a closed interval."""

    coordinates: np.ndarray
    window: tuple[float, float]

    def __post_init__(self):
        c = np.asarray(self.coordinates, dtype=np.float64)
        object.__setattr__(self, "coordinates", c)
        lo, hi = self.window
        if lo > hi:
            raise ValueError(f"malformed window {self.window}")
        if c.size and (np.any(np.diff(c) < 0)):
            raise ValueError("coordinates must be non-decreasing")
        if c.size and (c[0] < lo or c[-1] > hi):
            raise ValueError("coordinates outside window")

    def __len__(self):
        return int(self.coordinates.size)

    def count_in(self, a: float, b: float) -> int:
        """Number of points in the half-open interval (a, b]."""
        c = self.coordinates
        return int(np.searchsorted(c, b, side="right") - np.searchsorted(c, a, side="right"))


@dataclass(frozen=True, eq=False)
class PointSet2D:
    """Planar point configuration in an axis-aligned rectangle.

    ``points`` is an (n, 2) array of (x, t) pairs sorted by t then x;
    ``window`` is (x0, x1, t0, t1).
    """

    points: np.ndarray
    window: tuple[float, float, float, float]

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        x0, x1, t0, t1 = self.window
        if x0 > x1 or t0 > t1:
            raise ValueError(f"malformed window {self.window}")
        if p.size:
            if p[:, 0].min() < x0 or p[:, 0].max() > x1:
                raise ValueError("points outside window (space)")
            if p[:, 1].min() < t0 or p[:, 1].max() > t1:
                raise ValueError("points outside window (time)")
            order = np.lexsort((p[:, 0], p[:, 1]))
            p = p[order]
        object.__setattr__(self, "points", p)

    def __len__(self):
        return int(self.points.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def t(self) -> np.ndarray:
        return self.points[:, 1]


def sample_ppp_1d(s: RandomStream, rate: float, window: tuple[float, float]) -> PointSet1D:
    """Homogeneous Poisson point process on an interval.

    Count ~ Poisson(rate * |window|), positions i.i.d. uniform given the
    count, returned sorted.  ``rate == 0`` or a zero-length window give the
    empty configuration.
    """
    if rate < 0:
        raise ValueError(f"PPP rate must be >= 0, got {rate}")
    lo, hi = window
    if lo > hi:
        raise ValueError(f"malformed window {window}")
    length = hi - lo
    n = s.poisson(rate * length)
    coords = np.sort(lo + length * s.uniforms(n)) if n else np.empty(0)
    return PointSet1D(coords, (float(lo), float(hi)))


def sample_ppp_2d(
    s: RandomStream, rate: float, window: tuple[float, float, float, float]
) -> PointSet2D:
    """Homogeneous Poisson point process on a rectangle (x0, x1, t0, t1)."""
    if rate < 0:
        raise ValueError(f"PPP rate must be >= 0, got {rate}")
    x0, x1, t0, t1 = window
    if x0 > x1 or t0 > t1:
        raise ValueError(f"malformed window {window}")
    area = (x1 - x0) * (t1 - t0)
    n = s.poisson(rate * area)
    if n:
        xs = x0 + (x1 - x0) * s.uniforms(n)
        ts = t0 + (t1 - t0) * s.uniforms(n)
        pts = np.column_stack([xs, ts])
    else:
        pts = np.empty((0, 2))
    return PointSet2D(pts, (float(x0), float(x1), float(t0), float(t1)))


def sample_exponential(s: RandomStream, rate: float, n: int | None = None):
    """Exponential draw(s) with the given rate (mean 1/rate)."""
    return s.exponential(rate, n)
