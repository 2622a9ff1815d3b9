"""Stationary Hammersley realizations on a finite space-time box.

A realization is encoded by its boundary data: particles on the bottom edge
(sources, rate lambda), capture marks on the left edge (sinks, rate
1/lambda) and a unit-rate planar Poisson set of jump marks (clocks) in the
interior.  Two views of the same evolution are provided:

  * :class:`LppField` — the increasing-path optimization L(x, t) over the
    boundary data, evaluated lazily per query;
  * :class:`ParticleHistory` — the event-driven particle dynamics.

Counting-measure queries against the two views agree exactly, which is the
workbench's central self-check.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rng import PointSet1D, PointSet2D, RandomStream, sample_ppp_1d, sample_ppp_2d

__all__ = [
    "SpaceTimeBox",
    "BoxEnvironment",
    "LppField",
    "ParticleHistory",
    "ExitPointRecord",
    "sample_box_environment",
    "lis_count",
    "lpp_field",
    "evolve_particles",
    "measure_query",
    "exit_point",
    "check_no_sink_restriction",
    "environment_to_json",
    "environment_from_json",
]


@dataclass(frozen=True)
class SpaceTimeBox:
    x0: float
    x1: float
    t0: float
    t1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.t0 > self.t1:
            raise ValueError(f"degenerate box orientation: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.t1 - self.t0

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x: float, t: float) -> bool:
        return self.x0 <= x <= self.x1 and self.t0 <= t <= self.t1

    def contains_box(self, other: "SpaceTimeBox") -> bool:
        return (
            self.x0 <= other.x0
            and other.x1 <= self.x1
            and self.t0 <= other.t0
            and other.t1 <= self.t1
        )


def perimeter(box: SpaceTimeBox) -> float:
    """per(B) = width + height."""
    return box.width + box.height


def box_distance(b1: SpaceTimeBox, b2: SpaceTimeBox) -> float:
    """d(B1, B2) = horizontal gap + vertical gap (0 when overlapping)."""
    dh = max(b1.x0 - b2.x1, b2.x0 - b1.x1, 0.0)
    dv = max(b1.t0 - b2.t1, b2.t0 - b1.t1, 0.0)
    return dh + dv


@dataclass(frozen=True, eq=False)
class BoxEnvironment:
    """Complete randomness of one realization on a box."""

    lam: float
    box: SpaceTimeBox
    sources: PointSet1D  # positions on the bottom edge, rate lambda
    sinks: PointSet1D  # times on the left edge, rate 1/lambda
    clocks: PointSet2D  # interior space-time marks, rate 1

    @property
    def total_marks(self) -> int:
        return len(self.sources) + len(self.sinks) + len(self.clocks)

    def clock_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.clocks.x, self.clocks.t


def sample_box_environment(s: RandomStream, lam: float, box: SpaceTimeBox) -> BoxEnvironment:
    """Draw sources, sinks and clocks from three disjoint substreams."""
    if lam <= 0:
        raise ValueError(f"density must be > 0, got {lam}")
    sources = sample_ppp_1d(s.child("sources"), lam, (box.x0, box.x1))
    sinks = sample_ppp_1d(s.child("sinks"), 1.0 / lam, (box.t0, box.t1))
    clocks = sample_ppp_2d(s.child("clocks"), 1.0, (box.x0, box.x1, box.t0, box.t1))
    return BoxEnvironment(lam, box, sources, sinks, clocks)


def environment_to_json(env: BoxEnvironment) -> str:
    b = env.box
    return json.dumps(
        {
            "lambda": env.lam,
            "box": {"x0": b.x0, "x1": b.x1, "t0": b.t0, "t1": b.t1},
            "sources": env.sources.coordinates.tolist(),
            "sinks": env.sinks.coordinates.tolist(),
            "clocks": env.clocks.points.tolist(),
        }
    )


def environment_from_json(text: str) -> BoxEnvironment:
    d = json.loads(text)
    b = d["box"]
    box = SpaceTimeBox(b["x0"], b["x1"], b["t0"], b["t1"])
    return BoxEnvironment(
        d["lambda"],
        box,
        PointSet1D(np.asarray(d["sources"]), (box.x0, box.x1)),
        PointSet1D(np.asarray(d["sinks"]), (box.t0, box.t1)),
        PointSet2D(np.asarray(d["clocks"]).reshape(-1, 2), (box.x0, box.x1, box.t0, box.t1)),
    )


def lis_count(points, rect: SpaceTimeBox) -> int:
    """Longest strictly-increasing chain among points in (x0,x1] x (t0,t1].

    Patience sorting, O(n log n); points may be a PointSet2D or an (n, 2)
    array.  Ties in either coordinate never chain.
    """
    p = points.points if isinstance(points, PointSet2D) else np.asarray(points, float).reshape(-1, 2)
    if p.shape[0] == 0:
        return 0
    keep = (p[:, 0] > rect.x0) & (p[:, 0] <= rect.x1) & (p[:, 1] > rect.t0) & (p[:, 1] <= rect.t1)
    p = p[keep]
    if p.shape[0] == 0:
        return 0
    # sort by x ascending, t descending for equal x, then LIS (strict) on t
    order = np.lexsort((-p[:, 1], p[:, 0]))
    tails: list[float] = []
    for t in p[order, 1]:
        i = bisect_left(tails, t)
        if i == len(tails):
            tails.append(t)
        else:
            tails[i] = t
    return len(tails)


@dataclass(frozen=True)
class ExitPointRecord:
    """Rightmost maximizer of the boundary optimization.

    z > 0: entry from the bottom edge at offset z; z <= 0: entry from the
    left edge at time depth -z.  ``value`` is L at the queried point.
    """

    z: float
    value: int


class LppField:
    """Lazy evaluator of L(x, t) for one environment."""

    def __init__(self, env: BoxEnvironment, use_sinks: bool = True):
        self.env = env
        self.use_sinks = bool(use_sinks)
        self._cx, self._ct = env.clock_arrays()

    def _check(self, x, t):
        if not self.env.box.contains(x, t):
            raise ValueError(f"query ({x}, {t}) outside box {self.env.box}")

    def values(self, xs, ts) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, float))
        ts = np.atleast_1d(np.asarray(ts, float))
        for x, t in zip(xs, ts):
            self._check(x, t)
        vals, _ = K._lpp_batch(
            self.env.sources.coordinates,
            self.env.sinks.coordinates,
            self._cx,
            self._ct,
            self.env.box.x0,
            self.env.box.t0,
            xs,
            ts,
            self.use_sinks,
        )
        return vals

    def value(self, x: float, t: float) -> int:
        return int(self.values([x], [t])[0])

    def exit_record(self, x: float, t: float) -> ExitPointRecord:
        self._check(x, t)
        vals, zs = K._lpp_batch(
            self.env.sources.coordinates,
            self.env.sinks.coordinates,
            self._cx,
            self._ct,
            self.env.box.x0,
            self.env.box.t0,
            np.array([float(x)]),
            np.array([float(t)]),
            self.use_sinks,
        )
        return ExitPointRecord(float(zs[0]), int(vals[0]))


def lpp_field(env: BoxEnvironment, use_sinks: bool = True) -> LppField:
    return LppField(env, use_sinks)


def exit_point(env: BoxEnvironment, x: float, t: float) -> ExitPointRecord:
    """Rightmost boundary entry achieving L(x, t) (sinks included)."""
    return LppField(env, use_sinks=True).exit_record(x, t)


EVENT_KIND_NAMES = {K.EVENT_JUMP: "bulk-jump", K.EVENT_EXIT: "left-exit"}


class ParticleHistory:
    """Event log of the box dynamics.

    Initial particles sit at the source positions; each event is
    (time, kind, particle id, position) where kind is a bulk jump (the
    landing position; ids >= len(sources) are particles that entered at a
    clock with nothing to its right) or a left exit (position at capture).
    Sink marks arriving while the box is empty are through-passages,
    recorded in ``unused_sink_times``.
    """

    def __init__(self, env: BoxEnvironment):
        self.env = env
        (
            self.event_times,
            self.event_kinds,
            self.event_particles,
            self.event_positions,
            self.unused_sink_times,
            self.final_positions,
            self.final_ids,
        ) = K._evolve_log(
            env.sources.coordinates,
            env.sinks.coordinates,
            *env.clock_arrays(),
        )
        self.initial_positions = env.sources.coordinates.copy()

    def __len__(self):
        return int(self.event_times.size)

    @property
    def n_immigrants(self) -> int:
        n0 = self.initial_positions.size
        if self.event_particles.size == 0:
            return 0
        return int(max(self.event_particles.max() - n0 + 1, 0))

    def events(self):
        for t, k, pid, x in zip(
            self.event_times, self.event_kinds, self.event_particles, self.event_positions
        ):
            yield float(t), EVENT_KIND_NAMES[int(k)], int(pid), float(x)

    def positions_at(self, t: float) -> np.ndarray:
        """Configuration at time t (events at exactly t already applied)."""
        if not (self.env.box.t0 <= t <= self.env.box.t1):
            raise ValueError(f"time {t} outside box {self.env.box}")
        alive = {i: p for i, p in enumerate(self.initial_positions)}
        for et, k, pid, x in zip(
            self.event_times, self.event_kinds, self.event_particles, self.event_positions
        ):
            if et > t:
                break
            if k == K.EVENT_JUMP:
                alive[int(pid)] = float(x)
            else:
                alive.pop(int(pid), None)
        return np.sort(np.fromiter(alive.values(), dtype=float, count=len(alive)))

    def counts(self, ts, xs, ys) -> np.ndarray:
        """Particle counts in (xs_i, ys_i] at times ts_i (batched)."""
        ts = np.asarray(ts, float)
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        order = np.argsort(ts, kind="mergesort")
        out = np.empty(ts.size, np.int64)
        out[order] = K._count_at(
            self.env.sources.coordinates,
            self.env.sinks.coordinates,
            *self.env.clock_arrays(),
            ts[order],
            xs[order],
            ys[order],
        )
        return out

    def snapshots(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Configurations at sorted times; returns (flat, offsets)."""
        return K._snapshots(
            self.env.sources.coordinates,
            self.env.sinks.coordinates,
            *self.env.clock_arrays(),
            np.asarray(times, float),
        )


def evolve_particles(env: BoxEnvironment) -> ParticleHistory:
    return ParticleHistory(env)


def measure_query(src, interval: tuple[float, float], t: float) -> int:
    """Number of particles in (x, y] at time t, from either representation.

    For an LppField this is L_t(y) - L_t(x); for a ParticleHistory it is a
    direct count of the cadlag configuration.
    """
    x, y = interval
    if isinstance(src, LppField):
        box = src.env.box
        if not (box.x0 <= x <= y <= box.x1) or not (box.t0 <= t <= box.t1):
            raise ValueError(f"query ({interval}, {t}) outside box {box}")
        vals = src.values([x, y], [t, t])
        return int(vals[1] - vals[0])
    if isinstance(src, ParticleHistory):
        box = src.env.box
        if not (box.x0 <= x <= y <= box.x1) or not (box.t0 <= t <= box.t1):
            raise ValueError(f"query ({interval}, {t}) outside box {box}")
        return int(src.counts([t], [x], [y])[0])
    raise TypeError(f"expected LppField or ParticleHistory, got {type(src)!r}")


@dataclass(frozen=True)
class RestrictionCheck:
    hypothesis_met: bool
    fields_agree: bool


def check_no_sink_restriction(
    env: BoxEnvironment, sub_box: SpaceTimeBox, grid_n: int = 5
) -> RestrictionCheck:
    """Compare the with-sinks and no-sinks fields on a sub-box.

    The governing query is the top-left corner of the sub-box: when its
    exit coordinate is >= 0 (entry from the bottom edge), every query in
    the sub-box also exits on the bottom edge and the two fields must agree
    on all increments relative to the sub-box's southwest corner.
    """
    if not env.box.contains_box(sub_box):
        raise ValueError(f"sub-box {sub_box} not inside {env.box}")
    full = LppField(env, use_sinks=True)
    bare = LppField(env, use_sinks=False)
    hyp = full.exit_record(sub_box.x0, sub_box.t1).z >= 0.0
    gx = np.linspace(sub_box.x0, sub_box.x1, grid_n)
    gt = np.linspace(sub_box.t0, sub_box.t1, grid_n)
    xs, ts = [m.ravel() for m in np.meshgrid(gx, gt)]
    va = full.values(xs, ts) - full.value(sub_box.x0, sub_box.t0)
    vb = bare.values(xs, ts) - bare.value(sub_box.x0, sub_box.t0)
    return RestrictionCheck(bool(hyp), bool(np.array_equal(va, vb)))
