"""Closed-form solutions of the penalized reflection equation.

For a step driver the penalized dynamics relax exponentially toward the
projection of the current state between jumps, at rate ``n``:

    x(t) = p_j + (x_j - p_j) * exp(-n (t - t_j))   on [t_j, t_{j+1}),

with p_j the projection of the breakpoint state x_j.  The formula is exact
because the projection of every point on the segment from x_j to p_j is
p_j itself, so the pull direction is frozen within a segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .domain import ConvexDomain, DomainViolationError
from .path import StepPath, modulus_prime

__all__ = [
    "PenalizedPath",
    "solve_penalized",
    "PenaltyBounds",
    "penalty_bounds",
]

SUP_FACTOR = 2.0 * np.sqrt(7.0)
VARIATION_FACTOR = 55.0


class PenalizedPath:
    """Piecewise-exponential path from the penalized equation.

    Stores breakpoint states, their projections, and the rate ``n``;
    everything else (values, left limits, variation of the penalty term)
    is evaluated from the closed form.  Immutable.
    """

    __slots__ = ("n", "times", "states", "projections", "q")

    def __init__(self, n, times, states, projections, q):
        n = float(n)
        if not n > 0:
            raise ValueError("penalization rate must be positive")
        t = np.asarray(times, dtype=float).copy()
        s = np.asarray(states, dtype=float).copy()
        p = np.asarray(projections, dtype=float).copy()
        if s.ndim == 1:
            s = s[:, None]
        if p.ndim == 1:
            p = p[:, None]
        if t.ndim != 1 or s.shape != p.shape or s.shape[0] != t.shape[0]:
            raise ValueError("times, states, projections shapes disagree")
        if t[0] != 0.0 or (t.shape[0] > 1 and not np.all(np.diff(t) > 0)):
            raise ValueError("breakpoints must start at 0 and increase")
        q = float(q)
        if q < t[-1] or q <= 0.0:
            raise ValueError("bad horizon")
        for arr in (t, s, p):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "projections", p)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("PenalizedPath is immutable")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def _check_time(self, t) -> float:
        t = float(t)
        if not 0.0 <= t <= self.q:
            raise ValueError(f"time {t} outside [0, {self.q}]")
        return t

    def eval(self, t) -> np.ndarray:
        t = self._check_time(t)
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        decay = np.exp(-self.n * (t - self.times[j]))
        return self.projections[j] + (self.states[j] - self.projections[j]) * decay

    def eval_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < 0.0 or ts.max() > self.q):
            raise ValueError("evaluation times outside the horizon")
        idx = np.searchsorted(self.times, ts, side="right") - 1
        decay = np.exp(-self.n * (ts - self.times[idx]))[:, None]
        return self.projections[idx] + (self.states[idx] - self.projections[idx]) * decay

    def left_limit(self, t) -> np.ndarray:
        t = self._check_time(t)
        if t == 0.0:
            return self.states[0].copy()
        j = max(int(np.searchsorted(self.times, t, side="left")) - 1, 0)
        decay = np.exp(-self.n * (t - self.times[j]))
        return self.projections[j] + (self.states[j] - self.projections[j]) * decay

    def segment_end_values(self) -> np.ndarray:
        """Value approached at the right end of each segment (the last one
        evaluated at the horizon)."""
        ends = np.append(self.times[1:], self.q)
        decay = np.exp(-self.n * (ends - self.times))[:, None]
        return self.projections + (self.states - self.projections) * decay

    def skeleton_values(self) -> np.ndarray:
        """Breakpoint and segment-end values interleaved in time order.

        Each coordinate of the path is monotone within a segment, so any
        coordinatewise extremum or crossing of the continuous path is
        witnessed by this (2m, d) array.
        """
        ends = self.segment_end_values()
        out = np.empty((2 * self.states.shape[0], self.dim))
        out[0::2] = self.states
        out[1::2] = ends
        return out

    def sup_deviation(self, point) -> float:
        """Supremum over [0, q] of the distance to a fixed point; exact,
        since the norm is convex and segments are line-segment images."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        sk = self.skeleton_values()
        return float(np.max(np.linalg.norm(sk - point[None, :], axis=1)))

    def penalty_variation(self, t=None) -> float:
        """Euclidean variation of the penalty term up to t.

        Equals n * integral of |x(s) - P(x(s))| ds; within a segment the
        pull spans |x_j - p_j| (1 - exp(-n dt)) in norm, and the direction
        is constant, so the sum over segments is exact.
        """
        t = self.q if t is None else self._check_time(t)
        ends = np.minimum(np.append(self.times[1:], self.q), t)
        spans = ends - self.times
        active = spans > 0
        gaps = np.linalg.norm(self.states - self.projections, axis=1)
        return float(
            np.sum(gaps[active] * (1.0 - np.exp(-self.n * spans[active])))
        )

    def to_step(self, times) -> StepPath:
        """Sample onto the given breakpoints as a step path."""
        times = np.asarray(times, dtype=float)
        return StepPath(times, self.eval_many(times), self.q)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "q": self.q,
                "segments": [
                    {
                        "t": float(t),
                        "state": [float(v) for v in s],
                        "projection": [float(v) for v in p],
                    }
                    for t, s, p in zip(self.times, self.states, self.projections)
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PenalizedPath":
        raw = json.loads(text)
        segs = raw["segments"]
        return cls(
            raw["n"],
            np.array([s["t"] for s in segs]),
            np.array([s["state"] for s in segs]),
            np.array([s["projection"] for s in segs]),
            raw["q"],
        )

    def __repr__(self) -> str:
        return (
            f"PenalizedPath(n={self.n}, dim={self.dim}, "
            f"breakpoints={self.times.shape[0]}, q={self.q})"
        )


def solve_penalized(domain: ConvexDomain, driver: StepPath, n: float) -> PenalizedPath:
    """Solve the penalized equation exactly for a step driver.

    Between driver jumps the state relaxes toward its projection at rate
    ``n``; at a jump the driver increment is added to the left limit.  The
    driver must start inside the closed domain.
    """
    if driver.dim != domain.dim:
        raise ValueError(
            f"driver dimension {driver.dim} does not match domain {domain.dim}"
        )
    if not float(n) > 0:
        raise ValueError("penalization rate must be positive")
    n = float(n)
    y = driver.values
    if not domain.contains(y[0]):
        raise DomainViolationError("driver must start inside the domain")
    m = y.shape[0]
    states = np.empty_like(y)
    projections = np.empty_like(y)
    states[0] = y[0]
    projections[0] = domain.project_point(y[0])
    for j in range(1, m):
        dt = driver.times[j] - driver.times[j - 1]
        decay = np.exp(-n * dt)
        pre = projections[j - 1] + (states[j - 1] - projections[j - 1]) * decay
        states[j] = pre + (y[j] - y[j - 1])
        projections[j] = domain.project_point(states[j])
    return PenalizedPath(n, driver.times, states, projections, driver.q)


@dataclass(frozen=True)
class PenaltyBounds:
    """A-priori bounds for penalized solutions, relative to the anchor.

    Valid for every rate n whenever ``precondition_ok``: the driver's
    partition modulus at scale delta stays below half the anchor clearance.
    ``bound_sup`` dominates sup |x - anchor|, ``bound_var`` dominates the
    penalty variation, both uniformly in n.
    """

    precondition_ok: bool
    modulus: float
    clearance: float
    sup_deviation: float
    cells: int
    bound_sup: float
    bound_var: float


def penalty_bounds(
    domain: ConvexDomain,
    driver: StepPath,
    delta: float,
    q=None,
    anchor=None,
) -> PenaltyBounds:
    """Evaluate the a-priori sup and variation bounds for a driver.

    ``cells`` is floor(q / delta) + 1; the sup bound scales linearly in it
    and the variation bound cubically, each driven by the driver's largest
    distance from the reference interior point (the domain anchor unless
    ``anchor`` overrides it).
    """
    q = driver.q if q is None else float(q)
    if not 0.0 < q <= driver.q:
        raise ValueError(f"q must lie in (0, {driver.q}]")
    delta = float(delta)
    if not 0.0 < delta <= q:
        raise ValueError("delta must lie in (0, q]")
    if anchor is None:
        anchor = domain.anchor
        clearance = domain.anchor_clearance
    else:
        anchor = np.atleast_1d(np.asarray(anchor, dtype=float))
        if not domain.contains(anchor):
            raise ValueError("bound anchor must lie inside the domain")
        clearance = domain.boundary_distance(anchor)
        if not clearance > 0:
            raise ValueError("bound anchor must be strictly interior")
    mod = modulus_prime(driver, delta, q)
    keep = driver.times <= q
    sup_dev = float(
        np.max(np.linalg.norm(driver.values[keep] - anchor, axis=1))
    )
    cells = int(np.floor(q / delta)) + 1
    return PenaltyBounds(
        precondition_ok=bool(mod < float(clearance) / 2.0),
        modulus=mod,
        clearance=float(clearance),
        sup_deviation=sup_dev,
        cells=cells,
        bound_sup=SUP_FACTOR * cells * sup_dev,
        bound_var=VARIATION_FACTOR * cells**3 * sup_dev**2 / clearance,
    )
