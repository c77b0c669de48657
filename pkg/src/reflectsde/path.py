"""Piecewise-constant cadlag paths and their oscillation functionals."""

from __future__ import annotations

import csv
import io

import numpy as np

__all__ = [
    "StepPath",
    "modulus_prime",
    "modulus_second",
    "modulus_bar",
    "upcrossings",
    "upcrossings_of_values",
]


class StepPath:
    """Right-continuous step path on [0, q] with finitely many jumps.

    ``times`` are the breakpoints (strictly increasing, starting at 0) and
    ``values[j]`` is the value held on ``[times[j], times[j+1])``; the last
    value extends to the horizon ``q``.  Values are stored as an (m, d)
    array even in dimension one.  Instances are immutable.
    """

    __slots__ = ("times", "values", "q")

    def __init__(self, times, values, q=None):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or v.ndim != 2 or t.shape[0] != v.shape[0]:
            raise ValueError(
                f"times {t.shape} and values {v.shape} must be (m,) and (m, d)"
            )
        if t.shape[0] == 0:
            raise ValueError("a step path needs at least one breakpoint")
        if t[0] != 0.0:
            raise ValueError("first breakpoint must be t = 0")
        if t.shape[0] > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("path data must be finite")
        q = float(t[-1]) if q is None else float(q)
        if q < t[-1]:
            raise ValueError(f"horizon {q} precedes last breakpoint {t[-1]}")
        if q <= 0.0:
            raise ValueError("horizon must be positive")
        t = t.copy()
        v = v.copy()
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("StepPath is immutable")

    @classmethod
    def constant(cls, value, q: float) -> "StepPath":
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(np.zeros(1), v[None, :], q)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def _check_time(self, t) -> float:
        t = float(t)
        if not 0.0 <= t <= self.q:
            raise ValueError(f"time {t} outside [0, {self.q}]")
        return t

    def eval(self, t) -> np.ndarray:
        """Value at time t (right-continuous)."""
        t = self._check_time(t)
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[idx].copy()

    def eval_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < 0.0 or ts.max() > self.q):
            raise ValueError("evaluation times outside the horizon")
        idx = np.searchsorted(self.times, ts, side="right") - 1
        return self.values[idx]

    def left_limit(self, t) -> np.ndarray:
        """Limit from the left; at t = 0 this is the initial value."""
        t = self._check_time(t)
        if t == 0.0:
            return self.values[0].copy()
        idx = int(np.searchsorted(self.times, t, side="left")) - 1
        return self.values[max(idx, 0)].copy()

    def jump(self, t) -> np.ndarray:
        return self.eval(t) - self.left_limit(t)

    def total_variation(self, t=None) -> float:
        """Coordinatewise variation: sum over coordinates of |jump| sums."""
        t = self.q if t is None else self._check_time(t)
        if self.times.shape[0] == 1:
            return 0.0
        mask = self.times[1:] <= t
        if not mask.any():
            return 0.0
        diffs = np.diff(self.values, axis=0)[mask]
        return float(np.sum(np.abs(diffs)))

    def to_csv(self, stream) -> None:
        """Write breakpoints as ``t,x_1,..,x_d`` with round-trip floats."""
        writer = csv.writer(stream)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(self.dim)])
        for t, row in zip(self.times, self.values):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, stream, q=None) -> "StepPath":
        """Read a path written by :meth:`to_csv`.

        The horizon is not stored in the file; it defaults to the last
        breakpoint unless supplied.
        """
        if isinstance(stream, str):
            stream = io.StringIO(stream)
        reader = csv.reader(stream)
        header = next(reader, None)
        if not header or header[0] != "t":
            raise ValueError("expected a header row starting with 't'")
        rows = [row for row in reader if row]
        if not rows:
            raise ValueError("no data rows")
        times = np.array([float(r[0]) for r in rows])
        values = np.array([[float(x) for x in r[1:]] for r in rows])
        return cls(times, values, q=q)

    def __repr__(self) -> str:
        return (
            f"StepPath(dim={self.dim}, breakpoints={self.times.shape[0]}, "
            f"q={self.q})"
        )


def _prefix_diameters(points: np.ndarray) -> np.ndarray:
    """d[k] = largest pairwise distance among points[0..k]."""
    L = points.shape[0]
    if L == 1:
        return np.zeros(1)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    grid = np.maximum.accumulate(np.maximum.accumulate(dist, axis=0), axis=1)
    return grid.diagonal().copy()


def modulus_prime(path: StepPath, delta: float, q=None) -> float:
    """Partition oscillation modulus over [0, q).

    Infimum over partitions 0 = t_0 < ... < t_r = q, with every cell except
    the last at least ``delta`` long, of the largest oscillation of the
    path over a half-open cell [t_{i-1}, t_i).  The value at q itself never
    enters (all cells are half-open).

    Exact for step paths: sliding a partition point left onto the previous
    point plus delta, or onto the latest jump time before it, never
    increases any cell oscillation, so an optimal partition exists with all
    points in the closure of {0, jump times} under t -> t + delta, and a
    shortest-path scan over that finite set attains the infimum.
    """
    q = path.q if q is None else float(q)
    if not 0.0 < q <= path.q:
        raise ValueError(f"q must lie in (0, {path.q}]")
    delta = float(delta)
    if not 0.0 < delta <= q:
        raise ValueError("delta must lie in (0, q]")

    times = path.times
    base = [0.0] + [float(t) for t in times if 0.0 < t < q]
    candidates = {0.0}
    for b in base:
        steps = int(np.ceil((q - b) / delta)) + 1
        for k in range(steps):
            t = b + k * delta
            if t < q:
                candidates.add(t)
            else:
                break
    cand = np.array(sorted(candidates))
    m = cand.shape[0]

    # segment index ranges for cells [cand[i], e) over all right endpoints e
    ends = np.append(cand, q)
    lo = np.searchsorted(times, cand, side="right") - 1
    hi = np.searchsorted(times, ends, side="left") - 1

    osc = np.zeros((m, m + 1))
    for i in range(m):
        pref = _prefix_diameters(path.values[lo[i] :])
        h = np.clip(hi - lo[i], 0, pref.shape[0] - 1)
        osc[i] = pref[h]

    slop = 1e-12
    best = np.full(m, np.inf)
    best[0] = 0.0
    for j in range(1, m):
        ilim = int(np.searchsorted(cand, cand[j] - delta + slop, side="right"))
        if ilim == 0:
            continue
        best[j] = np.min(np.maximum(best[:ilim], osc[:ilim, j]))
    # the cell reaching q is exempt from the length constraint
    return float(np.min(np.maximum(best, osc[:, m])))


def _pair_modulus_scan(times, first, second, delta: float) -> float:
    """Exact triple scan over merged segments; cubic, any dimension."""
    m = times.shape[0]
    out = 0.0
    for i in range(m - 2):
        horizon = times[i + 1] + delta
        k_hi = int(np.searchsorted(times, horizon, side="left")) - 1
        if k_hi <= i + 1:
            continue
        for j in range(i + 1, k_hi):
            a = float(np.linalg.norm(first[j] - first[i]))
            if a <= out:
                continue
            tail = second[j + 1 : k_hi + 1] - second[j]
            b = float(np.max(np.linalg.norm(tail, axis=1)))
            val = min(a, b)
            if val > out:
                out = val
    return out


def _pair_modulus_runs(times, first, second, delta: float) -> float:
    """Exact interlaced modulus for one-dimensional value arrays.

    The later factor |second[k] - second[j]| is constant over runs of the
    second path and weakest-constrained at a run's first segment, so only
    run starts serve as k; for each the earlier factor is a running
    min/max scan.  Linear work per run start.
    """
    f = first[:, 0]
    s = second[:, 0]
    m = times.shape[0]
    run_starts = [k for k in range(m) if k == 0 or s[k] != s[k - 1]]
    out = 0.0
    for k in run_starts:
        if k < 2:
            continue
        floor = times[k] - delta
        # smallest i with times[i+1] > floor, strict
        i_min = max(int(np.searchsorted(times, floor, side="right")) - 1, 0)
        if i_min >= k - 1:
            continue
        lo = hi = f[i_min]
        for j in range(i_min + 1, k):
            b = abs(s[k] - s[j])
            if b > out:
                a = max(f[j] - lo, hi - f[j])
                if min(a, b) > out:
                    out = min(a, b)
            lo = min(lo, f[j])
            hi = max(hi, f[j])
    return out


def _merged_pair(path_x: StepPath, path_y: StepPath, q: float):
    times = np.union1d(path_x.times, path_y.times)
    times = times[times <= q]
    return times, path_x.eval_many(times), path_y.eval_many(times)


def modulus_second(path: StepPath, delta: float, q=None) -> float:
    """Interlaced oscillation modulus of a single path.

    Supremum over times s < u < t <= q with t - s < delta of
    min(|x_u - x_s|, |x_t - x_u|); detects pairs of jumps closer than
    ``delta`` and vanishes as delta shrinks for paths with isolated jumps.
    """
    q = path.q if q is None else float(q)
    if not 0.0 < q <= path.q:
        raise ValueError(f"q must lie in (0, {path.q}]")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    keep = path.times <= q
    return _pair_modulus_scan(path.times[keep], path.values[keep], path.values[keep], float(delta))


def modulus_bar(path_x: StepPath, path_y: StepPath, delta: float, q=None) -> float:
    """Interlaced oscillation modulus of an ordered pair of paths.

    Supremum over s < u < t <= q with t - s < delta of
    min(|x_u - x_s|, |y_t - y_u|): an oscillation of the first path
    followed within ``delta`` by one of the second.  Evaluated on the
    merged breakpoints; exact for step paths.
    """
    qx = min(path_x.q, path_y.q)
    q = qx if q is None else float(q)
    if not 0.0 < q <= qx:
        raise ValueError(f"q must lie in (0, {qx}]")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    times, fx, fy = _merged_pair(path_x, path_y, q)
    if path_x.dim == 1 and path_y.dim == 1:
        return _pair_modulus_runs(times, fx, fy, float(delta))
    return _pair_modulus_scan(times, fx, fy, float(delta))


def upcrossings_of_values(values, a: float, b: float) -> int:
    """Greedy strict up-crossing count of a value sequence over (a, b)."""
    if not a < b:
        raise ValueError("need a < b")
    count = 0
    below = False
    for v in values:
        if not below:
            if v < a:
                below = True
        elif v > b:
            count += 1
            below = False
    return count


def upcrossings(path: StepPath, coord: int, a: float, b: float, q=None) -> int:
    """Number of strict up-crossings of the level pair a < b by a coordinate.

    A crossing needs a value strictly below ``a`` followed in time by one
    strictly above ``b``; the greedy scan over breakpoint values is exact
    for step paths.
    """
    q = path.q if q is None else path._check_time(q)
    if not 0 <= coord < path.dim:
        raise ValueError(f"coordinate {coord} out of range")
    mask = path.times <= q
    return upcrossings_of_values(path.values[mask, coord], a, b)
