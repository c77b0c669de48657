"""Exact reflection of step drivers into convex domains.

The reflected path stays in the closed domain; the regulator is the
cumulative sum of projection displacements, each pointing along an inward
normal at the post-jump state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .domain import (
    BOUNDARY_TOL,
    ConvexDomain,
    DomainViolationError,
    normal_cone_check,
)
from .path import StepPath

__all__ = [
    "SkorokhodSolution",
    "solve_skorokhod",
    "oracle_halfline",
    "VerificationReport",
    "verify_solution",
]


@dataclass(frozen=True)
class SkorokhodSolution:
    """Reflected path, regulator, and the driver they decompose."""

    x: StepPath
    k: StepPath
    driver: StepPath


def solve_skorokhod(domain: ConvexDomain, driver: StepPath) -> SkorokhodSolution:
    """Reflect a step driver: each driver jump moves the state, which is
    then projected back; the regulator collects the projection offsets.

    The driver must start inside the closed domain.
    """
    if driver.dim != domain.dim:
        raise ValueError(
            f"driver dimension {driver.dim} does not match domain {domain.dim}"
        )
    y = driver.values
    if not domain.contains(y[0]):
        raise DomainViolationError("driver must start inside the domain")
    m = y.shape[0]
    xs = np.empty_like(y)
    ks = np.empty_like(y)
    state = domain.project_point(y[0])
    reg = np.zeros(driver.dim)
    xs[0] = state
    ks[0] = reg
    for j in range(1, m):
        moved = state + (y[j] - y[j - 1])
        state = domain.project_point(moved)
        reg = reg + (state - moved)
        xs[j] = state
        ks[j] = reg
    return SkorokhodSolution(
        x=StepPath(driver.times, xs, driver.q),
        k=StepPath(driver.times, ks, driver.q),
        driver=driver,
    )


def oracle_halfline(driver: StepPath) -> SkorokhodSolution:
    """Closed-form reflection on [0, inf) in dimension one.

    The regulator is the running maximum of the driver's negative part,
    k_t = max(0, -min_{s<=t} y_s), and x = y + k.
    """
    if driver.dim != 1:
        raise ValueError("half-line formula requires dimension one")
    y = driver.values[:, 0]
    if y[0] < -BOUNDARY_TOL:
        raise DomainViolationError("driver must start inside the domain")
    k = np.maximum(0.0, -np.minimum.accumulate(y))
    x = y + k
    return SkorokhodSolution(
        x=StepPath(driver.times, x, driver.q),
        k=StepPath(driver.times, k, driver.q),
        driver=driver,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Per-property residuals for a claimed reflection solution."""

    decomposition_residual: float
    decomposition_ok: bool
    containment_residual: float
    containment_ok: bool
    support_residual: float
    support_ok: bool
    normal_residual: float
    normal_ok: bool
    jumps_checked: int

    @property
    def ok(self) -> bool:
        return (
            self.decomposition_ok
            and self.containment_ok
            and self.support_ok
            and self.normal_ok
        )


def verify_solution(
    domain: ConvexDomain,
    solution: SkorokhodSolution,
    tol: float = 1e-9,
) -> VerificationReport:
    """Check the four defining properties of a reflection solution.

    Decomposition x = y + k at every breakpoint; containment of x in the
    closed domain; regulator moves only while x is on the boundary; each
    regulator jump lies in the inward normal cone at the new state, tested
    both variationally (against the solution's own states and the anchor)
    and as a nonnegative combination of the active face normals.
    """
    x, k, y = solution.x, solution.k, solution.driver
    times = np.union1d(np.union1d(x.times, k.times), y.times)
    xs = x.eval_many(times)
    ks = k.eval_many(times)
    ys = y.eval_many(times)

    dec = float(np.max(np.linalg.norm(xs - ys - ks, axis=1)))
    contain = 0.0
    for row in xs:
        pen = float(np.linalg.norm(row - domain.project_point(row)))
        contain = max(contain, pen)

    support = 0.0
    normal = 0.0
    normal_ok = True
    jumps = 0
    cone_samples = [row for row in xs] + [domain.anchor]
    for idx in range(1, times.shape[0]):
        dk = ks[idx] - ks[idx - 1]
        size = float(np.linalg.norm(dk))
        if size <= tol:
            continue
        jumps += 1
        state = xs[idx]
        support = max(support, float(domain.boundary_distance(state)))
        # variational inequality against witnessed domain points
        try:
            ok = normal_cone_check(domain, state, dk, cone_samples, tol=tol)
        except (DomainViolationError, ValueError):
            ok = False
        normal_ok = normal_ok and ok
        # cone membership via nonnegative least squares on active normals
        normals = domain.inward_normals(state, tol=max(tol, BOUNDARY_TOL))
        if normals.shape[0] == 0:
            normal = max(normal, size)
            continue
        _, resid = nnls(normals.T, dk)
        normal = max(normal, float(resid))

    return VerificationReport(
        decomposition_residual=dec,
        decomposition_ok=dec <= tol,
        containment_residual=contain,
        containment_ok=contain <= tol,
        support_residual=support,
        support_ok=support <= max(tol, BOUNDARY_TOL),
        normal_residual=normal,
        normal_ok=normal_ok and normal <= max(tol, BOUNDARY_TOL),
        jumps_checked=jumps,
    )
