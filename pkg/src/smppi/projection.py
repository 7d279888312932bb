"""Box-constrained smoothing of joint-velocity sequences.

Given a raw velocity sequence the projection returns the closest sequence (in
the Euclidean sense) whose integrated positions, velocities, finite-difference
accelerations and jerks all stay inside per-joint boxes.  The problem separates
per joint into small QPs

    min 1/2 ||x - x_raw||^2   s.t.   l_r <= (D_r x)_k <= u_r   for r = 0..3

where ``D_0`` is Euler integration from ``theta0``, ``D_1`` the identity and
``D_2``/``D_3`` forward finite differences.  Each per-joint QP is solved in the
dual by cyclic coordinate ascent over the constraint rows (a two-sided variant
of Hildreth's method with over-relaxation).  Every coordinate step is exact
because the row norms are known in closed form, so no matrices are formed and
the per-sweep cost is O(H^2) dominated by the prefix updates of the position
rows.  The iteration stops once the sweep is (numerically) a fixed point *and*
the iterate is feasible; a fixed point of the sweep map is a KKT point, so both
checks together certify optimality up to tolerance.

Feasible inputs are returned bitwise unchanged.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
import numba
from numba import njit

from .trajectory import DerivativeBounds, VelocitySequence, finite_difference, integrate_velocities

__all__ = [
    "InfeasibleBoundsError",
    "SolverConfig",
    "ProjectionInfo",
    "ConstraintOperator",
    "build_operator",
    "check_feasible",
    "project",
    "project_batch",
    "project_stacked",
]


class InfeasibleBoundsError(ValueError):
    """Raised when no admissible trajectory can exist for the given bounds.

    The solver requires the resting trajectory (hold ``theta0`` with zero
    velocity) to be admissible: ``theta0`` inside the position box and zero
    inside the velocity, acceleration and jerk boxes.  This is a conservative
    precondition -- it guarantees the constraint set is nonempty for every
    horizon length.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = dict(details or {})


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for the dual coordinate solver.

    ``over_relax`` must stay in (0, 1.5); values of 1.6 and above were observed
    to diverge on tightly-constrained instances.  ``feas_tol`` bounds the final
    constraint violation, ``step_tol`` the per-sweep iterate movement used as
    the optimality certificate.  Typical planning instances converge in tens of
    sweeps; the generous cap only matters for strained asymmetric boxes, where
    a few hundred sweeps were observed.
    """

    max_sweeps: int = 5000
    feas_tol: float = 1e-8
    step_tol: float = 1e-9
    over_relax: float = 1.2

    def __post_init__(self):
        if not 0.0 < self.over_relax < 1.5:
            raise ValueError("over_relax must be in (0, 1.5)")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")
        if self.feas_tol <= 0.0 or self.step_tol <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class ProjectionInfo:
    """Per-subproblem diagnostics from a projection call.

    ``sweeps`` and ``violation`` have one entry per (sample, joint) subproblem
    in the caller's layout; ``converged`` is the AND over all of them.
    """

    converged: bool
    max_violation: float
    sweeps: np.ndarray
    violation: np.ndarray


@dataclass(frozen=True)
class ConstraintOperator:
    """Linear map from a velocity sequence to every bounded derivative value.

    ``apply(seq)`` stacks, in order: the H+1 integrated positions (row 0 is the
    fixed ``theta0``), the H velocities, the H-1 accelerations and the H-2
    jerks, each of shape (., D), into a single ((4H-2), D) block.  ``lower`` and
    ``upper`` are shaped the same, so feasibility of a sequence is the single
    elementwise test ``lower <= apply(seq) <= upper``.  The map is banded
    (cumulative sum / identity / short difference stencils); no matrix is
    stored.
    """

    horizon: int
    theta0: np.ndarray
    dt: float
    lower: np.ndarray
    upper: np.ndarray

    @property
    def row_count(self) -> int:
        return self.lower.size

    def apply(self, seq) -> np.ndarray:
        """Stacked derivative values for ``seq`` (..., H, D) -> (..., 4H-2, D)."""
        seq = np.asarray(seq, dtype=np.float64)
        if seq.shape[-2] != self.horizon or seq.shape[-1] != self.theta0.shape[0]:
            raise ValueError(f"sequence shape {seq.shape} does not match operator")
        pos = integrate_velocities(self.theta0, seq, self.dt)
        acc = finite_difference(seq, 2, self.dt)
        jerk = finite_difference(seq, 3, self.dt)
        return np.concatenate([pos, seq, acc, jerk], axis=-2)

    def max_violation(self, seq) -> float:
        """Largest bound violation of ``seq`` over all rows (0 when feasible)."""
        vals = self.apply(seq)
        over = np.maximum(vals - self.upper, self.lower - vals)
        return float(max(over.max(), 0.0))


def build_operator(H, theta0, bounds: DerivativeBounds, dt) -> ConstraintOperator:
    """Constraint stack for horizon ``H`` from ``theta0`` under ``bounds``.

    Requires H >= 3 so every derivative order contributes at least one row.
    """
    if H < 3:
        raise ValueError("horizon must be >= 3 for jerk rows to exist")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    theta0 = np.asarray(theta0, dtype=np.float64)
    D = bounds.dof
    if theta0.shape != (D,):
        raise ValueError("theta0 does not match bounds joint count")
    counts = (H + 1, H, H - 1, H - 2)
    lower = np.concatenate([np.broadcast_to(bounds.lower[r], (c, D)) for r, c in enumerate(counts)])
    upper = np.concatenate([np.broadcast_to(bounds.upper[r], (c, D)) for r, c in enumerate(counts)])
    return ConstraintOperator(horizon=H, theta0=theta0, dt=float(dt), lower=lower, upper=upper)


@njit(cache=True)
def _max_violation(x, theta0, dt, lo, hi):
    """Largest absolute box violation over all constraint rows of one joint."""
    H = x.shape[0]
    worst = 0.0
    acc = theta0
    for k in range(H):
        acc += dt * x[k]
        if acc - hi[0] > worst:
            worst = acc - hi[0]
        if lo[0] - acc > worst:
            worst = lo[0] - acc
        v = x[k]
        if v - hi[1] > worst:
            worst = v - hi[1]
        if lo[1] - v > worst:
            worst = lo[1] - v
    for k in range(H - 1):
        a = (x[k + 1] - x[k]) / dt
        if a - hi[2] > worst:
            worst = a - hi[2]
        if lo[2] - a > worst:
            worst = lo[2] - a
    for k in range(H - 2):
        j = (x[k + 2] - 2.0 * x[k + 1] + x[k]) / dt**2
        if j - hi[3] > worst:
            worst = j - hi[3]
        if lo[3] - j > worst:
            worst = lo[3] - j
    return worst


@njit(cache=True)
def _dense_rows(H, theta0, dt, lo, hi):
    """All constraint rows of one joint as a dense matrix with row boxes.

    Position bounds are shifted by theta0 so every row reads a・x ∈ [bl, bu].
    """
    m = 4 * H - 2
    A = np.zeros((m, H))
    bl = np.empty(m)
    bu = np.empty(m)
    r = 0
    for k in range(H):
        for i in range(k + 1):
            A[r, i] = dt
        bl[r] = lo[0] - theta0
        bu[r] = hi[0] - theta0
        r += 1
    for k in range(H):
        A[r, k] = 1.0
        bl[r] = lo[1]
        bu[r] = hi[1]
        r += 1
    for k in range(H - 1):
        A[r, k] = -1.0 / dt
        A[r, k + 1] = 1.0 / dt
        bl[r] = lo[2]
        bu[r] = hi[2]
        r += 1
    dt2 = dt * dt
    for k in range(H - 2):
        A[r, k] = 1.0 / dt2
        A[r, k + 1] = -2.0 / dt2
        A[r, k + 2] = 1.0 / dt2
        bl[r] = lo[3]
        bu[r] = hi[3]
        r += 1
    return A, bl, bu


@njit(cache=True)
def _polish(raw, theta0, dt, lo, hi, x, feas_tol, out):
    """Snap ``x`` onto its active constraint set by direct KKT solves.

    Dual coordinate sweeps identify the active set quickly but can crawl
    toward degenerate vertices at an arithmetic rate.  Once the iterate is
    close, a primal active-set refinement finishes the job: seed the working
    set with the rows nearest their bounds, then repeatedly solve the
    equality-constrained projection, adding the worst violated row and
    dropping rows with wrong-signed or inconsistent multipliers.  The result
    is accepted only when feasibility, multiplier signs, and complementarity
    all hold, so a True return certifies the exact optimum; False leaves
    ``out`` alone and the sweeps carry on.
    """
    H = raw.shape[0]
    A, bl, bu = _dense_rows(H, theta0, dt, lo, hi)
    m = A.shape[0]
    cap = m if m < 32 else 32

    # working set seeded with rows within tau of a bound, pinned nearer side
    viol = _max_violation(x, theta0, dt, lo, hi)
    tau = 4.0 * viol + 1e-9
    sel = np.empty(cap, dtype=np.intp)
    side = np.empty(cap)
    ns = 0
    for r in range(m):
        v = 0.0
        for h in range(H):
            v += A[r, h] * x[h]
        du = bu[r] - v
        dl = v - bl[r]
        if (du <= tau or dl <= tau) and ns < cap:
            sel[ns] = r
            side[ns] = 1.0 if du <= dl else -1.0
            ns += 1
    if ns == 0:
        return False

    x_p = np.empty(H)
    last_added = -1
    for _ in range(48):
        # equality-solve the working set: min ||x - raw|| s.t. A_S x = b_S
        gram = np.zeros((ns, ns))
        rhs = np.empty(ns)
        for a in range(ns):
            ra = sel[a]
            ba = bu[ra] if side[a] > 0.0 else bl[ra]
            acc = 0.0
            for h in range(H):
                acc += A[ra, h] * raw[h]
            rhs[a] = acc - ba
            for b in range(a + 1):
                rb = sel[b]
                g = 0.0
                for h in range(H):
                    g += A[ra, h] * A[rb, h]
                gram[a, b] = g
                gram[b, a] = g
        mu = np.linalg.lstsq(gram, rhs)[0]
        for h in range(H):
            acc = raw[h]
            for a in range(ns):
                acc -= mu[a] * A[sel[a], h]
            x_p[h] = acc

        # wrong-signed or off-bound multipliers mark spurious rows; purge the
        # worst before touching violations, sparing the freshest addition so
        # an inconsistent set cannot oust the row it was just repaired with
        drop = -1
        worst_sign = -1e-8
        for a in range(ns):
            if sel[a] == last_added:
                continue
            s = mu[a] * side[a] / (1.0 + abs(mu[a]))
            if s < worst_sign:
                worst_sign = s
                drop = a
        if drop < 0:
            worst_res = 1e-7
            for a in range(ns):
                if sel[a] != last_added and abs(mu[a]) > 1e-9:
                    ra = sel[a]
                    ba = bu[ra] if side[a] > 0.0 else bl[ra]
                    v = 0.0
                    for h in range(H):
                        v += A[ra, h] * x_p[h]
                    res = abs(v - ba) / (1.0 + abs(ba))
                    if res > worst_res:
                        worst_res = res
                        drop = a
        if drop >= 0:
            ns -= 1
            sel[drop] = sel[ns]
            side[drop] = side[ns]
            if ns == 0:
                return False
            continue

        # consistent set with clean multipliers: admit the worst violated row
        worst_r = -1
        worst_side = 0.0
        worst_amt = feas_tol
        for r in range(m):
            v = 0.0
            for h in range(H):
                v += A[r, h] * x_p[h]
            if v - bu[r] > worst_amt:
                worst_amt = v - bu[r]
                worst_r = r
                worst_side = 1.0
            if bl[r] - v > worst_amt:
                worst_amt = bl[r] - v
                worst_r = r
                worst_side = -1.0
        if worst_r >= 0:
            in_set = -1
            for a in range(ns):
                if sel[a] == worst_r:
                    in_set = a
                    break
            if in_set >= 0:
                # pinned at one bound yet violating the other: hopeless set
                ns -= 1
                sel[in_set] = sel[ns]
                side[in_set] = side[ns]
                if ns == 0:
                    return False
            elif ns < cap:
                sel[ns] = worst_r
                side[ns] = worst_side
                ns += 1
                last_added = worst_r
            else:
                return False
            continue

        for h in range(H):
            out[h] = x_p[h]
        return True
    return False


@njit(cache=True)
def _solve_one(raw, theta0, dt, lo, hi, max_sweeps, feas_tol, step_tol, omega, out, stats):
    """Project one joint's velocity sequence; writes ``out`` and (sweeps, viol, ok)."""
    H = raw.shape[0]

    viol0 = _max_violation(raw, theta0, dt, lo, hi)
    if viol0 <= feas_tol:
        for k in range(H):
            out[k] = raw[k]
        stats[0] = 0.0
        stats[1] = viol0
        stats[2] = 1.0
        return

    # w = A^T lambda accumulated in velocity space; x = raw - w
    w = np.zeros(H)
    lam_p = np.zeros(H)
    lam_v = np.zeros(H)
    lam_a = np.zeros(max(H - 1, 0))
    lam_j = np.zeros(max(H - 2, 0))

    dt2 = dt * dt
    q_v = 1.0
    q_a = 2.0 / dt2
    q_j = 6.0 / (dt2 * dt2)
    s_v = 1.0
    s_a = np.sqrt(q_a)
    s_j = np.sqrt(q_j)

    sweeps = 0
    viol = viol0
    ok = 0.0
    for _ in range(max_sweeps):
        sweeps += 1
        step_max = 0.0

        # position rows: running prefix acc = dt * sum_{i<=k} (raw - w)
        acc = theta0
        for k in range(H):
            acc += dt * (raw[k] - w[k])
            q_p = dt2 * (k + 1)
            r = acc + q_p * lam_p[k]
            if r > hi[0]:
                target = (r - hi[0]) / q_p
            elif r < lo[0]:
                target = (r - lo[0]) / q_p
            else:
                target = 0.0
            d = omega * (target - lam_p[k])
            if d != 0.0:
                lam_p[k] += d
                step = dt * d
                for i in range(k + 1):
                    w[i] += step
                acc -= q_p * d
                move = abs(d) * dt * np.sqrt(k + 1.0)
                if move > step_max:
                    step_max = move

        # velocity rows
        for k in range(H):
            r = raw[k] - w[k] + q_v * lam_v[k]
            if r > hi[1]:
                target = (r - hi[1]) / q_v
            elif r < lo[1]:
                target = (r - lo[1]) / q_v
            else:
                target = 0.0
            d = omega * (target - lam_v[k])
            if d != 0.0:
                lam_v[k] += d
                w[k] += d
                move = abs(d) * s_v
                if move > step_max:
                    step_max = move

        # acceleration rows
        for k in range(H - 1):
            v = ((raw[k + 1] - w[k + 1]) - (raw[k] - w[k])) / dt
            r = v + q_a * lam_a[k]
            if r > hi[2]:
                target = (r - hi[2]) / q_a
            elif r < lo[2]:
                target = (r - lo[2]) / q_a
            else:
                target = 0.0
            d = omega * (target - lam_a[k])
            if d != 0.0:
                lam_a[k] += d
                w[k] -= d / dt
                w[k + 1] += d / dt
                move = abs(d) * s_a
                if move > step_max:
                    step_max = move

        # jerk rows
        for k in range(H - 2):
            v = ((raw[k + 2] - w[k + 2]) - 2.0 * (raw[k + 1] - w[k + 1]) + (raw[k] - w[k])) / dt2
            r = v + q_j * lam_j[k]
            if r > hi[3]:
                target = (r - hi[3]) / q_j
            elif r < lo[3]:
                target = (r - lo[3]) / q_j
            else:
                target = 0.0
            d = omega * (target - lam_j[k])
            if d != 0.0:
                lam_j[k] += d
                w[k] += d / dt2
                w[k + 1] -= 2.0 * d / dt2
                w[k + 2] += d / dt2
                move = abs(d) * s_j
                if move > step_max:
                    step_max = move

        if step_max <= step_tol:
            x = raw - w
            viol = _max_violation(x, theta0, dt, lo, hi)
            if viol <= feas_tol:
                ok = 1.0
                break
        elif sweeps % 64 == 0:
            # near-degenerate vertices make the sweeps crawl; once the iterate
            # is close, a direct active-set solve finishes exactly
            x = raw - w
            if _max_violation(x, theta0, dt, lo, hi) < 1e-2:
                if _polish(raw, theta0, dt, lo, hi, x, feas_tol, out):
                    stats[0] = float(sweeps)
                    stats[1] = _max_violation(out, theta0, dt, lo, hi)
                    stats[2] = 1.0
                    return

    for k in range(H):
        out[k] = raw[k] - w[k]
    if ok == 0.0:
        # cap exhausted: last-chance polish, else report the true residual
        # without claiming convergence
        if _polish(raw, theta0, dt, lo, hi, raw - w, feas_tol, out):
            ok = 1.0
        viol = _max_violation(out, theta0, dt, lo, hi)
    stats[0] = float(sweeps)
    stats[1] = viol
    stats[2] = ok


@njit(cache=True)
def _solve_stacked(raw, theta0, dt, lo, hi, max_sweeps, feas_tol, step_tol, omega):
    # deliberately serial: callers parallelize over episodes with Python
    # threads, and numba's parallel backend is not reentrant across them
    S = raw.shape[0]
    H = raw.shape[1]
    out = np.empty((S, H))
    stats = np.empty((S, 3))
    for s in range(S):
        _solve_one(
            raw[s], theta0[s], dt, lo[s], hi[s], max_sweeps, feas_tol, step_tol, omega, out[s], stats[s]
        )
    return out, stats


def _probe_feasible(theta0, bounds):
    """Raise InfeasibleBoundsError unless the resting trajectory is admissible.

    theta0 may sit a rounding error outside the position box: an executed
    command that ends exactly on the boundary lands within a few ulp of it,
    and the position rows from step 1 onward can always pull back inside.
    """
    theta0 = np.asarray(theta0, dtype=np.float64)
    problems = {}
    lo0, hi0 = bounds.order(0)
    atol = 1e-9
    bad = (theta0 < lo0 - atol) | (theta0 > hi0 + atol)
    if np.any(bad):
        problems["position"] = np.flatnonzero(bad).tolist()
    for r, name in ((1, "velocity"), (2, "acceleration"), (3, "jerk")):
        lo, hi = bounds.order(r)
        bad = (lo > 0.0) | (hi < 0.0)
        if np.any(bad):
            problems[name] = np.flatnonzero(bad).tolist()
    if problems:
        parts = ", ".join(f"{k} (joints {v})" for k, v in sorted(problems.items()))
        raise InfeasibleBoundsError(
            f"no admissible trajectory: resting at theta0 violates {parts}", details=problems
        )


def check_feasible(theta0, bounds: DerivativeBounds):
    """Validate that bounds admit at least the resting trajectory at ``theta0``."""
    _probe_feasible(theta0, bounds)


def _active_set_descent(raw, theta0, dt, lo, hi, feas_tol):
    """Primal active-set projection for one joint, from the feasible rest point.

    Finite-step reference path for the rare sequences the sweeps cannot
    finish: walk from the resting trajectory toward the unconstrained target,
    adding each blocking row at its ratio-test step and dropping rows whose
    multipliers point the wrong way.  Returns the solution, or None if the
    iteration cap is hit (degenerate cycling).
    """
    A, bl, bu = _dense_rows(raw.shape[0], theta0, dt, lo, hi)
    m = A.shape[0]
    x = np.zeros(raw.shape[0])
    rows_sel = []
    sides = []
    for _ in range(400):
        if rows_sel:
            Aw = A[rows_sel]
            bw = np.where(np.array(sides) > 0.0, bu[rows_sel], bl[rows_sel])
            mu = np.linalg.lstsq(Aw @ Aw.T, Aw @ raw - bw, rcond=None)[0]
            xs = raw - Aw.T @ mu
        else:
            mu = np.zeros(0)
            xs = raw.copy()
        p = xs - x
        if np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(x)):
            if rows_sel:
                scaled = mu * np.asarray(sides) / (1.0 + np.abs(mu))
                k = int(np.argmin(scaled))
                if scaled[k] < -1e-10:
                    del rows_sel[k], sides[k]
                    continue
            return xs
        ap = A @ p
        ax = A @ x
        in_set = set(rows_sel)
        alpha = 1.0
        hit = -1
        hit_side = 0.0
        for r in range(m):
            if r in in_set:
                continue
            if ap[r] > 1e-14:
                a_r = (bu[r] - ax[r]) / ap[r]
            elif ap[r] < -1e-14:
                a_r = (bl[r] - ax[r]) / ap[r]
            else:
                continue
            if a_r < alpha:
                alpha = a_r
                hit = r
                hit_side = 1.0 if ap[r] > 0.0 else -1.0
        if hit >= 0:
            x = x + max(alpha, 0.0) * p
            rows_sel.append(hit)
            sides.append(hit_side)
        else:
            x = xs
    return None


def project_stacked(raw, theta0, lower, upper, dt, config=None):
    """Low-level entry: project ``raw`` (S, H) with per-row scalars and (S, 4) boxes.

    Returns ``(out, stats)`` with ``stats[:, 0]`` sweep counts, ``stats[:, 1]``
    final violations and ``stats[:, 2]`` convergence flags.
    """
    cfg = config or SolverConfig()
    raw = np.ascontiguousarray(raw, dtype=np.float64)
    theta0 = np.ascontiguousarray(theta0, dtype=np.float64)
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    out, stats = _solve_stacked(
        raw, theta0, float(dt), lower, upper, cfg.max_sweeps, cfg.feas_tol, cfg.step_tol, cfg.over_relax
    )
    if np.all(stats[:, 2] > 0.0):
        return out, stats
    # a handful of degenerate-vertex instances resist both the sweeps and the
    # in-kernel polish; finish those few columns with the finite-step solver
    for s in np.flatnonzero(stats[:, 2] == 0.0):
        res = _active_set_descent(raw[s], theta0[s], dt, lower[s], upper[s], cfg.feas_tol)
        if res is None:
            continue
        viol = _max_violation(res, theta0[s], dt, lower[s], upper[s])
        if viol <= cfg.feas_tol:
            out[s] = res
            stats[s, 1] = viol
            stats[s, 2] = 1.0
    return out, stats


def project_batch(raw, theta0, bounds: DerivativeBounds, dt, config=None, return_info=False):
    """Project a batch of velocity sequences ``raw`` (..., H, D) jointly.

    All samples share ``theta0`` (D,) and the per-joint boxes.  Feasible samples
    pass through bitwise unchanged.  With ``return_info=True`` also returns a
    :class:`ProjectionInfo` whose arrays have shape ``raw.shape[:-2] + (D,)``.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim < 2:
        raise ValueError(f"raw must have shape (..., H, D), got {raw.shape}")
    theta0 = np.asarray(theta0, dtype=np.float64)
    _probe_feasible(theta0, bounds)
    lead = raw.shape[:-2]
    H, D = raw.shape[-2], raw.shape[-1]
    if theta0.shape != (D,) or bounds.dof != D:
        raise ValueError("theta0/bounds joint count does not match raw")

    n = int(np.prod(lead)) if lead else 1
    stacked = raw.reshape(n, H, D).transpose(0, 2, 1).reshape(n * D, H)
    t0 = np.tile(theta0, n)
    lo = np.tile(bounds.lower.T, (n, 1))
    hi = np.tile(bounds.upper.T, (n, 1))
    out, stats = project_stacked(stacked, t0, lo, hi, dt, config)
    result = out.reshape(n, D, H).transpose(0, 2, 1).reshape(raw.shape)
    if not return_info:
        return result
    info = ProjectionInfo(
        converged=bool(np.all(stats[:, 2] > 0.0)),
        max_violation=float(stats[:, 1].max()),
        sweeps=stats[:, 0].astype(np.int64).reshape(lead + (D,)),
        violation=stats[:, 1].reshape(lead + (D,)),
    )
    return result, info


def project(velocities, theta0, bounds: DerivativeBounds, dt=None, config=None, return_info=False):
    """Project a single velocity sequence onto the admissible set.

    ``velocities`` may be a :class:`VelocitySequence` (its dt is used) or an
    (H, D) array with explicit ``dt``.  The return type matches the input.
    """
    if isinstance(velocities, VelocitySequence):
        arr, dt, wrap = velocities.values, velocities.dt, True
    else:
        arr = np.asarray(velocities, dtype=np.float64)
        if dt is None:
            raise ValueError("dt is required when velocities is a bare array")
        wrap = False
    packed = project_batch(arr[None], theta0, bounds, dt, config=config, return_info=return_info)
    if return_info:
        out, info = packed
        out = out[0]
        info = ProjectionInfo(info.converged, info.max_violation, info.sweeps[0], info.violation[0])
    else:
        out = packed[0]
    if wrap:
        out = VelocitySequence(out, dt)
    return (out, info) if return_info else out
