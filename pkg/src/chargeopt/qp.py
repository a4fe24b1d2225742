"""Concave quadratic maximization over linear inequality constraints.

Solves max 0.5 x'Qx + B'x + r subject to a'x <= b rows and per-coordinate
box bounds, via a primal active-set method on the negated (convex) problem.
A brute-force grid oracle validates solutions on small dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .utility import QuadForm


class QpError(RuntimeError):
    """Solver failed to converge or produced an out-of-tolerance point."""


class QpInfeasibleError(ValueError):
    """The constraint set has no feasible point."""


class QpUnboundedError(ValueError):
    """The objective increases without bound over the feasible set."""


@dataclass(frozen=True, eq=False)
class LinearConstraintSet:
    """Rows a'x <= b plus box bounds (entries may be +-inf)."""

    rows_a: np.ndarray
    rows_b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        n = lo.shape[0]
        a = np.asarray(self.rows_a, dtype=float).reshape(-1, n)
        b = np.asarray(self.rows_b, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ValueError("row count mismatch between rows_a and rows_b")
        if hi.shape != (n,):
            raise ValueError("box bounds must have equal length")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("constraint rows must be finite")
        if (lo > hi).any():
            raise ValueError("lower box bound above upper box bound")
        for arr in (a, b, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "rows_a", a)
        object.__setattr__(self, "rows_b", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def build(cls, rows, lower, upper) -> "LinearConstraintSet":
        lower = np.asarray(lower, dtype=float)
        rows = list(rows)
        if rows:
            a = np.array([r[0] for r in rows], dtype=float)
            b = np.array([r[1] for r in rows], dtype=float)
        else:
            a = np.zeros((0, lower.shape[0]))
            b = np.zeros(0)
        return cls(a, b, lower, upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def dense_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints as unit-norm a'x <= b rows, box bounds included."""
        n = self.dim
        blocks_a = [self.rows_a]
        blocks_b = [self.rows_b]
        eye = np.eye(n)
        finite_hi = np.isfinite(self.upper)
        if finite_hi.any():
            blocks_a.append(eye[finite_hi])
            blocks_b.append(self.upper[finite_hi])
        finite_lo = np.isfinite(self.lower)
        if finite_lo.any():
            blocks_a.append(-eye[finite_lo])
            blocks_b.append(-self.lower[finite_lo])
        a = np.vstack(blocks_a)
        b = np.concatenate(blocks_b)
        norms = np.linalg.norm(a, axis=1)
        if (norms == 0).any():
            keep = norms > 0
            bad_b = b[~keep]
            if (bad_b < 0).any():
                raise QpInfeasibleError("row 0'x <= b with b < 0")
            a, b, norms = a[keep], b[keep], norms[keep]
        return a / norms[:, None], b / norms

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.rows_a.shape[0]:
            worst = float(np.max(self.rows_a @ x - self.rows_b, initial=0.0))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        return worst


@dataclass(frozen=True)
class ConcavityReport:
    is_negative_semidefinite: bool
    min_eigenvalue: float
    max_eigenvalue: float


@dataclass(frozen=True, eq=False)
class QpSolution:
    x: np.ndarray
    value: float
    status: str
    iterations: int


def concavity_report(q) -> ConcavityReport:
    """Eigenvalue-based negative-semidefiniteness verdict (tolerance 1e-10)."""
    q = np.asarray(q, dtype=float)
    scale = max(1.0, float(np.abs(q).max(initial=0.0)))
    if q.shape[0] != q.shape[1] or np.abs(q - q.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("concavity check requires a symmetric matrix")
    eigs = np.linalg.eigvalsh((q + q.T) / 2.0)
    return ConcavityReport(bool(eigs[-1] <= 1e-10 * scale), float(eigs[0]), float(eigs[-1]))


def _phase_one(cons: LinearConstraintSet) -> np.ndarray:
    """Feasible point via an LP minimizing the worst row violation."""
    n = cons.dim
    # try the obvious candidates before paying for an LP
    for cand in (np.zeros(n), np.where(np.isfinite(cons.lower), cons.lower, 0.0)):
        cand = np.clip(cand, cons.lower, cons.upper)
        if cons.max_violation(cand) <= 1e-9:
            return cand
    a, b = (cons.rows_a, cons.rows_b)
    if a.shape[0] == 0:
        raise QpInfeasibleError("box-only constraint set should have been satisfiable")
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.hstack([a, -np.ones((a.shape[0], 1))])
    bounds = [
        (
            float(cons.lower[i]) if np.isfinite(cons.lower[i]) else None,
            float(cons.upper[i]) if np.isfinite(cons.upper[i]) else None,
        )
        for i in range(n)
    ] + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0 or res.x is None:
        raise QpInfeasibleError(f"phase-1 LP failed (status {res.status})")
    if res.x[-1] > 1e-7:
        raise QpInfeasibleError(f"constraint set infeasible (min violation {res.x[-1]:.3g})")
    return np.clip(res.x[:n], cons.lower, cons.upper)


def _eqp_step(g_mat, grad, a_w):
    """Direction for the equality-constrained subproblem min 0.5 p'Gp + grad'p
    subject to A_w p = 0, with G merely positive semidefinite (or indefinite).

    Returns (p, is_ray): a finite Newton step toward the subspace minimum, or
    a ray of non-positive curvature along which the objective decreases
    without bound within the subspace.
    """
    n = grad.shape[0]
    if a_w is None or a_w.shape[0] == 0:
        z = np.eye(n)
    else:
        q_full, r = np.linalg.qr(a_w.T, mode="complete")
        diag = np.abs(np.diag(r)) if r.size else np.zeros(0)
        rank = int(np.sum(diag > 1e-12 * max(1.0, diag.max(initial=0.0))))
        z = q_full[:, rank:]
    if z.shape[1] == 0:
        return np.zeros(n), False
    h_r = z.T @ g_mat @ z
    g_r = z.T @ grad
    w, v = np.linalg.eigh((h_r + h_r.T) / 2.0)
    curv_tol = 1e-11 * max(1.0, float(np.abs(w).max(initial=0.0)))
    coef = v.T @ g_r
    grad_tol = 1e-10 * (1.0 + float(np.linalg.norm(grad)))
    for i in range(w.shape[0]):
        if w[i] < -curv_tol or (abs(w[i]) <= curv_tol and abs(coef[i]) > grad_tol):
            direction = v[:, i]
            if coef[i] > 0:
                direction = -direction
            elif coef[i] == 0 and direction[np.argmax(np.abs(direction))] < 0:
                direction = -direction
            ray = z @ direction
            return ray / np.linalg.norm(ray), True
    pos = w > curv_tol
    if not pos.any():
        return np.zeros(n), False
    p = -z @ (v[:, pos] @ (coef[pos] / w[pos]))
    return p, False


def _active_set_min(g_mat, c_vec, a, b, x0, max_iter):
    """Minimize 0.5 x'Gx + c'x s.t. Ax <= b from feasible x0 (null-space method).

    Handles positive-semidefinite G exactly: zero-curvature descent
    directions become rays stepped to the nearest blocking row. Blocking
    rows are chosen by smallest index on ties and dropped rows by most
    negative multiplier, so the path is deterministic.
    """
    n = x0.shape[0]
    m = b.shape[0]
    x = x0.copy()
    work: list[int] = []
    in_work = np.zeros(m, dtype=bool)

    for it in range(1, max_iter + 1):
        grad = g_mat @ x + c_vec
        a_w = a[work] if work else None
        p, is_ray = _eqp_step(g_mat, grad, a_w)

        if not is_ray and np.max(np.abs(p), initial=0.0) <= 1e-10 * (
            1.0 + np.max(np.abs(x), initial=0.0)
        ):
            if not work:
                return x, it
            lam = np.linalg.lstsq(a_w.T, -grad, rcond=None)[0]
            worst = int(np.argmin(lam))
            if lam[worst] >= -1e-8 * (1.0 + float(np.linalg.norm(grad))):
                return x, it
            idx = work.pop(worst)
            in_work[idx] = False
            continue

        a_p = a @ p
        slack = np.maximum(b - a @ x, 0.0)
        alpha = np.inf if is_ray else 1.0
        blocker = -1
        candidates = np.flatnonzero(~in_work & (a_p > 1e-11 * (1.0 + np.abs(p).max())))
        if candidates.size:
            ratios = slack[candidates] / a_p[candidates]
            best = int(np.argmin(ratios))
            if ratios[best] < alpha:
                alpha = float(ratios[best])
                blocker = int(candidates[best])
        if not np.isfinite(alpha):
            raise QpUnboundedError("descent ray never meets a constraint")
        x = x + alpha * p
        if blocker >= 0:
            work.append(blocker)
            in_work[blocker] = True
    raise QpError(f"active-set iteration limit reached ({max_iter})")


def maximize_quadratic(
    form: QuadForm,
    constraints: LinearConstraintSet,
    tol: float = 1e-6,
    initial=None,
) -> QpSolution:
    """Constrained maximum of the quadratic form.

    For negative-semidefinite Q the returned point is optimal to within
    `tol` (constraint violation and relative objective). Indefinite Q is
    solved best-effort with status "non_concave"; when the dimension allows,
    the result is cross-checked against a coarse grid search and the better
    point wins (lexicographically smallest on ties).
    """
    q = form.Q
    b_vec = form.B
    n = form.dim
    if constraints.dim != n:
        raise ValueError(f"constraint dimension {constraints.dim} != form dimension {n}")

    report = concavity_report(q)
    g_mat = -q

    a, b = constraints.dense_rows()
    if initial is not None:
        x0 = np.clip(np.asarray(initial, dtype=float), constraints.lower, constraints.upper)
        if constraints.max_violation(x0) > 1e-9:
            x0 = _phase_one(constraints)
    else:
        x0 = _phase_one(constraints)

    # a cold start may walk the working set across many nearly-parallel rows
    # (e.g. consecutive epigraph cuts), so the cap scales with the row count
    max_iter = 300 + 4 * b.shape[0] + 50 * n
    x, iters = _active_set_min(g_mat, -b_vec, a, b, x0, max_iter=max_iter)

    viol = constraints.max_violation(x)
    if viol > tol:
        raise QpError(f"solution violates constraints by {viol:.3g} (> tol {tol:.3g})")
    if np.max(np.abs(x)) > 1e9:
        raise QpUnboundedError("objective appears unbounded over the feasible set")

    x = np.clip(x, constraints.lower, constraints.upper)
    status = "optimal" if report.is_negative_semidefinite else "non_concave"

    if status == "non_concave" and n <= 3 and np.isfinite(constraints.lower).all() and np.isfinite(constraints.upper).all():
        span = float(np.max(constraints.upper - constraints.lower))
        if span > 0:
            alt_x, alt_val = grid_oracle(form, constraints, resolution=span / 60.0)
            cur_val = form.value(x)
            if alt_val > cur_val + 1e-12 * (1.0 + abs(cur_val)) or (
                abs(alt_val - cur_val) <= 1e-12 * (1.0 + abs(cur_val))
                and tuple(alt_x) < tuple(x)
            ):
                x = alt_x
    return QpSolution(x, form.value(x), status, iters)


def grid_oracle(
    form: QuadForm,
    constraints: LinearConstraintSet,
    resolution: float,
) -> tuple[np.ndarray, float]:
    """Exhaustive evaluation on a uniform grid over the box (dimension <= 4).

    Grid points violating any linear row are discarded; ties resolve to the
    lexicographically smallest point (C-order scan of ascending axes).
    """
    n = form.dim
    if n > 4:
        raise ValueError(f"grid oracle limited to dimension <= 4 (got {n})")
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    lo, hi = constraints.lower, constraints.upper
    if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
        raise ValueError("grid oracle requires finite box bounds")
    axes = []
    for i in range(n):
        count = int(np.floor((hi[i] - lo[i]) / resolution + 1e-9)) + 1
        axes.append(lo[i] + resolution * np.arange(count))
    total = int(np.prod([len(ax) for ax in axes]))
    if total > 50_000_000:
        raise ValueError(f"grid too large ({total} points); coarsen the resolution")
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if constraints.rows_a.shape[0]:
        mask = np.all(pts @ constraints.rows_a.T <= constraints.rows_b + 1e-12, axis=1)
        pts = pts[mask]
    if pts.shape[0] == 0:
        raise QpInfeasibleError("no grid point satisfies the linear constraints")
    vals = 0.5 * np.einsum("ij,jk,ik->i", pts, form.Q, pts) + pts @ form.B + form.r
    best = int(np.argmax(vals))
    return pts[best].copy(), float(vals[best])
