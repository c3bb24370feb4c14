"""Restarted GMRES solvers: a column-at-a-time baseline and the adaptive block variant.

Both take the operator as a callable and the right-hand side of the system
actually iterated on, i.e. preconditioning and scaling are folded in by the
caller.  Residual norms in traces are therefore preconditioned residuals,
reported relative to the first cycle's starting norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .basis import RitzSet, build_change_of_basis, matrix_powers
from .blockqr import bcgs2_partial_cholqr
from .dense import BreakdownError, GivensLs, hessenberg_eigenvalues
from .estimator import DEFAULT_GROWTH_LIMIT, estimate_initial_step
from .harness import ReductionCounter


@dataclass
class SolverConfig:
    """Knobs shared by both solvers; block-specific fields are ignored by the baseline.

    basis            : 'monomial', 'newton', or 'scaled-newton'.
    initial_step     : starting block size s0.
    restart_len      : Krylov columns per cycle.
    max_restarts     : extra cycles allowed after the first.
    rel_tol          : convergence target for the relative residual.
    cond_limit       : condition bound the block factorization enforces.
    growth_limit     : threshold for the a priori step-size estimate.
    use_step_estimator : when True, harvest shifts and cap the starting
                       block size at the estimate's recommendation.
    incremental_condition : track block conditioning with the O(j) update
                       instead of per-prefix SVDs.
    track_loo        : record basis orthogonality loss per iteration
                       (diagnostic only, never counted as reductions).
    overflow_limit   : column-norm guard for basis generation
                       (None picks the default).
    """

    basis: str = "monomial"
    initial_step: int = 10
    restart_len: int = 100
    max_restarts: int = 10
    rel_tol: float = 1e-10
    cond_limit: float = 1e7
    growth_limit: float = DEFAULT_GROWTH_LIMIT
    use_step_estimator: bool = False
    incremental_condition: bool = True
    track_loo: bool = False
    overflow_limit: float | None = None

    def __post_init__(self):
        if self.basis not in ("monomial", "newton", "scaled-newton"):
            raise ValueError(f"unknown basis '{self.basis}'")
        if self.initial_step < 1:
            raise ValueError("initial_step must be positive")
        if self.restart_len < 1:
            raise ValueError("restart_len must be positive")
        if self.max_restarts < 0:
            raise ValueError("max_restarts cannot be negative")
        if self.initial_step > self.restart_len:
            raise ValueError("initial_step cannot exceed restart_len")
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if not self.cond_limit >= 1.0:
            raise ValueError("cond_limit must be at least 1")
        if not self.growth_limit > 0.0:
            raise ValueError("growth_limit must be positive")


@dataclass
class SolveTrace:
    """Everything observable about one solve.

    Per-iteration arrays share one index: entry t describes the t-th
    least-squares column.  block_size holds the width of the block that
    produced each column (1 for the baseline and fallback steps).
    """

    converged: bool
    x: np.ndarray
    iterations: int
    residuals: np.ndarray
    loo: np.ndarray
    block_size: np.ndarray
    reductions_cum: np.ndarray
    spmv_cum: np.ndarray
    block_sizes: list
    cond_traces: list
    counter: ReductionCounter
    beta0: float
    final_relative_residual: float
    restarts: int
    s0_star: int | None = None
    wasted_columns: int = 0
    breakdown: bool = False


def _counted(op, counter: ReductionCounter, phase: str):
    def apply(v):
        counter.add("spmv", phase)
        return op(v)

    return apply


class _Rows:
    """Accumulates per-iteration trace rows."""

    def __init__(self, counter: ReductionCounter):
        self._counter = counter
        self.residuals = []
        self.loo = []
        self.block_size = []
        self.reductions_cum = []
        self.spmv_cum = []

    def emit(self, rel_res: float, loo: float, width: int):
        self.residuals.append(rel_res)
        self.loo.append(loo)
        self.block_size.append(width)
        self.reductions_cum.append(self._counter.phase_reductions("ortho"))
        self.spmv_cum.append(self._counter.solve_spmv())

    def __len__(self):
        return len(self.residuals)


def _confirm(op_res, counter: ReductionCounter, b: np.ndarray, x_prev: np.ndarray,
             dx: np.ndarray, est: float, beta: float, beta0: float,
             rel_tol: float) -> tuple:
    """Check a convergence signal against the true residual.

    Returns (x, final_rel, converged, kept).  The updated iterate is kept
    only when the confirmation passes or the residual actually improved
    over the cycle start; a least-squares solve that crossed a
    near-dependent column can otherwise hand back a worse point than it
    started from.  kept=False means the caller restarts from an unchanged
    state, so an otherwise identical cycle would just repeat.
    """
    x_new = x_prev + dx
    counter.add("true_residual_checks", "residual")
    true_nrm = float(np.linalg.norm(b - op_res(x_new)))
    counter.add("norms", "residual")
    converged = true_nrm <= max(10.0 * est, rel_tol * beta0)
    if converged or true_nrm < beta:
        return x_new, true_nrm / beta0, converged, True
    return x_prev, beta / beta0, converged, False


def ritz_harvest(op, rhs: np.ndarray, k: int, counter: ReductionCounter | None = None) -> RitzSet:
    """Run k Arnoldi steps from rhs/||rhs|| and return the ordered Ritz values.

    Uses modified Gram-Schmidt; on early breakdown at column j < k the
    harvest returns the j values available.  All costs are attributed to
    the 'harvest' phase.
    """
    if k < 1:
        raise ValueError("k must be positive")
    counter = counter if counter is not None else ReductionCounter()
    rhs = np.asarray(rhs, dtype=np.float64)
    n = len(rhs)
    op_h = _counted(op, counter, "harvest")
    counter.add("norms", "harvest")
    beta = float(np.linalg.norm(rhs))
    if beta == 0.0:
        raise ValueError("cannot harvest from a zero vector")
    q = np.empty((n, k + 1))
    q[:, 0] = rhs / beta
    h = np.zeros((k + 1, k))
    k_eff = k
    for j in range(k):
        w = op_h(q[:, j])
        counter.add("projections", "harvest", j + 1)
        for t in range(j + 1):
            h[t, j] = float(q[:, t] @ w)
            w -= h[t, j] * q[:, t]
        counter.add("norms", "harvest")
        nrm = float(np.linalg.norm(w))
        h[j + 1, j] = nrm
        if nrm == 0.0:
            k_eff = j + 1
            break
        q[:, j + 1] = w / nrm
    vals = hessenberg_eigenvalues(h, k_eff)
    return RitzSet.from_values(vals)


def assemble_hessenberg(r_hat: np.ndarray, b_dense: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
    """Express one block's recurrence in the orthonormal basis.

    r_hat is the (i + p) x (p + 1) coefficient block from the block QR,
    b_dense the recurrence matrix of the generating block (rows/columns
    beyond p are ignored), h_prev the i x (i - 1) Hessenberg computed so
    far.  Returns the (i + p) x p block of new Hessenberg columns; its
    entries below the first subdiagonal are structural zeros.
    """
    i_plus_p, pp1 = r_hat.shape
    p = pp1 - 1
    i = i_plus_p - p
    m = r_hat @ b_dense[: p + 1, :p]
    if i > 1:
        m[:i] -= h_prev @ r_hat[: i - 1, :p]
    s_bot = r_hat[i - 1 : i + p - 1, :p]
    return sla.solve_triangular(s_bot, m.T, trans="T", lower=False).T


def gmres_baseline(op, b: np.ndarray, x0: np.ndarray | None = None,
                   config: SolverConfig | None = None,
                   counter: ReductionCounter | None = None) -> SolveTrace:
    """Restarted GMRES with modified Gram-Schmidt, one column at a time.

    Reduction accounting: the iteration that sees i basis columns performs
    i projection events plus one norm, all in the 'ortho' phase.
    """
    cfg = config if config is not None else SolverConfig()
    counter = counter if counter is not None else ReductionCounter()
    b = np.asarray(b, dtype=np.float64)
    n = len(b)
    m = cfg.restart_len
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    have_x0 = x0 is not None
    op_res = _counted(op, counter, "residual")
    op_mpk = _counted(op, counter, "mpk")

    rows = _Rows(counter)
    beta0 = None
    converged = False
    breakdown = False
    final_rel = math.inf
    restarts_used = 0
    for cycle in range(cfg.max_restarts + 1):
        restarts_used = cycle
        if cycle == 0 and not have_x0:
            r = b.copy()
        else:
            r = b - op_res(x)
        counter.add("norms", "residual")
        beta = float(np.linalg.norm(r))
        if beta0 is None:
            beta0 = beta
            if beta0 == 0.0:
                converged, final_rel = True, 0.0
                break
        if beta <= cfg.rel_tol * beta0:
            converged, final_rel = True, beta / beta0
            break
        q = np.empty((n, m + 1))
        q[:, 0] = r / beta
        ls = GivensLs(m, beta)
        loo_sq = 0.0
        happy = False
        signaled = False
        est = beta
        k_used = 0
        for j in range(m):
            w = op_mpk(q[:, j])
            hcol = np.empty(j + 2)
            counter.add("projections", "ortho", j + 1)
            for t in range(j + 1):
                hcol[t] = float(q[:, t] @ w)
                w -= hcol[t] * q[:, t]
            counter.add("norms", "ortho")
            nrm = float(np.linalg.norm(w))
            hcol[j + 1] = nrm
            if nrm > 0.0:
                q[:, j + 1] = w / nrm
                if cfg.track_loo:
                    c = q[:, : j + 1].T @ q[:, j + 1]
                    loo_sq += 2.0 * float(c @ c)
                    loo_sq += (float(q[:, j + 1] @ q[:, j + 1]) - 1.0) ** 2
            else:
                happy = True
            try:
                est = float(ls.append(hcol)[0])
            except BreakdownError:
                # only a happy column can come out fully dependent; the
                # space is exhausted and the new column is useless
                breakdown = True
                break
            k_used = j + 1
            rows.emit(est / beta0, math.sqrt(loo_sq), 1)
            if est <= cfg.rel_tol * beta0 or happy:
                signaled = est <= cfg.rel_tol * beta0
                break
        if breakdown:
            if k_used:
                y = ls.solve(k_used)
                x, final_rel, converged, _ = _confirm(
                    op_res, counter, b, x, q[:, :k_used] @ y,
                    ls.residual_estimate, beta, beta0, cfg.rel_tol)
                breakdown = not converged
            else:
                final_rel = beta / beta0
            break
        y = ls.solve(k_used)
        dx = q[:, :k_used] @ y
        if signaled or happy:
            x, final_rel, converged, kept = _confirm(
                op_res, counter, b, x, dx, est, beta, beta0, cfg.rel_tol)
            if converged:
                break
            if happy or not kept:
                # exhausted Krylov space, or no progress from an unchanged
                # state: a restart would reproduce this cycle exactly
                breakdown = True
                break
        else:
            x = x + dx
    if not converged and not breakdown:
        counter.add("norms", "residual")
        final_rel = float(np.linalg.norm(b - op_res(x))) / beta0

    return SolveTrace(
        converged=converged,
        x=x,
        iterations=len(rows),
        residuals=np.asarray(rows.residuals),
        loo=np.asarray(rows.loo) if cfg.track_loo else np.full(len(rows), np.nan),
        block_size=np.asarray(rows.block_size, dtype=np.int64),
        reductions_cum=np.asarray(rows.reductions_cum, dtype=np.int64),
        spmv_cum=np.asarray(rows.spmv_cum, dtype=np.int64),
        block_sizes=[],
        cond_traces=[],
        counter=counter,
        beta0=beta0,
        final_relative_residual=final_rel,
        restarts=restarts_used,
        breakdown=breakdown,
    )


def adaptive_gmres(op, b: np.ndarray, x0: np.ndarray | None = None,
                   config: SolverConfig | None = None,
                   counter: ReductionCounter | None = None,
                   ritz: RitzSet | None = None) -> SolveTrace:
    """Adaptive block GMRES.

    Each block generates up to s new Krylov columns with the configured
    basis recurrence, orthonormalizes them with the condition-limited
    two-pass block QR, and shrinks s to the accepted width whenever the
    factorization truncated.  A restart resumes with the last adapted
    width.  Convergence signals from the small least-squares problem are
    confirmed against the true residual before the solver stops; a failed
    confirmation restarts from the current iterate.

    ritz supplies the shifts for the newton bases and the step estimate;
    when needed and not given it is harvested here with initial_step
    Arnoldi iterations on op.
    """
    cfg = config if config is not None else SolverConfig()
    counter = counter if counter is not None else ReductionCounter()
    b = np.asarray(b, dtype=np.float64)
    n = len(b)
    m = cfg.restart_len
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    have_x0 = x0 is not None
    op_res = _counted(op, counter, "residual")
    op_mpk = _counted(op, counter, "mpk")
    op_fb = _counted(op, counter, "fallback")

    needs_ritz = cfg.basis != "monomial" or cfg.use_step_estimator
    if needs_ritz and ritz is None:
        ritz = ritz_harvest(op, b, cfg.initial_step, counter)

    s0_star = None
    s_current = cfg.initial_step
    if cfg.use_step_estimator:
        s0_star = estimate_initial_step(ritz, cfg.growth_limit).s0_star
        s_current = min(s_current, s0_star)

    rows = _Rows(counter)
    block_sizes = []
    cond_traces = []
    beta0 = None
    converged = False
    breakdown = False
    wasted = 0
    final_rel = math.inf
    restarts_used = 0

    for cycle in range(cfg.max_restarts + 1):
        restarts_used = cycle
        if cycle == 0 and not have_x0:
            r = b.copy()
        else:
            r = b - op_res(x)
        counter.add("norms", "residual")
        beta = float(np.linalg.norm(r))
        if beta0 is None:
            beta0 = beta
            if beta0 == 0.0:
                converged, final_rel = True, 0.0
                break
        if beta <= cfg.rel_tol * beta0:
            converged, final_rel = True, beta / beta0
            break

        q = np.empty((n, m + 1))
        q[:, 0] = r / beta
        h = np.zeros((m + 1, m))
        ls = GivensLs(m, beta)
        loo_sq = 0.0
        i = 1
        stop_cycle = False
        s_cycle_start = s_current
        while i <= m and not stop_cycle:
            s_eff = min(s_current, m - i + 1)
            if cfg.basis == "monomial":
                cob = build_change_of_basis("monomial", s_eff)
            else:
                cob = build_change_of_basis(cfg.basis, s_eff, ritz.cycled(s_eff))
            blk = matrix_powers(op_mpk, q[:, i - 1], cob, cfg.overflow_limit)
            if blk.truncated:
                wasted += 1
            outcome = None
            if blk.ncols > 0:
                try:
                    outcome = bcgs2_partial_cholqr(
                        q[:, :i], blk.v, cfg.cond_limit,
                        use_estimator=cfg.incremental_condition, counter=counter,
                    )
                except BreakdownError:
                    outcome = None
                    wasted += blk.ncols
            if outcome is not None:
                p = outcome.p
                wasted += blk.ncols - p
                h_blk = assemble_hessenberg(outcome.r_hat, cob.dense(), h[:i, : i - 1])
                h[: i + p, i - 1 : i - 1 + p] = h_blk
                ests = ls.append(h_blk)
                q[:, i : i + p] = outcome.q_new
                block_sizes.append(p)
                cond_traces.append(outcome.cond_trace)
                conv_t = None
                for t in range(p):
                    if ests[t] <= cfg.rel_tol * beta0:
                        conv_t = t
                        break
                emit = p if conv_t is None else conv_t + 1
                if cfg.track_loo:
                    # measure only the columns the emitted iterations span;
                    # candidates past a convergence signal are never used
                    qn = outcome.q_new[:, :emit]
                    c = q[:, :i].T @ qn
                    d = qn.T @ qn - np.eye(emit)
                    loo_sq += 2.0 * float(np.sum(c * c)) + float(np.sum(d * d))
                loo_val = math.sqrt(loo_sq)
                for t in range(emit):
                    rows.emit(float(ests[t]) / beta0, loo_val, p)
                i += p
                if outcome.stopped_by != "none":
                    s_current = p
                if conv_t is not None:
                    k_conv = (i - p - 1) + conv_t + 1
                    y = ls.solve(k_conv)
                    x, final_rel, converged, kept = _confirm(
                        op_res, counter, b, x, q[:, :k_conv] @ y,
                        float(ests[conv_t]), beta, beta0, cfg.rel_tol)
                    stop_cycle = True
                    if not converged and not kept and s_current == s_cycle_start:
                        # same x and same step size: the restarted cycle
                        # would repeat this one and stall the same way
                        breakdown = True
            else:
                # no usable column came out of the block: take one plain
                # Gram-Schmidt step so the basis still advances
                w = op_fb(q[:, i - 1])
                hcol = np.empty(i + 1)
                counter.add("projections", "fallback", i)
                for t in range(i):
                    hcol[t] = float(q[:, t] @ w)
                    w -= hcol[t] * q[:, t]
                counter.add("norms", "fallback")
                nrm = float(np.linalg.norm(w))
                hcol[i] = nrm
                if nrm == 0.0:
                    # the basis cannot grow, but the projection coefficients
                    # still extend the least-squares system; solve what the
                    # current space offers and stop either way
                    h[: i + 1, i - 1] = hcol
                    stop_cycle = True
                    try:
                        est = float(ls.append(hcol)[0])
                    except BreakdownError:
                        breakdown = True
                        final_rel = beta / beta0
                    else:
                        rows.emit(est / beta0, math.sqrt(loo_sq), 1)
                        y = ls.solve()
                        x, final_rel, converged, _ = _confirm(
                            op_res, counter, b, x, q[:, : ls.ncols] @ y,
                            est, beta, beta0, cfg.rel_tol)
                        breakdown = not converged
                else:
                    h[: i + 1, i - 1] = hcol
                    q[:, i] = w / nrm
                    if cfg.track_loo:
                        c = q[:, :i].T @ q[:, i]
                        loo_sq += 2.0 * float(c @ c)
                        loo_sq += (float(q[:, i] @ q[:, i]) - 1.0) ** 2
                    est = float(ls.append(hcol)[0])
                    rows.emit(est / beta0, math.sqrt(loo_sq), 1)
                    i += 1
                    if est <= cfg.rel_tol * beta0:
                        y = ls.solve()
                        x, final_rel, converged, kept = _confirm(
                            op_res, counter, b, x, q[:, : ls.ncols] @ y,
                            est, beta, beta0, cfg.rel_tol)
                        stop_cycle = True
                        if not converged and not kept and s_current == s_cycle_start:
                            breakdown = True
        if converged or breakdown:
            break
        if not stop_cycle and ls.ncols > 0:
            # full cycle without a convergence signal: advance the iterate
            y = ls.solve()
            x = x + q[:, : ls.ncols] @ y

    if not converged and not breakdown and beta0 is not None and beta0 > 0.0:
        counter.add("norms", "residual")
        final_rel = float(np.linalg.norm(b - op_res(x))) / beta0

    return SolveTrace(
        converged=converged,
        x=x,
        iterations=len(rows),
        residuals=np.asarray(rows.residuals),
        loo=np.asarray(rows.loo) if cfg.track_loo else np.full(len(rows), np.nan),
        block_size=np.asarray(rows.block_size, dtype=np.int64),
        reductions_cum=np.asarray(rows.reductions_cum, dtype=np.int64),
        spmv_cum=np.asarray(rows.spmv_cum, dtype=np.int64),
        block_sizes=block_sizes,
        cond_traces=cond_traces,
        counter=counter,
        beta0=beta0,
        final_relative_residual=final_rel,
        restarts=restarts_used,
        s0_star=s0_star,
        wasted_columns=wasted,
        breakdown=breakdown,
    )
