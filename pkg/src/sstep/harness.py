"""Experiment harness: reduction counting, manifest runs, CSV/JSON output, comparison.

A run writes two files with a common stem: a per-iteration CSV with the
header ``iter,rel_res,loo,block_size,reductions_cum,spmv_cum`` and a JSON
sidecar holding the problem echo, solver settings, outcome, and counters.
CSV contents are byte-identical across reruns of the same manifest; the
sidecar is not, because it records wall time.
"""

from __future__ import annotations

import io
import json
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .estimator import DEFAULT_GROWTH_LIMIT
from .ilu import ilu0
from .sparse import (
    SparseMatrix,
    equilibrate,
    gen_diagonal,
    gen_laplace2d,
    gen_laplace3d,
    parse_matrix_market,
)

REDUCTION_KINDS = ("gram_products", "projections", "norms", "true_residual_checks")
COUNTER_KINDS = REDUCTION_KINDS + ("spmv",)
PHASES = ("harvest", "mpk", "ortho", "residual", "fallback")


class ReductionCounter:
    """Tallies global reduction events and operator applications by phase.

    Kinds: gram_products, projections, norms, true_residual_checks, spmv.
    Phases: harvest, mpk, ortho, residual, fallback.  One event is one
    synchronization, whatever its size, so a block projection and a single
    dot product both count 1.  spmv is bookkeeping, not a reduction.
    """

    def __init__(self):
        self._counts = {ph: dict.fromkeys(COUNTER_KINDS, 0) for ph in PHASES}

    def add(self, kind: str, phase: str, n: int = 1):
        if kind not in COUNTER_KINDS:
            raise KeyError(f"unknown counter kind '{kind}'")
        self._counts[phase][kind] += int(n)

    def get(self, kind: str, phase: str) -> int:
        return self._counts[phase][kind]

    def kind_total(self, kind: str) -> int:
        return sum(self._counts[ph][kind] for ph in PHASES)

    def phase_reductions(self, phase: str) -> int:
        return sum(self._counts[phase][k] for k in REDUCTION_KINDS)

    def total_reductions(self) -> int:
        return sum(self.phase_reductions(ph) for ph in PHASES)

    def solve_spmv(self) -> int:
        """Operator applications outside the harvest phase."""
        return self.kind_total("spmv") - self._counts["harvest"]["spmv"]

    @property
    def gram_products(self) -> int:
        return self.kind_total("gram_products")

    @property
    def projections(self) -> int:
        return self.kind_total("projections")

    @property
    def norms(self) -> int:
        return self.kind_total("norms")

    @property
    def true_residual_checks(self) -> int:
        return self.kind_total("true_residual_checks")

    @property
    def spmv_count(self) -> int:
        return self.kind_total("spmv")

    def as_dict(self) -> dict:
        return {ph: dict(self._counts[ph]) for ph in PHASES}


@dataclass
class RunManifest:
    """One experiment: problem, solver, and output identity.

    matrix accepts a Matrix Market path or a generator spec:
    'diag:n:lo:hi', 'lap2d:n', 'lap3d:n'.  rhs 'ones' solves against
    b = A @ ones; 'random' against a seeded random unit vector.
    """

    matrix: str
    solver: str = "adaptive"
    basis: str = "monomial"
    initial_step: int = 10
    restart_len: int = 100
    max_restarts: int = 10
    rel_tol: float = 1e-10
    cond_limit: float = 1e7
    growth_limit: float = DEFAULT_GROWTH_LIMIT
    use_step_estimator: bool = False
    precond: str = "none"
    equilibrate: str = "none"
    track_loo: bool = False
    rhs: str = "ones"
    seed: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.solver not in ("adaptive", "gmres"):
            raise ValueError(f"unknown solver '{self.solver}'")
        if self.precond not in ("none", "ilu0"):
            raise ValueError(f"unknown preconditioner '{self.precond}'")
        if self.equilibrate not in ("none", "scalar", "column"):
            raise ValueError(f"unknown equilibration mode '{self.equilibrate}'")
        if self.rhs not in ("ones", "random"):
            raise ValueError(f"unknown rhs mode '{self.rhs}'")

    @property
    def stem(self) -> str:
        return self.label if self.label else f"{self.solver}-{self.basis}"


@dataclass
class RunResult:
    csv_path: str
    json_path: str
    summary: dict
    trace: object


def resolve_matrix(spec: str) -> SparseMatrix:
    """Build a matrix from a generator spec or read it from a file."""
    if spec.startswith("diag:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise ValueError("diag spec must be diag:n:lo:hi")
        return gen_diagonal(int(parts[1]), float(parts[2]), float(parts[3]))
    if spec.startswith("lap2d:"):
        return gen_laplace2d(int(spec.split(":")[1]))
    if spec.startswith("lap3d:"):
        return gen_laplace3d(int(spec.split(":")[1]))
    return parse_matrix_market(spec)


def build_rhs(a: SparseMatrix, mode: str, seed: int) -> np.ndarray:
    if mode == "ones":
        return a.matvec(np.ones(a.n))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.n)
    return v / np.linalg.norm(v)


def run_experiment(manifest: RunManifest, out_dir: str = ".") -> RunResult:
    """Execute one manifest and write its CSV and JSON files."""
    # imported here: the solvers module itself needs ReductionCounter above
    from .solvers import SolverConfig, adaptive_gmres, gmres_baseline, ritz_harvest

    a = resolve_matrix(manifest.matrix)
    b = build_rhs(a, manifest.rhs, manifest.seed)
    counter = ReductionCounter()

    t_setup = time.perf_counter()
    if manifest.equilibrate == "scalar":
        raw_ritz = ritz_harvest(a.matvec, b, manifest.initial_step, counter)
        alpha = float(np.max(np.abs(raw_ritz.values)))
        a_eq, eq = equilibrate(a, "scalar", alpha)
    else:
        a_eq, eq = equilibrate(a, manifest.equilibrate)
    b_eq = eq.apply_rhs(b)

    if manifest.precond == "ilu0":
        m_fac = ilu0(a_eq)

        def op(v):
            return m_fac.solve(a_eq.matvec(v))

        rhs_sys = m_fac.solve(b_eq)
    else:
        op = a_eq.matvec
        rhs_sys = b_eq
    setup_time = time.perf_counter() - t_setup

    cfg = SolverConfig(
        basis=manifest.basis,
        initial_step=manifest.initial_step,
        restart_len=manifest.restart_len,
        max_restarts=manifest.max_restarts,
        rel_tol=manifest.rel_tol,
        cond_limit=manifest.cond_limit,
        growth_limit=manifest.growth_limit,
        use_step_estimator=manifest.use_step_estimator,
        track_loo=manifest.track_loo,
    )
    t_solve = time.perf_counter()
    if manifest.solver == "adaptive":
        trace = adaptive_gmres(op, rhs_sys, config=cfg, counter=counter)
    else:
        trace = gmres_baseline(op, rhs_sys, config=cfg, counter=counter)
    solve_time = time.perf_counter() - t_solve
    trace.x = eq.recover_solution(trace.x)

    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, manifest.stem)
    csv_path = stem + ".csv"
    json_path = stem + ".json"

    lines = ["iter,rel_res,loo,block_size,reductions_cum,spmv_cum"]
    for t in range(trace.iterations):
        lines.append(
            f"{t + 1},{float(trace.residuals[t])!r},{float(trace.loo[t])!r},"
            f"{int(trace.block_size[t])},{int(trace.reductions_cum[t])},{int(trace.spmv_cum[t])}"
        )
    with open(csv_path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")

    summary = {
        "problem": {
            "matrix": manifest.matrix,
            "n": int(a.n),
            "nnz": int(a.nnz),
            "rhs": manifest.rhs,
            "seed": int(manifest.seed),
            "precond": manifest.precond,
            "equilibrate": manifest.equilibrate,
        },
        "solver": {
            "kind": manifest.solver,
            "basis": manifest.basis,
            "initial_step": int(manifest.initial_step),
            "restart_len": int(manifest.restart_len),
            "max_restarts": int(manifest.max_restarts),
            "rel_tol": float(manifest.rel_tol),
            "cond_limit": float(manifest.cond_limit),
            "growth_limit": float(manifest.growth_limit),
            "use_step_estimator": bool(manifest.use_step_estimator),
            "track_loo": bool(manifest.track_loo),
        },
        "result": {
            "converged": bool(trace.converged),
            "breakdown": bool(trace.breakdown),
            "iterations": int(trace.iterations),
            "restarts": int(trace.restarts),
            "beta0": float(trace.beta0),
            "final_relative_residual": float(trace.final_relative_residual),
            "s0_star": None if trace.s0_star is None else int(trace.s0_star),
            "block_sizes": [int(p) for p in trace.block_sizes],
            "wasted_columns": int(trace.wasted_columns),
            "loo_final": float(trace.loo[-1]) if trace.iterations and manifest.track_loo else None,
            "setup_time_s": setup_time,
            "wall_time_s": solve_time,
        },
        "counters": counter.as_dict(),
    }
    with open(json_path, "w", encoding="ascii") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return RunResult(csv_path=csv_path, json_path=json_path, summary=summary, trace=trace)


@dataclass
class RunData:
    """One run as read back from disk."""

    iter: np.ndarray
    rel_res: np.ndarray
    loo: np.ndarray
    block_size: np.ndarray
    reductions_cum: np.ndarray
    spmv_cum: np.ndarray
    meta: dict


def load_run(run) -> RunData:
    """Read a run from a RunResult, a CSV path, or a file stem."""
    if isinstance(run, RunResult):
        csv_path, json_path = run.csv_path, run.json_path
    else:
        csv_path = run if str(run).endswith(".csv") else str(run) + ".csv"
        json_path = csv_path[:-4] + ".json"
    with open(csv_path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if header != "iter,rel_res,loo,block_size,reductions_cum,spmv_cum":
            raise ValueError(f"{csv_path}: unexpected header '{header}'")
        rest = f.read()
    if rest.strip():
        body = np.loadtxt(io.StringIO(rest), delimiter=",", ndmin=2)
    else:
        body = np.zeros((0, 6))
    meta = {}
    if os.path.exists(json_path):
        with open(json_path, "r", encoding="ascii") as f:
            meta = json.load(f)
    return RunData(
        iter=body[:, 0].astype(np.int64),
        rel_res=body[:, 1],
        loo=body[:, 2],
        block_size=body[:, 3].astype(np.int64),
        reductions_cum=body[:, 4].astype(np.int64),
        spmv_cum=body[:, 5].astype(np.int64),
        meta=meta,
    )


@dataclass
class RunComparison:
    """Per-iteration residual agreement and cost ratio of two runs."""

    max_log10_gap: float
    first_divergence: int | None
    reduction_ratio: float
    iterations: tuple


def compare_runs(a, b) -> RunComparison:
    """Compare two runs of the same problem.

    The problem echo (matrix, size, rhs, seed, preconditioner, and
    equilibration) must match; solver settings may differ.  The gap is the
    largest absolute difference of log10 residuals over the common
    iteration range; divergence is the first exact float inequality, or
    the shorter length when one trace simply stops early.
    """
    ra, rb = load_run(a), load_run(b)
    pa = ra.meta.get("problem")
    pb = rb.meta.get("problem")
    if pa is None or pb is None:
        raise ValueError("both runs need JSON sidecars to be compared")
    for key in ("matrix", "n", "rhs", "seed", "precond", "equilibrate"):
        if pa.get(key) != pb.get(key):
            raise ValueError(f"problem mismatch on '{key}': {pa.get(key)!r} vs {pb.get(key)!r}")
    k = min(len(ra.rel_res), len(rb.rel_res))
    if k == 0:
        gap = math.nan
    else:
        tiny = np.finfo(np.float64).tiny
        la = np.log10(np.maximum(ra.rel_res[:k], tiny))
        lb = np.log10(np.maximum(rb.rel_res[:k], tiny))
        gap = float(np.max(np.abs(la - lb)))
    first = None
    for t in range(k):
        if ra.rel_res[t] != rb.rel_res[t]:
            first = t
            break
    if first is None and len(ra.rel_res) != len(rb.rel_res):
        first = k
    ca = ra.meta.get("counters")
    cb = rb.meta.get("counters")
    if ca and cb:
        tot_a = sum(ca[ph][kd] for ph in ca for kd in REDUCTION_KINDS)
        tot_b = sum(cb[ph][kd] for ph in cb for kd in REDUCTION_KINDS)
        ratio = tot_a / tot_b if tot_b else math.inf
    else:
        ratio = math.nan
    return RunComparison(
        max_log10_gap=gap,
        first_divergence=first,
        reduction_ratio=ratio,
        iterations=(len(ra.rel_res), len(rb.rel_res)),
    )
