"""Maximization of the measure dimension d = h/lambda over finite simplices.

For each alphabet size n the maximizer of d over weight vectors supported on
{1..n} is interior (the entropy gradient blows up at the boundary), and an
interior critical point is characterized by the coordinate-wise equality of

    C_i = -(log p_i + 1) - d * (J_i + K_i),

see :mod:`dimmax.gradients`.  Rearranging C_i = const gives the fixed-point
shape p_i proportional to exp(-d * (J_i + K_i)), which drives the default
method: a damped fixed-point iteration that stays strictly interior by
construction.  The alternative is exponentiated-gradient ascent
p_i <- p_i * exp(eta * dd_i) / Z with backtracking on eta until d increases;
at eta = lambda the two updates coincide exactly, so eta is initialized
there.  Convergence is declared on the criticality residual, the quantity an
optimum must actually satisfy, not on step size.

Sweeping n with warm starts (padding the previous optimum by the predicted
power-law tail) traces d_n upward; d_n is nondecreasing because the
simplices are nested.  The supremum over all n is estimated by fitting
d_n ~ D - c * n^(-beta) on the largest converged levels.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import transfer
from .gradients import GradReport
from .measures import EvalReport, ProbVec, _entropy_err, entropy
from .transfer import DEFAULT_ITERS, OperatorDiscretization

__all__ = ["OptState", "MaximizeResult", "SweepEntry", "SweepResult",
           "maximize_on_simplex", "sweep_n", "worker_count"]


def worker_count() -> int:
    """Parallel-worker cap from DIMMAX_THREADS (default 1, i.e. sequential)."""
    raw = os.environ.get("DIMMAX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class OptState:
    """Iterate record of one simplex maximization."""

    p: ProbVec
    iter: int
    residual_history: list[float]
    step: float
    method: str


@dataclass
class MaximizeResult:
    state: OptState
    report: EvalReport
    grad: GradReport
    converged: bool

    @property
    def p(self) -> ProbVec:
        return self.state.p

    @property
    def dimension(self) -> float:
        return self.report.dimension

    @property
    def residual(self) -> float:
        return self.grad.crit_residual


class _Evaluator:
    """Shared per-vector evaluation: one operator build serves h, lambda, J, K."""

    def __init__(self, n: int, disc: OperatorDiscretization | None, iters: int):
        self.disc = disc or OperatorDiscretization()
        self.iters = iters
        self.psi = 2.0 * np.log(np.arange(1, n + 1)[:, None] + self.disc.nodes[None, :])
        self.T = self.disc.branch_matrices(n)

    def __call__(self, w: np.ndarray):
        A = np.tensordot(w, self.T, axes=1)
        rho = np.zeros(A.shape[0])
        rho[A.shape[0] // 2] = 1.0
        for _ in range(self.iters):
            rho = A.T @ rho
        J = self.psi @ rho
        lam = float(w @ J)
        h = float(-np.sum(w * np.log(w)))
        # centered measure-response series, cf. transfer.branch_response_terms
        sigma = np.einsum("kab,a->kb", self.T, rho)
        u = w @ self.psi - lam
        K = np.zeros(len(w))
        floor = 1e-14 * max(1.0, abs(lam))
        for _ in range(200):
            term = sigma @ u
            K += term
            if np.abs(term).max() < floor:
                break
            u = A @ u
            u -= float(rho @ u)
        return h, lam, J, K

    def report(self, w: np.ndarray) -> tuple[EvalReport, GradReport]:
        from .measures import lyapunov_by_operator

        h, lam, J, K = self(w)
        d = h / lam
        dh = -(np.log(w) + 1.0)
        dlam = J - lam + K
        dd = d * (dh / h - dlam / lam)
        crit = dh - d * (J + K)
        p = ProbVec(w)
        lam_rep, lam_err = lyapunov_by_operator(p, self.disc, self.iters)
        rep = EvalReport(entropy=h, lyapunov=lam_rep, dimension=h / lam_rep,
                         entropy_err=_entropy_err(p), lyapunov_err=lam_err,
                         method=f"operator(m={self.iters}, nodes={self.disc.node_count})")
        grad = GradReport(dh=dh, dlam=dlam, dd=dd,
                          crit_residual=float(crit.max() - crit.min()),
                          entropy=h, lyapunov=lam, dimension=d)
        return rep, grad


def default_init(n: int) -> ProbVec:
    """p_i proportional to i^-1.9: shaped like the predicted optimal tail."""
    return ProbVec.normalized(np.arange(1, n + 1, dtype=float) ** -1.9)


def maximize_on_simplex(n: int, init: ProbVec | None = None, tol: float = 1e-9,
                        max_iter: int = 500, method: str = "fixed_point",
                        theta: float = 0.5,
                        disc: OperatorDiscretization | None = None,
                        iters: int = DEFAULT_ITERS) -> MaximizeResult:
    """Maximize d over weight vectors supported on {1..n}.

    Returns the result with ``converged`` False (never raises) when the
    residual is still above ``tol`` after ``max_iter`` accepted steps; the
    best iterate reached is returned either way.
    """
    if n < 2:
        raise ValueError("simplex maximization needs n >= 2")
    if method not in ("fixed_point", "exp_gradient"):
        raise ValueError(f"unknown method {method!r}")
    if init is not None:
        if len(init) != n:
            raise ValueError(f"init has support {len(init)}, expected {n}")
        if not init.is_interior:
            raise ValueError("init must be interior")
        w = init.weights.copy()
    else:
        w = default_init(n).weights.copy()

    ev = _Evaluator(n, disc, iters)
    history: list[float] = []
    h, lam, J, K = ev(w)
    d = h / lam
    step = theta if method == "fixed_point" else lam
    for it in range(max_iter + 1):
        crit = -(np.log(w) + 1.0) - d * (J + K)
        res = float(crit.max() - crit.min())
        history.append(res)
        if np.isnan(res):
            raise transfer.NonConvergenceError("NaN in criticality residual", history)
        if res <= tol or it == max_iter:
            break
        if method == "fixed_point":
            target = np.exp(-d * (J + K))
            target /= target.sum()
            th = theta
            while True:  # damp further if a step would lose dimension
                cand = (1.0 - th) * w + th * target
                h2, lam2, J2, K2 = ev(cand)
                if h2 / lam2 >= d - 1e-12 or th < 1e-6:
                    break
                th *= 0.5
            w, h, lam, J, K = cand, h2, lam2, J2, K2
            d = h / lam
        else:
            dh = -(np.log(w) + 1.0)
            dd = d * (dh / h - (J - lam + K) / lam)
            eta = step
            while True:  # backtrack until d does not decrease beyond evaluator noise
                cand = w * np.exp(eta * dd)
                cand /= cand.sum()
                h2, lam2, J2, K2 = ev(cand)
                if h2 / lam2 >= d - 1e-12 or eta < 1e-12:
                    break
                eta *= 0.5
            w, h, lam, J, K = cand, h2, lam2, J2, K2
            d = h / lam
            # eta = lambda reproduces the undamped fixed-point update exactly,
            # which is the fastest stable step here; recover toward it after
            # backtracking but never beyond
            step = min(eta * 1.2, lam)

    p_opt = ProbVec(w)
    rep, grad = ev.report(w)
    state = OptState(p=p_opt, iter=len(history) - 1, residual_history=history,
                     step=float(step), method=method)
    return MaximizeResult(state=state, report=rep, grad=grad,
                          converged=history[-1] <= tol)


@dataclass
class SweepEntry:
    n: int
    p: ProbVec
    dimension: float
    residual: float
    converged: bool
    iterations: int


@dataclass
class SweepResult:
    per_n: list[SweepEntry]
    D_estimate: float
    extrapolation_note: str
    fit_residual: float = float("nan")

    @property
    def dimensions(self) -> np.ndarray:
        return np.asarray([e.dimension for e in self.per_n])


def _warm_start(prev: ProbVec, d_prev: float, n: int) -> ProbVec:
    """Pad the previous optimum with the predicted tail p_k ~ k^(-2 d)."""
    m = len(prev)
    ks = np.arange(m + 1, n + 1, dtype=float)
    tail = prev.weights[-1] * (ks / m) ** (-2.0 * d_prev)
    return ProbVec.normalized(np.concatenate([prev.weights, tail]))


def sweep_n(n_list, tol: float = 1e-9, max_iter: int = 500,
            method: str = "fixed_point",
            disc: OperatorDiscretization | None = None,
            iters: int = DEFAULT_ITERS, warm_start: bool = True) -> SweepResult:
    """Per-n maxima over increasing alphabet sizes, plus an extrapolated limit.

    With ``warm_start`` (default) each level starts from the previous
    optimum padded by its predicted tail, so levels run sequentially; cold
    starts are independent and run on up to DIMMAX_THREADS workers.
    """
    ns = [int(n) for n in n_list]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 2:
        raise ValueError("n_list must be strictly increasing with every n >= 2")
    disc = disc or OperatorDiscretization()

    entries: list[SweepEntry] = []
    if warm_start:
        prev: ProbVec | None = None
        d_prev = 0.0
        for n in ns:
            init = _warm_start(prev, d_prev, n) if prev is not None else None
            res = maximize_on_simplex(n, init=init, tol=tol, max_iter=max_iter,
                                      method=method, disc=disc, iters=iters)
            entries.append(SweepEntry(n=n, p=res.p, dimension=res.dimension,
                                      residual=res.residual, converged=res.converged,
                                      iterations=res.state.iter))
            prev, d_prev = res.p, res.dimension
    else:
        def run(n):
            return maximize_on_simplex(n, tol=tol, max_iter=max_iter,
                                       method=method, disc=disc, iters=iters)
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            results = list(pool.map(run, ns))
        entries = [SweepEntry(n=n, p=r.p, dimension=r.dimension, residual=r.residual,
                              converged=r.converged, iterations=r.state.iter)
                   for n, r in zip(ns, results)]

    D_est, note, fit_res = _extrapolate([e for e in entries if e.converged])
    return SweepResult(per_n=entries, D_estimate=D_est,
                       extrapolation_note=note, fit_residual=fit_res)


def _extrapolate(conv: list[SweepEntry]) -> tuple[float, str, float]:
    """Fit d_n ~ D - c n^-beta on the largest three converged levels.

    Three points determine (D, c, beta) exactly; the reported fit residual is
    the prediction error at the fourth-largest level when available.  The
    estimate is an extrapolation, not ground truth, and is clamped below by
    the largest computed d_n.
    """
    if not conv:
        return float("nan"), "no converged levels; no estimate", float("nan")
    d_max = max(e.dimension for e in conv)
    if len(conv) < 3:
        return d_max, "fewer than 3 converged levels; D_estimate = max d_n", float("nan")
    (n1, d1), (n2, d2), (n3, d3) = [(e.n, e.dimension) for e in conv[-3:]]
    if not (d2 > d1 and d3 > d2):
        return d_max, "d_n not strictly increasing on fit levels; D_estimate = max d_n", float("nan")

    from scipy.optimize import brentq

    ratio = (d3 - d2) / (d2 - d1)

    def eq(beta):
        return (n3 ** -beta - n2 ** -beta) / (n2 ** -beta - n1 ** -beta) - ratio

    try:
        beta = brentq(eq, 1e-3, 16.0)
    except ValueError:
        return d_max, "tail-fit exponent out of range; D_estimate = max d_n", float("nan")
    c = (d2 - d1) / (n1 ** -beta - n2 ** -beta)
    D = d1 + c * n1 ** -beta
    fit_res = float("nan")
    if len(conv) >= 4:
        e4 = conv[-4]
        fit_res = abs(D - c * e4.n ** -beta - e4.dimension)
    note = (f"d_n ~ D - c n^-beta solved on n = {n1},{n2},{n3}: "
            f"beta = {beta:.4f}, c = {c:.4g}")
    return max(D, d_max), note, fit_res
