"""Gradient descent on the factorized objective, radial initialization,
Newton refinement, and critical-point classification.

``gradient_descent_batch`` advances a stack of independent iterates in one
vectorized loop; per-sample arithmetic is identical regardless of how the
stack is chunked, which keeps experiment outputs bit-stable under any
parallelism degree.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NotNearCritical, SingularHessian
from .instances import McInstance
from .landscape import (
    LossSpec,
    canonicalize,
    dense_hessian,
    gradient,
    min_hessian_eigen,
    objective,
    tangent_indices,
)

STEP_GROWTH = 1.5
STEP_GROWTH_EVERY = 20
STEP_GROWTH_CAP = 4096.0
STALL_LIMIT = 500


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"


class Classification(str, enum.Enum):
    GLOBAL_MIN = "GlobalMin"
    SPURIOUS_LOCAL_MIN = "SpuriousLocalMin"
    STRICT_SADDLE = "StrictSaddle"
    DEGENERATE = "Degenerate"
    NOT_CRITICAL = "NotCritical"


@dataclass(frozen=True)
class GdConfig:
    """step/grad_tol/divergence_bound of None are resolved per instance."""

    step: float | None = None
    max_iters: int = 200_000
    grad_tol: float | None = None
    divergence_bound: float | None = None

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise DimensionMismatch("step must be positive")
        if self.grad_tol is not None and self.grad_tol <= 0:
            raise DimensionMismatch("grad_tol must be positive")
        if self.max_iters < 1:
            raise DimensionMismatch("max_iters must be >= 1")

    def resolved(self, inst: McInstance, X0: np.ndarray) -> "GdConfig":
        scale = inst.omega_scale()
        grad_tol = self.grad_tol if self.grad_tol is not None else 1e-9 * (1.0 + scale)
        bound = (
            self.divergence_bound
            if self.divergence_bound is not None
            else 10.0 * (1.0 + float(np.linalg.norm(inst.x_star)))
        )
        return replace(self, grad_tol=grad_tol, divergence_bound=bound)


@dataclass
class RunResult:
    final_point: np.ndarray
    final_objective: float
    final_grad_norm: float
    iterations: int
    status: Status


def sample_radial_init(
    dist: str, n: int, r: int, seed: int, sigma: float = 1.0, radius: float = 1.0, size: int | None = None
) -> np.ndarray:
    """Gaussian or uniform-ball initialization; deterministic in seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    b = 1 if size is None else size
    if dist == "gaussian":
        if sigma <= 0:
            raise DimensionMismatch("sigma must be positive")
        out = sigma * rng.standard_normal((b, n, r))
    elif dist == "ball":
        if radius <= 0:
            raise DimensionMismatch("radius must be positive")
        direction = rng.standard_normal((b, n, r))
        direction /= np.linalg.norm(direction, axis=(1, 2), keepdims=True)
        u = rng.random((b, 1, 1))
        out = radius * u ** (1.0 / (n * r)) * direction
    else:
        raise DimensionMismatch(f"unknown init distribution {dist!r}")
    return out[0] if size is None else out


def _auto_steps(inst: McInstance, X0: np.ndarray) -> np.ndarray:
    """Per-sample step from a crude local smoothness bound at the start."""
    scale = inst.omega_scale()
    norms2 = np.einsum("bir,bir->b", X0, X0)
    return 0.25 / (4.0 * (scale + 3.0 * np.maximum(norms2, 1.0)))


def gradient_descent_batch(
    inst: McInstance, loss: LossSpec, X0: np.ndarray, cfg: GdConfig
):
    """Explicit-Euler gradient descent on a (B, n, r) stack of iterates.

    The objective is kept monotone per sample: a step that would increase it
    is rejected and the sample's step size halved; steadily accepted samples
    get a bounded step-size growth so late linear convergence is not
    throttled by a conservative initial bound.
    """
    X0 = np.asarray(X0, dtype=float)
    if X0.ndim == 2:
        X0 = X0[None]
    B = X0.shape[0]
    cfg = cfg.resolved(inst, X0)
    steps0 = np.full(B, cfg.step) if cfg.step is not None else _auto_steps(inst, X0)
    steps = steps0.copy()

    X = X0.copy()
    f = np.atleast_1d(np.asarray(objective(inst, loss, X), dtype=float))
    status = np.empty(B, dtype=object)
    status[:] = Status.MAX_ITERS
    iters = np.full(B, cfg.max_iters, dtype=int)
    grad_norms = np.zeros(B)
    active = np.ones(B, dtype=bool)
    since_growth = np.zeros(B, dtype=int)
    no_progress = np.zeros(B, dtype=int)

    for it in range(cfg.max_iters):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        Xa = X[idx]
        G = gradient(inst, loss, Xa)
        gn = np.sqrt(np.einsum("bir,bir->b", G, G))
        grad_norms[idx] = gn

        done = gn <= cfg.grad_tol
        if done.any():
            d = idx[done]
            status[d] = Status.CONVERGED
            iters[d] = it
            active[d] = False
            idx = idx[~done]
            if idx.size == 0:
                continue
            Xa, G = Xa[~done], G[~done]

        Xnew = Xa - steps[idx, None, None] * G
        fnew = np.atleast_1d(np.asarray(objective(inst, loss, Xnew), dtype=float))
        increased = fnew > f[idx]
        improved = fnew < f[idx]
        ok = ~increased
        ok_idx = idx[ok]
        X[ok_idx] = Xnew[ok]
        f[ok_idx] = fnew[ok]
        since_growth[ok_idx] += 1
        steps[idx[increased]] *= 0.5
        since_growth[idx[increased]] = 0
        # Once the objective stops strictly decreasing for a long stretch, the
        # iterate sits at the resolution floor of double precision; further
        # iterations cannot reach grad_tol, so the sample is cut off early.
        no_progress[idx] += 1
        no_progress[idx[improved]] = 0
        stalled = idx[no_progress[idx] >= STALL_LIMIT]
        if stalled.size:
            iters[stalled] = it
            active[stalled] = False

        grow = since_growth[ok_idx] >= STEP_GROWTH_EVERY
        if grow.any():
            gidx = ok_idx[grow]
            steps[gidx] = np.minimum(steps[gidx] * STEP_GROWTH, STEP_GROWTH_CAP * steps0[gidx])
            since_growth[gidx] = 0

        norms = np.sqrt(np.einsum("bir,bir->b", X[ok_idx], X[ok_idx]))
        diverged = norms > cfg.divergence_bound
        if diverged.any():
            d = ok_idx[diverged]
            status[d] = Status.DIVERGED
            iters[d] = it
            active[d] = False

    still = np.nonzero(active)[0]
    if still.size:
        G = gradient(inst, loss, X[still])
        grad_norms[still] = np.sqrt(np.einsum("bir,bir->b", G, G))
    f = np.atleast_1d(np.asarray(objective(inst, loss, X), dtype=float))
    return X, f, grad_norms, iters, status


def gradient_descent(
    inst: McInstance, loss: LossSpec, x0: np.ndarray, cfg: GdConfig | None = None
) -> RunResult:
    cfg = cfg or GdConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = x0[:, None]
    X, f, gn, iters, status = gradient_descent_batch(inst, loss, x0[None], cfg)
    return RunResult(
        final_point=X[0],
        final_objective=float(f[0]),
        final_grad_norm=float(gn[0]),
        iterations=int(iters[0]),
        status=status[0],
    )


def run_batch_chunked(inst, loss, X0, cfg, threads: int = 1, chunk_size: int = 4096):
    """Chunked batch runner; chunk boundaries are fixed independently of the
    thread count, so outputs are identical for any parallelism degree."""
    X0 = np.asarray(X0, dtype=float)
    B = X0.shape[0]
    bounds = [(lo, min(lo + chunk_size, B)) for lo in range(0, B, chunk_size)]
    if threads <= 1 or len(bounds) == 1:
        parts = [gradient_descent_batch(inst, loss, X0[lo:hi], cfg) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(gradient_descent_batch, inst, loss, X0[lo:hi], cfg)
                for lo, hi in bounds
            ]
            parts = [fut.result() for fut in futures]
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(5))


def _solve_newton_step(H: np.ndarray, g: np.ndarray, r: int, restricted: bool):
    """Newton step restricted to the well-conditioned eigenspace.

    Eigenvalues below 1e-8 of the spectral radius are dropped: they span
    orbit directions, flat manifold directions at degenerate minima, or
    noise, and the gradient has no meaningful component there.
    """
    vals, vecs = np.linalg.eigh(H)
    absvals = np.abs(vals)
    vmax = absvals.max(initial=0.0)
    if vmax == 0.0:
        raise SingularHessian("Hessian is zero")
    orbit_nullity = 0 if (restricted or r == 1) else r * (r - 1) // 2
    order = np.argsort(absvals)
    null_idx = set(order[:orbit_nullity].tolist())
    inv = np.zeros_like(vals)
    kept = 0
    for i, v in enumerate(vals):
        if i in null_idx or absvals[i] < 1e-8 * vmax:
            continue
        inv[i] = 1.0 / v
        kept += 1
    if kept == 0:
        raise SingularHessian("no well-conditioned Hessian directions")
    return -vecs @ (inv * (vecs.T @ g))


def newton_refine(
    inst: McInstance,
    loss: LossSpec,
    x: np.ndarray,
    subspace: str = "full",
    tol: float | None = None,
    coarse_tol: float | None = None,
    max_steps: int = 50,
) -> np.ndarray:
    """Damped Newton polish of an approximately critical point.

    For r > 1 in the full space, directions along the orthogonal-orbit null
    space are excluded from the step (the gradient has no component there).
    """
    scale = 1.0 + inst.omega_scale()
    tol = tol if tol is not None else 1e-12 * scale
    coarse_tol = coarse_tol if coarse_tol is not None else 1e-3 * scale
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, r = inst.n, inst.r
    restricted = subspace == "lower_triangular_tangent"
    idx = tangent_indices(n, r) if restricted else None

    g = gradient(inst, loss, x)
    gn = float(np.linalg.norm(g))
    if gn > coarse_tol:
        raise NotNearCritical(f"gradient norm {gn:.3e} above {coarse_tol:.3e}")
    for _ in range(max_steps):
        if gn <= tol:
            break
        H = dense_hessian(inst, loss, x)
        gvec = g.reshape(-1)
        if restricted:
            H = H[np.ix_(idx, idx)]
            gvec = gvec[idx]
        step = _solve_newton_step(H, gvec, r, restricted)
        full_step = np.zeros(n * r)
        if restricted:
            full_step[idx] = step
        else:
            full_step = step
        damping = 1.0
        for _ in range(25):
            cand = x + damping * full_step.reshape(n, r)
            g_cand = gradient(inst, loss, cand)
            gn_cand = float(np.linalg.norm(g_cand))
            if gn_cand < gn:
                x, g, gn = cand, g_cand, gn_cand
                break
            damping *= 0.5
        else:
            break  # no productive damping left
    if gn > tol and not restricted:
        # The quadratic model breaks down near degenerate (e.g. quartic-flat)
        # minima; a trust-region polish of the objective handles those.
        x = _trust_region_polish(inst, loss, x, gn, tol)
    return x


def _trust_region_polish(
    inst: McInstance, loss: LossSpec, x: np.ndarray, gn: float, tol: float
) -> np.ndarray:
    from scipy import optimize as _sopt

    n, r = inst.n, inst.r
    res = _sopt.minimize(
        lambda v: objective(inst, loss, v.reshape(n, r)),
        x.reshape(-1),
        jac=lambda v: gradient(inst, loss, v.reshape(n, r)).reshape(-1),
        hess=lambda v: dense_hessian(inst, loss, v.reshape(n, r)),
        method="trust-exact",
        options={"gtol": tol, "maxiter": 200},
    )
    if float(np.linalg.norm(res.jac)) < gn:
        return res.x.reshape(n, r)
    return x


@dataclass(frozen=True)
class ClassifyTols:
    crit_tol: float = 1e-8
    global_tol: float | None = None  # default 1e-8 * ||M*_Omega||_F^2
    eig_tol: float | None = None  # default 1e-7 * trace scale

    def resolved(self, inst: McInstance, H: np.ndarray) -> "ClassifyTols":
        scale2 = inst.omega_scale() ** 2
        global_tol = self.global_tol if self.global_tol is not None else 1e-8 * max(scale2, 1.0)
        trace_scale = max(1.0, abs(np.trace(H)) / H.shape[0])
        eig_tol = self.eig_tol if self.eig_tol is not None else 1e-7 * trace_scale
        return replace(self, global_tol=global_tol, eig_tol=eig_tol)


def classify_critical_point(
    inst: McInstance,
    loss: LossSpec,
    x: np.ndarray,
    tols: ClassifyTols | None = None,
) -> Classification:
    """First-order check, then spectral second-order classification. Rank-r
    points are canonicalized and judged on the lower-triangular tangent."""
    tols = tols or ClassifyTols()
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    gn = float(np.linalg.norm(gradient(inst, loss, x)))
    if gn > tols.crit_tol:
        return Classification.NOT_CRITICAL
    if inst.r > 1:
        x = canonicalize(x)
        lam_min, _ = min_hessian_eigen(inst, loss, x, "lower_triangular_tangent")
    else:
        lam_min, _ = min_hessian_eigen(inst, loss, x, "full")
    H = dense_hessian(inst, loss, x)
    tols = tols.resolved(inst, H)
    if objective(inst, loss, x) <= tols.global_tol:
        return Classification.GLOBAL_MIN
    if lam_min < -tols.eig_tol:
        return Classification.STRICT_SADDLE
    if lam_min > tols.eig_tol:
        return Classification.SPURIOUS_LOCAL_MIN
    return Classification.DEGENERATE


def is_success(inst: McInstance, x_hat: np.ndarray, rel_tol: float = 1e-4) -> bool:
    x_hat = np.asarray(x_hat, dtype=float)
    if x_hat.ndim == 1:
        x_hat = x_hat[:, None]
    M = inst.m_star()
    err = np.linalg.norm(x_hat @ x_hat.T - M)
    return bool(err <= rel_tol * np.linalg.norm(M))


def is_success_batch(inst: McInstance, X: np.ndarray, rel_tol: float = 1e-4) -> np.ndarray:
    M = inst.m_star()
    diff = np.einsum("bir,bjr->bij", X, X) - M
    errs = np.sqrt(np.einsum("bij,bij->b", diff, diff))
    return errs <= rel_tol * np.linalg.norm(M)
