"""Multistart enumeration of critical points, lower-bound checks, success-rate
experiments, and the uniform-basin statistical test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    DimensionMismatch,
    MissingS,
    NotNearCritical,
    SingularHessian,
    UnmatchedEndpoint,
)
from .graphs import BlockSparsityGraph, analyze_graph, induce_measurement_set
from .instances import McInstance, assemble_instance, build_canonical_ground_truth, perturb
from .landscape import LossSpec, canonicalize, gradient, min_hessian_eigen, objective
from .optimize import (
    Classification,
    ClassifyTols,
    GdConfig,
    Status,
    classify_critical_point,
    is_success_batch,
    newton_refine,
    run_batch_chunked,
    sample_radial_init,
)

COARSE_RADIUS = 0.02


@dataclass
class CriticalPointRecord:
    canonical_rep: np.ndarray
    objective: float
    grad_norm: float
    lambda_min: float
    classification: Classification
    hit_count: int


@dataclass
class CensusReport:
    classes: list[CriticalPointRecord]
    n_starts: int
    dedup_radius: float
    n_converged: int
    n_nonconverged: int

    def by_classification(self, kind: Classification) -> list[CriticalPointRecord]:
        return [c for c in self.classes if c.classification == kind]

    @property
    def spurious_classes(self) -> int:
        return len(self.by_classification(Classification.SPURIOUS_LOCAL_MIN))

    @property
    def global_classes(self) -> int:
        return len(self.by_classification(Classification.GLOBAL_MIN))

    def point_count(self, kind: Classification, r: int) -> int:
        """Distinct points represented: for r=1 each canonical class stands
        for the +/- pair (two points unless the representative is zero)."""
        total = 0
        for rec in self.by_classification(kind):
            if r == 1 and np.linalg.norm(rec.canonical_rep) > 0:
                total += 2
            else:
                total += 1
        return total


def _cluster(points: list[np.ndarray], radius: float) -> list[list[int]]:
    """Greedy first-fit clustering in input order (deterministic)."""
    reps: list[np.ndarray] = []
    clusters: list[list[int]] = []
    for i, p in enumerate(points):
        for c, rep in enumerate(reps):
            if np.linalg.norm(p - rep) <= radius:
                clusters[c].append(i)
                break
        else:
            reps.append(p)
            clusters.append([i])
    return clusters


def multistart_census(
    inst: McInstance,
    loss: LossSpec,
    n_starts: int,
    seed: int,
    cfg: GdConfig | None = None,
    dist: str = "gaussian",
    sigma: float = 1.0,
    radius: float = 1.0,
    dedup_radius: float = 1e-4,
    threads: int = 1,
    classify_tols: ClassifyTols | None = None,
) -> CensusReport:
    """Run n_starts seeded descents, polish and deduplicate the endpoints, and
    classify one representative per cluster.

    Endpoints are canonicalized, grouped coarsely, and only one point per
    coarse group is Newton-refined; groups are then re-merged at
    ``dedup_radius``. Non-converged starts are excluded from hit counts.
    """
    if n_starts < 1:
        raise DimensionMismatch("n_starts must be >= 1")
    cfg = cfg or GdConfig()
    X0 = sample_radial_init(
        dist, inst.n, inst.r, seed, sigma=sigma, radius=radius, size=n_starts
    )
    X, _, _, _, status = run_batch_chunked(inst, loss, X0, cfg, threads=threads)
    converged = [i for i in range(n_starts) if status[i] == Status.CONVERGED]

    canon = [canonicalize(X[i]) for i in converged]
    coarse = _cluster(canon, COARSE_RADIUS)

    refined: list[np.ndarray] = []
    sizes: list[int] = []
    for group in coarse:
        rep = canon[group[0]]
        try:
            rep = canonicalize(newton_refine(inst, loss, rep))
        except (NotNearCritical, SingularHessian):
            pass
        refined.append(rep)
        sizes.append(len(group))

    records: list[CriticalPointRecord] = []
    for group in _cluster(refined, dedup_radius):
        rep = refined[group[0]]
        hits = sum(sizes[g] for g in group)
        gn = float(np.linalg.norm(gradient(inst, loss, rep)))
        subspace = "lower_triangular_tangent" if inst.r > 1 else "full"
        lam_min, _ = min_hessian_eigen(inst, loss, rep, subspace)
        kind = classify_critical_point(inst, loss, rep, classify_tols)
        records.append(
            CriticalPointRecord(
                canonical_rep=rep,
                objective=float(objective(inst, loss, rep)),
                grad_norm=gn,
                lambda_min=float(lam_min),
                classification=kind,
                hit_count=hits,
            )
        )
    records.sort(key=lambda rec: (rec.objective, rec.canonical_rep.tobytes()))
    return CensusReport(
        classes=records,
        n_starts=n_starts,
        dedup_radius=dedup_radius,
        n_converged=len(converged),
        n_nonconverged=n_starts - len(converged),
    )


def check_lower_bound(
    report: CensusReport,
    g: BlockSparsityGraph | None,
    r: int,
    s_vertices=None,
    count: str | None = None,
) -> dict:
    """Compare the census against the guaranteed minimum number of spurious
    minima for the canonical construction on independent set S.

    With B = 2^{r(|S|-1)} - 1 orbit classes, the point count at r=1 is 2B.
    ``count`` selects "points" (default for r=1) or "orbits" (default r>1).
    """
    if s_vertices is not None:
        s_size = len(frozenset(s_vertices))
    elif g is not None:
        s_size = len(analyze_graph(g).max_independent_set)
    else:
        raise MissingS("need either s_vertices or a graph to size S")
    if count is None:
        count = "points" if r == 1 else "orbits"
    orbit_bound = 2 ** (r * (s_size - 1)) - 1
    if count == "points":
        if r != 1:
            raise DimensionMismatch("point counting is only defined for r=1")
        bound = 2 * orbit_bound
        found = report.point_count(Classification.SPURIOUS_LOCAL_MIN, r)
    elif count == "orbits":
        bound = orbit_bound
        found = report.spurious_classes
    else:
        raise DimensionMismatch(f"unknown count mode {count!r}")
    return {"bound": bound, "found": found, "satisfied": found >= bound}


def make_gamma_grid(count: int, lo: float = 0.0, hi: float = 0.5) -> tuple[float, ...]:
    """``count`` midpoints of equal subdivisions of the open interval (lo, hi)."""
    if count < 1 or not hi > lo:
        raise DimensionMismatch("need count >= 1 and hi > lo")
    return tuple(lo + (hi - lo) * (2 * k - 1) / (2 * count) for k in range(1, count + 1))


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise DimensionMismatch("need 0 <= successes <= trials, trials >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SuccessRateSpec:
    graph: BlockSparsityGraph
    s_vertices: frozenset
    n: int
    r: int
    gamma_grid: tuple
    trials: int
    dist: str = "gaussian"
    seed: int = 0
    p: float = float("nan")

    def __post_init__(self):
        if self.trials < 1:
            raise DimensionMismatch("trials must be >= 1")
        if not self.gamma_grid:
            raise DimensionMismatch("gamma_grid must be nonempty")


@dataclass(frozen=True)
class SuccessRateRow:
    gamma: float
    n: int
    r: int
    S_size: int
    p: float
    seed: int
    trials: int
    successes: int
    rate: float
    wilson_ci_low: float
    wilson_ci_high: float


@dataclass
class SuccessRateTable:
    rows: list = field(default_factory=list)

    COLUMNS = (
        "gamma", "n", "r", "S_size", "p", "seed", "trials", "successes",
        "rate", "wilson_ci_low", "wilson_ci_high",
    )


def success_rate_experiment(
    spec: SuccessRateSpec,
    cfg: GdConfig | None = None,
    threads: int = 1,
) -> SuccessRateTable:
    """For each gamma: one seeded perturbation of the canonical ground truth,
    ``trials`` independent descents, exact-recovery rate with Wilson CI."""
    cfg = cfg or GdConfig()
    omega = induce_measurement_set(spec.graph, spec.n, spec.r)
    x0_star = build_canonical_ground_truth(spec.graph, spec.s_vertices, spec.n, spec.r)
    seeds = np.random.SeedSequence(spec.seed).generate_state(2 * len(spec.gamma_grid))
    table = SuccessRateTable()
    for k, gamma in enumerate(spec.gamma_grid):
        x_eps = perturb(x0_star, gamma, int(seeds[2 * k]))
        inst = assemble_instance(x_eps, omega, spec.graph, spec.s_vertices)
        X0 = sample_radial_init(
            spec.dist, spec.n, spec.r, int(seeds[2 * k + 1]), size=spec.trials
        )
        X, _, _, _, status = run_batch_chunked(inst, LossSpec.l2(), X0, cfg, threads=threads)
        converged = np.array([s == Status.CONVERGED for s in status], dtype=bool)
        ok = is_success_batch(inst, X) & converged
        successes = int(np.sum(ok))
        lo, hi = wilson_interval(successes, spec.trials)
        table.rows.append(
            SuccessRateRow(
                gamma=float(gamma),
                n=spec.n,
                r=spec.r,
                S_size=len(spec.s_vertices),
                p=spec.p,
                seed=spec.seed,
                trials=spec.trials,
                successes=successes,
                rate=successes / spec.trials,
                wilson_ci_low=lo,
                wilson_ci_high=hi,
            )
        )
    return table


@dataclass
class EqualProbabilityReport:
    histogram: dict
    chi_square_p: float
    trials: int


def known_global_minima(inst: McInstance) -> dict:
    """Closed-form global minima of an unperturbed rank-1 canonical instance:
    one point per sign assignment on the S blocks, zeros elsewhere."""
    if inst.s_vertices is None:
        raise MissingS("instance does not record its independent set")
    if inst.r != 1:
        raise DimensionMismatch("closed-form minima are available for r=1 only")
    s = sorted(inst.s_vertices)
    minima = {}
    for bits in range(2 ** len(s)):
        signs = tuple(1 if (bits >> i) & 1 == 0 else -1 for i in range(len(s)))
        x = np.zeros((inst.n, 1))
        for sign, v in zip(signs, s):
            x[v - 1, 0] = sign
        minima[signs] = x
    return minima


def equal_probability_test(
    inst: McInstance,
    trials: int,
    seed: int,
    cfg: GdConfig | None = None,
    match_tol: float = 0.1,
    threads: int = 1,
) -> EqualProbabilityReport:
    """Histogram of Gaussian-initialized descent endpoints over the known
    global minima, with a chi-square uniformity p-value."""
    minima = known_global_minima(inst)
    keys = sorted(minima)
    targets = np.stack([minima[k] for k in keys])  # (C, n, 1)
    X0 = sample_radial_init("gaussian", inst.n, inst.r, seed, size=trials)
    X, _, _, _, _ = run_batch_chunked(inst, LossSpec.l2(), X0, cfg or GdConfig(), threads=threads)
    diff = X[:, None] - targets[None]
    dists = np.sqrt(np.einsum("bcir,bcir->bc", diff, diff))
    nearest = np.argmin(dists, axis=1)
    best = dists[np.arange(trials), nearest]
    bad = np.nonzero(best > match_tol)[0]
    if bad.size:
        raise UnmatchedEndpoint(
            f"{bad.size} endpoints matched no known minimum within {match_tol}"
        )
    counts = np.bincount(nearest, minlength=len(keys))
    _, pval = stats.chisquare(counts)
    histogram = {k: int(c) for k, c in zip(keys, counts)}
    return EqualProbabilityReport(histogram=histogram, chi_square_p=float(pval), trials=trials)
