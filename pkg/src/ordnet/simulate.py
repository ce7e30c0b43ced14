"""Ground-truth network sequences and covariate-grouped Gaussian data.

The generator builds a scale-free base graph, splits its edges into stable
and disappearing sets, adds an appearing set drawn from the non-edges, and
ramps the appearing/disappearing partial correlations linearly across the
ordinal covariate levels.  Precision matrices share one scaling constant so
that stable edges keep identical partial correlations at every level and
zeros stay exactly zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import (
    DataError,
    Edge,
    GroupedDataset,
    NumericalError,
    edge_set_from_matrix,
)

# Largest admissible shared scaling: realised partial correlations are
# target/c, so c <= 1/0.7 keeps them within 30% of their targets.
_MAX_SCALE = 1.0 / 0.7


def _rng(seed: int | np.random.SeedSequence | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SimulationConfig:
    """Experimental design for one simulated dataset.

    Defaults reproduce the benchmark design: 100 nodes, covariate levels 1-4,
    a 100-edge scale-free base network with 50 appearing and 50 disappearing
    edges, 150 samples per level, and target partial-correlation magnitude
    0.2.
    """

    p: int = 100
    levels: tuple[int, ...] = (1, 2, 3, 4)
    n_base_edges: int | None = None
    n_appearing: int = 50
    n_disappearing: int = 50
    n_per_group: int = 150
    partial_corr_magnitude: float = 0.2
    jitter_margin: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(int(a) for a in self.levels))
        if self.p < 3:
            raise DataError("simulation needs at least 3 nodes")
        if len(self.levels) < 1:
            raise DataError("at least one covariate level required")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise DataError(f"levels must be strictly increasing, got {self.levels}")
        if self.n_per_group < 2:
            raise DataError("n_per_group must be at least 2")
        if not 0.0 < self.partial_corr_magnitude < 1.0:
            raise DataError("partial_corr_magnitude must lie in (0, 1)")
        if self.jitter_margin <= 0.0:
            raise DataError("jitter_margin must be positive")
        m = self.p * (self.p - 1) // 2
        base = self.base_edges
        if not self.p - 1 <= base <= m:
            raise DataError(
                f"n_base_edges must lie in [{self.p - 1}, {m}], got {base}"
            )
        if self.n_disappearing < 0 or self.n_appearing < 0:
            raise DataError("edge trajectory counts must be non-negative")
        if self.n_disappearing > base:
            raise DataError("n_disappearing exceeds the base edge count")
        if self.n_appearing > m - base:
            raise DataError("n_appearing exceeds the available non-edges")

    @property
    def base_edges(self) -> int:
        return self.p if self.n_base_edges is None else self.n_base_edges


@dataclass(frozen=True)
class SimulationTruth:
    """Ground truth for one simulated network sequence.

    ``partial_corr`` holds the realised partial correlations (the evaluation
    target); ``target_partial_corr`` the pre-scaling targets.  ``adjacency``
    contains the edges whose realised value is nonzero at each level.
    """

    p: int
    levels: tuple[int, ...]
    adjacency: dict[int, frozenset[Edge]]
    partial_corr: dict[int, np.ndarray]
    target_partial_corr: dict[int, np.ndarray]
    precision: dict[int, np.ndarray]
    appearing: frozenset[Edge]
    disappearing: frozenset[Edge]
    stable: frozenset[Edge]


def generate_scale_free_graph(
    p: int, n_edges: int, seed: int | np.random.Generator
) -> frozenset[Edge]:
    """Connected preferential-attachment graph with exactly ``n_edges`` edges.

    Nodes arrive one at a time and attach to a single existing node chosen
    with probability proportional to degree; once all ``p`` nodes are placed
    the remaining edges are drawn from the non-edges with probability
    proportional to the product of the endpoint degrees.
    """
    if p < 3:
        raise DataError("graph needs at least 3 nodes")
    max_edges = p * (p - 1) // 2
    if n_edges > max_edges:
        raise DataError(f"n_edges {n_edges} exceeds the maximum {max_edges}")
    if n_edges < p - 1:
        raise DataError(f"need at least {p - 1} edges to connect {p} nodes")
    rng = _rng(seed)
    degree = np.zeros(p, dtype=float)
    edges: set[Edge] = {(0, 1)}
    degree[0] = degree[1] = 1.0
    for t in range(2, p):
        probs = degree[:t] / degree[:t].sum()
        target = int(rng.choice(t, p=probs))
        edges.add((target, t))
        degree[target] += 1.0
        degree[t] += 1.0
    if len(edges) < n_edges:
        pairs = np.array(list(itertools.combinations(range(p), 2)), dtype=int)
        present = np.array([(i, j) in edges for i, j in pairs])
        while len(edges) < n_edges:
            weights = degree[pairs[:, 0]] * degree[pairs[:, 1]]
            weights[present] = 0.0
            weights /= weights.sum()
            k = int(rng.choice(len(pairs), p=weights))
            i, j = int(pairs[k, 0]), int(pairs[k, 1])
            edges.add((i, j))
            present[k] = True
            degree[i] += 1.0
            degree[j] += 1.0
    return frozenset(edges)


def assign_edge_trajectories(
    base: frozenset[Edge],
    p: int,
    n_appearing: int,
    n_disappearing: int,
    seed: int | np.random.Generator,
) -> tuple[frozenset[Edge], frozenset[Edge], frozenset[Edge]]:
    """Split ``base`` into disappearing/stable edges and draw appearing ones.

    Returns ``(appearing, disappearing, stable)``; appearing edges are drawn
    uniformly from the non-edges of ``base``.
    """
    if n_disappearing > len(base):
        raise DataError("n_disappearing exceeds the base edge count")
    non_edges = [e for e in itertools.combinations(range(p), 2) if e not in base]
    if n_appearing > len(non_edges):
        raise DataError(
            f"n_appearing {n_appearing} exceeds the {len(non_edges)} available non-edges"
        )
    rng = _rng(seed)
    base_sorted = sorted(base)
    dis_idx = rng.choice(len(base_sorted), size=n_disappearing, replace=False)
    disappearing = frozenset(base_sorted[int(k)] for k in dis_idx)
    stable = frozenset(base) - disappearing
    app_idx = rng.choice(len(non_edges), size=n_appearing, replace=False)
    appearing = frozenset(non_edges[int(k)] for k in app_idx)
    return appearing, disappearing, frozenset(stable)


def build_precision_sequence(
    p: int,
    appearing: frozenset[Edge],
    disappearing: frozenset[Edge],
    stable: frozenset[Edge],
    levels: tuple[int, ...],
    magnitude: float,
    jitter_margin: float = 0.02,
    seed: int | np.random.Generator = 0,
) -> SimulationTruth:
    """Construct one positive-definite precision matrix per covariate level.

    At level rank r among L levels, target partial correlations are
    ``sign * magnitude`` on stable edges, ``sign * magnitude * r/(L-1)`` on
    appearing edges and ``sign * magnitude * (1 - r/(L-1))`` on disappearing
    edges; the sign is drawn once per edge and held fixed across levels.  All
    levels share one scaling constant c, so realised partial correlations are
    exactly target/c and zeros stay exactly zero; the construction fails if c
    would push realised values more than 30% away from their targets.
    """
    levels = tuple(int(a) for a in levels)
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DataError(f"levels must be strictly increasing, got {levels}")
    if not 0.0 < magnitude < 1.0:
        raise DataError("magnitude must lie in (0, 1)")
    if jitter_margin <= 0.0:
        raise DataError("jitter_margin must be positive")
    groups = {"stable": sorted(stable), "appearing": sorted(appearing), "disappearing": sorted(disappearing)}
    all_edges = groups["stable"] + groups["appearing"] + groups["disappearing"]
    if len(set(all_edges)) != len(all_edges):
        raise DataError("appearing, disappearing and stable edge sets must be disjoint")
    if any(not 0 <= i < j < p for i, j in all_edges):
        raise DataError("edge indices out of range")
    rng = _rng(seed)
    signs = dict(zip(all_edges, rng.choice((-1.0, 1.0), size=len(all_edges))))

    n_levels = len(levels)
    targets: dict[int, np.ndarray] = {}
    for rank, level in enumerate(levels):
        ramp = rank / (n_levels - 1) if n_levels > 1 else 0.0
        t = np.zeros((p, p))
        for i, j in groups["stable"]:
            t[i, j] = t[j, i] = signs[(i, j)] * magnitude
        for i, j in groups["appearing"]:
            t[i, j] = t[j, i] = signs[(i, j)] * magnitude * ramp
        for i, j in groups["disappearing"]:
            t[i, j] = t[j, i] = signs[(i, j)] * magnitude * (1.0 - ramp)
        targets[level] = t

    max_eig = max(float(np.linalg.eigvalsh(t)[-1]) for t in targets.values())
    scale = max(1.0, max_eig + jitter_margin)
    if scale > _MAX_SCALE * (1.0 + 1e-12):
        raise NumericalError(
            "cannot reach positive definiteness within the 30% partial-correlation "
            f"deviation budget (required scaling {scale:.3f}); reduce the magnitude "
            "or the edge count"
        )

    adjacency: dict[int, frozenset[Edge]] = {}
    partial: dict[int, np.ndarray] = {}
    target_partial: dict[int, np.ndarray] = {}
    precision: dict[int, np.ndarray] = {}
    for level in levels:
        realised = targets[level] / scale
        omega = np.eye(p) - realised
        try:
            np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise NumericalError("constructed precision matrix is not positive definite")
        adjacency[level] = edge_set_from_matrix(realised)
        rho = realised.copy()
        np.fill_diagonal(rho, 1.0)
        partial[level] = rho
        tgt = targets[level].copy()
        np.fill_diagonal(tgt, 1.0)
        target_partial[level] = tgt
        precision[level] = omega
    return SimulationTruth(
        p=p,
        levels=levels,
        adjacency=adjacency,
        partial_corr=partial,
        target_partial_corr=target_partial,
        precision=precision,
        appearing=frozenset(appearing),
        disappearing=frozenset(disappearing),
        stable=frozenset(stable),
    )


def sample_mvn(
    precision: np.ndarray, n: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Draw ``n`` rows from the zero-mean Gaussian with the given precision.

    Uses the factorization precision = L L^T and solves L^T x = z for
    standard-normal z, so the rows have covariance precision^{-1}.
    """
    precision = np.asarray(precision, dtype=float)
    if n < 1:
        raise DataError("need at least one sample")
    try:
        chol = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        raise NumericalError("precision matrix is not positive definite")
    rng = _rng(seed)
    z = rng.standard_normal((n, precision.shape[0]))
    return solve_triangular(chol, z.T, lower=True, trans="T").T


def simulate_experiment(config: SimulationConfig) -> tuple[GroupedDataset, SimulationTruth]:
    """Generate the full benchmark dataset described by ``config``.

    Returns the raw (uncentered) per-level samples and the ground truth.  All
    randomness derives from ``config.seed``; per-level sampling uses
    independent child streams, so results are reproducible.
    """
    root = np.random.SeedSequence(config.seed)
    graph_seed, traj_seed, sign_seed, sample_seed = root.spawn(4)
    base = generate_scale_free_graph(config.p, config.base_edges, np.random.default_rng(graph_seed))
    appearing, disappearing, stable = assign_edge_trajectories(
        base, config.p, config.n_appearing, config.n_disappearing, np.random.default_rng(traj_seed)
    )
    truth = build_precision_sequence(
        config.p,
        appearing,
        disappearing,
        stable,
        config.levels,
        config.partial_corr_magnitude,
        config.jitter_margin,
        np.random.default_rng(sign_seed),
    )
    level_seeds = sample_seed.spawn(len(config.levels))
    data = tuple(
        sample_mvn(truth.precision[level], config.n_per_group, np.random.default_rng(s))
        for level, s in zip(config.levels, level_seeds)
    )
    names = tuple(f"var{i + 1:04d}" for i in range(config.p))
    return GroupedDataset(levels=config.levels, data=data, variable_names=names), truth
