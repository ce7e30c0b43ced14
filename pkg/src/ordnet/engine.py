"""Variational estimation of covariate-linked Gaussian graphical models.

One precision matrix is estimated per ordinal covariate level.  Off-diagonal
entries carry a two-component Gaussian (spike/slab) prior whose mixing
indicator follows a probit regression on the covariate: the inclusion
probability of edge (i, j) at level a is Phi(zeta_ij + a * beta_ij).  The
probit indicator is represented through a latent Gaussian threshold variable,
which makes every variational factor conjugate except the precision matrices
themselves; those are point estimates updated by blockwise conditional
maximisation.  Coordinate updates therefore never decrease the evidence lower
bound (ELBO).

Factors updated each iteration, in this fixed order:
  1. joint edge indicator / latent threshold (per level),
  2. probit intercepts zeta (per edge),
  3. covariate coefficients beta (per edge),
  4. the shared coefficient-scale precision (Gamma),
  5. precision matrices (blockwise maximisation, per level),
then the ELBO is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np
from scipy import special
from scipy.linalg import cho_factor, cho_solve

from .core import DataError, GroupedDataset, NumericalError, sample_covariance

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SQRT_PI = math.sqrt(math.pi)

# Hyperparameter validation allows nu0 == nu1/10 up to rounding, so that the
# default search grid's upper endpoint is usable.
_NU0_SLACK = 1.0 + 1e-9


def edge_count_prior(
    p: int,
    expected_edges: float | None = None,
    sd_edges: float | None = None,
    quad_nodes: int = 80,
) -> tuple[float, float]:
    """Translate edge-count beliefs into probit-intercept prior parameters.

    With intercept prior zeta ~ N(n0, t0_sq) shared in distribution by all
    M = p(p-1)/2 edges, the edge count K is Binomial(M, Phi(zeta)) mixed over
    zeta.  n0 is chosen so Phi(n0) equals expected_edges/M, and t0_sq is found
    by bisection so that sd(K) matches sd_edges; the result is floored at
    0.25.  Defaults: expected_edges = p, sd_edges = p/2.
    """
    if p < 2:
        raise DataError("need at least 2 variables")
    m_edges = p * (p - 1) / 2.0
    e0 = float(p) if expected_edges is None else float(expected_edges)
    s0 = p / 2.0 if sd_edges is None else float(sd_edges)
    if not 0.0 < e0 < m_edges:
        raise DataError(f"expected_edges must lie in (0, {m_edges:g}), got {e0:g}")
    if s0 <= 0.0:
        raise DataError("sd_edges must be positive")
    n0 = float(special.ndtri(e0 / m_edges))
    nodes, weights = np.polynomial.hermite.hermgauss(quad_nodes)

    def edge_count_sd(t0_sq: float) -> float:
        zeta = n0 + _SQRT2 * math.sqrt(t0_sq) * nodes
        phi = special.ndtr(zeta)
        e1 = float(weights @ phi) / _SQRT_PI
        e2 = float(weights @ (phi * phi)) / _SQRT_PI
        var = m_edges * (e1 - e2) + m_edges * m_edges * (e2 - e1 * e1)
        return math.sqrt(max(var, 0.0))

    lo, hi = 1e-12, 1.0
    if edge_count_sd(lo) >= s0:
        return n0, 0.25
    while edge_count_sd(hi) < s0 and hi < 1e6:
        hi *= 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if edge_count_sd(mid) < s0:
            lo = mid
        else:
            hi = mid
    return n0, max(0.5 * (lo + hi), 0.25)


@dataclass(frozen=True)
class Hyperparameters:
    """Fixed model constants shared by all estimation routines.

    ``nu0`` maps each covariate level to its spike standard deviation (a
    plain float is broadcast when the levels are known, see
    ``from_edge_count_prior``); ``nu1`` is the slab standard deviation;
    ``lambda_diag`` the rate of the exponential prior on diagonal precision
    entries (density (lambda/2) exp(-(lambda/2) x)); ``n0``/``t0_sq`` the
    probit-intercept prior mean/variance; ``alpha_sigma``/``beta_sigma`` the
    Gamma prior on the coefficient-scale precision; ``gamma_ebic`` the
    default extended-BIC weight.
    """

    nu0: Mapping[int, float]
    nu1: float = 1.0
    lambda_diag: float = 1.0
    n0: float = 0.0
    t0_sq: float = 1.0
    alpha_sigma: float = 2.0
    beta_sigma: float = 2.0
    gamma_ebic: float = 0.5

    def __post_init__(self) -> None:
        nu0 = {int(a): float(v) for a, v in dict(self.nu0).items()}
        object.__setattr__(self, "nu0", nu0)
        if not nu0:
            raise DataError("nu0 must contain at least one level")
        if self.nu1 <= 0.0:
            raise DataError("nu1 must be positive")
        for a, v in nu0.items():
            if v <= 0.0:
                raise DataError(f"nu0 at level {a} must be positive")
            if v > self.nu1 / 10.0 * _NU0_SLACK:
                raise DataError(
                    f"nu0 at level {a} is {v:g}; the spike must be well separated "
                    f"from the slab (require nu0 <= nu1/10 = {self.nu1 / 10.0:g})"
                )
        if self.lambda_diag <= 0.0:
            raise DataError("lambda_diag must be positive")
        if self.t0_sq <= 0.0:
            raise DataError("t0_sq must be positive")
        if self.alpha_sigma <= 0.0 or self.beta_sigma <= 0.0:
            raise DataError("alpha_sigma and beta_sigma must be positive")
        if not 0.0 <= self.gamma_ebic <= 1.0:
            raise DataError("gamma_ebic must lie in [0, 1]")

    @classmethod
    def from_edge_count_prior(
        cls,
        p: int,
        levels: tuple[int, ...],
        nu0: float | Mapping[int, float],
        *,
        nu1: float = 1.0,
        lambda_diag: float = 1.0,
        expected_edges: float | None = None,
        sd_edges: float | None = None,
        alpha_sigma: float = 2.0,
        beta_sigma: float = 2.0,
        gamma_ebic: float = 0.5,
    ) -> "Hyperparameters":
        """Build hyperparameters with (n0, t0_sq) elicited from edge-count beliefs."""
        n0, t0_sq = edge_count_prior(p, expected_edges, sd_edges)
        if not isinstance(nu0, Mapping):
            nu0 = {int(a): float(nu0) for a in levels}
        return cls(
            nu0=nu0,
            nu1=nu1,
            lambda_diag=lambda_diag,
            n0=n0,
            t0_sq=t0_sq,
            alpha_sigma=alpha_sigma,
            beta_sigma=beta_sigma,
            gamma_ebic=gamma_ebic,
        )

    def nu0_for(self, level: int) -> float:
        try:
            return self.nu0[int(level)]
        except KeyError:
            raise DataError(f"no nu0 configured for level {level}")


@dataclass(frozen=True)
class FitControls:
    """Iteration limits and the ELBO-based stopping rule."""

    max_iter: int = 1000
    elbo_rel_tol: float = 1e-5
    min_iter: int = 5

    def __post_init__(self) -> None:
        if not self.max_iter >= self.min_iter >= 1:
            raise DataError("require max_iter >= min_iter >= 1")
        if self.elbo_rel_tol <= 0.0:
            raise DataError("elbo_rel_tol must be positive")


@dataclass
class VariationalState:
    """All variational factor parameters plus per-level precision estimates.

    Matrices are dense, symmetric, with unused diagonals.  ``probit_levels``
    holds the covariate values used in the probit index, aligned with
    ``levels`` (``fit`` stores mean-centered values there so that results are
    invariant to shifting all levels by a constant).  ``zloc`` records the
    truncation location that defines the current latent-threshold factor;
    the ELBO must evaluate that factor's moments at this stored location.
    """

    levels: tuple[int, ...]
    probit_levels: np.ndarray
    omega: dict[int, np.ndarray]
    ppi: dict[int, np.ndarray]
    ez: dict[int, np.ndarray]
    ez2: dict[int, np.ndarray]
    zloc: dict[int, np.ndarray]
    zeta_mean: np.ndarray
    zeta_var: np.ndarray
    beta_mean: np.ndarray
    beta_var: np.ndarray
    sigma_shape: float
    sigma_rate: float

    @property
    def p(self) -> int:
        return self.zeta_mean.shape[0]

    def probit_level(self, level: int) -> float:
        return float(self.probit_levels[self.levels.index(int(level))])

    def copy(self) -> "VariationalState":
        return VariationalState(
            levels=self.levels,
            probit_levels=self.probit_levels.copy(),
            omega={a: m.copy() for a, m in self.omega.items()},
            ppi={a: m.copy() for a, m in self.ppi.items()},
            ez={a: m.copy() for a, m in self.ez.items()},
            ez2={a: m.copy() for a, m in self.ez2.items()},
            zloc={a: m.copy() for a, m in self.zloc.items()},
            zeta_mean=self.zeta_mean.copy(),
            zeta_var=self.zeta_var.copy(),
            beta_mean=self.beta_mean.copy(),
            beta_var=self.beta_var.copy(),
            sigma_shape=self.sigma_shape,
            sigma_rate=self.sigma_rate,
        )


@dataclass(frozen=True)
class FitReport:
    """Outcome of one variational fit."""

    elbo_trace: tuple[float, ...]
    iterations: int
    converged: bool
    final_state: VariationalState

    def __post_init__(self) -> None:
        if len(self.elbo_trace) != self.iterations:
            raise DataError("elbo_trace length must equal the iteration count")


def init_state(data: GroupedDataset, hyper: Hyperparameters) -> VariationalState:
    """Standard starting point: identity precisions, inclusion probability 0.5.

    ``probit_levels`` starts at the raw level values; ``fit`` replaces them
    with mean-centered copies before iterating.
    """
    p = data.p
    off = 1.0 - np.eye(p)
    if hyper.alpha_sigma > 1.0:
        beta_var0 = hyper.beta_sigma / (hyper.alpha_sigma - 1.0)
    else:
        beta_var0 = hyper.beta_sigma / hyper.alpha_sigma
    return VariationalState(
        levels=data.levels,
        probit_levels=np.array(data.levels, dtype=float),
        omega={a: np.eye(p) for a in data.levels},
        ppi={a: 0.5 * off for a in data.levels},
        ez={a: np.zeros((p, p)) for a in data.levels},
        ez2={a: off.copy() for a in data.levels},
        zloc={a: np.zeros((p, p)) for a in data.levels},
        zeta_mean=np.full((p, p), hyper.n0),
        zeta_var=np.full((p, p), hyper.t0_sq),
        beta_mean=np.zeros((p, p)),
        beta_var=np.full((p, p), beta_var0),
        sigma_shape=hyper.alpha_sigma,
        sigma_rate=hyper.beta_sigma,
    )


def truncated_normal_moments(
    location: float | np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Moments of a unit-variance Gaussian truncated at 0, by truncation side.

    Returns ``(mean_above0, mean_below0, var_above0, var_below0)`` for a
    parent Gaussian with the given location.  Uses the scaled complementary
    error function, so the results stay finite and accurate for locations of
    magnitude up to about 38.
    """
    m = np.asarray(location, dtype=float)
    hazard_pos = _SQRT_2_OVER_PI / special.erfcx(-m / _SQRT2)
    hazard_neg = _SQRT_2_OVER_PI / special.erfcx(m / _SQRT2)
    mean_above = m + hazard_pos
    mean_below = m - hazard_neg
    var_above = 1.0 - hazard_pos * (hazard_pos + m)
    var_below = 1.0 - hazard_neg * (hazard_neg - m)
    return mean_above, mean_below, var_above, var_below


def _edge_latent_core(
    omega: np.ndarray, m: np.ndarray, nu0: float, nu1: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Optimal joint factor for the edge indicator and its latent threshold.

    ``m`` is the probit index E[zeta] + a E[beta].  Returns the inclusion
    probability p*, E[z] and E[z^2].  The slab/spike posterior odds are
    formed in log space, so extreme density ratios cannot overflow.
    """
    om_sq = omega * omega
    log_slab = -math.log(nu1) - om_sq / (2.0 * nu1 * nu1) + special.log_ndtr(m)
    log_spike = -math.log(nu0) - om_sq / (2.0 * nu0 * nu0) + special.log_ndtr(-m)
    p = special.expit(log_slab - log_spike)
    mean_above, mean_below, var_above, var_below = truncated_normal_moments(m)
    ez = p * mean_above + (1.0 - p) * mean_below
    ez2 = p * (var_above + mean_above * mean_above) + (1.0 - p) * (
        var_below + mean_below * mean_below
    )
    return p, ez, ez2


def update_edge_latents(
    state: VariationalState, hyper: Hyperparameters, level: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Refresh p*, E[z] and E[z^2] for one level, in place.

    Also stores the probit index as the level's new truncation location.
    Returns the updated ``(ppi, ez, ez2)`` matrices.
    """
    level = int(level)
    a_val = state.probit_level(level)
    m = state.zeta_mean + a_val * state.beta_mean
    p, ez, ez2 = _edge_latent_core(state.omega[level], m, hyper.nu0_for(level), hyper.nu1)
    np.fill_diagonal(p, 0.0)
    np.fill_diagonal(ez, 0.0)
    np.fill_diagonal(ez2, 1.0)
    state.ppi[level] = p
    state.ez[level] = ez
    state.ez2[level] = ez2
    state.zloc[level] = m
    return p, ez, ez2


def _zeta_update_core(ez_stack, beta_mean, levels, n0, t0_sq):
    tau = 1.0 / t0_sq + len(levels)
    resid = sum(ez_a - a * beta_mean for ez_a, a in zip(ez_stack, levels))
    mean = (n0 / t0_sq + resid) / tau
    return mean, 1.0 / tau


def update_zeta(
    state: VariationalState, hyper: Hyperparameters, edge: tuple[int, int] | None = None
):
    """Optimal Gaussian factor for the probit intercepts.

    With ``edge=(i, j)`` returns that edge's updated ``(mean, variance)``
    without touching the state; with ``edge=None`` applies the update to all
    edges in place and returns the full ``(mean, variance)`` matrices.
    """
    a_vals = state.probit_levels
    if edge is not None:
        i, j = edge
        ez = [state.ez[a][i, j] for a in state.levels]
        return _zeta_update_core(ez, state.beta_mean[i, j], a_vals, hyper.n0, hyper.t0_sq)
    ez_stack = [state.ez[a] for a in state.levels]
    mean, var = _zeta_update_core(ez_stack, state.beta_mean, a_vals, hyper.n0, hyper.t0_sq)
    state.zeta_mean = mean
    state.zeta_var = np.full_like(mean, var)
    return mean, state.zeta_var


def _beta_update_core(ez_stack, zeta_mean, levels, e_sigma_prec):
    tau = e_sigma_prec + float(sum(a * a for a in levels))
    mean = sum(a * (ez_a - zeta_mean) for ez_a, a in zip(ez_stack, levels)) / tau
    return mean, 1.0 / tau


def update_beta(
    state: VariationalState, hyper: Hyperparameters, edge: tuple[int, int] | None = None
):
    """Optimal Gaussian factor for the covariate coefficients.

    Same calling convention as ``update_zeta``.  The coefficient-scale
    precision enters through its current posterior mean.
    """
    e_prec = state.sigma_shape / state.sigma_rate
    a_vals = state.probit_levels
    if edge is not None:
        i, j = edge
        ez = [state.ez[a][i, j] for a in state.levels]
        return _beta_update_core(ez, state.zeta_mean[i, j], a_vals, e_prec)
    ez_stack = [state.ez[a] for a in state.levels]
    mean, var = _beta_update_core(ez_stack, state.zeta_mean, a_vals, e_prec)
    state.beta_mean = mean
    state.beta_var = np.full_like(mean, var)
    return mean, state.beta_var


def update_sigma(state: VariationalState, hyper: Hyperparameters) -> tuple[float, float]:
    """Optimal Gamma factor for the shared coefficient-scale precision."""
    p = state.p
    iu = np.triu_indices(p, 1)
    m_edges = p * (p - 1) / 2.0
    shape = hyper.alpha_sigma + m_edges / 2.0
    rate = hyper.beta_sigma + 0.5 * float(
        np.sum(state.beta_mean[iu] ** 2 + state.beta_var[iu])
    )
    state.sigma_shape = shape
    state.sigma_rate = rate
    return shape, rate


_IDX_CACHE: dict[int, list[np.ndarray]] = {}


def _column_indices(p: int) -> list[np.ndarray]:
    if p not in _IDX_CACHE:
        _IDX_CACHE[p] = [
            np.concatenate((np.arange(j), np.arange(j + 1, p))) for j in range(p)
        ]
    return _IDX_CACHE[p]


def _invert_pd(matrix: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(matrix, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericalError("precision matrix is not positive definite")
    return cho_solve(factor, np.eye(matrix.shape[0]), check_finite=False)


def _cm_sweep(
    omega: np.ndarray,
    w: np.ndarray,
    scatter: np.ndarray,
    n: int,
    d: np.ndarray,
    lambda_diag: float,
    columns=None,
) -> None:
    """Blockwise conditional-maximisation pass over columns, in place.

    ``w`` must enter as the inverse of ``omega`` and leaves as the inverse of
    the updated matrix (refreshed per column by rank-one identities).  ``d``
    holds the expected prior precision of each off-diagonal entry.  Each
    column update solves the column's stationary conditions exactly, and the
    diagonal update keeps the Schur complement at n/(s_jj + lambda) > 0, so
    positive definiteness is preserved.
    """
    p = omega.shape[0]
    idx_all = _column_indices(p)
    cols = range(p) if columns is None else columns
    for j in cols:
        idx = idx_all[j]
        s12 = scatter[idx, j]
        s22 = scatter[j, j] + lambda_diag
        w12 = w[idx, j]
        inv11 = w[np.ix_(idx, idx)] - np.outer(w12, w12) / w[j, j]
        system = s22 * inv11
        system[np.diag_indices(p - 1)] += d[idx, j]
        try:
            factor = cho_factor(system, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise NumericalError(
                "singular column system in the precision update; "
                "increase nu0 or lambda_diag"
            )
        u = -cho_solve(factor, s12, check_finite=False)
        t = inv11 @ u
        v = n / s22
        omega[idx, j] = omega[j, idx] = u
        omega[j, j] = v + float(u @ t)
        w[np.ix_(idx, idx)] = inv11 + np.outer(t, t) / v
        w[idx, j] = w[j, idx] = -t / v
        w[j, j] = 1.0 / v


def _expected_prior_precision(ppi: np.ndarray, nu0: float, nu1: float) -> np.ndarray:
    return ppi / (nu1 * nu1) + (1.0 - ppi) / (nu0 * nu0)


def cm_update_precision(
    state: VariationalState,
    hyper: Hyperparameters,
    scatter: np.ndarray,
    n: int,
    level: int,
    columns=None,
) -> np.ndarray:
    """Conditional-maximisation update of one level's precision matrix.

    Performs one pass over the requested columns (all by default), stores the
    result in the state and returns it.  ``scatter`` is the unnormalised
    cross-product of the level's centered data and ``n`` its sample count.
    """
    level = int(level)
    omega = state.omega[level].copy()
    w = _invert_pd(omega)
    d = _expected_prior_precision(state.ppi[level], hyper.nu0_for(level), hyper.nu1)
    _cm_sweep(omega, w, scatter, n, d, hyper.lambda_diag, columns)
    state.omega[level] = omega
    return omega


def refit_precision(
    omega: np.ndarray,
    scatter: np.ndarray,
    n: int,
    d: np.ndarray,
    lambda_diag: float,
    max_sweeps: int = 100,
    tol: float = 1e-8,
) -> np.ndarray:
    """Iterate conditional-maximisation sweeps under a fixed prior-precision map.

    Used to re-shrink entries after hard edge selection: ``d`` carries slab
    precision on selected edges and spike precision elsewhere.  Stops when the
    largest entry change falls below ``tol`` (relative to the matrix scale).
    """
    omega = np.asarray(omega, dtype=float).copy()
    w = _invert_pd(omega)
    for _ in range(max_sweeps):
        before = omega.copy()
        _cm_sweep(omega, w, scatter, n, d, lambda_diag)
        scale = max(1.0, float(np.max(np.abs(omega))))
        if float(np.max(np.abs(omega - before))) <= tol * scale:
            break
    return omega


def _elbo_terms(
    state: VariationalState,
    hyper: Hyperparameters,
    scatters: Mapping[int, np.ndarray],
    ns: Mapping[int, int],
    covariate_model: bool,
) -> dict[str, float]:
    """All named ELBO contributions; their sum is the ELBO.

    No parameter-dependent term is dropped and constants are kept, so traces
    are comparable across iterations of one fit.
    """
    p = state.p
    iu = np.triu_indices(p, 1)
    m_edges = p * (p - 1) / 2.0
    log_nu1 = math.log(hyper.nu1)
    terms: dict[str, float] = {}

    for level in state.levels:
        omega = state.omega[level]
        scatter = scatters[level]
        n = ns[level]
        nu0 = hyper.nu0_for(level)
        a_val = state.probit_level(level)

        sign, logdet = np.linalg.slogdet(omega)
        if sign <= 0:
            loglik = -np.inf
        else:
            loglik = 0.5 * n * logdet - 0.5 * float(np.sum(scatter * omega)) \
                - 0.5 * n * p * _LOG_2PI
        terms[f"gaussian_loglik[{level}]"] = loglik

        pstar = state.ppi[level][iu]
        om = omega[iu]
        d = _expected_prior_precision(pstar, nu0, hyper.nu1)
        terms[f"edge_prior[{level}]"] = float(
            np.sum(
                -0.5 * _LOG_2PI
                - (pstar * log_nu1 + (1.0 - pstar) * math.log(nu0))
                - 0.5 * om * om * d
            )
        )
        terms[f"diagonal_prior[{level}]"] = p * math.log(hyper.lambda_diag / 2.0) \
            - 0.5 * hyper.lambda_diag * float(np.trace(omega))

        ez = state.ez[level][iu]
        ez2 = state.ez2[level][iu]
        m_q = state.zloc[level][iu]
        m_bar = (state.zeta_mean + a_val * state.beta_mean)[iu]
        index_var = state.zeta_var[iu] + a_val * a_val * state.beta_var[iu]
        sq = ez2 - 2.0 * ez * m_bar + m_bar * m_bar + index_var
        terms[f"latent_loglik[{level}]"] = float(np.sum(-0.5 * _LOG_2PI - 0.5 * sq))

        mean_above, mean_below, var_above, var_below = truncated_normal_moments(m_q)
        e_logq_above = -0.5 * _LOG_2PI - 0.5 * (var_above + (mean_above - m_q) ** 2) \
            - special.log_ndtr(m_q)
        e_logq_below = -0.5 * _LOG_2PI - 0.5 * (var_below + (mean_below - m_q) ** 2) \
            - special.log_ndtr(-m_q)
        terms[f"latent_entropy[{level}]"] = float(
            -np.sum(pstar * e_logq_above + (1.0 - pstar) * e_logq_below)
        )
        terms[f"indicator_entropy[{level}]"] = float(
            -np.sum(special.xlogy(pstar, pstar) + special.xlogy(1.0 - pstar, 1.0 - pstar))
        )

    zm = state.zeta_mean[iu]
    zv = state.zeta_var[iu]
    terms["zeta_prior"] = float(
        np.sum(
            -0.5 * math.log(2.0 * math.pi * hyper.t0_sq)
            - ((zm - hyper.n0) ** 2 + zv) / (2.0 * hyper.t0_sq)
        )
    )
    terms["zeta_entropy"] = float(np.sum(0.5 * np.log(2.0 * math.pi * math.e * zv)))

    if covariate_model:
        shape, rate = state.sigma_shape, state.sigma_rate
        e_prec = shape / rate
        e_log_prec = float(special.digamma(shape)) - math.log(rate)
        bm = state.beta_mean[iu]
        bv = state.beta_var[iu]
        terms["beta_prior"] = float(
            np.sum(-0.5 * _LOG_2PI + 0.5 * e_log_prec - 0.5 * e_prec * (bm * bm + bv))
        )
        terms["beta_entropy"] = float(np.sum(0.5 * np.log(2.0 * math.pi * math.e * bv)))
        terms["sigma_prior"] = (
            hyper.alpha_sigma * math.log(hyper.beta_sigma)
            - float(special.gammaln(hyper.alpha_sigma))
            + (hyper.alpha_sigma - 1.0) * e_log_prec
            - hyper.beta_sigma * e_prec
        )
        terms["sigma_entropy"] = (
            shape
            - math.log(rate)
            + float(special.gammaln(shape))
            + (1.0 - shape) * float(special.digamma(shape))
        )
    return terms


def compute_elbo(
    state: VariationalState,
    hyper: Hyperparameters,
    data: GroupedDataset,
    covariate_model: bool = True,
    return_terms: bool = False,
):
    """Evidence lower bound at the current state.

    Precision matrices enter at their point estimates.  With
    ``return_terms=True`` also returns the named contributions, which the
    fitting loop uses to identify the first non-finite quantity.
    """
    scatters = {a: sample_covariance(y) for a, y in zip(data.levels, data.data)}
    ns = {a: y.shape[0] for a, y in zip(data.levels, data.data)}
    terms = _elbo_terms(state, hyper, scatters, ns, covariate_model)
    value = float(sum(terms.values()))
    if return_terms:
        return value, terms
    return value


_BURN_IN_PASSES = 5
_ANNEAL_STEPS = 6
_ANNEAL_SPAN = 4.0


def fit(
    data: GroupedDataset,
    hyper: Hyperparameters,
    controls: FitControls | None = None,
    *,
    covariate_model: bool = True,
    callback: Callable[[int, VariationalState, float], None] | None = None,
) -> FitReport:
    """Run the full variational algorithm to ELBO convergence.

    ``data`` must be column-centered (``GroupedDataset.prepare``).  With
    ``covariate_model=False`` the coefficients beta are clamped to zero and
    the coefficient-scale factor is skipped, which yields the plain
    single-network spike-and-slab model per level.  The covariate values are
    mean-centered internally, so fits are invariant to shifting every level
    by a constant; reported intercepts refer to the mean level.

    ``callback(iteration, state, elbo)`` runs after every full iteration.
    Raises a numerical error naming the first non-finite ELBO term if the
    objective degenerates.

    Initialisation runs in three deterministic stages before the first
    recorded iteration.  First, each precision matrix is moved from the
    identity to its all-slab ridge estimate (conditional-maximisation
    sweeps with every edge assigned the slab precision 1/nu1^2): from the
    identity the first edge-latent update would see omega = 0, assign every
    edge to the spike, and the ascent would settle in the empty-graph
    stationary point regardless of nu0.  Second, the latent and probit
    factors are pre-equilibrated by a few coordinate passes holding the
    precision matrices fixed, so the edge-level intercepts already pool
    evidence across levels.  Third, the spike is tightened along a short
    geometric path from a deliberately permissive value (nu0/4, where the
    effective inclusion threshold is low) up to the requested nu0, running
    one full coordinate pass at each step.  Because the inclusion
    threshold grows with nu0, this continuation starts from an inclusive
    classification and expels edges as the threshold rises past them, so
    weakly supported edges that pool evidence across levels retain slab
    membership while isolated noise of the same magnitude is dropped.
    All three stages precede the first ELBO evaluation, so the recorded
    trace remains an ascent at the requested hyperparameters.
    """
    if controls is None:
        controls = FitControls()
    if not data.is_centered(1e-6):
        raise DataError("data must be column-centered; call GroupedDataset.prepare()")
    if covariate_model and data.n_levels < 2:
        raise DataError("the covariate model needs at least 2 levels")
    for a in data.levels:
        hyper.nu0_for(a)

    levels = data.levels
    scatters = {a: sample_covariance(y) for a, y in zip(levels, data.data)}
    ns = {a: y.shape[0] for a, y in zip(levels, data.data)}

    state = init_state(data, hyper)
    raw = np.array(levels, dtype=float)
    state.probit_levels = raw - raw.mean() if covariate_model else np.zeros_like(raw)

    inverses = {a: np.eye(data.p) for a in levels}
    slab = np.full((data.p, data.p), 1.0 / (hyper.nu1 * hyper.nu1))
    for a in levels:
        omega, w = state.omega[a], inverses[a]
        for _ in range(50):
            before = omega.copy()
            _cm_sweep(omega, w, scatters[a], ns[a], slab, hyper.lambda_diag)
            scale = max(1.0, float(np.max(np.abs(omega))))
            if float(np.max(np.abs(omega - before))) <= 1e-6 * scale:
                break
    targets = {a: hyper.nu0_for(a) for a in levels}
    start = {a: targets[a] / _ANNEAL_SPAN for a in levels}
    soft = replace(hyper, nu0=start)
    for _ in range(_BURN_IN_PASSES):
        for a in levels:
            update_edge_latents(state, soft, a)
        update_zeta(state, soft)
        if covariate_model:
            update_beta(state, soft)
            update_sigma(state, soft)
    for step in range(1, _ANNEAL_STEPS + 1):
        frac = step / _ANNEAL_STEPS
        annealed = replace(
            hyper, nu0={a: start[a] * _ANNEAL_SPAN ** frac for a in levels}
        )
        for a in levels:
            update_edge_latents(state, annealed, a)
        update_zeta(state, annealed)
        if covariate_model:
            update_beta(state, annealed)
            update_sigma(state, annealed)
        for a in levels:
            d = _expected_prior_precision(state.ppi[a], annealed.nu0_for(a), annealed.nu1)
            _cm_sweep(state.omega[a], inverses[a], scatters[a], ns[a], d, annealed.lambda_diag)

    trace: list[float] = []
    converged = False
    previous: float | None = None
    for iteration in range(1, controls.max_iter + 1):
        for a in levels:
            update_edge_latents(state, hyper, a)
        update_zeta(state, hyper)
        if covariate_model:
            update_beta(state, hyper)
            update_sigma(state, hyper)
        for a in levels:
            d = _expected_prior_precision(state.ppi[a], hyper.nu0_for(a), hyper.nu1)
            _cm_sweep(state.omega[a], inverses[a], scatters[a], ns[a], d, hyper.lambda_diag)
        terms = _elbo_terms(state, hyper, scatters, ns, covariate_model)
        elbo = float(sum(terms.values()))
        if not math.isfinite(elbo):
            bad = next(name for name, v in terms.items() if not math.isfinite(v))
            raise NumericalError(
                f"ELBO term '{bad}' became non-finite at iteration {iteration}"
            )
        trace.append(elbo)
        if callback is not None:
            callback(iteration, state, elbo)
        if previous is not None and iteration >= controls.min_iter:
            if abs(elbo - previous) <= controls.elbo_rel_tol * max(1.0, abs(previous)):
                converged = True
                break
        previous = elbo
    return FitReport(
        elbo_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
        final_state=state,
    )
