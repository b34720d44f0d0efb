"""EM mixture models: Gaussian and multivariate Student-t.

Both fits share the same skeleton: initialize from a k-means run with the
same seed, iterate E/M steps with full covariance matrices, add a ridge
of 1e-6 to every covariance diagonal each M-step, and stop when the
relative log-likelihood improvement drops below tol.  The observed-data
log-likelihood is recorded per iteration and is non-decreasing (EM
guarantee) except across a collapsed-component reinitialization, which is
flagged in the result.

The t-mixture follows the standard EM treatment with latent scale
weights u_ic = (ν_c + d)/(ν_c + mahalanobis²); its scale matrices divide
by Σ_i z_ic (not Σ_i z_ic u_ic), and in estimate mode each ν_c solves the
dof score equation by bisection over [0.1, 200].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import digamma, gammaln, logsumexp

from .dataset import Dataset
from .errors import ConfigError
from .kmeans import kmeans
from .partition import Partition

RIDGE = 1e-6
COLLAPSE_WEIGHT = 1e-10
DOF_MIN, DOF_MAX = 0.1, 200.0
DOF_INIT = 10.0
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianMixtureParams:
    """weights (k,), means (k,d), covariances (k,d,d); weights on the
    simplex, covariances symmetric with eigenvalues >= the ridge."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    @property
    def k(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TMixtureParams:
    """Student-t analogue of GaussianMixtureParams plus per-component
    degrees of freedom in [0.1, 200]."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    dof: np.ndarray

    @property
    def k(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class GmmResult:
    params: GaussianMixtureParams
    partition: Partition
    loglik: float
    loglik_history: List[float]
    responsibilities: np.ndarray
    n_iter: int
    collapsed: bool


@dataclass(frozen=True)
class TmmResult:
    params: TMixtureParams
    partition: Partition
    loglik: float
    loglik_history: List[float]
    responsibilities: np.ndarray
    n_iter: int
    collapsed: bool
    dof_flagged: bool


def _chol_stats(points: np.ndarray, mean: np.ndarray, cov: np.ndarray):
    """(squared Mahalanobis distances, log-determinant) via Cholesky.

    Escalates the diagonal jitter a few times if factorization fails;
    with the standard ridge this path is never taken in practice.
    """
    d = cov.shape[0]
    sym = 0.5 * (cov + cov.T)
    jitter = 0.0
    for _ in range(4):
        try:
            chol = np.linalg.cholesky(sym + jitter * np.eye(d))
            break
        except np.linalg.LinAlgError:
            jitter = RIDGE if jitter == 0.0 else jitter * 100.0
    else:
        raise np.linalg.LinAlgError("covariance not positive definite")
    diff = (points - mean).T
    solved = solve_triangular(chol, diff, lower=True)
    maha2 = np.einsum("ij,ij->j", solved, solved)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    return maha2, logdet


def _init_from_kmeans(ds: Dataset, k: int, seed: int):
    """Common EM initialization: k-means partition -> (weights, means, covs)."""
    km = kmeans(ds, k, seed)
    labels = km.partition.labels
    k_eff = km.partition.k
    n, d = ds.n, ds.d
    weights = np.empty(k_eff, dtype=np.float64)
    means = np.empty((k_eff, d), dtype=np.float64)
    covs = np.empty((k_eff, d, d), dtype=np.float64)
    for c in range(k_eff):
        member = ds.points[labels == c]
        weights[c] = member.shape[0] / n
        means[c] = member.mean(axis=0)
        centered = member - means[c]
        covs[c] = centered.T @ centered / member.shape[0] + RIDGE * np.eye(d)
    return weights, means, covs


def _weighted_covariance(
    points: np.ndarray, mean: np.ndarray, row_weights: np.ndarray, denom: float
) -> np.ndarray:
    centered = points - mean
    cov = (row_weights[:, None] * centered).T @ centered / denom
    cov = 0.5 * (cov + cov.T)
    return cov + RIDGE * np.eye(points.shape[1])


def _reinit_component(
    points: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Fresh (mean, covariance) for a collapsed component: a random data
    point with the dataset's own covariance."""
    n, d = points.shape
    mean = points[int(rng.integers(n))].copy()
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / n + RIDGE * np.eye(d)
    return mean, cov


def _check_mixture_args(ds: Dataset, k: int) -> None:
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if ds.n < k:
        raise ConfigError(f"need n >= k, got n={ds.n}, k={k}")


def gmm_fit(
    ds: Dataset, k: int, seed: int, max_iter: int = 200, tol: float = 1e-6
) -> GmmResult:
    """Fit a k-component full-covariance Gaussian mixture by EM."""
    _check_mixture_args(ds, k)
    points = ds.points
    n, d = points.shape
    rng = np.random.default_rng(seed)
    weights, means, covs = _init_from_kmeans(ds, k, seed)
    k = weights.shape[0]

    history: List[float] = []
    collapsed = False
    resp = np.full((n, k), 1.0 / k)
    for _ in range(max_iter):
        # E-step
        log_prob = np.empty((n, k), dtype=np.float64)
        for c in range(k):
            maha2, logdet = _chol_stats(points, means[c], covs[c])
            log_prob[:, c] = (
                np.log(weights[c]) - 0.5 * (d * _LOG_2PI + logdet + maha2)
            )
        log_norm = logsumexp(log_prob, axis=1)
        loglik = float(log_norm.sum())
        resp = np.exp(log_prob - log_norm[:, None])
        history.append(loglik)
        if len(history) >= 2:
            prev = history[-2]
            if (loglik - prev) / max(abs(prev), 1e-300) < tol:
                break
        # M-step
        comp_mass = resp.sum(axis=0)
        for c in range(k):
            if comp_mass[c] / n < COLLAPSE_WEIGHT:
                collapsed = True
                means[c], covs[c] = _reinit_component(points, rng)
                comp_mass[c] = 1.0
                continue
            means[c] = resp[:, c] @ points / comp_mass[c]
            covs[c] = _weighted_covariance(points, means[c], resp[:, c], comp_mass[c])
        weights = comp_mass / comp_mass.sum()

    params = GaussianMixtureParams(weights.copy(), means.copy(), covs.copy())
    return GmmResult(
        params=params,
        partition=Partition(resp.argmax(axis=1)),
        loglik=history[-1],
        loglik_history=history,
        responsibilities=resp,
        n_iter=len(history),
        collapsed=collapsed,
    )


def _solve_dof(nu_old: float, d: int, zc: np.ndarray, uc: np.ndarray, mass: float):
    """One dof update: bisection on the score equation over [0.1, 200].

    g(ν) = log(ν/2) − ψ(ν/2) + 1 + (Σ z(log u − u))/Σz
           + ψ((ν_old+d)/2) − log((ν_old+d)/2)

    Returns (new_nu, flagged); a non-bracketing interval keeps ν_old.
    """
    const = (
        1.0
        + float(zc @ (np.log(uc) - uc)) / mass
        + float(digamma((nu_old + d) / 2.0) - np.log((nu_old + d) / 2.0))
    )

    def score(nu: float) -> float:
        return float(np.log(nu / 2.0) - digamma(nu / 2.0)) + const

    lo, hi = DOF_MIN, DOF_MAX
    f_lo, f_hi = score(lo), score(hi)
    if f_lo == 0.0:
        return lo, False
    if f_hi == 0.0:
        return hi, False
    if np.sign(f_lo) == np.sign(f_hi):
        return nu_old, True
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = score(mid)
        if f_mid == 0.0:
            return mid, False
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


def tmm_fit(
    ds: Dataset,
    k: int,
    seed: int,
    max_iter: int = 200,
    tol: float = 1e-6,
    dof_mode: Union[str, float] = "estimate",
) -> TmmResult:
    """Fit a k-component multivariate Student-t mixture by EM.

    ``dof_mode`` is either "estimate" (default; per-component ν updated
    each M-step) or a positive float fixing ν for every component.  With a
    large fixed ν (e.g. 200) the fit approaches gmm_fit's on the same
    seed.
    """
    _check_mixture_args(ds, k)
    if isinstance(dof_mode, str):
        if dof_mode != "estimate":
            raise ConfigError(f"dof_mode must be 'estimate' or a float, got {dof_mode!r}")
        estimate_dof = True
        dof_value = DOF_INIT
    else:
        estimate_dof = False
        dof_value = float(dof_mode)
        if not (dof_value > 0):
            raise ConfigError(f"fixed dof must be positive, got {dof_value}")

    points = ds.points
    n, d = points.shape
    rng = np.random.default_rng(seed)
    weights, means, covs = _init_from_kmeans(ds, k, seed)
    k = weights.shape[0]
    dof = np.full(k, dof_value, dtype=np.float64)

    history: List[float] = []
    collapsed = False
    dof_flagged = False
    resp = np.full((n, k), 1.0 / k)
    u = np.ones((n, k), dtype=np.float64)
    for _ in range(max_iter):
        # E-step
        log_prob = np.empty((n, k), dtype=np.float64)
        for c in range(k):
            maha2, logdet = _chol_stats(points, means[c], covs[c])
            nu = dof[c]
            log_prob[:, c] = (
                np.log(weights[c])
                + float(gammaln((nu + d) / 2.0) - gammaln(nu / 2.0))
                - 0.5 * (d * np.log(np.pi * nu) + logdet)
                - ((nu + d) / 2.0) * np.log1p(maha2 / nu)
            )
            u[:, c] = (nu + d) / (nu + maha2)
        log_norm = logsumexp(log_prob, axis=1)
        loglik = float(log_norm.sum())
        resp = np.exp(log_prob - log_norm[:, None])
        history.append(loglik)
        if len(history) >= 2:
            prev = history[-2]
            if (loglik - prev) / max(abs(prev), 1e-300) < tol:
                break
        # M-step
        comp_mass = resp.sum(axis=0)
        for c in range(k):
            if comp_mass[c] / n < COLLAPSE_WEIGHT:
                collapsed = True
                means[c], covs[c] = _reinit_component(points, rng)
                dof[c] = dof_value
                comp_mass[c] = 1.0
                continue
            zu = resp[:, c] * u[:, c]
            means[c] = zu @ points / zu.sum()
            covs[c] = _weighted_covariance(points, means[c], zu, comp_mass[c])
            if estimate_dof:
                new_nu, flagged = _solve_dof(
                    dof[c], d, resp[:, c], u[:, c], comp_mass[c]
                )
                dof[c] = new_nu
                dof_flagged = dof_flagged or flagged
        weights = comp_mass / comp_mass.sum()

    params = TMixtureParams(weights.copy(), means.copy(), covs.copy(), dof.copy())
    return TmmResult(
        params=params,
        partition=Partition(resp.argmax(axis=1)),
        loglik=history[-1],
        loglik_history=history,
        responsibilities=resp,
        n_iter=len(history),
        collapsed=collapsed,
        dof_flagged=dof_flagged,
    )
