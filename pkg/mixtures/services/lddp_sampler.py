"""
Truncated blocked Gibbs sampler for the single-weights LDDP: a mixture of
normal linear regressions whose weights do not depend on the covariates.

    y_i | z_i = l ~ N(x_i' beta_l, 1 / tau_l)
    beta_l ~ N(mu, Sigma),  tau_l ~ Gamma(a, b)
    mu ~ N(m0, S0),         Sigma ~ IW(nu, nu * Psi)

The inverse-Wishart is parameterized by its scale matrix, so that
E[Sigma^-1] = Psi^-1.
"""

import logging
import time
from typing import Optional

import numpy as np
from scipy import linalg, stats

from core.exceptions import ShapeError
from core.utils import RandomLike, seed_of
from mixtures.config import LddpConfig
from mixtures.draws import FitReport, PosteriorDraws
from mixtures.hyperparams import LddpHyperparams, is_positive_definite, kmeans_labels, ridge_repair
from mixtures.services.stick_breaking import (
    log_weights,
    sample_allocations,
    update_alpha,
    update_sticks,
)

logger = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)


def _draw_normal(precision: np.ndarray, linear: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw from N(precision^-1 linear, precision^-1)"""
    chol = linalg.cholesky(precision, lower=True)
    mean = linalg.cho_solve((chol, True), linear)
    return mean + linalg.solve_triangular(chol.T, rng.standard_normal(linear.size), lower=False)


class LddpGibbsSampler:
    """One chain of the LDDP blocked Gibbs sampler"""

    def __init__(self, y, X, hp: LddpHyperparams, cfg: LddpConfig):
        self.y = np.asarray(y, dtype=float).ravel()
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.X.shape[0] != self.y.size:
            raise ShapeError(f"design has {self.X.shape[0]} rows but the response has {self.y.size} values")
        if self.X.shape[1] != hp.dim:
            raise ShapeError(f"design has {self.X.shape[1]} columns, hyperparameters have {hp.dim}")
        self.hp = hp
        self.cfg = cfg
        self.n, self.q = self.X.shape
        self.L = cfg.truncation
        if 0 < self.n < self.L:
            logger.warning(f"Only {self.n} observations for truncation L={self.L}")
        self.S0_inv = linalg.inv(hp.S0)
        self.S0_inv_m0 = self.S0_inv @ hp.m0
        self.iw_scale = hp.nu * hp.Psi
        self.ridge_repairs = 0

    def _initial_allocations(self, rng: np.random.Generator) -> np.ndarray:
        k = min(self.cfg.init_clusters, self.L, self.n)
        if k < 2 or np.unique(self.y).size < k:
            return np.zeros(self.n, dtype=np.int64)
        labels, _ = kmeans_labels(self.y.reshape(-1, 1), k, rng)
        return labels

    def _log_kernels(self, beta, tau, weights) -> np.ndarray:
        fitted = self.X @ beta.T
        return (log_weights(weights)
                + 0.5 * (np.log(tau) - LOG_2PI)
                - 0.5 * tau * (self.y[:, None] - fitted) ** 2)

    def _update_regressions(self, z, beta, tau, mu, sigma, rng) -> None:
        hp = self.hp
        sigma_inv = linalg.inv(sigma)
        prior_linear = sigma_inv @ mu
        for index in range(self.L):
            members = z == index
            X_l, y_l = self.X[members], self.y[members]
            precision = sigma_inv + tau[index] * X_l.T @ X_l
            beta[index] = _draw_normal(precision, prior_linear + tau[index] * X_l.T @ y_l, rng)
            residuals = y_l - X_l @ beta[index]
            rate = hp.b + 0.5 * float(residuals @ residuals)
            tau[index] = rng.gamma(hp.a + 0.5 * y_l.size, 1.0 / rate)

    def _update_base_measure(self, beta, sigma, rng):
        hp = self.hp
        sigma_inv = linalg.inv(sigma)
        precision = self.S0_inv + self.L * sigma_inv
        mu = _draw_normal(precision, self.S0_inv_m0 + sigma_inv @ beta.sum(axis=0), rng)
        diff = beta - mu
        draw = stats.invwishart.rvs(df=hp.nu + self.L, scale=self.iw_scale + diff.T @ diff, random_state=rng)
        draw = np.asarray(draw, dtype=float).reshape(self.q, self.q)
        draw = 0.5 * (draw + draw.T)
        if not is_positive_definite(draw):
            draw, _ = ridge_repair(draw, 'base covariance draw')
            self.ridge_repairs += 1
        return mu, draw

    def run(self, rng: RandomLike = None) -> PosteriorDraws:
        seed = seed_of(rng)
        generator = np.random.default_rng(rng)
        cfg, hp, L, q = self.cfg, self.hp, self.L, self.q
        self.ridge_repairs = 0

        z = self._initial_allocations(generator)
        mu = hp.m0.copy()
        sigma = hp.Psi.copy()
        beta = np.tile(mu, (L, 1))
        tau = np.full(L, hp.a / (2.0 * hp.b))
        alpha = cfg.alpha_init
        self._update_regressions(z, beta, tau, mu, sigma, generator)
        sticks, weights = update_sticks(z, L, alpha, generator)

        S = cfg.n_retained
        out_z = np.zeros((S, self.n), dtype=np.int64)
        out_w = np.zeros((S, L))
        out_v = np.zeros((S, L))
        out_alpha = np.zeros(S)
        out_beta = np.zeros((S, L, q))
        out_tau = np.zeros((S, L))
        out_mu = np.zeros((S, q))
        out_sigma = np.zeros((S, q, q))

        logger.info(f"LDDP sampler: n={self.n}, design width={q}, L={L}, "
                    f"{cfg.n_burn} burn-in + {cfg.n_iter} sweeps")
        started = time.perf_counter()
        kept = 0
        n_sweeps = cfg.n_burn + cfg.n_iter
        for sweep in range(n_sweeps):
            z = sample_allocations(self._log_kernels(beta, tau, weights), generator)
            sticks, weights = update_sticks(z, L, alpha, generator)
            self._update_regressions(z, beta, tau, mu, sigma, generator)
            mu, sigma = self._update_base_measure(beta, sigma, generator)
            alpha = update_alpha(sticks, cfg.a_alpha, cfg.b_alpha, generator)

            retained = sweep - cfg.n_burn
            if retained >= 0 and retained % cfg.thin == 0:
                out_z[kept] = z
                out_w[kept] = weights
                out_v[kept] = sticks
                out_alpha[kept] = alpha
                out_beta[kept] = beta
                out_tau[kept] = tau
                out_mu[kept] = mu
                out_sigma[kept] = sigma
                kept += 1
        elapsed = time.perf_counter() - started

        report = FitReport(
            kind='lddp',
            n_sweeps=n_sweeps,
            n_retained=kept,
            seconds=elapsed,
            mean_sweep_seconds=elapsed / max(n_sweeps, 1),
            ridge_repairs=self.ridge_repairs + int(hp.ridge_repaired),
            seed=seed if seed is not None else cfg.seed,
        )
        if hp.b_floored:
            report.warnings.append("residual variance was numerically zero; b was floored")
        logger.info(f"LDDP sampler finished in {elapsed:.1f}s")

        return PosteriorDraws(
            kind='lddp',
            allocations=out_z,
            weights=out_w,
            sticks=out_v,
            alpha=out_alpha,
            params={'beta': out_beta, 'tau': out_tau, 'mu': out_mu, 'sigma': out_sigma},
            report=report,
            meta={'design_width': q, 'config': cfg.model_dump(), 'hyperparams': hp.to_dict()},
        )


def fit_lddp(y, X, hp: LddpHyperparams, cfg: LddpConfig, rng: Optional[RandomLike] = None) -> PosteriorDraws:
    """Run one LDDP chain; X carries the intercept column"""
    return LddpGibbsSampler(y, X, hp, cfg).run(cfg.seed if rng is None else rng)
