"""
Truncated blocked Gibbs sampler for a Dirichlet process mixture with a
Gaussian x independent-categorical product kernel.

Component priors are independent: mu_l ~ N(m0, L0), Sigma_l ~ IW(nu0, S0),
pi_l^(j) ~ Dirichlet(eta^(j)). The location/scale pair is updated in two
blocks (mu | Sigma, then Sigma | mu).
"""

import logging
import time
from typing import Optional

import numpy as np
from scipy import linalg, stats

from core.dataset import MixedDataset
from core.exceptions import ArgumentError, ShapeError
from core.utils import RandomLike, seed_of
from mixtures.config import DpmConfig
from mixtures.draws import FitReport, PosteriorDraws
from mixtures.hyperparams import DpmHyperparams, is_positive_definite, kmeans_labels, ridge_repair
from mixtures.services.stick_breaking import (
    log_weights,
    sample_allocations,
    update_alpha,
    update_sticks,
)

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-300


class DpmGibbsSampler:
    """One chain of the DPM blocked Gibbs sampler"""

    def __init__(self, data: MixedDataset, hp: DpmHyperparams, cfg: DpmConfig):
        self.y = data.continuous_block()
        self.codes = data.categorical_block()
        self.signature = data.signature()
        self.hp = hp
        self.cfg = cfg
        self.n = data.n_rows
        self.p = self.signature.p_continuous
        self.L = cfg.truncation

        if self.p == 0 and self.signature.n_categorical == 0:
            raise ArgumentError("the dataset has no columns to cluster")
        if hp.p != self.p:
            raise ShapeError(f"hyperparameters are for p={hp.p}, data has p={self.p}")
        if hp.cardinalities != self.signature.categorical_cardinalities:
            raise ShapeError(
                f"Dirichlet parameters cover {hp.cardinalities}, data has "
                f"{self.signature.categorical_cardinalities}"
            )
        if 0 < self.n < self.L:
            logger.warning(f"Only {self.n} observations for truncation L={self.L}")

        if self.p:
            self.L0_inv = linalg.inv(hp.L0)
            self.L0_inv_m0 = self.L0_inv @ hp.m0
        self.ridge_repairs = 0

    # -- initial state --------------------------------------------------------

    def _initial_allocations(self, rng: np.random.Generator) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        k = min(self.cfg.kmeans_k, self.L, self.n)
        if k < 2:
            return np.zeros(self.n, dtype=np.int64)
        if self.p and np.unique(self.y, axis=0).shape[0] >= k:
            labels, _ = kmeans_labels(self.y, k, rng)
            return labels
        return rng.integers(k, size=self.n).astype(np.int64)

    # -- conditional updates --------------------------------------------------

    def _log_kernels(self, mu, sigma, pi, weights) -> np.ndarray:
        if self.n == 0:
            return np.zeros((0, self.L))
        log_prob = np.tile(log_weights(weights), (self.n, 1))
        for index in np.flatnonzero(weights > 0):
            if self.p:
                chol = linalg.cholesky(sigma[index], lower=True)
                solved = linalg.solve_triangular(chol, (self.y - mu[index]).T, lower=True)
                log_prob[:, index] += (-0.5 * np.sum(solved ** 2, axis=0)
                                       - np.sum(np.log(np.diag(chol)))
                                       - 0.5 * self.p * np.log(2.0 * np.pi))
            for j, table in enumerate(pi):
                log_prob[:, index] += np.log(table[index, self.codes[:, j]])
        return log_prob

    def _update_location_scale(self, z, mu, sigma, rng) -> None:
        hp = self.hp
        for index in range(self.L):
            members = self.y[z == index]
            n_l = members.shape[0]
            sigma_inv = linalg.inv(sigma[index])
            precision = self.L0_inv + n_l * sigma_inv
            cov = linalg.inv(precision)
            cov = 0.5 * (cov + cov.T)
            mean = cov @ (self.L0_inv_m0 + sigma_inv @ members.sum(axis=0))
            mu[index] = mean + linalg.cholesky(cov, lower=True) @ rng.standard_normal(self.p)

            diff = members - mu[index]
            scale = hp.S0 + diff.T @ diff
            draw = stats.invwishart.rvs(df=hp.nu0 + n_l, scale=scale, random_state=rng)
            draw = np.asarray(draw, dtype=float).reshape(self.p, self.p)
            draw = 0.5 * (draw + draw.T)
            if not is_positive_definite(draw):
                draw, _ = ridge_repair(draw, f'covariance draw of component {index + 1}')
                self.ridge_repairs += 1
            sigma[index] = draw

    def _update_categorical(self, z, pi, rng) -> None:
        for j, eta in enumerate(self.hp.eta):
            counts = np.zeros((self.L, eta.size))
            np.add.at(counts, (z, self.codes[:, j]), 1.0)
            for index in range(self.L):
                draw = np.maximum(rng.dirichlet(eta + counts[index]), PROBABILITY_FLOOR)
                pi[j][index] = draw / draw.sum()

    # -- driver ---------------------------------------------------------------

    def run(self, rng: RandomLike = None) -> PosteriorDraws:
        """Burn in, then retain every thin-th of n_iter sweeps"""
        seed = seed_of(rng)
        generator = np.random.default_rng(rng)
        cfg, hp, L, p = self.cfg, self.hp, self.L, self.p
        self.ridge_repairs = 0

        z = self._initial_allocations(generator)
        mu = np.tile(hp.m0, (L, 1))
        sigma = np.tile(hp.S0 / (hp.nu0 + p + 1), (L, 1, 1)) if p else np.zeros((L, 0, 0))
        pi = [np.tile(eta / eta.sum(), (L, 1)) for eta in hp.eta]
        alpha = cfg.alpha_init
        if p:
            self._update_location_scale(z, mu, sigma, generator)
        self._update_categorical(z, pi, generator)
        sticks, weights = update_sticks(z, L, alpha, generator)

        S = cfg.n_retained
        out_z = np.zeros((S, self.n), dtype=np.int64)
        out_w = np.zeros((S, L))
        out_v = np.zeros((S, L))
        out_alpha = np.zeros(S)
        out_mu = np.zeros((S, L, p))
        out_sigma = np.zeros((S, L, p, p))
        out_pi = [np.zeros((S, L, eta.size)) for eta in hp.eta]

        logger.info(f"DPM sampler: n={self.n}, p={p}, categorical={self.signature.n_categorical}, "
                    f"L={L}, {cfg.n_burn} burn-in + {cfg.n_iter} sweeps")
        started = time.perf_counter()
        kept = 0
        n_sweeps = cfg.n_burn + cfg.n_iter
        for sweep in range(n_sweeps):
            z = sample_allocations(self._log_kernels(mu, sigma, pi, weights), generator)
            sticks, weights = update_sticks(z, L, alpha, generator)
            if p:
                self._update_location_scale(z, mu, sigma, generator)
            self._update_categorical(z, pi, generator)
            alpha = update_alpha(sticks, cfg.a_alpha, cfg.b_alpha, generator)

            retained = sweep - cfg.n_burn
            if retained >= 0 and retained % cfg.thin == 0:
                out_z[kept] = z
                out_w[kept] = weights
                out_v[kept] = sticks
                out_alpha[kept] = alpha
                out_mu[kept] = mu
                out_sigma[kept] = sigma
                for j, table in enumerate(pi):
                    out_pi[j][kept] = table
                kept += 1
        elapsed = time.perf_counter() - started

        report = FitReport(
            kind='dpm',
            n_sweeps=n_sweeps,
            n_retained=kept,
            seconds=elapsed,
            mean_sweep_seconds=elapsed / max(n_sweeps, 1),
            ridge_repairs=self.ridge_repairs + hp.ridge_repairs,
            eta_floors=hp.eta_floors,
            seed=seed if seed is not None else cfg.seed,
        )
        if self.ridge_repairs:
            report.warnings.append(f"{self.ridge_repairs} covariance draw(s) were ridge-repaired")
        logger.info(f"DPM sampler finished in {elapsed:.1f}s; "
                    f"mean occupied clusters {np.mean([np.unique(r).size for r in out_z]) if self.n else 0:.2f}")

        params = {'mu': out_mu, 'sigma': out_sigma}
        params.update({f'pi_{j}': table for j, table in enumerate(out_pi)})
        return PosteriorDraws(
            kind='dpm',
            allocations=out_z,
            weights=out_w,
            sticks=out_v,
            alpha=out_alpha,
            params=params,
            signature=self.signature,
            report=report,
            meta={'config': cfg.model_dump(), 'hyperparams': hp.to_dict()},
        )


def fit_dpm(data: MixedDataset, hp: DpmHyperparams, cfg: DpmConfig,
            rng: Optional[RandomLike] = None) -> PosteriorDraws:
    """Run one DPM chain; rng defaults to cfg.seed"""
    return DpmGibbsSampler(data, hp, cfg).run(cfg.seed if rng is None else rng)
