"""
Per-cluster covariate densities.

Each cluster of a hard partition gets its own DPM fit on the covariates of
its members; retained iteration s of every cluster's chain becomes row s of
an S x K matrix of Mixture densities, ready for estimate_unl_posterior.
"""

import logging
from typing import List, Optional, Union

from core.dataset import MixedDataset
from core.exceptions import ArgumentError, ShapeError, UndersizeClusterError
from core.utils import derive_seed, map_ordered
from density.distributions import DensityModel
from mixtures.config import DpmConfig
from mixtures.draws import PosteriorDraws
from mixtures.hyperparams import derive_dpm_hyperparams
from mixtures.services.dpm_sampler import fit_dpm
from partitions.similarity import Partition, representative_partition

logger = logging.getLogger(__name__)

MIN_CLUSTER_SIZE = 5


def cluster_kmeans_k(size: int, requested: int) -> int:
    """K-means clusters for a cluster of the given size: at most half its members, at least 2"""
    return max(2, min(requested, size // 2))


def cluster_covariate_densities(
    partition: Union[Partition, PosteriorDraws],
    covariates: MixedDataset,
    cfg: DpmConfig,
    seed: int,
    workers: Optional[int] = None,
) -> List[List[DensityModel]]:
    """
    Fit a covariate DPM inside every cluster.

    Args:
        partition: hard partition, or draws whose representative partition is used
        covariates: covariate rows aligned with the partition labels
        cfg: sampler settings for every per-cluster fit
        seed: master seed; cluster k uses derived seeds 2k and 2k + 1
        workers: concurrent cluster fits (defaults to UNDERLAP_WORKERS)

    Returns:
        S rows of K densities; entry [s][k] is cluster k+1 at iteration s
    """
    if isinstance(partition, PosteriorDraws):
        partition = representative_partition(partition)
    if partition.n != covariates.n_rows:
        raise ShapeError(f"partition has {partition.n} labels for {covariates.n_rows} covariate rows")

    sizes = partition.sizes()
    for cluster, size in enumerate(sizes, start=1):
        if size < MIN_CLUSTER_SIZE:
            raise UndersizeClusterError(cluster, int(size), MIN_CLUSTER_SIZE)

    def fit_cluster(cluster: int) -> PosteriorDraws:
        members = partition.members(cluster)
        subset = covariates.subset(members)
        kmeans_k = cluster_kmeans_k(members.size, cfg.kmeans_k)
        logger.info(f"Fitting covariate density of cluster {cluster} ({members.size} members)")
        hp = derive_dpm_hyperparams(subset, kmeans_k, rng=derive_seed(seed, 2 * cluster), tau_k=cfg.tau_k)
        return fit_dpm(subset, hp, cfg, rng=derive_seed(seed, 2 * cluster + 1))

    fits = map_ordered(fit_cluster, range(1, partition.k + 1), workers=workers)
    n_draws = min(fit.n_draws for fit in fits)
    return [[fit.mixture(s) for fit in fits] for s in range(n_draws)]


def fit_chains(fit, n_chains: int, seed: int, workers: Optional[int] = None) -> List[PosteriorDraws]:
    """
    Independent chains of one model.

    fit is called with a derived seed per chain, e.g.
    lambda rng: fit_dpm(data, hp, cfg, rng).
    """
    if n_chains < 1:
        raise ArgumentError("at least one chain is required")
    return map_ordered(lambda chain: fit(derive_seed(seed, chain)), range(n_chains), workers=workers)
