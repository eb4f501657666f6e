from .covariate_densities import cluster_covariate_densities, fit_chains
from .dpm_sampler import DpmGibbsSampler, fit_dpm
from .lddp_sampler import LddpGibbsSampler, fit_lddp
from .predictive import conditional_interval_samples, posterior_predictive, predictive_statistics

__all__ = [
    'DpmGibbsSampler',
    'LddpGibbsSampler',
    'cluster_covariate_densities',
    'conditional_interval_samples',
    'fit_chains',
    'fit_dpm',
    'fit_lddp',
    'posterior_predictive',
    'predictive_statistics',
]
