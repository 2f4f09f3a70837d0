from .fanova import Decomposition, fanova_exact, fanova_grid, fanova_values, importance_report
from .neighborhood import local_neighborhood
from .stats import (Ecdf, cross_dataset_rank_corr, ecdf, noise_all, noise_std,
                    rank_corr_budgets, spearman)

__all__ = [
    "Decomposition", "Ecdf", "cross_dataset_rank_corr", "ecdf", "fanova_exact", "fanova_grid",
    "fanova_values", "importance_report", "local_neighborhood", "noise_all", "noise_std",
    "rank_corr_budgets", "spearman",
]
