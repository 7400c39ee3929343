"""Desk-scale applications: private coordinate descent and private PCA."""

from inid_dp.applications.dpcd import (Dataset, DpCdConfig, DpCdResult,
                                       SmoothnessEstimation, dpcd_compare,
                                       dpcd_grid_search, dpcd_run,
                                       estimate_smoothness_private,
                                       load_dataset_csv, make_synthetic,
                                       reference_optimum)
from inid_dp.applications.dppca import (DpPcaConfig, DpPcaResult, dppca_run,
                                        pca_profile)

__all__ = [
    "Dataset", "DpCdConfig", "DpCdResult", "DpPcaConfig", "DpPcaResult",
    "SmoothnessEstimation", "dpcd_compare", "dpcd_grid_search", "dpcd_run",
    "dppca_run", "estimate_smoothness_private", "load_dataset_csv",
    "make_synthetic", "pca_profile", "reference_optimum",
]
