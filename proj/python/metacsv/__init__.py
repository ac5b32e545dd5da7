"""Meta-analysis over CSV study tables.

Thin Python face of the C++ core: CSV ingestion with header inference,
per-study effect sizes (SMD, log odds ratio, log sd ratio), fixed and
DerSimonian-Laird random-effects pooling, and deterministic SVG plots.
"""

from ._core import (
    CountTable,
    EffectEstimate,
    GroupSummary,
    Heterogeneity,
    MassPoint,
    MetaAnalysisResult,
    MetaCsvError,
    PooledResult,
    StudyRecord,
    StudyTable,
    __version__,
    analyze_csv,
    chi_square_sf,
    forest_svg,
    funnel_svg,
    guess_separator,
    heterogeneity,
    labbe_mass_svg,
    log_odds_ratio,
    log_variance_ratio,
    meta_analyze,
    normal_cdf,
    parse_table,
    pool_fixed,
    pool_random_dl,
    smd,
    to_csv,
    to_json,
    to_r_script,
    write_csv,
)

__all__ = [
    "CountTable",
    "EffectEstimate",
    "GroupSummary",
    "Heterogeneity",
    "MassPoint",
    "MetaAnalysisResult",
    "MetaCsvError",
    "PooledResult",
    "StudyRecord",
    "StudyTable",
    "__version__",
    "analyze_csv",
    "chi_square_sf",
    "forest_svg",
    "funnel_svg",
    "guess_separator",
    "heterogeneity",
    "labbe_mass_svg",
    "log_odds_ratio",
    "log_variance_ratio",
    "meta_analyze",
    "normal_cdf",
    "parse_table",
    "pool_fixed",
    "pool_random_dl",
    "smd",
    "to_csv",
    "to_json",
    "to_r_script",
    "write_csv",
]
